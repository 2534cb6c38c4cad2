//! Numerical Whitney A/B checks from sequences approaching a base point.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::numeric::{dominant_subspace, null_basis, projector, sorted_svd, PolySystem};
use super::sample::{attempt_rng, classify, NEWTON_TOL};
use super::FormField;
use crate::skewcore::stratum_codim;
use crate::symfield::Poly;

/// A stratum described by defining equations and its dimension. Optionally
/// tied to a form so that membership is confirmed by the nullity.
#[derive(Clone, Debug)]
pub struct StratumChart {
    pub name: String,
    pub system: PolySystem,
    pub dim: usize,
    pub ambient: usize,
    membership: Option<(FormField, usize)>,
}

impl StratumChart {
    pub fn new(name: &str, equations: Vec<Poly>, ambient: usize, dim: usize) -> Self {
        StratumChart { name: name.into(), system: PolySystem::new(equations, ambient), dim, ambient, membership: None }
    }

    pub fn open(name: &str, ambient: usize) -> Self {
        Self::new(name, vec![], ambient, ambient)
    }

    /// `Y_m(ω)` with its expected dimension `N − m(m−1)/2`.
    pub fn from_form(field: &FormField, m: usize) -> Self {
        let n = field.dim();
        let dim = n - stratum_codim(n, m).unwrap_or(n).min(n);
        StratumChart {
            name: format!("Y{m}"),
            system: PolySystem::new(field.pfaffian_equations(m), n),
            dim,
            ambient: n,
            membership: Some((field.clone(), m)),
        }
    }

    pub fn tangent(&self, x: &[f64]) -> Vec<DVector<f64>> {
        if self.system.equations.is_empty() {
            return (0..self.ambient).map(|i| DVector::from_fn(self.ambient, |k, _| f64::from(u8::from(k == i)))).collect();
        }
        null_basis(&self.system.jacobian(x), self.dim)
    }

    fn contains(&self, x: &[f64]) -> bool {
        if self.system.scaled_residual(x) > 1e-10 {
            return false;
        }
        match &self.membership {
            Some((field, m)) => classify(field, x).map(|s| !s.indeterminate && s.nullity == *m).unwrap_or(false),
            None => true,
        }
    }
}

type Curve = Box<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

/// Explicit curves `s ↦ x(s)` in the higher and `s ↦ y(s)` in the lower
/// stratum, both tending to the base point as `s → 0`.
pub struct CurvePair {
    pub label: String,
    pub higher: Curve,
    pub lower: Curve,
}

impl fmt::Debug for CurvePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CurvePair").field("label", &self.label).finish()
    }
}

#[derive(Debug)]
pub enum Approach {
    /// Random directions at scales `2^{-i}`, projected onto each stratum.
    Projected { sequences: usize, seed: u64 },
    Curves(Vec<CurvePair>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WhitneyConfig {
    pub tol: f64,
    pub first: u32,
    pub last: u32,
}

impl Default for WhitneyConfig {
    fn default() -> Self {
        WhitneyConfig { tol: 1e-6, first: 4, last: 16 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SequenceRecord {
    pub label: String,
    pub scales: Vec<f64>,
    /// Extrapolated limit of the unit secant directions.
    pub secant: Vec<f64>,
    /// Orthonormal basis of the extrapolated limit tangent plane.
    pub tangent: Vec<Vec<f64>>,
    /// Per-scale gaps, starting from the second scale.
    pub gap_a: Vec<f64>,
    pub gap_b: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WhitneyReport {
    pub lower: Option<String>,
    pub higher: String,
    pub base: Vec<f64>,
    pub sequences: Vec<SequenceRecord>,
    pub condition_a: Verdict,
    pub condition_b: Verdict,
    pub tol: f64,
}

fn verdict(gaps: impl Iterator<Item = Vec<f64>>, tol: f64) -> Verdict {
    let mut all_pass = true;
    for g in gaps {
        let tail = &g[g.len().saturating_sub(3)..];
        if tail.is_empty() {
            all_pass = false;
            continue;
        }
        if tail.iter().all(|&v| v > 10.0 * tol) {
            return Verdict::Fail;
        }
        if !tail.iter().all(|&v| v < tol) {
            all_pass = false;
        }
    }
    if all_pass {
        Verdict::Pass
    } else {
        Verdict::Inconclusive
    }
}

/// Spectral norm of the part of `basis` outside the plane with projector `p`.
fn excess(p: &DMatrix<f64>, basis: &[DVector<f64>]) -> f64 {
    if basis.is_empty() {
        return 0.0;
    }
    let n = p.nrows();
    let b = DMatrix::from_columns(basis);
    let r = (DMatrix::identity(n, n) - p) * b;
    sorted_svd(&r).0.first().copied().unwrap_or(0.0)
}

fn trace(
    label: String,
    points: &[(f64, Vec<f64>, Vec<f64>)],
    higher: &StratumChart,
    lower_tangent: &[DVector<f64>],
) -> SequenceRecord {
    let n = higher.ambient;
    let mut prev: Option<(DMatrix<f64>, DMatrix<f64>)> = None;
    let mut rec = SequenceRecord { label, scales: vec![], secant: vec![], tangent: vec![], gap_a: vec![], gap_b: vec![] };
    for (s, x, y) in points {
        rec.scales.push(*s);
        let tp = projector(&higher.tangent(x), n);
        let d = DVector::from_iterator(n, x.iter().zip(y).map(|(a, b)| a - b));
        let d = &d / d.norm();
        let lp = &d * d.transpose();
        if let Some((tp0, lp0)) = &prev {
            let tau = dominant_subspace(&(&tp * 2.0 - tp0), higher.dim);
            let ell = dominant_subspace(&(&lp * 2.0 - lp0), 1);
            let ptau = projector(&tau, n);
            rec.gap_a.push(excess(&ptau, lower_tangent));
            rec.gap_b.push(excess(&ptau, &ell));
            rec.secant = ell[0].iter().copied().collect();
            rec.tangent = tau.iter().map(|v| v.iter().copied().collect()).collect();
        }
        prev = Some((tp, lp));
    }
    rec
}

/// Checks Whitney's conditions A and B for `higher` over `lower` at `base`.
/// With no lower stratum the check passes vacuously.
pub fn whitney_check(
    lower: Option<&StratumChart>,
    higher: &StratumChart,
    base: &[f64],
    approach: &Approach,
    config: &WhitneyConfig,
) -> WhitneyReport {
    let mut report = WhitneyReport {
        lower: lower.map(|l| l.name.clone()),
        higher: higher.name.clone(),
        base: base.to_vec(),
        sequences: vec![],
        condition_a: Verdict::Pass,
        condition_b: Verdict::Pass,
        tol: config.tol,
    };
    let Some(lower) = lower else { return report };
    let lower_tangent = lower.tangent(base);
    let scales: Vec<f64> = (config.first..=config.last).map(|i| 0.5f64.powi(i as i32)).collect();
    match approach {
        Approach::Curves(curves) => {
            for c in curves {
                let pts: Vec<_> = scales.iter().map(|&s| (s, (c.higher)(s), (c.lower)(s))).collect();
                report.sequences.push(trace(c.label.clone(), &pts, higher, &lower_tangent));
            }
        }
        Approach::Projected { sequences, seed } => {
            let n = base.len();
            for k in 0..*sequences {
                let mut rng = attempt_rng(*seed, 0, k);
                let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                let mut pts = Vec::new();
                for &s in &scales {
                    let sx: Vec<f64> = base.iter().zip(&u).map(|(b, d)| b + s * d).collect();
                    let sy: Vec<f64> = base.iter().zip(&v).map(|(b, d)| b + s * s * d).collect();
                    let (Some(x), Some(y)) =
                        (higher.system.project(&sx, NEWTON_TOL, 60), lower.system.project(&sy, NEWTON_TOL, 60))
                    else {
                        break;
                    };
                    if !higher.contains(&x) || lower.contains(&x) || !lower.contains(&y) {
                        break;
                    }
                    pts.push((s, x, y));
                }
                if pts.len() == scales.len() {
                    report.sequences.push(trace(format!("projected-{k}"), &pts, higher, &lower_tangent));
                }
            }
        }
    }
    report.condition_a = verdict(report.sequences.iter().map(|r| r.gap_a.clone()), config.tol);
    report.condition_b = verdict(report.sequences.iter().map(|r| r.gap_b.clone()), config.tol);
    if report.sequences.is_empty() {
        report.condition_a = Verdict::Inconclusive;
        report.condition_b = Verdict::Inconclusive;
    }
    report
}

/// The cusp family `y² = x³ + t²x²` in coordinates `(x, y, t)`: its
/// `t`-axis and smooth part, approached along `(−s², 0, s)` and `(0, 0, s)`.
pub fn cusp_oracle() -> (StratumChart, StratumChart, Approach, Vec<f64>) {
    let (x, y, t) = (Poly::var(0), Poly::var(1), Poly::var(2));
    let surface = &(&y * &y) - &(&(&(&x * &x) * &x) + &(&(&(&t * &t) * &x) * &x));
    let lower = StratumChart::new("t-axis", vec![x.clone(), y.clone()], 3, 1);
    let higher = StratumChart::new("smooth part", vec![surface], 3, 2);
    let pair = CurvePair {
        label: "cusp".into(),
        higher: Box::new(|s| vec![-s * s, 0.0, s]),
        lower: Box::new(|s| vec![0.0, 0.0, s]),
    };
    (lower, higher, Approach::Curves(vec![pair]), vec![0.0; 3])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stratify::tests::model;

    #[test]
    fn cusp_fails_condition_b_only() {
        let (lower, higher, approach, base) = cusp_oracle();
        let r = whitney_check(Some(&lower), &higher, &base, &approach, &WhitneyConfig::default());
        assert_eq!(r.condition_a, Verdict::Pass);
        assert_eq!(r.condition_b, Verdict::Fail);
        assert!((r.sequences[0].gap_b.last().unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn model_pair_passes() {
        let w = model();
        let lower = StratumChart::from_form(&w, 2);
        let higher = StratumChart::from_form(&w, 0);
        let approach = Approach::Projected { sequences: 4, seed: 5 };
        let r = whitney_check(Some(&lower), &higher, &[0.0, 0.3, -0.2, 0.5], &approach, &WhitneyConfig::default());
        assert_eq!(r.sequences.len(), 4);
        assert_eq!((r.condition_a, r.condition_b), (Verdict::Pass, Verdict::Pass));
    }

    #[test]
    fn single_stratum_is_vacuous() {
        let higher = StratumChart::open("R4", 4);
        let r = whitney_check(None, &higher, &[0.0; 4], &Approach::Projected { sequences: 1, seed: 0 }, &WhitneyConfig::default());
        assert_eq!((r.condition_a, r.condition_b), (Verdict::Pass, Verdict::Pass));
    }
}
