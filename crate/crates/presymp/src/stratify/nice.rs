//! Census of strata and the checks that make a closed 2-form nice.

use rand::Rng;

use super::numeric::PolySystem;
use super::sample::{attempt_rng, classify, local_dimension, stratum_sample, Region, NEWTON_TOL};
use super::{transversality_check, FormField, StratifyError, TransversalityReport};
use crate::skewcore::{nullity_admissible, snap, stratum_codim, Rational};

#[derive(Clone, Debug, PartialEq)]
pub struct CensusEntry {
    pub nullity: usize,
    pub count: usize,
    /// `N − m(m−1)/2`.
    pub expected_dim: usize,
    pub measured_dim: Option<usize>,
    pub admissible: bool,
}

/// Whether points of `Y_{m+2}` are limits of points of `Y_m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrontierCheck {
    pub nullity: usize,
    pub tested: usize,
    pub confirmed: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NicenessReport {
    pub ambient: usize,
    pub census: Vec<CensusEntry>,
    pub transversality: Vec<TransversalityReport>,
    pub frontier: Vec<FrontierCheck>,
    pub warnings: Vec<String>,
    pub nice: bool,
}

const SNAP_BITS: u32 = 20;
const TRANSVERSALITY_POINTS: usize = 20;

/// Samples every stratum in `region` (`samples` attempts-worth each) and
/// runs the dimension, transversality, admissibility and frontier checks.
pub fn niceness_report(field: &FormField, region: &Region, samples: usize, seed: u64) -> Result<NicenessReport, StratifyError> {
    let n = field.dim();
    let mut report = NicenessReport { ambient: n, census: vec![], transversality: vec![], frontier: vec![], warnings: vec![], nice: true };
    let mut found: Vec<(usize, Vec<Vec<f64>>)> = Vec::new();
    for m in (0..=n).filter(|m| (n - m) % 2 == 0) {
        let outcome = stratum_sample(field, m, region, samples, seed)?;
        if outcome.indeterminate > 0 {
            report.warnings.push(format!("{} indeterminate-rank points near Y{m}", outcome.indeterminate));
        }
        if outcome.samples.is_empty() {
            continue;
        }
        let points: Vec<Vec<f64>> = outcome.samples.iter().map(|s| s.point.clone()).collect();
        let mut dims = Vec::new();
        for (k, p) in points.iter().take(3).enumerate() {
            if let Some(d) = local_dimension(field, m, p, 0.01, 40, seed.wrapping_add(k as u64))? {
                dims.push(d);
            }
        }
        let measured_dim = majority(&dims);
        let codim = stratum_codim(n, m)?;
        let entry = CensusEntry {
            nullity: m,
            count: points.len(),
            expected_dim: n.saturating_sub(codim),
            measured_dim,
            admissible: nullity_admissible(n, m),
        };
        if !entry.admissible {
            report.warnings.push(format!("Y{m} is inadmissible: codimension {codim} exceeds {n}"));
            report.nice = false;
        }
        if entry.measured_dim != Some(entry.expected_dim) {
            report.warnings.push(format!("Y{m} measured dimension {:?}, expected {}", entry.measured_dim, entry.expected_dim));
            report.nice = false;
        }
        report.census.push(entry);
        let mut checked = 0;
        for p in &points {
            if checked == TRANSVERSALITY_POINTS {
                break;
            }
            let exact: Vec<Rational> = p.iter().map(|&v| snap(v, SNAP_BITS)).collect();
            if field.value_at(&exact).nullity() != m {
                continue;
            }
            let t = transversality_check(field, &exact)?;
            if !t.transversal {
                report.nice = false;
            }
            report.transversality.push(t);
            checked += 1;
        }
        if checked == 0 {
            report.warnings.push(format!("no dyadic snap point of Y{m} keeps its nullity"));
        }
        found.push((m, points));
    }
    for w in found.windows(2) {
        let ((m, _), (m2, deeper)) = (&w[0], &w[1]);
        if *m2 != m + 2 {
            continue;
        }
        let check = frontier(field, *m, deeper, seed);
        if check.confirmed < check.tested {
            report.nice = false;
            report.warnings.push(format!("{} of {} points of Y{m2} not reached from Y{m}", check.tested - check.confirmed, check.tested));
        }
        report.frontier.push(check);
    }
    Ok(report)
}

fn majority(v: &[usize]) -> Option<usize> {
    let mut best = None;
    let mut best_count = 0;
    for &d in v {
        let c = v.iter().filter(|&&e| e == d).count();
        if c > best_count {
            best = Some(d);
            best_count = c;
        }
    }
    best
}

fn frontier(field: &FormField, m: usize, deeper: &[Vec<f64>], seed: u64) -> FrontierCheck {
    let n = field.dim();
    let system = PolySystem::new(field.pfaffian_equations(m), n);
    let eps = 1e-3;
    let mut check = FrontierCheck { nullity: m + 2, tested: 0, confirmed: 0 };
    for (k, y) in deeper.iter().take(10).enumerate() {
        check.tested += 1;
        for t in 0..5 {
            let mut rng = attempt_rng(seed ^ 0xf00d, k, t);
            let start: Vec<f64> = y.iter().map(|v| v + eps * rng.gen_range(-1.0..=1.0)).collect();
            let Some(x) = system.project(&start, NEWTON_TOL, 60) else { continue };
            let dist = x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let hit = dist < 10.0 * eps
                && classify(field, &x).map(|s| !s.indeterminate && s.nullity == m).unwrap_or(false);
            if hit {
                check.confirmed += 1;
                break;
            }
        }
    }
    check
}
