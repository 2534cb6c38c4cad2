//! Gauge Cauchy problems `dΔ/dt = [ξ_t, Δ_t]` solved as power series in `t`.

use num_traits::Zero;

use crate::linf::{LinfError, VData};
use crate::skewcore::{int, Rational};
use crate::symfield::{schouten, FieldError, MultiVector, Poly};

/// `ξ_t = Σ_j t^j ξ_j`, each `ξ_j` a vector field (shifted degree 0).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaugeFamily {
    pub coefficients: Vec<MultiVector>,
    /// Highest power of `t` kept in every series.
    pub order: usize,
}

impl GaugeFamily {
    pub fn zero(order: usize) -> Self {
        GaugeFamily { coefficients: vec![], order }
    }

    pub fn constant(xi: MultiVector, order: usize) -> Self {
        GaugeFamily { coefficients: vec![xi], order }
    }

    fn coeff(&self, j: usize) -> Option<&MultiVector> {
        self.coefficients.get(j)
    }
}

/// A polyvector-valued polynomial in `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimeSeries(pub Vec<MultiVector>);

impl TimeSeries {
    pub fn at(&self, t: &Rational) -> MultiVector {
        let mut out = self.0[0].clone();
        let mut pow = Rational::from_integer(1.into());
        for c in &self.0[1..] {
            pow *= t;
            out = out.add(&c.scale(&pow));
        }
        out
    }

    /// Coefficients of `d/dt`.
    pub fn derivative(&self) -> TimeSeries {
        let chart = self.0[0].chart().clone();
        let mut d: Vec<MultiVector> = self.0.iter().enumerate().skip(1).map(|(k, c)| c.scale(&int(k as i64))).collect();
        if d.is_empty() {
            d.push(MultiVector::zero(chart));
        }
        TimeSeries(d)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaugeResult {
    pub delta: TimeSeries,
    /// `φ_t` on the generators `x_i` and `∂_i`, in that order.
    pub phi: Vec<(MultiVector, TimeSeries)>,
    /// `d/dt φ_t(e) = [φ_t(e), ξ_t]` holds through order `K − 1`.
    pub phi_equation_holds: bool,
    /// `sup` of the coefficients of `a_t` at `t = 0, ¼, …, 1`.
    pub a_profile: Vec<Rational>,
    pub ker_preserved: bool,
    /// Generator of `ker π` and the power of `t` where `[ξ_j, e] ∉ ker π`.
    pub ker_witness: Option<(MultiVector, usize)>,
}

/// Solves `(k+1) y_{k+1} = Σ_j bracket(ξ_j, y_{k−j})` up to the order cap.
fn series(
    family: &GaugeFamily,
    y0: MultiVector,
    bracket: impl Fn(&MultiVector, &MultiVector) -> Result<MultiVector, FieldError>,
) -> Result<TimeSeries, FieldError> {
    let mut ys = vec![y0];
    for k in 0..family.order {
        let mut acc = MultiVector::zero(ys[0].chart().clone());
        for j in 0..=k {
            if let Some(xi) = family.coeff(j) {
                acc = acc.try_add(&bracket(xi, &ys[k - j])?)?;
            }
        }
        ys.push(acc.scale(&(Rational::from_integer(1.into()) / int(k as i64 + 1))));
    }
    Ok(TimeSeries(ys))
}

fn sup(v: &MultiVector) -> Rational {
    v.terms().values().map(Poly::max_abs_coeff).max().unwrap_or_else(Rational::zero)
}

/// Generators of `ker π` up to bivectors: horizontal `∂_i`, `∂_i∧∂_j`,
/// and fiber coordinates times vertical directions.
fn kernel_generators(v: &VData) -> Vec<MultiVector> {
    let c = v.chart().clone();
    let (n, fib) = (v.base_dim(), v.fiber_indices());
    let one = Poly::constant(int(1));
    let mut out = Vec::new();
    for i in 0..n {
        out.push(MultiVector::basis(c.clone(), &[i], one.clone()));
        for j in (i + 1)..c.dim() {
            out.push(MultiVector::basis(c.clone(), &[i, j], one.clone()));
        }
    }
    for &a in &fib {
        out.push(MultiVector::scalar(c.clone(), Poly::var(a)));
        for &b in &fib {
            out.push(MultiVector::basis(c.clone(), &[b], Poly::var(a)));
        }
    }
    out
}

pub fn gauge_flow(v: &VData, family: &GaugeFamily, delta0: &MultiVector) -> Result<GaugeResult, LinfError> {
    if let Some(bad) = family.coefficients.iter().position(|x| !x.is_homogeneous(1)) {
        return Err(LinfError::DegreeMismatch { expected: 1, got: family.coefficients[bad].degree() });
    }
    let delta = series(family, delta0.clone(), |xi, y| schouten(xi, y))?;
    let c = v.chart().clone();
    let mut generators: Vec<MultiVector> = (0..c.dim()).map(|i| MultiVector::scalar(c.clone(), Poly::var(i))).collect();
    generators.extend((0..c.dim()).map(|i| MultiVector::basis(c.clone(), &[i], Poly::constant(int(1)))));
    let mut phi = Vec::new();
    let mut phi_ok = true;
    for e in generators {
        let s = series(family, e.clone(), |xi, y| schouten(y, xi))?;
        // compare d/dt φ with the Cauchy product of [φ, ξ] below the cap
        let d = s.derivative();
        for k in 0..family.order {
            let mut acc = MultiVector::zero(c.clone());
            for j in 0..=k {
                if let Some(xi) = family.coeff(j) {
                    acc = acc.try_add(&schouten(&s.0[k - j], xi)?)?;
                }
            }
            if !d.0.get(k).map(|dk| dk.agrees_with(&acc)).unwrap_or(acc.is_zero()) {
                phi_ok = false;
            }
        }
        phi.push((e, s));
    }
    let a = series(family, MultiVector::zero(c.clone()), |xi, y| Ok(v.project(&schouten(y, xi)?).polyvector().clone()))?;
    let a_profile = (0..=4).map(|k| sup(&a.at(&(int(k) / int(4))))).collect();
    let mut ker_witness = None;
    'outer: for e in kernel_generators(v) {
        for (j, xi) in family.coefficients.iter().enumerate() {
            if !v.project(&schouten(xi, &e)?).is_zero() {
                ker_witness = Some((e, j));
                break 'outer;
            }
        }
    }
    Ok(GaugeResult {
        delta,
        phi,
        phi_equation_holds: phi_ok,
        a_profile,
        ker_preserved: ker_witness.is_none(),
        ker_witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linf::tests::flat;

    fn vector(v: &VData, comps: Vec<Poly>) -> MultiVector {
        MultiVector::vector(v.chart().clone(), comps)
    }

    #[test]
    fn zero_gauge_is_identity() {
        let v = flat(3, &[(0, 1)]);
        let r = gauge_flow(&v, &GaugeFamily::zero(4), v.poisson()).unwrap();
        assert_eq!(r.delta.at(&int(1)), *v.poisson());
        assert!(r.phi.iter().all(|(e, s)| s.at(&int(1)) == *e));
        assert!(r.ker_preserved && r.phi_equation_holds);
    }

    #[test]
    fn constant_gauge_matches_exponential_series() {
        let v = flat(3, &[(0, 1)]);
        // ξ = x₂ ∂₁ + p ∂_p
        let xi = vector(&v, vec![Poly::var(1), Poly::zero(), Poly::zero(), Poly::var(3)]);
        let k = 5;
        let r = gauge_flow(&v, &GaugeFamily::constant(xi.clone(), k), v.poisson()).unwrap();
        // oracle: Δ_k = ad_ξ^k Δ₀ / k!
        let mut term = v.poisson().clone();
        let mut fact = int(1);
        for j in 0..=k {
            if j > 0 {
                term = schouten(&xi, &term).unwrap();
                fact *= int(j as i64);
            }
            assert_eq!(r.delta.0[j], term.scale(&(int(1) / &fact)), "order {j}");
        }
        assert!(r.phi_equation_holds);
        assert!(r.a_profile.iter().all(|a| a.is_zero()));
        assert!(r.ker_preserved);
    }

    #[test]
    fn kernel_preservation_can_fail() {
        let v = flat(3, &[(0, 1)]);
        // x₁ ∂_p moves p off the zero section ideal
        let xi = vector(&v, vec![Poly::zero(), Poly::zero(), Poly::zero(), Poly::var(0)]);
        let r = gauge_flow(&v, &GaugeFamily::constant(xi, 2), v.poisson()).unwrap();
        assert!(!r.ker_preserved);
        assert!(r.ker_witness.is_some());
    }

    #[test]
    fn polynomial_gauge_family() {
        let v = flat(3, &[(0, 1)]);
        let xi0 = vector(&v, vec![Poly::zero(), Poly::var(0), Poly::zero(), Poly::zero()]);
        let xi1 = vector(&v, vec![Poly::zero(), Poly::zero(), Poly::var(2), Poly::zero()]);
        let fam = GaugeFamily { coefficients: vec![xi0.clone(), xi1.clone()], order: 4 };
        let r = gauge_flow(&v, &fam, v.poisson()).unwrap();
        assert_eq!(r.delta.0[1], schouten(&xi0, v.poisson()).unwrap());
        let second = schouten(&xi0, &r.delta.0[1]).unwrap().add(&schouten(&xi1, v.poisson()).unwrap());
        assert_eq!(r.delta.0[2], second.scale(&(int(1) / int(2))));
        assert!(r.phi_equation_holds);
    }

    #[test]
    fn bivector_gauge_is_rejected() {
        let v = flat(3, &[(0, 1)]);
        assert!(matches!(gauge_flow(&v, &GaugeFamily::constant(v.poisson().clone(), 2), v.poisson()), Err(LinfError::DegreeMismatch { .. })));
    }
}
