//! Radial retraction flows of model tubes and fiber rescalings.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::foliation::TubeSystem;
use crate::skewcore::{int, Rational};
use crate::stratify::FormField;
use crate::symfield::{Chart, MultiVector, Poly, PolyMap};

/// `R^t` and its generator.
///
/// The normalized gradient flow `dv/dτ = −v` of `ρ` on the fibers never
/// reaches the stratum; with `τ = −ln(1 − t²)` it becomes
/// `R^t(b, v) = (b, (1 − t²) v)`, so `R⁰ = id` and `R¹ = π`. Its generator
/// `Y_t(b, v) = −2t/(1 − t²) · v` vanishes at `t = 0` and blows up at `t = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RadialFlow {
    pub t: Rational,
    pub map: PolyMap,
    /// `None` at `t = 1`, where the flow arrives at the stratum.
    pub generator: Option<MultiVector>,
}

impl RadialFlow {
    /// Gradient-flow time `τ(t)`; infinite at `t = 1`.
    pub fn tau(&self) -> f64 {
        let t = crate::skewcore::to_f64(&self.t);
        -(1.0 - t * t).ln()
    }
}

/// Fiber factor `1 − t²`.
pub fn radial_factor(t: f64) -> f64 {
    1.0 - t * t
}

pub fn radial_flow(tube: &TubeSystem, t: &Rational) -> RadialFlow {
    let n = tube.ambient();
    let c = Chart::standard(n);
    let a = Rational::one() - t * t;
    let fiber = tube.fiber();
    let comps: Vec<Poly> = (0..n)
        .map(|i| if fiber.contains(&i) { Poly::var(i).scale(&a) } else { Poly::var(i) })
        .collect();
    let map = PolyMap::new(c.clone(), c.clone(), comps).expect("square map");
    let generator = (!a.is_zero()).then(|| {
        let k = -(int(2) * t) / &a;
        let comps = (0..n).map(|i| if fiber.contains(&i) { Poly::var(i).scale(&k) } else { Poly::zero() }).collect();
        MultiVector::vector(c, comps)
    });
    RadialFlow { t: t.clone(), map, generator }
}

/// Per-component behavior of `(S^t)*ω` under the fiber scaling
/// `S^t(b, v) = (b, e^t v)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentScaling {
    pub index: Vec<usize>,
    /// Exponents `c` of the monomials; one value means `C e^{ct}` with
    /// `C` the coefficient.
    pub exponents: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RescalingReport {
    pub components: Vec<ComponentScaling>,
    /// Common exponent when every component scales by the same `e^{ct}`.
    pub exponent: Option<u32>,
    /// `C = 1`: the flow is the identity at `t = 0`.
    pub constant: Rational,
    /// Exponent taken for granted by the unit Lie-derivative identity.
    pub claimed: u32,
    pub differs_from_claim: bool,
    /// `ln(‖(S¹)*ω‖ / ‖ω‖)` at a sample point, as a numeric cross-check.
    pub fitted: Option<f64>,
    /// Some component mixes several exponents.
    pub non_exponential: bool,
}

/// Exact exponents of `(S^t)*ω`: a term `x^e dx_I` scales by
/// `e^{t(|e|_fiber + |I ∩ fiber|)}`.
pub fn rescaling_check(tube: &TubeSystem, omega: &FormField) -> RescalingReport {
    let fiber = tube.fiber();
    let mut components = Vec::new();
    for (idx, c) in omega.form().terms() {
        let k = idx.iter().filter(|i| fiber.contains(i)).count() as u32;
        let mut exps: Vec<u32> = c
            .terms()
            .map(|(e, _)| k + fiber.iter().map(|&f| e.get(f).copied().unwrap_or(0)).sum::<u32>())
            .collect();
        exps.sort_unstable();
        exps.dedup();
        components.push(ComponentScaling { index: idx.clone(), exponents: exps });
    }
    let non_exponential = components.iter().any(|c| c.exponents.len() > 1);
    let all: BTreeMap<u32, ()> = components.iter().flat_map(|c| c.exponents.iter().map(|&e| (e, ()))).collect();
    let exponent = if all.len() == 1 { all.keys().next().copied() } else { None };
    let fitted = fit_exponent(tube, omega);
    RescalingReport {
        exponent,
        constant: Rational::one(),
        claimed: 1,
        differs_from_claim: exponent != Some(1),
        fitted,
        non_exponential,
        components,
    }
}

fn fit_exponent(tube: &TubeSystem, omega: &FormField) -> Option<f64> {
    let n = tube.ambient();
    let x: Vec<f64> = (0..n).map(|i| 0.3 + 0.1 * i as f64).collect();
    let w0 = omega.form().value_at_f64(&x);
    let e = std::f64::consts::E;
    let sx: Vec<f64> = (0..n).map(|i| if tube.fiber().contains(&i) { e * x[i] } else { x[i] }).collect();
    let mut d = nalgebra::DMatrix::<f64>::identity(n, n);
    for &f in tube.fiber() {
        d[(f, f)] = e;
    }
    let w1 = d.transpose() * omega.form().value_at_f64(&sx) * d;
    let (a, b) = (w0.norm(), w1.norm());
    (a > 0.0).then(|| (b / a).ln())
}
