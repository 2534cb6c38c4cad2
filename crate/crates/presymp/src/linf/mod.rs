//! Derived-bracket L∞[1] structures on foliation forms.
//!
//! Elements of `Λ•E` (vertical, fiber-constant polyvectors on the Gotay
//! model) are identified with foliation forms by `θ_{p_a} ↦ −dy^a`, where
//! `dy^a` is dual to the `a`-th kernel frame vector. With this sign
//! `l₁ = π[P, ·]` is the foliation differential.

mod mc;
mod verify;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::Zero;
use thiserror::Error;

use crate::foliation::{FoliationError, GotayModel};
use crate::skewcore::{int, Rational};
use crate::symfield::{
    invert_two_form_jet, schouten, Chart, FieldError, JetMeta, MultiVector, Poly,
};

pub use mc::{
    curved_augmentation, mc_series, tangent_complex, Augmentation, ChiConvention, McResult, TangentComplex,
};
pub use verify::{linf_verify, random_element, IdentityCheck, LinfReport, VerifyConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinfError {
    #[error("[P,P] does not vanish to the tracked order")]
    NotPoisson,
    #[error("sign self-test failed: l1 differs from d_F on x{coord}")]
    SignConvention { coord: usize },
    #[error("expected foliation form degree {expected}, got {got}")]
    DegreeMismatch { expected: usize, got: usize },
    #[error("point is not a zero of the curvature: {0:?}")]
    NotAZero(Vec<Rational>),
    #[error("fiber degree {found} exceeds the truncation {allowed}")]
    FiberDegree { found: u32, allowed: u32 },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Foliation(#[from] FoliationError),
}

/// Truncation orders: jets in the base variables and polynomial degree in
/// the fiber variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Orders {
    pub base: u32,
    pub fiber: u32,
}

impl Default for Orders {
    fn default() -> Self {
        Orders { base: 4, fiber: 3 }
    }
}

impl Orders {
    /// Enough base order to check identities of arity `k` and compare them
    /// with the direct Jacobiator.
    pub fn for_arity(k: usize) -> Self {
        Orders { base: (k as u32 + 2).max(4), fiber: 3 }
    }
}

/// A foliation form stored as a vertical, fiber-constant polyvector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianElement(MultiVector);

impl AbelianElement {
    pub fn polyvector(&self) -> &MultiVector {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.terms().values().all(|c| match self.0.jet() {
            Some(m) => c.truncate_in_first(m.jet_vars, m.accuracy).is_zero(),
            None => c.is_zero(),
        })
    }

    /// Degree as a foliation form (the highest present).
    pub fn form_degree(&self) -> usize {
        self.0.degree()
    }

    pub fn is_homogeneous(&self, r: usize) -> bool {
        self.0.is_homogeneous(r)
    }

    /// Degree in the shifted grading, `form degree − 1`.
    pub fn shifted_degree(&self) -> i64 {
        self.form_degree() as i64 - 1
    }

    pub fn accuracy(&self) -> Option<u32> {
        self.0.jet().map(|m| m.accuracy)
    }

    /// Coefficients on `dy^I` (fiber-local indices), in global coordinates.
    pub fn foliation_terms(&self, base_dim: usize) -> BTreeMap<Vec<usize>, Poly> {
        self.0
            .to_global()
            .terms()
            .iter()
            .map(|(i, c)| {
                let c = if i.len() % 2 == 1 { -c.clone() } else { c.clone() };
                (i.iter().map(|k| k - base_dim).collect(), c)
            })
            .collect()
    }

    pub fn agrees_with(&self, other: &AbelianElement) -> bool {
        self.0.agrees_with(&other.0)
    }

    pub fn add(&self, other: &AbelianElement) -> Result<AbelianElement, LinfError> {
        Ok(AbelianElement(self.0.try_add(&other.0)?))
    }

    pub fn scale(&self, c: &Rational) -> AbelianElement {
        AbelianElement(self.0.scale(c))
    }

    /// Coefficients at a base point, keyed by fiber-local index lists.
    pub fn value_at(&self, x: &[Rational], base_dim: usize) -> BTreeMap<Vec<usize>, Rational> {
        let mut pt = x.to_vec();
        pt.resize(self.0.dim(), Rational::zero());
        self.0
            .eval_at(&pt)
            .into_iter()
            .map(|(i, v)| {
                let v = if i.len() % 2 == 1 { -v } else { v };
                (i.iter().map(|k| k - base_dim).collect(), v)
            })
            .collect()
    }
}

/// Gotay model, Poisson bivector and projection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VData {
    chart: Arc<Chart>,
    base_dim: usize,
    fiber_dim: usize,
    poisson: MultiVector,
    orders: Orders,
    meta: JetMeta,
    /// Kernel frame vectors at the base point, one per fiber coordinate.
    frame: Vec<Vec<Rational>>,
    base_point: Vec<Rational>,
}

impl fmt::Display for AbelianElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::symfield::format_multivector(&self.0.to_global()))
    }
}

fn fiber_degree(v: &MultiVector, fib: &[usize]) -> u32 {
    v.degree_in(fib)
}

/// P = inverse of the Gotay form; exact when the form has constant
/// coefficients, a jet at the zero section otherwise.
pub fn build_vdata(g: &GotayModel, orders: Orders) -> Result<VData, LinfError> {
    let chart = g.chart.clone();
    let n = g.base_dim();
    let m = g.fiber_dim();
    let mut base_point = g.polarization.base.clone();
    base_point.extend(std::iter::repeat(Rational::zero()).take(m));
    let meta = JetMeta { base: base_point.clone(), order: orders.base, accuracy: orders.base, jet_vars: n };
    let all: Vec<usize> = (0..n + m).collect();
    let constant = g.form.form().terms().values().all(Poly::is_constant);
    let poisson = if constant {
        invert_two_form_jet(g.form.form(), &all, &JetMeta { order: 0, accuracy: 0, ..meta.clone() })?.into_exact()
    } else {
        invert_two_form_jet(g.form.form(), &all, &meta)?
    };
    let vd = VData {
        chart,
        base_dim: n,
        fiber_dim: m,
        poisson,
        orders,
        meta,
        frame: g.polarization.kernel.frame_at(&g.polarization.base),
        base_point,
    };
    let found = fiber_degree(&vd.poisson, &vd.fiber_indices());
    if found > orders.fiber {
        return Err(LinfError::FiberDegree { found, allowed: orders.fiber });
    }
    let pp = schouten(&vd.poisson, &vd.poisson)?;
    if !pp.agrees_with(&MultiVector::zero(vd.chart.clone())) {
        return Err(LinfError::NotPoisson);
    }
    vd.sign_self_test()?;
    Ok(vd)
}

impl VData {
    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    pub fn fiber_indices(&self) -> Vec<usize> {
        (self.base_dim..self.base_dim + self.fiber_dim).collect()
    }

    pub fn poisson(&self) -> &MultiVector {
        &self.poisson
    }

    pub fn orders(&self) -> Orders {
        self.orders
    }

    pub fn frame(&self) -> &[Vec<Rational>] {
        &self.frame
    }

    pub fn base_point(&self) -> &[Rational] {
        &self.base_point[..self.base_dim]
    }

    /// Replaces `P` without any check; for negative controls.
    pub fn with_poisson(&self, p: MultiVector) -> VData {
        VData { poisson: p, ..self.clone() }
    }

    /// `Σ_I c_I dy^I` with fiber-local indices and coefficients in the base
    /// variables.
    pub fn element(&self, terms: impl IntoIterator<Item = (Vec<usize>, Poly)>) -> AbelianElement {
        let n = self.base_dim;
        let terms = terms.into_iter().map(|(i, c)| {
            let c = if i.len() % 2 == 1 { -c } else { c };
            (i.into_iter().map(|a| a + n).collect::<Vec<_>>(), c)
        });
        AbelianElement(MultiVector::from_terms(self.chart.clone(), terms))
    }

    pub fn zero(&self) -> AbelianElement {
        AbelianElement(MultiVector::zero(self.chart.clone()))
    }

    /// Restriction to the zero section followed by the vertical part.
    pub fn project(&self, h: &MultiVector) -> AbelianElement {
        let n = self.base_dim;
        let fib = self.fiber_indices();
        let v = h.filter_terms(|i| i.iter().all(|&k| k >= n)).map_coeffs(|c| c.restrict_zero(&fib));
        AbelianElement(v)
    }

    /// `π[⋯[[Q, a₁], a₂], ⋯, a_k]`.
    pub fn derived_with(&self, q: &MultiVector, args: &[&AbelianElement]) -> Result<AbelianElement, LinfError> {
        let mut h = q.clone();
        for a in args {
            h = schouten(&h, &a.0)?;
        }
        Ok(self.project(&h))
    }

    /// Foliation differential for the constant kernel frame.
    pub fn foliation_d(&self, a: &AbelianElement) -> Result<AbelianElement, LinfError> {
        let n = self.base_dim;
        let meta = JetMeta::combine(a.0.jet(), None, u32::from(a.0.jet().is_some()))?;
        let mut out = Vec::new();
        for (idx, c) in a.0.terms() {
            let form_idx: Vec<usize> = idx.iter().map(|k| k - n).collect();
            let c = if idx.len() % 2 == 1 { -c.clone() } else { c.clone() };
            for (b, v) in self.frame.iter().enumerate() {
                let mut dc = Poly::zero();
                for (i, vi) in v.iter().enumerate() {
                    if !vi.is_zero() {
                        dc += &c.deriv(i).scale(vi);
                    }
                }
                let mut new_idx = vec![b];
                new_idx.extend(&form_idx);
                out.push((new_idx, dc));
            }
        }
        let d = self.element(out);
        Ok(AbelianElement(d.0.with_meta(meta)))
    }

    /// `l₁(x_i) = d_F x_i` on every coordinate function.
    fn sign_self_test(&self) -> Result<(), LinfError> {
        for i in 0..self.base_dim {
            let x = self.element([(vec![], Poly::var(i))]);
            let l1 = self.derived_with(&self.poisson, &[&x])?;
            if !l1.agrees_with(&self.foliation_d(&x)?) {
                return Err(LinfError::SignConvention { coord: i });
            }
        }
        Ok(())
    }
}

/// A derived-bracket structure, optionally with an added curvature term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinfStructure {
    vdata: VData,
    augmentation: Option<AbelianElement>,
}

impl LinfStructure {
    pub fn new(vdata: VData) -> Self {
        LinfStructure { vdata, augmentation: None }
    }

    /// `l₀ = πP + η`; higher brackets unchanged.
    pub fn augmented(vdata: VData, eta: AbelianElement) -> Self {
        LinfStructure { vdata, augmentation: Some(eta) }
    }

    pub fn vdata(&self) -> &VData {
        &self.vdata
    }

    pub fn is_augmented(&self) -> bool {
        self.augmentation.is_some()
    }

    pub fn curvature(&self) -> Result<AbelianElement, LinfError> {
        let pi = self.vdata.project(&self.vdata.poisson);
        match &self.augmentation {
            Some(eta) => pi.add(eta),
            None => Ok(pi),
        }
    }

    /// `l_k(a₁, …, a_k)`; `l₀` is the curvature.
    pub fn bracket(&self, args: &[&AbelianElement]) -> Result<AbelianElement, LinfError> {
        if args.is_empty() {
            return self.curvature();
        }
        self.vdata.derived_with(&self.vdata.poisson, args)
    }
}

pub fn derived_bracket(v: &VData, args: &[&AbelianElement]) -> Result<AbelianElement, LinfError> {
    v.derived_with(&v.poisson, args)
}

/// `πP = 0` and `l₁ = d_F` on coordinates and their foliation
/// differentials. Augmented structures are never strict.
pub fn strictness_check(l: &LinfStructure) -> Result<bool, LinfError> {
    if l.augmentation.as_ref().is_some_and(|e| !e.is_zero()) {
        return Ok(false);
    }
    let v = &l.vdata;
    if !v.project(&v.poisson).is_zero() {
        return Ok(false);
    }
    for i in 0..v.base_dim {
        let x = v.element([(vec![], Poly::var(i))]);
        let dx = v.foliation_d(&x)?;
        if !l.bracket(&[&x])?.agrees_with(&dx) {
            return Ok(false);
        }
        if !l.bracket(&[&dx])?.agrees_with(&v.foliation_d(&dx)?) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `½[P, P]`.
pub fn jacobiator_tensor(v: &VData) -> Result<MultiVector, LinfError> {
    Ok(schouten(&v.poisson, &v.poisson)?.scale(&(int(1) / int(2))))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::foliation::{gotay_form, null_distribution, polarization_complement};
    use crate::stratify::{FormField, Region};
    use crate::symfield::{format_multivector, DiffForm};
    use num_traits::One;

    pub(crate) fn gotay_of(w: &FormField) -> GotayModel {
        let n = w.dim();
        let f = null_distribution(w, &Region::cube(n, -1.0, 1.0), 1).unwrap();
        let p = polarization_complement(w, &f, None, &vec![Rational::zero(); n]).unwrap();
        gotay_form(&p).unwrap()
    }

    pub(crate) fn flat(n: usize, pairs: &[(usize, usize)]) -> VData {
        let c = Chart::standard(n);
        let mut w = DiffForm::zero(c.clone());
        for &(i, j) in pairs {
            w = w.add(&DiffForm::basis(c.clone(), &[i, j], Poly::one()));
        }
        build_vdata(&gotay_of(&FormField::new(w).unwrap()), Orders::default()).unwrap()
    }

    /// `(1 + x₁²) dx₁∧dx₂` on `R^n`.
    pub(crate) fn curved(n: usize, orders: Orders) -> Result<VData, LinfError> {
        let c = Chart::standard(n);
        let x1 = Poly::var(0);
        let w = DiffForm::basis(c, &[0, 1], Poly::one() + &x1 * &x1);
        build_vdata(&gotay_of(&FormField::new(w).unwrap()), orders)
    }

    #[test]
    fn flat_poisson_bivector() {
        let v = flat(3, &[(0, 1)]);
        assert_eq!(format_multivector(v.poisson()), "d/dx1^d/dx2 + d/dx3^d/dp3");
        assert!(v.poisson().jet().is_none());
        assert!(schouten(v.poisson(), v.poisson()).unwrap().is_zero());
    }

    #[test]
    fn curved_accuracy_exhaustion() {
        let e = curved(3, Orders { base: 0, fiber: 1 }).unwrap_err();
        assert!(matches!(e, LinfError::Field(FieldError::AccuracyExhausted { .. })));
        let v = curved(3, Orders::default()).unwrap();
        assert_eq!(v.poisson().jet().unwrap().accuracy, 4);
    }

    #[test]
    fn brackets_on_flat_model() {
        let v = flat(3, &[(0, 1)]);
        let l = LinfStructure::new(v.clone());
        assert!(l.bracket(&[]).unwrap().is_zero());
        let x3 = v.element([(vec![], Poly::var(2))]);
        assert_eq!(l.bracket(&[&x3]).unwrap(), v.element([(vec![0], Poly::one())]));
        let a = v.element([(vec![0], Poly::constant(int(2)))]);
        let b = v.element([(vec![], Poly::constant(int(-1)))]);
        assert!(derived_bracket(&v, &[&a, &b]).unwrap().is_zero());
        // l₂ pairs the transverse derivatives
        let f = v.element([(vec![], Poly::var(0))]);
        let g = v.element([(vec![], Poly::var(1))]);
        assert!(!l.bracket(&[&f, &g]).unwrap().is_zero());
    }

    #[test]
    fn strict_structures() {
        assert!(strictness_check(&LinfStructure::new(flat(3, &[(0, 1)]))).unwrap());
        assert!(strictness_check(&LinfStructure::new(flat(4, &[(0, 1)]))).unwrap());
        assert!(strictness_check(&LinfStructure::new(curved(3, Orders::default()).unwrap())).unwrap());
        let v = flat(3, &[(0, 1)]);
        let eta = v.element([(vec![0], Poly::one())]);
        assert!(!strictness_check(&LinfStructure::augmented(v, eta)).unwrap());
    }

    #[test]
    fn symplectic_case_is_trivial() {
        let v = flat(2, &[(0, 1)]);
        assert_eq!(v.fiber_dim(), 0);
        let f = v.element([(vec![], Poly::var(0))]);
        assert!(derived_bracket(&v, &[&f]).unwrap().is_zero());
        assert_eq!(f.shifted_degree(), -1);
    }

    #[test]
    fn foliation_form_round_trip() {
        let v = flat(4, &[(0, 1)]);
        let e = v.element([(vec![0], Poly::var(2)), (vec![0, 1], Poly::one())]);
        let t = e.foliation_terms(4);
        assert_eq!(t[&vec![0]], Poly::var(2));
        assert_eq!(t[&vec![0, 1]], Poly::one());
    }

    #[test]
    fn binary_bracket_is_graded_symmetric() {
        use rand::SeedableRng;
        let v = curved(4, Orders::default()).unwrap();
        let l = LinfStructure::new(v.clone());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for (r, s) in [(0, 0), (0, 1), (1, 1), (1, 2)] {
            let a = random_element(&v, r, &mut rng);
            let b = random_element(&v, s, &mut rng);
            let ab = l.bracket(&[&a, &b]).unwrap();
            let ba = l.bracket(&[&b, &a]).unwrap();
            let sign = if (a.shifted_degree() * b.shifted_degree()).rem_euclid(2) == 1 { -int(1) } else { int(1) };
            assert!(ab.agrees_with(&ba.scale(&sign)), "degrees {r} {s}");
        }
    }
}
