//! Interpolation between `π*ω_α` and `ω` along the radial retraction.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::flow::{radial_factor, radial_flow};
use super::MoserError;
use crate::foliation::{tube_kernel_check, TubeSystem};
use crate::skewcore::{int, Rational};
use crate::stratify::{FormField, Region};
use crate::symfield::{pullback, Chart, DiffForm};

/// A family `Ω_t` with a primitive `γ_t` of `∂_t Ω_t`.
pub trait FormFamily {
    fn dim(&self) -> usize;
    fn omega(&self, t: f64, x: &[f64]) -> DMatrix<f64>;
    /// `γ_t` with `dγ_t = ∂_t Ω_t`.
    fn rhs(&self, t: f64, x: &[f64]) -> DVector<f64>;
}

type MatrixFn = Box<dyn Fn(f64, &[f64]) -> DMatrix<f64> + Send + Sync>;
type VectorFn = Box<dyn Fn(f64, &[f64]) -> DVector<f64> + Send + Sync>;

/// A family given by closures.
pub struct ClosureFamily {
    pub dim: usize,
    pub omega: MatrixFn,
    pub rhs: VectorFn,
}

impl FormFamily for ClosureFamily {
    fn dim(&self) -> usize {
        self.dim
    }

    fn omega(&self, t: f64, x: &[f64]) -> DMatrix<f64> {
        (self.omega)(t, x)
    }

    fn rhs(&self, t: f64, x: &[f64]) -> DVector<f64> {
        (self.rhs)(t, x)
    }
}

impl ClosureFamily {
    /// `Ω_t ≡ ω`, `γ_t = 0`.
    pub fn constant(omega: FormField) -> Self {
        let n = omega.dim();
        ClosureFamily {
            dim: n,
            omega: Box::new(move |_, x| omega.form().value_at_f64(x)),
            rhs: Box::new(move |_, _| DVector::zeros(n)),
        }
    }

    /// `Ω_t = (1 + t/2) dx₁∧dx₂` with `γ_t = ¼(x₁dx₂ − x₂dx₁)`; its flow
    /// from 0 to 1 is the scaling by `(3/2)^{-1/2}`.
    pub fn area() -> Self {
        ClosureFamily {
            dim: 2,
            omega: Box::new(|t, _| {
                let a = 1.0 + t / 2.0;
                DMatrix::from_row_slice(2, 2, &[0.0, a, -a, 0.0])
            }),
            rhs: Box::new(|_, x| DVector::from_column_slice(&[-x[1] / 4.0, x[0] / 4.0])),
        }
    }
}

/// `ω` restricted to the stratum `{x_f = 0}`, in the stratum's coordinates.
pub fn stratum_form(omega: &FormField, tube: &TubeSystem) -> Result<FormField, MoserError> {
    let keep = tube.stratum_coords();
    let fiber = tube.fiber().to_vec();
    let mut relabel = vec![0; tube.ambient()];
    for (k, &i) in keep.iter().enumerate() {
        relabel[i] = k;
    }
    let terms = omega
        .form()
        .terms()
        .iter()
        .filter(|(idx, _)| idx.iter().all(|i| !fiber.contains(i)))
        .map(|(idx, c)| (idx.iter().map(|&i| relabel[i]).collect::<Vec<_>>(), c.restrict_zero(&fiber).relabel(&relabel)))
        .collect::<Vec<_>>();
    Ok(FormField::new(DiffForm::from_terms(Chart::standard(keep.len()), terms))?)
}

/// `ω_t = (R^{1−t})*ω`, from `π*ω_α` at `t = 0` to `ω` at `t = 1`, and
/// `β_s = ∫_0^s (R^u)*(Y_u⌟ω) du`.
///
/// As a [`FormFamily`] it runs in the retraction parameter `s`:
/// `Ω_s = (R^s)*ω` starting from `ω`, with `γ_s = ∂_s β_s`.
pub struct Interpolation {
    pub omega: FormField,
    pub tube: TubeSystem,
    pub lower: FormField,
    pub tol: f64,
}

pub fn interpolate_forms(omega: &FormField, tube: &TubeSystem, seed: u64) -> Result<Interpolation, MoserError> {
    let lower = stratum_form(omega, tube)?;
    let pts = Region::cube(tube.ambient(), -1.0, 1.0).rational_points(12, seed);
    let r = tube_kernel_check(tube, omega, &lower, &pts);
    if !r.holds {
        return Err(MoserError::KernelInclusion(r.witness.map(|w| w.0).unwrap_or_default()));
    }
    Ok(Interpolation { omega: omega.clone(), tube: tube.clone(), lower, tol: 1e-10 })
}

impl Interpolation {
    /// Exact `ω_t` in the glued parameter.
    pub fn form_at(&self, t: &Rational) -> Result<DiffForm, MoserError> {
        let s = int(1) - t;
        Ok(pullback(&radial_flow(&self.tube, &s).map, self.omega.form())?)
    }

    /// `π*ω_α` on the ambient chart.
    pub fn pulled_back_lower(&self) -> Result<DiffForm, MoserError> {
        Ok(pullback(&self.tube.projection(), self.omega.form())?)
    }

    fn scaled(&self, s: f64, x: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
        let a = radial_factor(s);
        let n = self.tube.ambient();
        let mut d = DMatrix::identity(n, n);
        let mut y = x.to_vec();
        for &f in self.tube.fiber() {
            d[(f, f)] = a;
            y[f] *= a;
        }
        (y, d)
    }

    /// `(R^s)*ω` at `x`.
    pub fn retracted(&self, s: f64, x: &[f64]) -> DMatrix<f64> {
        let (y, d) = self.scaled(s, x);
        d.transpose() * self.omega.form().value_at_f64(&y) * d
    }

    /// `(R^s)*(Y_s⌟ω)` at `x`; `Y_s(R^s x) = −2s v` for the fiber part `v`.
    pub fn beta_dot(&self, s: f64, x: &[f64]) -> DVector<f64> {
        let n = self.tube.ambient();
        let (y, d) = self.scaled(s, x);
        let w = self.omega.form().value_at_f64(&y);
        let mut yv = DVector::zeros(n);
        for &f in self.tube.fiber() {
            yv[f] = -2.0 * s * x[f];
        }
        (w.transpose() * yv).component_mul(&d.diagonal())
    }

    /// `β_s(x)` by adaptive Simpson quadrature to `tol`.
    pub fn beta(&self, s: f64, x: &[f64]) -> Result<DVector<f64>, MoserError> {
        let f = |u: f64| self.beta_dot(u, x);
        let (fa, fm, fb) = (f(0.0), f(s / 2.0), f(s));
        let whole = (&fa + &fm * 4.0 + &fb) * (s / 6.0);
        simpson(&f, 0.0, s, fa, fm, fb, whole, self.tol, 40).ok_or(MoserError::Quadrature { s })
    }

    /// Largest `|β_s(x)(∂_f)|` over fiber directions at random samples.
    pub fn normal_contraction(&self, samples: usize, seed: u64) -> Result<f64, MoserError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let region = Region::cube(self.tube.ambient(), -1.0, 1.0);
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let x = region.draw(&mut rng);
            let s = rng.gen_range(0.0..1.0);
            let b = self.beta(s, &x)?;
            for &f in self.tube.fiber() {
                worst = worst.max(b[f].abs());
            }
        }
        Ok(worst)
    }
}

#[allow(clippy::too_many_arguments)]
fn simpson(
    f: &impl Fn(f64) -> DVector<f64>,
    a: f64,
    b: f64,
    fa: DVector<f64>,
    fm: DVector<f64>,
    fb: DVector<f64>,
    whole: DVector<f64>,
    tol: f64,
    depth: u32,
) -> Option<DVector<f64>> {
    let m = (a + b) / 2.0;
    let (lm, rm) = (f((a + m) / 2.0), f((m + b) / 2.0));
    let h = (b - a) / 12.0;
    let left = (&fa + &lm * 4.0 + &fm) * h;
    let right = (&fm + &rm * 4.0 + &fb) * h;
    let sum = &left + &right;
    let err = (&sum - &whole).amax();
    if err <= 15.0 * tol {
        return Some(&sum + (&sum - &whole) / 15.0);
    }
    if depth == 0 {
        return None;
    }
    let l = simpson(f, a, m, fa, lm, fm.clone(), left, tol / 2.0, depth - 1)?;
    let r = simpson(f, m, b, fm, rm, fb, right, tol / 2.0, depth - 1)?;
    Some(l + r)
}

impl FormFamily for Interpolation {
    fn dim(&self) -> usize {
        self.tube.ambient()
    }

    fn omega(&self, s: f64, x: &[f64]) -> DMatrix<f64> {
        self.retracted(s, x)
    }

    fn rhs(&self, s: f64, x: &[f64]) -> DVector<f64> {
        self.beta_dot(s, x)
    }
}

/// Exterior derivative of a numerically given 1-form, `(dγ)_ij = ∂_iγ_j − ∂_jγ_i`.
pub fn numeric_d(gamma: &impl Fn(&[f64]) -> DVector<f64>, x: &[f64], h: f64) -> DMatrix<f64> {
    let n = x.len();
    let mut jac = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] += h;
        xm[i] -= h;
        let diff = (gamma(&xp) - gamma(&xm)) / (2.0 * h);
        for j in 0..n {
            jac[(i, j)] = diff[j];
        }
    }
    &jac - jac.transpose()
}

#[cfg(test)]
pub(crate) fn is_zero_form(d: &DiffForm) -> bool {
    d.terms().values().all(num_traits::Zero::is_zero)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::symfield::Poly;
    use num_traits::One;

    pub(crate) fn model() -> FormField {
        let c = Chart::standard(4);
        FormField::new(DiffForm::basis(c.clone(), &[0, 1], Poly::var(0)).add(&DiffForm::basis(c, &[2, 3], Poly::one()))).unwrap()
    }

    #[test]
    fn endpoints_are_exact() {
        let it = interpolate_forms(&model(), &TubeSystem::new(4, vec![0]), 1).unwrap();
        assert_eq!(it.form_at(&int(1)).unwrap(), *it.omega.form());
        assert_eq!(it.form_at(&int(0)).unwrap(), it.pulled_back_lower().unwrap());
        assert!(is_zero_form(&it.form_at(&int(0)).unwrap().sub(&DiffForm::basis(Chart::standard(4), &[2, 3], Poly::one()))));
        assert_eq!(it.lower.dim(), 3);
    }

    #[test]
    fn beta_is_a_primitive() {
        let it = interpolate_forms(&model(), &TubeSystem::new(4, vec![0]), 1).unwrap();
        let x = [0.7, -0.2, 0.4, 0.1];
        let s = 0.6;
        let d = numeric_d(&|y: &[f64]| it.beta(s, y).unwrap(), &x, 1e-4);
        let expect = it.retracted(s, &x) - it.omega.form().value_at_f64(&x);
        assert!((d - expect).amax() < 1e-7);
    }

    #[test]
    fn beta_vanishes_on_normal_directions() {
        let it = interpolate_forms(&model(), &TubeSystem::new(4, vec![0]), 1).unwrap();
        assert!(it.normal_contraction(20, 9).unwrap() <= 1e-9);
    }

    #[test]
    fn kernel_inclusion_is_required() {
        // ker(dx₁∧dx₂ + dx₂∧dx₃) = ∂₁ + ∂₃ projects to ∂₃, outside ker(dx₂∧dx₃)
        let c = Chart::standard(3);
        let w = DiffForm::basis(c.clone(), &[0, 1], Poly::one()).add(&DiffForm::basis(c, &[1, 2], Poly::one()));
        let e = interpolate_forms(&FormField::new(w).unwrap(), &TubeSystem::new(3, vec![0]), 1).err().unwrap();
        assert!(matches!(e, MoserError::KernelInclusion(_)));
    }
}
