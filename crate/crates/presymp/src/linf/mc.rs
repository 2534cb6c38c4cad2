//! Maurer–Cartan series, curvature from a vector field, and the finite
//! tangent complex at a zero of the curvature.

use std::fmt;

use num_traits::Zero;

use super::{AbelianElement, LinfError, LinfStructure, VData};
use crate::skewcore::{RatMatrix, Rational};
use crate::stratify::{subsets, FormField};
use crate::symfield::{interior, MultiVector, Poly};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct McResult {
    /// `(1/k!) l_k(σ, …, σ)` for `k = 0..=K`.
    pub terms: Vec<AbelianElement>,
    pub sum: AbelianElement,
    pub coisotropic: bool,
    pub accuracy: Option<u32>,
}

/// Truncated Maurer–Cartan series of a foliation 1-form (shifted degree 0).
pub fn mc_series(l: &LinfStructure, sigma: &AbelianElement, k_max: usize) -> Result<McResult, LinfError> {
    if !sigma.is_zero() && !sigma.is_homogeneous(1) {
        return Err(LinfError::DegreeMismatch { expected: 1, got: sigma.form_degree() });
    }
    let mut terms = Vec::new();
    let mut sum = l.vdata().zero();
    let mut fact = Rational::from_integer(1.into());
    for k in 0..=k_max {
        if k > 0 {
            fact *= Rational::from_integer((k as i64).into());
        }
        let args = vec![sigma; k];
        let t = l.bracket(&args)?.scale(&fact.recip());
        sum = sum.add(&t)?;
        terms.push(t);
    }
    Ok(McResult { coisotropic: sum.is_zero(), accuracy: sum.accuracy(), terms, sum })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Augmentation {
    pub element: AbelianElement,
    /// `d_F η = 0`.
    pub closed: bool,
}

/// `η = X⌟ω_ref` restricted to the kernel frame of the structure.
pub fn curved_augmentation(v: &VData, omega_ref: &FormField, x: &MultiVector) -> Result<Augmentation, LinfError> {
    let eta = interior(x, omega_ref.form())?;
    let n = v.base_dim();
    let coeffs: Vec<Poly> = (0..n).map(|i| eta.coeff(&[i])).collect();
    let terms = v.frame().iter().enumerate().map(|(a, f)| {
        let mut c = Poly::zero();
        for (i, fi) in f.iter().enumerate() {
            if !fi.is_zero() {
                c += &coeffs[i].scale(fi);
            }
        }
        (vec![a], c)
    });
    let element = v.element(terms.collect::<Vec<_>>());
    let closed = v.foliation_d(&element)?.is_zero();
    Ok(Augmentation { element, closed })
}

/// Which fiber degrees enter the Euler characteristic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ChiConvention {
    /// `Σ_{k≥1} (−1)^{k+1} dim Λ^k`; the tangent space sits in degree 0.
    #[default]
    PositiveDegrees,
    /// Also counts `Λ⁰` with sign `−1`.
    IncludeDegreeZero,
}

impl fmt::Display for ChiConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChiConvention::PositiveDegrees => "positive-degrees",
            ChiConvention::IncludeDegreeZero => "include-degree-zero",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TangentComplex {
    pub point: Vec<Rational>,
    /// `dim T_pY, dim Λ¹, …, dim Λ^m`.
    pub dims: Vec<usize>,
    /// Ranks of `∇l₀|_p` and of `l₁|_p` on `Λ^k`, `k = 1..m−1`.
    pub ranks: Vec<usize>,
    pub cohomology: Vec<usize>,
    pub chi: i64,
    pub convention: ChiConvention,
    pub virtual_dim: i64,
}

fn binomial(n: usize, k: usize) -> usize {
    subsets(n, k).len()
}

/// Euler characteristic of the fiber `Λ•(R^m)` under `convention`.
pub fn fiber_chi(m: usize, convention: ChiConvention) -> i64 {
    let start = match convention {
        ChiConvention::PositiveDegrees => 1,
        ChiConvention::IncludeDegreeZero => 0,
    };
    (start..=m).map(|k| if k % 2 == 1 { binomial(m, k) as i64 } else { -(binomial(m, k) as i64) }).sum()
}

/// `T_pY → Λ¹ → ⋯ → Λ^m` with differentials `∇l₀|_p` and `l₁|_p` on
/// constant forms; `vir.dim = dim Y − χ`.
pub fn tangent_complex(l: &LinfStructure, p: &[Rational], convention: ChiConvention) -> Result<TangentComplex, LinfError> {
    let v = l.vdata();
    let (n, m) = (v.base_dim(), v.fiber_dim());
    let l0 = l.curvature()?;
    if !l0.value_at(p, n).is_empty() {
        return Err(LinfError::NotAZero(p.to_vec()));
    }
    let mut dims = vec![n];
    dims.extend((1..=m).map(|k| binomial(m, k)));
    let mut ranks = Vec::new();
    if m > 0 {
        let terms = l0.foliation_terms(n);
        let rows: Vec<Vec<Rational>> = (0..m)
            .map(|a| {
                let c = terms.get(&vec![a]).cloned().unwrap_or_else(Poly::zero);
                (0..n).map(|i| c.deriv(i).eval(p)).collect()
            })
            .collect();
        ranks.push(RatMatrix::from_rows(rows).rank());
        for k in 1..m {
            let target = subsets(m, k + 1);
            let mut cols = Vec::new();
            for idx in subsets(m, k) {
                let e = v.element([(idx, Poly::constant(Rational::from_integer(1.into())))]);
                let d = l.bracket(&[&e])?.value_at(p, n);
                cols.push(target.iter().map(|t| d.get(t).cloned().unwrap_or_else(Rational::zero)).collect::<Vec<_>>());
            }
            ranks.push(RatMatrix::from_columns(&cols, target.len()).rank());
        }
    }
    let cohomology: Vec<usize> = (0..dims.len())
        .map(|k| {
            let out = ranks.get(k).copied().unwrap_or(0);
            let inc = if k == 0 { 0 } else { ranks[k - 1] };
            dims[k] - out - inc
        })
        .collect();
    let chi = fiber_chi(m, convention);
    Ok(TangentComplex { point: p.to_vec(), dims, ranks, cohomology, chi, convention, virtual_dim: n as i64 - chi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linf::tests::flat;
    use crate::skewcore::int;
    use crate::symfield::{Chart, DiffForm};
    use num_traits::One;

    fn zero(n: usize) -> Vec<Rational> {
        vec![Rational::zero(); n]
    }

    #[test]
    fn trivial_series() {
        let l = LinfStructure::new(flat(4, &[(0, 1)]));
        let r = mc_series(&l, &l.vdata().zero(), 3).unwrap();
        assert!(r.coisotropic && r.terms[0].is_zero());
    }

    #[test]
    fn closedness_decides_the_series() {
        let v = flat(4, &[(0, 1)]);
        let l = LinfStructure::new(v.clone());
        let closed = v.element([(vec![0], Poly::var(2))]);
        assert!(mc_series(&l, &closed, 3).unwrap().coisotropic);
        let open = v.element([(vec![0], Poly::var(3))]);
        let r = mc_series(&l, &open, 3).unwrap();
        assert!(!r.coisotropic);
        assert_eq!(r.sum, v.foliation_d(&open).unwrap());
        let f = v.element([(vec![], Poly::var(0))]);
        assert!(matches!(mc_series(&l, &f, 2), Err(LinfError::DegreeMismatch { .. })));
    }

    #[test]
    fn augmentation_from_own_form_vanishes() {
        let v = flat(3, &[(0, 1)]);
        let c = Chart::standard(3);
        let w = FormField::new(DiffForm::basis(c.clone(), &[0, 1], Poly::one())).unwrap();
        for i in 0..3 {
            let mut comps = vec![Poly::zero(); 3];
            comps[i] = Poly::one() + Poly::var(2);
            let a = curved_augmentation(&v, &w, &MultiVector::vector(c.clone(), comps)).unwrap();
            assert!(a.element.is_zero() && a.closed);
        }
    }

    #[test]
    fn ambient_augmentation() {
        let v = flat(3, &[(0, 1)]);
        let c = Chart::standard(3);
        let w = FormField::new(DiffForm::basis(c.clone(), &[0, 2], Poly::one())).unwrap();
        let x = MultiVector::vector(c.clone(), vec![Poly::one(), Poly::zero(), Poly::zero()]);
        let a = curved_augmentation(&v, &w, &x).unwrap();
        assert_eq!(a.element.foliation_terms(3)[&vec![0]], Poly::one());
        assert!(a.closed);
        let zero_x = MultiVector::vector(c, vec![Poly::zero(); 3]);
        assert!(curved_augmentation(&v, &w, &zero_x).unwrap().element.is_zero());
    }

    #[test]
    fn tangent_complexes() {
        let l = LinfStructure::new(flat(3, &[(0, 1)]));
        let t = tangent_complex(&l, &zero(3), ChiConvention::PositiveDegrees).unwrap();
        assert_eq!((t.chi, t.virtual_dim), (1, 2));
        assert_eq!(t.dims, vec![3, 1]);
        let s = LinfStructure::new(flat(2, &[(0, 1)]));
        assert_eq!(tangent_complex(&s, &zero(2), ChiConvention::PositiveDegrees).unwrap().virtual_dim, 2);
        let z = tangent_complex(&l, &zero(3), ChiConvention::IncludeDegreeZero).unwrap();
        assert_eq!(z.virtual_dim, 3);
    }

    #[test]
    fn tangent_complex_with_curvature() {
        let v = flat(4, &[(0, 1)]);
        let eta = v.element([(vec![0], Poly::var(0)), (vec![1], Poly::var(1))]);
        let l = LinfStructure::augmented(v.clone(), eta);
        let t = tangent_complex(&l, &zero(4), ChiConvention::PositiveDegrees).unwrap();
        assert_eq!(t.ranks, vec![2, 0]);
        assert_eq!(t.cohomology, vec![2, 0, 1]);
        let euler: i64 = t.cohomology.iter().enumerate().map(|(k, h)| if k % 2 == 0 { *h as i64 } else { -(*h as i64) }).sum();
        assert_eq!(euler, t.virtual_dim);
        let mut p = zero(4);
        p[0] = int(1);
        assert!(matches!(tangent_complex(&l, &p, ChiConvention::PositiveDegrees), Err(LinfError::NotAZero(_))));
    }

    #[test]
    fn fiber_euler_characteristics() {
        for m in 1..6 {
            assert_eq!(fiber_chi(m, ChiConvention::PositiveDegrees), 1);
            assert_eq!(fiber_chi(m, ChiConvention::IncludeDegreeZero), 0);
        }
        assert_eq!(fiber_chi(0, ChiConvention::PositiveDegrees), 0);
    }
}
