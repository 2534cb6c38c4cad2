//! Exact linear algebra for skew-symmetric bilinear forms and the
//! dimension count of their nullity strata.
//!
//! Everything here runs over `BigRational`; rank and nullity decisions are
//! never made in floating point.

pub mod linalg;

use std::ops::{Add, Mul, Neg};

use num_traits::{One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use linalg::{dot, int, ratio, snap, to_f64, RatMatrix, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SkewError {
    #[error("matrix is not square")]
    NotSquare,
    #[error("entry ({0},{1}) breaks antisymmetry")]
    NotSkew(usize, usize),
    #[error("basis vectors are linearly dependent")]
    DependentBasis,
    #[error("vector has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("nullity {m} outside 0..={n}")]
    NullityOutOfRange { n: usize, m: usize },
    #[error("stratum N={n}, m={m} is empty (N - m odd)")]
    EmptyStratum { n: usize, m: usize },
    #[error("no nondegenerate chart sample after {0} trials")]
    DegenerateSample(usize),
}

/// Antisymmetric bilinear form on `Q^n`; `entries[(i,j)] = Q(e_i, e_j)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SkewForm {
    entries: RatMatrix,
}

impl SkewForm {
    pub fn new(entries: RatMatrix) -> Result<Self, SkewError> {
        if entries.rows() != entries.cols() {
            return Err(SkewError::NotSquare);
        }
        let n = entries.rows();
        for i in 0..n {
            for j in i..n {
                if entries[(i, j)] != -entries[(j, i)].clone() {
                    return Err(SkewError::NotSkew(i, j));
                }
            }
        }
        Ok(SkewForm { entries })
    }

    pub fn zero(n: usize) -> Self {
        SkewForm { entries: RatMatrix::zeros(n, n) }
    }

    /// Builds the form from its strictly upper triangle, row by row.
    pub fn from_upper(n: usize, upper: &[Rational]) -> Self {
        assert_eq!(upper.len(), n * (n.saturating_sub(1)) / 2);
        let mut m = RatMatrix::zeros(n, n);
        let mut it = upper.iter();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = it.next().unwrap().clone();
                m[(j, i)] = -v.clone();
                m[(i, j)] = v;
            }
        }
        SkewForm { entries: m }
    }

    /// `e_i ∧ e_j` scaled by `c`.
    pub fn elementary(n: usize, i: usize, j: usize, c: Rational) -> Self {
        let mut m = RatMatrix::zeros(n, n);
        m[(j, i)] = -c.clone();
        m[(i, j)] = c;
        SkewForm { entries: m }
    }

    pub fn dim(&self) -> usize {
        self.entries.rows()
    }

    pub fn matrix(&self) -> &RatMatrix {
        &self.entries
    }

    pub fn upper(&self) -> Vec<Rational> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                out.push(self.entries[(i, j)].clone());
            }
        }
        out
    }

    pub fn pair(&self, u: &[Rational], v: &[Rational]) -> Rational {
        dot(u, &self.entries.apply(v))
    }

    pub fn add(&self, other: &SkewForm) -> SkewForm {
        SkewForm { entries: &self.entries + &other.entries }
    }

    pub fn scale(&self, c: &Rational) -> SkewForm {
        SkewForm { entries: self.entries.scale(c) }
    }

    pub fn rank(&self) -> usize {
        self.entries.rank()
    }

    pub fn nullity(&self) -> usize {
        self.dim() - self.rank()
    }

    pub fn pfaffian(&self) -> Rational {
        let rows: Vec<Vec<Rational>> = (0..self.dim()).map(|i| self.entries.row(i).to_vec()).collect();
        pfaffian(&rows)
    }

    /// Gram matrix of the form on the span of `basis`.
    pub fn restrict(&self, basis: &[Vec<Rational>]) -> SkewForm {
        let k = basis.len();
        let mut m = RatMatrix::zeros(k, k);
        for a in 0..k {
            for b in 0..k {
                m[(a, b)] = self.pair(&basis[a], &basis[b]);
            }
        }
        SkewForm { entries: m }
    }
}

/// Pfaffian by expansion along the first row. Works over any commutative ring.
pub fn pfaffian<T>(m: &[Vec<T>]) -> T
where
    T: Clone + Zero + One + Add<Output = T> + Mul<Output = T> + Neg<Output = T>,
{
    let idx: Vec<usize> = (0..m.len()).collect();
    pfaffian_on(m, &idx)
}

fn pfaffian_on<T>(m: &[Vec<T>], idx: &[usize]) -> T
where
    T: Clone + Zero + One + Add<Output = T> + Mul<Output = T> + Neg<Output = T>,
{
    if idx.is_empty() {
        return T::one();
    }
    if idx.len() % 2 == 1 {
        return T::zero();
    }
    let first = idx[0];
    let mut total = T::zero();
    for k in 1..idx.len() {
        let entry = m[first][idx[k]].clone();
        if entry.is_zero() {
            continue;
        }
        let rest: Vec<usize> = idx[1..].iter().enumerate().filter(|&(p, _)| p + 1 != k).map(|(_, &i)| i).collect();
        let term = entry * pfaffian_on(m, &rest);
        total = if k % 2 == 1 { total + term } else { total + (-term) };
    }
    total
}

/// Linearly independent vectors in `Q^ambient`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    ambient: usize,
    basis: Vec<Vec<Rational>>,
}

impl Subspace {
    pub fn new(ambient: usize, basis: Vec<Vec<Rational>>) -> Result<Self, SkewError> {
        for v in &basis {
            if v.len() != ambient {
                return Err(SkewError::DimensionMismatch { expected: ambient, got: v.len() });
            }
        }
        if !basis.is_empty() && RatMatrix::from_rows(basis.clone()).rank() != basis.len() {
            return Err(SkewError::DependentBasis);
        }
        Ok(Subspace { ambient, basis })
    }

    /// Span of arbitrary vectors; a basis is extracted.
    pub fn span(ambient: usize, vectors: &[Vec<Rational>]) -> Self {
        if vectors.is_empty() {
            return Subspace { ambient, basis: vec![] };
        }
        let (r, pivots) = RatMatrix::from_rows(vectors.to_vec()).rref();
        let basis = (0..pivots.len()).map(|i| r.row(i).to_vec()).collect();
        Subspace { ambient, basis }
    }

    pub fn trivial(ambient: usize) -> Self {
        Subspace { ambient, basis: vec![] }
    }

    pub fn full(ambient: usize) -> Self {
        Subspace { ambient, basis: (0..ambient).map(|i| unit(ambient, i)).collect() }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<Rational>] {
        &self.basis
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        if v.iter().all(|q| q.is_zero()) {
            return true;
        }
        if self.basis.is_empty() {
            return false;
        }
        let mut rows = self.basis.clone();
        rows.push(v.to_vec());
        RatMatrix::from_rows(rows).rank() == self.dim()
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.basis.iter().all(|v| self.contains(v))
    }

    pub fn same_span(&self, other: &Subspace) -> bool {
        self.dim() == other.dim() && self.contains_subspace(other)
    }

    /// Complement orthogonal for the inner product `gram` (identity if `None`).
    pub fn orthogonal_complement(&self, gram: Option<&RatMatrix>) -> Subspace {
        if self.basis.is_empty() {
            return Subspace::full(self.ambient);
        }
        let b = RatMatrix::from_rows(self.basis.clone());
        let constraints = match gram {
            Some(g) => &b * g,
            None => b,
        };
        Subspace { ambient: self.ambient, basis: constraints.nullspace() }
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        let mut all = self.basis.clone();
        all.extend(other.basis.iter().cloned());
        Subspace::span(self.ambient, &all)
    }

    pub fn intersection(&self, other: &Subspace) -> Subspace {
        if self.basis.is_empty() || other.basis.is_empty() {
            return Subspace::trivial(self.ambient);
        }
        // Solve sum a_i u_i = sum b_j w_j.
        let mut cols = self.basis.clone();
        cols.extend(other.basis.iter().map(|w| w.iter().map(|q| -q.clone()).collect()));
        let m = RatMatrix::from_columns(&cols, self.ambient);
        let vecs: Vec<Vec<Rational>> = m
            .nullspace()
            .into_iter()
            .map(|coef| {
                let mut v = vec![Rational::zero(); self.ambient];
                for (i, u) in self.basis.iter().enumerate() {
                    for (x, ui) in v.iter_mut().zip(u) {
                        *x += &coef[i] * ui;
                    }
                }
                v
            })
            .collect();
        Subspace::span(self.ambient, &vecs)
    }
}

pub fn unit(n: usize, i: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); n];
    v[i] = Rational::one();
    v
}

/// Kernel `{v : Q v = 0}` computed exactly.
pub fn kernel(q: &SkewForm) -> Subspace {
    Subspace { ambient: q.dim(), basis: q.matrix().nullspace() }
}

/// Splits `V = ker Q ⊕ (ker Q)^⊥` and restricts `Q` to the complement.
pub fn darboux_split(q: &SkewForm, gram: Option<&RatMatrix>) -> (Subspace, Subspace, SkewForm) {
    let k = kernel(q);
    let complement = k.orthogonal_complement(gram);
    let restricted = q.restrict(complement.basis());
    (k, complement, restricted)
}

/// A nullity stratum `{Q ∈ Λ²(Q^n) : nullity Q = m}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StratumId {
    pub ambient: usize,
    pub nullity: usize,
}

impl StratumId {
    pub fn new(ambient: usize, nullity: usize) -> Result<Self, SkewError> {
        if nullity > ambient {
            return Err(SkewError::NullityOutOfRange { n: ambient, m: nullity });
        }
        Ok(StratumId { ambient, nullity })
    }

    /// Parity-empty strata are still representable.
    pub fn is_empty(&self) -> bool {
        (self.ambient - self.nullity) % 2 == 1
    }

    /// `ℓ` with `N = m + 2ℓ`, when it exists.
    pub fn half_rank(&self) -> Option<usize> {
        (!self.is_empty()).then(|| (self.ambient - self.nullity) / 2)
    }

    pub fn dim(&self) -> StratumDim {
        let (n, m) = (self.ambient, self.nullity);
        StratumDim { dim: (n - m) * (n + m).saturating_sub(1) / 2, empty: self.is_empty() }
    }

    pub fn codim(&self) -> usize {
        self.nullity * self.nullity.saturating_sub(1) / 2
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StratumDim {
    pub dim: usize,
    pub empty: bool,
}

pub fn stratum_dim(n: usize, m: usize) -> Result<StratumDim, SkewError> {
    Ok(StratumId::new(n, m)?.dim())
}

pub fn stratum_codim(n: usize, m: usize) -> Result<usize, SkewError> {
    Ok(StratumId::new(n, m)?.codim())
}

pub fn nullity_admissible(n: usize, m: usize) -> bool {
    m <= n && (n - m) % 2 == 0 && m * m.saturating_sub(1) / 2 <= n
}

/// Largest-nullity bounds: the one solving `m(m-1)/2 <= N`, and the
/// `1/2 + sqrt(8N + 1/4)` variant that circulates for the same purpose.
pub fn nullity_bounds(n: usize) -> (f64, f64) {
    let n = n as f64;
    (0.5 + (2.0 * n + 0.25).sqrt(), 0.5 + (8.0 * n + 0.25).sqrt())
}

pub(crate) fn random_rational(rng: &mut impl Rng, span: i64) -> Rational {
    let num = rng.gen_range(-span..=span);
    let den = rng.gen_range(1..=3);
    ratio(num, den)
}

pub fn random_skew(n: usize, rng: &mut impl Rng) -> SkewForm {
    let upper: Vec<Rational> = (0..n * n.saturating_sub(1) / 2).map(|_| random_rational(rng, 5)).collect();
    SkewForm::from_upper(n, &upper)
}

/// A random form of nullity exactly `m`: `Lᵀ Q' L` with `L` surjective.
pub fn random_skew_with_nullity(n: usize, m: usize, rng: &mut impl Rng) -> Result<SkewForm, SkewError> {
    let id = StratumId::new(n, m)?;
    if id.is_empty() {
        return Err(SkewError::EmptyStratum { n, m });
    }
    if m == n {
        return Ok(SkewForm::zero(n));
    }
    for _ in 0..64 {
        let r = n - m;
        let inner = random_skew(r, rng);
        if inner.pfaffian().is_zero() {
            continue;
        }
        let l = RatMatrix::from_rows(
            (0..r).map(|_| (0..n).map(|_| random_rational(rng, 4)).collect()).collect(),
        );
        if l.rank() != r {
            continue;
        }
        let q = &(&l.transpose() * inner.matrix()) * &l;
        return SkewForm::new(q);
    }
    Err(SkewError::DegenerateSample(64))
}

/// Exact Jacobian rank of the chart `(C, Q') ↦ Lᵀ Q' L`, `L = [I | C]`,
/// at a random sample. This is an independent count of `dim Λ²_m`.
pub fn stratum_dim_oracle(n: usize, m: usize, trials: usize, seed: u64) -> Result<usize, SkewError> {
    let id = StratumId::new(n, m)?;
    if id.is_empty() {
        return Err(SkewError::EmptyStratum { n, m });
    }
    let r = n - m;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let upper_len = n * n.saturating_sub(1) / 2;
    for _ in 0..trials.max(1) {
        let inner = random_skew(r, &mut rng);
        if inner.pfaffian().is_zero() {
            continue;
        }
        let mut l = RatMatrix::zeros(r, n);
        for i in 0..r {
            l[(i, i)] = Rational::one();
            for j in r..n {
                l[(i, j)] = random_rational(&mut rng, 4);
            }
        }
        let lt = l.transpose();
        let mut columns: Vec<Vec<Rational>> = Vec::new();
        // derivatives in the Grassmannian chart entries C_{ij}
        for i in 0..r {
            for j in r..n {
                let mut e = RatMatrix::zeros(r, n);
                e[(i, j)] = Rational::one();
                let a = &(&e.transpose() * inner.matrix()) * &l;
                let b = &(&lt * inner.matrix()) * &e;
                columns.push(SkewForm { entries: &a + &b }.upper());
            }
        }
        // derivatives in the nondegenerate block entries
        for i in 0..r {
            for j in (i + 1)..r {
                let e = SkewForm::elementary(r, i, j, Rational::one());
                let d = &(&lt * e.matrix()) * &l;
                columns.push(SkewForm { entries: d }.upper());
            }
        }
        if columns.is_empty() {
            return Ok(0);
        }
        let jac = RatMatrix::from_columns(&columns, upper_len);
        let rank = jac.rank();
        if rank == columns.len() {
            return Ok(rank);
        }
    }
    Err(SkewError::DegenerateSample(trials))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e12_on(n: usize) -> SkewForm {
        SkewForm::elementary(n, 0, 1, int(1))
    }

    #[test]
    fn kernel_examples() {
        let q = SkewForm::new(RatMatrix::from_i64(&[&[0, 1], &[-1, 0]])).unwrap();
        assert_eq!(kernel(&q).dim(), 0);
        assert_eq!(kernel(&SkewForm::zero(3)).dim(), 3);
        let k = kernel(&e12_on(3));
        assert_eq!(k.dim(), 1);
        assert!(k.contains(&[int(0), int(0), int(1)]));
    }

    #[test]
    fn rejects_non_skew() {
        let m = RatMatrix::from_i64(&[&[0, 1], &[1, 0]]);
        assert_eq!(SkewForm::new(m), Err(SkewError::NotSkew(0, 1)));
        let d = RatMatrix::from_i64(&[&[1, 0], &[0, 0]]);
        assert!(SkewForm::new(d).is_err());
    }

    #[test]
    fn darboux_split_of_e12() {
        let (k, c, q) = darboux_split(&e12_on(3), None);
        assert!(k.same_span(&Subspace::new(3, vec![vec![int(0), int(0), int(1)]]).unwrap()));
        assert_eq!(c.dim(), 2);
        assert_eq!(q.matrix(), &RatMatrix::from_i64(&[&[0, 1], &[-1, 0]]));
        let (k0, c0, q0) = darboux_split(&SkewForm::zero(3), None);
        assert_eq!((k0.dim(), c0.dim(), q0.dim()), (3, 0, 0));
    }

    #[test]
    fn full_nullity_sample_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 0..5 {
            assert_eq!(random_skew_with_nullity(n, n, &mut rng).unwrap(), SkewForm::zero(n));
        }
    }

    #[test]
    fn darboux_split_random_is_nondegenerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in [0, 2, 4] {
            let q = random_skew_with_nullity(6, m, &mut rng).unwrap();
            let (k, c, restricted) = darboux_split(&q, None);
            assert_eq!(k.dim(), m);
            assert_eq!(c.dim(), 6 - m);
            assert_eq!(restricted.nullity(), 0);
            assert!(!restricted.pfaffian().is_zero());
        }
    }

    #[test]
    fn dims_and_codims() {
        assert_eq!(stratum_dim(4, 0).unwrap().dim, 6);
        assert_eq!(stratum_dim(4, 2).unwrap().dim, 5);
        assert_eq!(stratum_dim(5, 5).unwrap().dim, 0);
        assert!(stratum_dim(4, 1).unwrap().empty);
        assert_eq!(stratum_codim(4, 2).unwrap(), 1);
        assert_eq!(stratum_codim(4, 0).unwrap(), 0);
        assert_eq!(stratum_codim(4, 1).unwrap(), 0);
        assert_eq!(stratum_codim(4, 4).unwrap(), 6);
        assert!(stratum_dim(3, 4).is_err());
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(stratum_dim_oracle(4, 2, 8, 1).unwrap(), 5);
        assert_eq!(stratum_dim_oracle(3, 1, 8, 1).unwrap(), 3);
        assert_eq!(stratum_dim_oracle(2, 0, 8, 1).unwrap(), 1);
        assert!(matches!(stratum_dim_oracle(4, 1, 8, 1), Err(SkewError::EmptyStratum { .. })));
    }

    #[test]
    fn admissibility() {
        assert!(!nullity_admissible(4, 4));
        assert!(nullity_admissible(4, 2));
        assert!(nullity_admissible(3, 3));
        assert!(!nullity_admissible(4, 3));
    }

    #[test]
    fn bounds_disagree() {
        let (codim, printed) = nullity_bounds(4);
        assert!((codim - 3.372281323269).abs() < 1e-9);
        assert!(printed > codim);
    }

    #[test]
    fn pfaffian_of_standard_block() {
        let q = SkewForm::elementary(4, 0, 1, int(1)).add(&SkewForm::elementary(4, 2, 3, int(1)));
        assert_eq!(q.pfaffian(), int(1));
        assert_eq!(q.pfaffian() * q.pfaffian(), q.matrix().determinant());
    }

    #[test]
    fn subspace_intersection() {
        let a = Subspace::span(3, &[vec![int(1), int(0), int(0)], vec![int(0), int(1), int(0)]]);
        let b = Subspace::span(3, &[vec![int(0), int(1), int(0)], vec![int(0), int(0), int(1)]]);
        let i = a.intersection(&b);
        assert_eq!(i.dim(), 1);
        assert!(i.contains(&[int(0), int(1), int(0)]));
    }
}
