//! Null foliations of constant-rank closed 2-forms: kernel frames,
//! polarizations, Gotay forms, model tubes, special connections and
//! stabilization.

mod connection;
mod gotay;
mod stabilize;
mod tube;

use std::sync::Arc;

use num_traits::Zero;
use thiserror::Error;

use crate::skewcore::{kernel, unit, RatMatrix, Rational, SkewError, Subspace};
use crate::stratify::{FormField, Region, StratifyError};
use crate::symfield::{interior, schouten, Chart, FieldError, MultiVector, Poly};

pub use connection::{flat_metric, special_connection, ConnectionRecord, CutoffSpec};
pub use gotay::{gotay_form, GotayModel};
pub use stabilize::{stabilize, Stabilization};
pub use tube::{
    compatible_polarization, tube_kernel_check, tubes_compatible, CompatiblePolarization, LowerStratum, TubeKernelReport,
    TubeSystem,
};

fn point(x: &[Rational]) -> String {
    x.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FoliationError {
    #[error("nullity jumps from {expected} to {found} at ({})", point(witness))]
    RankJump { witness: Vec<Rational>, expected: usize, found: usize },
    #[error("kernel has no polynomial frame in the supported classes")]
    NonPolynomialKernel,
    #[error("frame fields are dependent at the base point")]
    DependentFrame,
    #[error("frame field {index} does not lie in the kernel")]
    NotKernel { index: usize },
    #[error("complement frame is not transverse to the kernel")]
    HintNotTransverse,
    #[error("form is degenerate on the complement frame")]
    DegenerateComplement,
    #[error("only constant frames are supported here")]
    NonConstantFrame,
    #[error("kernel inclusion fails at ({})", point(witness))]
    KernelInclusion { witness: Vec<Rational> },
    #[error("internal consistency: {0}")]
    Internal(&'static str),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Stratify(#[from] StratifyError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Skew(#[from] SkewError),
}

/// Vector fields spanning a distribution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameDistribution {
    chart: Arc<Chart>,
    fields: Vec<MultiVector>,
    rank: usize,
}

impl FrameDistribution {
    /// Frame checked for independence at `base`.
    pub fn new(chart: Arc<Chart>, fields: Vec<MultiVector>, base: &[Rational]) -> Result<Self, FoliationError> {
        let d = Self::unchecked(chart, fields)?;
        if d.rank_at(base) != d.fields.len() {
            return Err(FoliationError::DependentFrame);
        }
        Ok(d)
    }

    /// Frame with declared rank `fields.len()`; may be degenerate.
    pub fn unchecked(chart: Arc<Chart>, fields: Vec<MultiVector>) -> Result<Self, FoliationError> {
        if fields.iter().any(|f| !f.is_homogeneous(1)) {
            return Err(FieldError::NotVector.into());
        }
        let rank = fields.len();
        Ok(FrameDistribution { chart, fields, rank })
    }

    /// Constant frame from vectors.
    pub fn constant(chart: Arc<Chart>, vectors: &[Vec<Rational>]) -> Self {
        let fields = vectors
            .iter()
            .map(|v| MultiVector::vector(chart.clone(), v.iter().map(|c| Poly::constant(c.clone())).collect()))
            .collect();
        FrameDistribution { chart, rank: vectors.len(), fields }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn fields(&self) -> &[MultiVector] {
        &self.fields
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_constant(&self) -> bool {
        self.fields.iter().all(|f| f.terms().values().all(|c| c.is_constant()))
    }

    pub fn frame_at(&self, x: &[Rational]) -> Vec<Vec<Rational>> {
        self.fields.iter().map(|f| f.eval_vector(x).expect("vector field")).collect()
    }

    pub fn rank_at(&self, x: &[Rational]) -> usize {
        let rows = self.frame_at(x);
        if rows.is_empty() {
            return 0;
        }
        RatMatrix::from_rows(rows).rank()
    }
}

fn sample_points(region: &Region, seed: u64) -> Vec<Vec<Rational>> {
    region.rational_points(24, seed)
}

/// A frame of `ker ω` over the region, after checking that the nullity is
/// constant at the center and at seeded rational samples.
pub fn null_distribution(field: &FormField, region: &Region, seed: u64) -> Result<FrameDistribution, FoliationError> {
    let n = field.dim();
    if region.dim() != n {
        return Err(FoliationError::DimensionMismatch { expected: n, got: region.dim() });
    }
    let base = region.center();
    let k = kernel(&field.value_at(&base));
    let m = k.dim();
    for p in sample_points(region, seed) {
        let found = field.value_at(&p).nullity();
        if found != m {
            return Err(FoliationError::RankJump { witness: p, expected: m, found });
        }
    }
    let chart = field.chart().clone();
    let constant = field.form().terms().values().all(|c| c.is_constant());
    if constant {
        return Ok(FrameDistribution::constant(chart, k.basis()));
    }
    // coordinate-aligned kernels: every basis vector is a unit vector
    let mut axes = Vec::new();
    for v in k.basis() {
        let support: Vec<usize> = (0..n).filter(|&i| !v[i].is_zero()).collect();
        if support.len() != 1 {
            return Err(FoliationError::NonPolynomialKernel);
        }
        axes.push(support[0]);
    }
    let units: Vec<Vec<Rational>> = axes.iter().map(|&i| unit(n, i)).collect();
    let frame = FrameDistribution::constant(chart, &units);
    for f in &frame.fields {
        if !interior(f, field.form())?.is_zero() {
            return Err(FoliationError::NonPolynomialKernel);
        }
    }
    Ok(frame)
}

/// Involutivity: every bracket of frame fields stays in the span, tested
/// with exact ranks at seeded rational points.
pub fn frobenius_check(d: &FrameDistribution, seed: u64) -> Result<bool, FoliationError> {
    let n = d.chart.dim();
    let mut brackets = Vec::new();
    for i in 0..d.fields.len() {
        for j in (i + 1)..d.fields.len() {
            brackets.push(schouten(&d.fields[i], &d.fields[j])?);
        }
    }
    let points = Region::cube(n, -2.0, 2.0).rational_points(8, seed);
    for p in points {
        let frame = d.frame_at(&p);
        let r = if frame.is_empty() { 0 } else { RatMatrix::from_rows(frame.clone()).rank() };
        for b in &brackets {
            let mut rows = frame.clone();
            rows.push(b.eval_vector(&p).expect("bracket of vector fields"));
            if RatMatrix::from_rows(rows).rank() != r {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// A splitting `TY = G ⊕ ker ω`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polarization {
    pub form: FormField,
    pub kernel: FrameDistribution,
    pub complement: FrameDistribution,
    pub base: Vec<Rational>,
}

impl Polarization {
    pub fn dim(&self) -> usize {
        self.form.dim()
    }

    pub fn nullity(&self) -> usize {
        self.kernel.rank()
    }

    /// Columns `[G | F]` at the base point.
    pub fn adapted_basis(&self) -> RatMatrix {
        let mut cols = self.complement.frame_at(&self.base);
        cols.extend(self.kernel.frame_at(&self.base));
        RatMatrix::from_columns(&cols, self.dim())
    }
}

/// Completes `F = ker ω` by its Euclidean complement, or validates a hint.
pub fn polarization_complement(
    field: &FormField,
    f: &FrameDistribution,
    hint: Option<&[Vec<Rational>]>,
    base: &[Rational],
) -> Result<Polarization, FoliationError> {
    let n = field.dim();
    for (index, v) in f.fields.iter().enumerate() {
        if !interior(v, field.form())?.is_zero() {
            return Err(FoliationError::NotKernel { index });
        }
    }
    if f.rank_at(base) != field.value_at(base).nullity() {
        return Err(FoliationError::DependentFrame);
    }
    let g: Vec<Vec<Rational>> = match hint {
        Some(h) => h.to_vec(),
        None => Subspace::span(n, &f.frame_at(base)).orthogonal_complement(None).basis().to_vec(),
    };
    let mut all = g.clone();
    all.extend(f.frame_at(base));
    if all.len() != n || RatMatrix::from_rows(all).rank() != n {
        return Err(FoliationError::HintNotTransverse);
    }
    let restricted = field.value_at(base).restrict(&g);
    if !g.is_empty() && restricted.matrix().determinant().is_zero() {
        return Err(FoliationError::DegenerateComplement);
    }
    Ok(Polarization {
        form: field.clone(),
        kernel: f.clone(),
        complement: FrameDistribution::constant(field.chart().clone(), &g),
        base: base.to_vec(),
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::skewcore::int;
    use crate::symfield::DiffForm;
    use num_traits::One;

    pub(crate) fn constant_form(n: usize, pairs: &[(usize, usize)]) -> FormField {
        let c = Chart::standard(n);
        let mut w = DiffForm::zero(c.clone());
        for &(i, j) in pairs {
            w = w.add(&DiffForm::basis(c.clone(), &[i, j], Poly::one()));
        }
        FormField::new(w).unwrap()
    }

    pub(crate) fn origin(n: usize) -> Vec<Rational> {
        vec![Rational::zero(); n]
    }

    fn v(chart: &Arc<Chart>, comps: Vec<Poly>) -> MultiVector {
        MultiVector::vector(chart.clone(), comps)
    }

    #[test]
    fn kernels_of_constant_forms() {
        let w = constant_form(3, &[(0, 1)]);
        let d = null_distribution(&w, &Region::cube(3, -1.0, 1.0), 1).unwrap();
        assert_eq!(d.frame_at(&origin(3)), vec![unit(3, 2)]);
        let w4 = constant_form(4, &[(0, 1)]);
        let d4 = null_distribution(&w4, &Region::cube(4, -1.0, 1.0), 1).unwrap();
        assert_eq!(d4.rank(), 2);
        assert!(frobenius_check(&d4, 3).unwrap());
    }

    #[test]
    fn model_rank_jump() {
        let c = Chart::standard(4);
        let w = DiffForm::basis(c.clone(), &[0, 1], Poly::var(0)).add(&DiffForm::basis(c, &[2, 3], Poly::one()));
        let err = null_distribution(&FormField::new(w).unwrap(), &Region::cube(4, -1.0, 1.0), 1).unwrap_err();
        assert!(matches!(err, FoliationError::RankJump { expected: 2, found: 0, .. }));
    }

    #[test]
    fn aligned_polynomial_kernel() {
        let c = Chart::standard(3);
        let w = DiffForm::basis(c, &[0, 1], Poly::one() + &Poly::var(0) * &Poly::var(0));
        let d = null_distribution(&FormField::new(w).unwrap(), &Region::cube(3, -1.0, 1.0), 2).unwrap();
        assert_eq!(d.frame_at(&origin(3)), vec![unit(3, 2)]);
    }

    #[test]
    fn frobenius_examples() {
        let c = Chart::standard(3);
        let (z, o) = (Poly::zero(), Poly::one());
        let d3 = FrameDistribution::unchecked(c.clone(), vec![v(&c, vec![z.clone(), z.clone(), o.clone()])]).unwrap();
        assert!(frobenius_check(&d3, 0).unwrap());
        let bad = FrameDistribution::unchecked(
            c.clone(),
            vec![v(&c, vec![o.clone(), z.clone(), z.clone()]), v(&c, vec![z.clone(), o.clone(), Poly::var(0)])],
        )
        .unwrap();
        assert!(!frobenius_check(&bad, 0).unwrap());
        let degenerate =
            FrameDistribution::unchecked(c.clone(), vec![v(&c, vec![o, z.clone(), z.clone()]), v(&c, vec![Poly::var(0), z.clone(), z])])
                .unwrap();
        assert!(frobenius_check(&degenerate, 0).unwrap());
    }

    #[test]
    fn complements() {
        let w = constant_form(3, &[(0, 1)]);
        let f = null_distribution(&w, &Region::cube(3, -1.0, 1.0), 1).unwrap();
        let p = polarization_complement(&w, &f, None, &origin(3)).unwrap();
        assert_eq!(p.complement.frame_at(&origin(3)), vec![unit(3, 0), unit(3, 1)]);
        let good = [unit(3, 0), vec![int(0), int(1), int(1)]];
        assert!(polarization_complement(&w, &f, Some(&good), &origin(3)).is_ok());
        let bad = [unit(3, 0), unit(3, 2)];
        assert_eq!(polarization_complement(&w, &f, Some(&bad), &origin(3)), Err(FoliationError::HintNotTransverse));
    }
}
