//! Pointwise nullity of closed 2-form fields and the structure of the
//! resulting strata: sampling, transversality, Whitney conditions.

mod nice;
pub(crate) mod numeric;
mod sample;
mod whitney;

use std::sync::Arc;

use num_traits::Zero;
use thiserror::Error;

use crate::skewcore::{int, kernel, ratio, stratum_codim, RatMatrix, Rational, SkewError, SkewForm};
use crate::symfield::{exterior_d, Chart, DiffForm, FieldError, Poly};

pub use nice::{niceness_report, CensusEntry, FrontierCheck, NicenessReport};
pub use numeric::{PolySystem, RankDecision};
pub use sample::{local_dimension, stratum_sample, Region, SampleOutcome, StratumSample};
pub use whitney::{
    cusp_oracle, whitney_check, Approach, CurvePair, SequenceRecord, StratumChart, Verdict, WhitneyConfig,
    WhitneyReport,
};

pub const DEFAULT_GAP: f64 = 1e6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StratifyError {
    #[error("expected a homogeneous 2-form")]
    NotTwoForm,
    #[error("form is not closed")]
    NotClosed,
    #[error("jet-valued forms are not accepted here")]
    JetInput,
    #[error("rank undecided at {point:?}: best singular-value gap {ratio:.3e} below factor {gap:.1e}")]
    Indeterminate { point: Vec<f64>, ratio: f64, gap: f64 },
    #[error("point has {got} coordinates, chart has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Skew(#[from] SkewError),
}

/// A closed 2-form with polynomial coefficients, checked on construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormField {
    form: DiffForm,
    closed: bool,
}

impl FormField {
    pub fn new(form: DiffForm) -> Result<Self, StratifyError> {
        if form.jet().is_some() {
            return Err(StratifyError::JetInput);
        }
        if !form.is_homogeneous(2) {
            return Err(StratifyError::NotTwoForm);
        }
        if !exterior_d(&form)?.is_zero() {
            return Err(StratifyError::NotClosed);
        }
        Ok(FormField { form, closed: true })
    }

    pub fn form(&self) -> &DiffForm {
        &self.form
    }

    pub fn chart(&self) -> &Arc<Chart> {
        self.form.chart()
    }

    pub fn dim(&self) -> usize {
        self.form.dim()
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn value_at(&self, x: &[Rational]) -> SkewForm {
        self.form.value_at(x)
    }

    fn check_point(&self, len: usize) -> Result<(), StratifyError> {
        if len == self.dim() {
            Ok(())
        } else {
            Err(StratifyError::DimensionMismatch { expected: self.dim(), got: len })
        }
    }

    /// Principal Pfaffians of size `N − m + 2`; they all vanish exactly
    /// where the nullity is at least `m`.
    pub fn pfaffian_equations(&self, m: usize) -> Vec<Poly> {
        let n = self.dim();
        if m > n {
            return vec![Poly::constant(int(1))];
        }
        let size = n - m + 2;
        if size > n {
            return vec![];
        }
        let w = self.form.matrix();
        subsets(n, size)
            .into_iter()
            .map(|rows| {
                let sub: Vec<Vec<Poly>> =
                    rows.iter().map(|&i| rows.iter().map(|&j| w[i][j].clone()).collect()).collect();
                crate::skewcore::pfaffian(&sub)
            })
            .filter(|p| !p.is_zero())
            .collect()
    }
}

pub(crate) fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::new(), &mut out);
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub enum EvalPoint {
    Exact(Vec<Rational>),
    Numeric(Vec<f64>),
}

/// Nullity of `ω_x`: exact rank over the rationals, or a gap-based
/// numerical decision that refuses to guess.
pub fn pointwise_nullity(field: &FormField, x: &EvalPoint) -> Result<usize, StratifyError> {
    match x {
        EvalPoint::Exact(p) => {
            field.check_point(p.len())?;
            Ok(field.value_at(p).nullity())
        }
        EvalPoint::Numeric(p) => {
            let d = numeric_rank(field, p, DEFAULT_GAP)?;
            if d.determinate {
                Ok(field.dim() - d.rank)
            } else {
                Err(StratifyError::Indeterminate { point: p.clone(), ratio: d.ratio, gap: DEFAULT_GAP })
            }
        }
    }
}

pub fn numeric_rank(field: &FormField, x: &[f64], gap: f64) -> Result<RankDecision, StratifyError> {
    field.check_point(x.len())?;
    let w = field.form.value_at_f64(x);
    Ok(numeric::gap_rank(&w, |r| r % 2 == 0, gap))
}

/// The primitive `α_j = ½ Σ_i Q_ij (x_i − x0_i)`, whose differential is the
/// constant form with value `Q`.
pub fn realization_primitive(q: &SkewForm, x0: &[Rational], chart: Arc<Chart>) -> DiffForm {
    let n = q.dim();
    let half = ratio(1, 2);
    let mut terms = Vec::new();
    for j in 0..n {
        let mut c = Poly::zero();
        for i in 0..n {
            let qij = &q.matrix()[(i, j)];
            if qij.is_zero() {
                continue;
            }
            let shifted = Poly::var(i) - Poly::constant(x0[i].clone());
            c += &shifted.scale(&(qij * &half));
        }
        terms.push((vec![j], c));
    }
    DiffForm::from_terms(chart, terms)
}

/// An exact closed form equal to `Q` at `x0`.
pub fn realize_form_at_point(q: &SkewForm, x0: &[Rational]) -> Result<FormField, StratifyError> {
    if x0.len() != q.dim() {
        return Err(StratifyError::DimensionMismatch { expected: q.dim(), got: x0.len() });
    }
    let chart = Chart::standard(q.dim());
    let alpha = realization_primitive(q, x0, chart);
    FormField::new(exterior_d(&alpha)?)
}

/// Rank of the linearized defining map of the nullity stratum through `ω_x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransversalityReport {
    pub point: Vec<Rational>,
    pub nullity: usize,
    pub codim: usize,
    /// Rank of `x' ↦ (v_iᵀ ω_{x'} v_j)_{i<j}` differentiated at `x`.
    pub rank: usize,
    /// Same, with the constant perturbation directions `Q ↦ v_iᵀ Q v_j` added.
    pub rank_with_perturbations: usize,
    pub transversal: bool,
}

pub fn transversality_check(field: &FormField, x: &[Rational]) -> Result<TransversalityReport, StratifyError> {
    field.check_point(x.len())?;
    let n = field.dim();
    let wx = field.value_at(x);
    let k = kernel(&wx);
    let m = k.dim();
    let codim = stratum_codim(n, m)?;
    let v = k.basis();
    let partials: Vec<SkewForm> = (0..n)
        .map(|d| {
            let dw = field.form.map_coeffs(|c| c.deriv(d));
            dw.value_at(x)
        })
        .collect();
    let mut rows = Vec::new();
    for i in 0..m {
        for j in (i + 1)..m {
            rows.push((i, j));
        }
    }
    let derivative = RatMatrix::from_rows(
        rows.iter().map(|&(i, j)| partials.iter().map(|p| p.pair(&v[i], &v[j])).collect()).collect(),
    );
    let rank = if rows.is_empty() { 0 } else { derivative.rank() };
    let mut extended: Vec<Vec<Rational>> = rows
        .iter()
        .map(|&(i, j)| partials.iter().map(|p| p.pair(&v[i], &v[j])).collect())
        .collect();
    for (r, &(i, j)) in rows.iter().enumerate() {
        for a in 0..n {
            for b in (a + 1)..n {
                let e = SkewForm::elementary(n, a, b, int(1));
                extended[r].push(e.pair(&v[i], &v[j]));
            }
        }
    }
    let rank_with_perturbations = if rows.is_empty() { 0 } else { RatMatrix::from_rows(extended).rank() };
    Ok(TransversalityReport {
        point: x.to_vec(),
        nullity: m,
        codim,
        rank,
        rank_with_perturbations,
        transversal: rank == codim,
    })
}
