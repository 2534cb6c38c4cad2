//! The Gotay symplectic form on a neighborhood of the zero section.

use std::sync::Arc;

use num_traits::{One, Zero};

use super::{FoliationError, Polarization};
use crate::skewcore::{RatMatrix, Rational};
use crate::stratify::FormField;
use crate::symfield::{Chart, DiffForm, Poly};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GotayModel {
    pub polarization: Polarization,
    /// Base coordinates followed by fiber coordinates.
    pub chart: Arc<Chart>,
    pub form: FormField,
    /// Inverse of the adapted basis `[G | F]`; its last rows are the
    /// coframe of `F` that annihilates `G`.
    pub coframe: RatMatrix,
}

impl GotayModel {
    pub fn base_dim(&self) -> usize {
        self.polarization.dim()
    }

    pub fn fiber_dim(&self) -> usize {
        self.polarization.nullity()
    }

    pub fn fiber_indices(&self) -> Vec<usize> {
        (self.base_dim()..self.base_dim() + self.fiber_dim()).collect()
    }

    /// Restriction to `p = 0`, as a form on the base chart.
    pub fn zero_section(&self) -> DiffForm {
        let fib = self.fiber_indices();
        let base = self.polarization.form.chart().clone();
        let terms = self
            .form
            .form()
            .terms()
            .iter()
            .filter(|(i, _)| i.iter().all(|k| !fib.contains(k)))
            .map(|(i, c)| (i.clone(), c.restrict_zero(&fib)))
            .collect::<Vec<_>>();
        DiffForm::from_terms(base, terms)
    }
}

fn fiber_names(p: &Polarization) -> Vec<String> {
    let base = p.form.chart();
    let n = p.dim();
    p.kernel
        .frame_at(&p.base)
        .iter()
        .enumerate()
        .map(|(a, v)| {
            let support: Vec<usize> = (0..n).filter(|&i| !v[i].is_zero()).collect();
            let aligned = support.len() == 1 && v[support[0]].is_one();
            let mut name = if aligned { format!("p{}", support[0] + 1) } else { format!("p{}", a + 1) };
            while base.index_of(&name).is_some() {
                name.insert(0, 'q');
            }
            name
        })
        .collect()
}

/// `π*ω + Σ_a φ^a ∧ dp_a`, i.e. `π*ω − dθ` with `θ = Σ_a p_a φ^a` and
/// `φ^a` the coframe of `F` annihilating `G`. Constant frames only.
pub fn gotay_form(p: &Polarization) -> Result<GotayModel, FoliationError> {
    if !p.kernel.is_constant() || !p.complement.is_constant() {
        return Err(FoliationError::NonConstantFrame);
    }
    let n = p.dim();
    let m = p.nullity();
    let e = p.adapted_basis();
    let coframe = e.inverse().ok_or(FoliationError::Internal("adapted basis is singular"))?;
    let names = p.form.chart().names().to_vec();
    let chart = Chart::split(names, fiber_names(p)).map_err(|_| FoliationError::Internal("fiber name clash"))?;
    let mut terms: Vec<(Vec<usize>, Poly)> =
        p.form.form().terms().iter().map(|(i, c)| (i.clone(), c.clone())).collect();
    for a in 0..m {
        let row = n - m + a;
        for i in 0..n {
            let c = &coframe[(row, i)];
            if !c.is_zero() {
                terms.push((vec![i, n + a], Poly::constant(c.clone())));
            }
        }
    }
    let form = FormField::new(DiffForm::from_terms(chart.clone(), terms))
        .map_err(|_| FoliationError::Internal("Gotay form is not closed"))?;
    let mut zero = p.base.clone();
    zero.extend(std::iter::repeat(Rational::zero()).take(m));
    if form.value_at(&zero).matrix().determinant().is_zero() {
        return Err(FoliationError::Internal("Gotay form degenerate on the zero section"));
    }
    Ok(GotayModel { polarization: p.clone(), chart, form, coframe })
}
