//! Stabilization `U ↦ U × R^k` with the pulled back form.

use std::sync::Arc;

use num_traits::Zero;

use super::{FoliationError, FrameDistribution, Polarization};
use crate::skewcore::{unit, Rational};
use crate::stratify::FormField;
use crate::symfield::{Alternating, Chart, DiffForm, MultiVector, Poly};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stabilization {
    pub polarization: Polarization,
    pub extra: usize,
    /// Rank of the lifted complement; unchanged by stabilization.
    pub complement_rank: usize,
    /// `dim − rank G` before and after, with the new directions counted
    /// against the added factor.
    pub virtual_dim_before: usize,
    pub virtual_dim_after: usize,
}

fn lift<K>(a: &Alternating<K>, chart: &Arc<Chart>) -> Alternating<K> {
    Alternating::from_terms(chart.clone(), a.terms().iter().map(|(i, c)| (i.clone(), c.clone())))
}

/// `(U × R^k, π₁*ω)` with `G' = G` and `F' = F ⊕ R^k`.
pub fn stabilize(p: &Polarization, k: usize) -> Result<Stabilization, FoliationError> {
    let n = p.dim();
    let chart = p.form.chart();
    let mut names = chart.names().to_vec();
    for j in 0..k {
        let mut name = format!("s{}", j + 1);
        while names.contains(&name) {
            name.insert(0, 's');
        }
        names.push(name);
    }
    let big = Chart::new(names).map_err(|_| FoliationError::Internal("stabilized chart"))?;
    let form: DiffForm = lift(p.form.form(), &big);
    let field = FormField::new(form)?;
    let mut kernel: Vec<MultiVector> = p.kernel.fields().iter().map(|v| lift(v, &big)).collect();
    for j in 0..k {
        kernel.push(MultiVector::vector(big.clone(), unit(n + k, n + j).into_iter().map(Poly::constant).collect()));
    }
    let complement: Vec<MultiVector> = p.complement.fields().iter().map(|v| lift(v, &big)).collect();
    let mut base = p.base.clone();
    base.extend(std::iter::repeat(Rational::zero()).take(k));
    let polarization = Polarization {
        form: field,
        kernel: FrameDistribution::unchecked(big.clone(), kernel)?,
        complement: FrameDistribution::unchecked(big, complement)?,
        base,
    };
    let g = p.complement.rank();
    Ok(Stabilization {
        polarization,
        extra: k,
        complement_rank: g,
        virtual_dim_before: n - g,
        virtual_dim_after: (n + k) - (g + k),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foliation::tests::{constant_form, origin};
    use crate::foliation::{null_distribution, polarization_complement};
    use crate::stratify::Region;

    fn polarize(w: FormField) -> Polarization {
        let n = w.dim();
        let f = null_distribution(&w, &Region::cube(n, -1.0, 1.0), 1).unwrap();
        polarization_complement(&w, &f, None, &origin(n)).unwrap()
    }

    #[test]
    fn zero_extra_is_identity() {
        let p = polarize(constant_form(3, &[(0, 1)]));
        let s = stabilize(&p, 0).unwrap();
        assert_eq!(s.polarization.form.form().terms(), p.form.form().terms());
        assert_eq!(s.virtual_dim_before, s.virtual_dim_after);
    }

    #[test]
    fn stabilized_kernel_grows() {
        let s = stabilize(&polarize(constant_form(3, &[(0, 1)])), 2).unwrap();
        let q = &s.polarization;
        assert_eq!(q.dim(), 5);
        assert_eq!(q.nullity(), 3);
        assert_eq!(q.adapted_basis().rank(), 5);
        assert_eq!(q.form.value_at(&q.base).nullity(), 3);
        assert_eq!((s.virtual_dim_before, s.virtual_dim_after), (1, 1));
        assert_eq!(q.form.chart().names()[3], "s1");
    }

    #[test]
    fn symplectic_plane() {
        let s = stabilize(&polarize(constant_form(2, &[(0, 1)])), 5).unwrap();
        assert_eq!(s.virtual_dim_after, 0);
        assert_eq!(s.complement_rank, 2);
    }
}
