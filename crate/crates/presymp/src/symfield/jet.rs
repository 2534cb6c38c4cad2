//! Truncated power series at a marked base point.

use num_traits::Zero;

use super::poly::Poly;
use super::FieldError;
use crate::skewcore::Rational;

/// Where a jet lives and how much of it can be trusted.
///
/// Coefficients are stored in local coordinates `u = x - base`. Terms of
/// degree above `order` (counted in the first `jet_vars` variables) are
/// dropped; terms of degree up to `accuracy` are exact.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct JetMeta {
    pub base: Vec<Rational>,
    pub order: u32,
    pub accuracy: u32,
    pub jet_vars: usize,
}

impl JetMeta {
    pub fn at_origin(dim: usize, order: u32) -> Self {
        JetMeta { base: vec![Rational::zero(); dim], order, accuracy: order, jet_vars: dim }
    }

    pub fn truncate(&self, p: &Poly) -> Poly {
        p.truncate_in_first(self.jet_vars, self.order)
    }

    /// Result metadata for an operation that costs `cost` orders.
    pub fn combine(a: Option<&JetMeta>, b: Option<&JetMeta>, cost: u32) -> Result<Option<JetMeta>, FieldError> {
        let merged = match (a, b) {
            (None, None) => return Ok(None),
            (Some(m), None) | (None, Some(m)) => m.clone(),
            (Some(x), Some(y)) => {
                if x.base != y.base || x.jet_vars != y.jet_vars {
                    return Err(FieldError::JetBaseMismatch);
                }
                JetMeta {
                    base: x.base.clone(),
                    order: x.order.min(y.order),
                    accuracy: x.accuracy.min(y.accuracy),
                    jet_vars: x.jet_vars,
                }
            }
        };
        if merged.accuracy < cost {
            return Err(FieldError::AccuracyExhausted { available: merged.accuracy, needed: cost });
        }
        Ok(Some(JetMeta { accuracy: merged.accuracy - cost, ..merged }))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JetScalar {
    pub meta: JetMeta,
    pub local: Poly,
}

impl JetScalar {
    /// Taylor jet of a global polynomial.
    pub fn from_poly(p: &Poly, meta: JetMeta) -> Self {
        let local = meta.truncate(&p.shift(&meta.base));
        JetScalar { meta, local }
    }

    /// Polynomial in global coordinates representing the jet.
    pub fn to_global(&self) -> Poly {
        let back: Vec<Rational> = self.meta.base.iter().map(|b| -b.clone()).collect();
        self.local.shift(&back)
    }

    pub fn add(&self, other: &JetScalar) -> Result<JetScalar, FieldError> {
        let meta = JetMeta::combine(Some(&self.meta), Some(&other.meta), 0)?.unwrap();
        Ok(JetScalar { local: meta.truncate(&(&self.local + &other.local)), meta })
    }

    pub fn mul(&self, other: &JetScalar) -> Result<JetScalar, FieldError> {
        let meta = JetMeta::combine(Some(&self.meta), Some(&other.meta), 0)?.unwrap();
        Ok(JetScalar { local: meta.truncate(&(&self.local * &other.local)), meta })
    }

    pub fn deriv(&self, i: usize) -> Result<JetScalar, FieldError> {
        let meta = JetMeta::combine(Some(&self.meta), None, 1)?.unwrap();
        Ok(JetScalar { local: meta.truncate(&self.local.deriv(i)), meta })
    }

    /// Equality of the trusted parts.
    pub fn agrees_with(&self, other: &JetScalar) -> bool {
        let acc = self.meta.accuracy.min(other.meta.accuracy);
        let k = self.meta.jet_vars;
        (&self.local - &other.local).truncate_in_first(k, acc).is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skewcore::int;
    use num_traits::One;

    #[test]
    fn jet_product_is_quotient_of_poly_product() {
        let x = Poly::var(0);
        let f = Poly::one() + x.clone() + &x * &x;
        let g = &x * &x * x.clone() + Poly::constant(int(2));
        let meta = JetMeta::at_origin(1, 2);
        let lhs = JetScalar::from_poly(&(&f * &g), meta.clone());
        let rhs = JetScalar::from_poly(&f, meta.clone()).mul(&JetScalar::from_poly(&g, meta)).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn derivative_costs_accuracy() {
        let meta = JetMeta::at_origin(1, 1);
        let j = JetScalar::from_poly(&Poly::var(0), meta);
        let d = j.deriv(0).unwrap();
        assert_eq!(d.meta.accuracy, 0);
        assert!(matches!(d.deriv(0), Err(FieldError::AccuracyExhausted { .. })));
    }

    #[test]
    fn global_round_trip_at_shifted_base() {
        let p = &Poly::var(0) * &Poly::var(0);
        let meta = JetMeta { base: vec![int(3)], order: 4, accuracy: 4, jet_vars: 1 };
        let j = JetScalar::from_poly(&p, meta);
        assert_eq!(j.to_global(), p);
    }
}
