//! A connection making `ω` parallel at one point, with the part of `∇ω|_x`
//! no correction can remove.

use num_traits::Zero;

use super::FoliationError;
use crate::skewcore::{int, kernel, ratio, RatMatrix, Rational, Subspace};
use crate::stratify::FormField;
use crate::symfield::Poly;

/// Radii of the cutoff used to localize the correction; only recorded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutoffSpec {
    pub inner: Rational,
    pub outer: Rational,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        CutoffSpec { inner: ratio(1, 2), outer: int(1) }
    }
}

type Tensor3 = Vec<Vec<Vec<Rational>>>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConnectionRecord {
    pub point: Vec<Rational>,
    /// Levi-Civita symbols `Γ[k][i][l] = Γ^l_{ki}` of the metric at the point.
    pub christoffel: Tensor3,
    /// Correction `B[k][i][l] = B^l_{ki}`, least-norm.
    pub correction: Tensor3,
    /// `(∇+B)_k ω_ij` at the point.
    pub achieved: Tensor3,
    pub residual_zero: bool,
    /// Every nonzero achieved component, in a basis adapted to
    /// `ker ω_x ⊕ complement`, has all three slots in the kernel.
    pub confined_to_kernel: bool,
    /// Weaker: nonzero components have both form slots `i, j` in the kernel.
    pub form_slots_in_kernel: bool,
    pub kernel_dim: usize,
    pub cutoff: CutoffSpec,
}

fn zeros3(n: usize) -> Tensor3 {
    vec![vec![vec![Rational::zero(); n]; n]; n]
}

fn positive_definite(g: &RatMatrix) -> bool {
    let n = g.rows();
    (1..=n).all(|k| {
        let idx: Vec<usize> = (0..k).collect();
        g.submatrix(&idx, &idx).determinant() > Rational::zero()
    })
}

/// Solves `B^l_{ki} ω_lj + B^l_{kj} ω_il = ∇_k ω_ij` at `x` exactly in the
/// least-norm sense and reports what is left over.
pub fn special_connection(
    field: &FormField,
    x: &[Rational],
    metric: &[Vec<Poly>],
    cutoff: CutoffSpec,
) -> Result<ConnectionRecord, FoliationError> {
    let n = field.dim();
    if x.len() != n || metric.len() != n {
        return Err(FoliationError::DimensionMismatch { expected: n, got: x.len().min(metric.len()) });
    }
    let g = RatMatrix::from_rows(metric.iter().map(|r| r.iter().map(|p| p.eval(x)).collect()).collect());
    if g != g.transpose() || !positive_definite(&g) {
        return Err(FoliationError::Internal("metric must be symmetric positive definite at the point"));
    }
    let ginv = g.inverse().expect("positive definite");
    let dg: Vec<RatMatrix> = (0..n)
        .map(|k| RatMatrix::from_rows(metric.iter().map(|r| r.iter().map(|p| p.deriv(k).eval(x)).collect()).collect()))
        .collect();
    let mut gamma = zeros3(n);
    let half = ratio(1, 2);
    for k in 0..n {
        for i in 0..n {
            for l in 0..n {
                let mut s = Rational::zero();
                for m in 0..n {
                    let t = &dg[k][(m, i)] + &dg[i][(m, k)] - &dg[m][(k, i)];
                    s += &ginv[(l, m)] * t;
                }
                gamma[k][i][l] = s * &half;
            }
        }
    }
    let w = field.value_at(x);
    let w = w.matrix();
    let wm = field.form().matrix();
    let mut nabla = zeros3(n);
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut v = wm[i][j].deriv(k).eval(x);
                for l in 0..n {
                    v -= &gamma[k][i][l] * &w[(l, j)] + &gamma[k][j][l] * &w[(i, l)];
                }
                nabla[k][i][j] = v;
            }
        }
    }
    let idx = |k: usize, i: usize, l: usize| (k * n + i) * n + l;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for k in 0..n {
        for i in 0..n {
            for j in (i + 1)..n {
                let mut row = vec![Rational::zero(); n * n * n];
                for l in 0..n {
                    row[idx(k, i, l)] += &w[(l, j)];
                    row[idx(k, j, l)] += &w[(i, l)];
                }
                rows.push(row);
                rhs.push(nabla[k][i][j].clone());
            }
        }
    }
    let mut correction = zeros3(n);
    let mut achieved = nabla.clone();
    if !rows.is_empty() {
        let a = RatMatrix::from_rows(rows);
        let b = a.pseudo_inverse().apply(&rhs);
        for k in 0..n {
            for i in 0..n {
                for l in 0..n {
                    correction[k][i][l] = b[idx(k, i, l)].clone();
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut v = nabla[k][i][j].clone();
                    for l in 0..n {
                        v -= &correction[k][i][l] * &w[(l, j)] + &correction[k][j][l] * &w[(i, l)];
                    }
                    achieved[k][i][j] = v;
                }
            }
        }
    }
    let ker = kernel(&field.value_at(x));
    let m = ker.dim();
    let mut basis = ker.basis().to_vec();
    basis.extend(Subspace::span(n, ker.basis()).orthogonal_complement(None).basis().iter().cloned());
    let e = RatMatrix::from_columns(&basis, n);
    let adapted = change_basis(&achieved, &e);
    let mut confined = true;
    let mut slots = true;
    let mut zero = true;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if adapted[a][b][c].is_zero() {
                    continue;
                }
                zero = false;
                if a >= m || b >= m || c >= m {
                    confined = false;
                }
                if b >= m || c >= m {
                    slots = false;
                }
            }
        }
    }
    Ok(ConnectionRecord {
        point: x.to_vec(),
        christoffel: gamma,
        correction,
        achieved,
        residual_zero: zero,
        confined_to_kernel: confined,
        form_slots_in_kernel: slots,
        kernel_dim: m,
        cutoff,
    })
}

fn change_basis(t: &Tensor3, e: &RatMatrix) -> Tensor3 {
    let n = e.rows();
    let mut step = t.clone();
    // contract one slot at a time
    for slot in 0..3 {
        let mut next = zeros3(n);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let mut s = Rational::zero();
                    for r in 0..n {
                        let (coef, val) = match slot {
                            0 => (&e[(r, a)], &step[r][b][c]),
                            1 => (&e[(r, b)], &step[a][r][c]),
                            _ => (&e[(r, c)], &step[a][b][r]),
                        };
                        if !coef.is_zero() {
                            s += coef * val;
                        }
                    }
                    next[a][b][c] = s;
                }
            }
        }
        step = next;
    }
    step
}

/// The flat metric `δ_ij`.
pub fn flat_metric(n: usize) -> Vec<Vec<Poly>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { Poly::constant(int(1)) } else { Poly::zero() }).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foliation::tests::{constant_form, origin};
    use crate::symfield::{Chart, DiffForm};
    use num_traits::One;

    #[test]
    fn constant_form_needs_no_correction() {
        let r = special_connection(&constant_form(2, &[(0, 1)]), &origin(2), &flat_metric(2), CutoffSpec::default()).unwrap();
        assert!(r.correction.iter().flatten().flatten().all(|c| c.is_zero()));
        assert!(r.residual_zero);
    }

    #[test]
    fn linear_coefficient_is_absorbed() {
        let c = Chart::standard(2);
        let w = FormField::new(DiffForm::basis(c, &[0, 1], Poly::one() + Poly::var(0))).unwrap();
        let r = special_connection(&w, &origin(2), &flat_metric(2), CutoffSpec::default()).unwrap();
        assert!(r.residual_zero);
        assert!(r.correction.iter().flatten().flatten().any(|c| !c.is_zero()));
        assert_eq!(r.correction[0][0][0], ratio(1, 2));
    }

    #[test]
    fn model_obstruction_sits_on_kernel() {
        let c = Chart::standard(4);
        let w = DiffForm::basis(c.clone(), &[0, 1], Poly::var(0)).add(&DiffForm::basis(c, &[2, 3], Poly::one()));
        let r = special_connection(&FormField::new(w).unwrap(), &origin(4), &flat_metric(4), CutoffSpec::default()).unwrap();
        assert!(!r.residual_zero);
        assert!(r.confined_to_kernel && r.form_slots_in_kernel);
        assert_eq!(r.achieved[0][0][1], int(1));
        assert_eq!(r.kernel_dim, 2);
    }

    #[test]
    fn curved_metric_enters_through_christoffel_symbols() {
        let n = 2;
        let mut g = flat_metric(n);
        g[0][0] = Poly::one() + Poly::var(1);
        let w = constant_form(2, &[(0, 1)]);
        let r = special_connection(&w, &origin(2), &g, CutoffSpec::default()).unwrap();
        assert!(r.christoffel.iter().flatten().flatten().any(|c| !c.is_zero()));
        assert!(r.residual_zero);
    }
}
