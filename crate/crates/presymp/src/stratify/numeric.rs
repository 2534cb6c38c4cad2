//! Floating-point helpers: gap-based rank, null spaces, Newton projection,
//! local PCA.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::symfield::Poly;

/// Singular values in decreasing order with matching right singular vectors.
pub(crate) fn sorted_svd(m: &DMatrix<f64>) -> (Vec<f64>, Vec<DVector<f64>>) {
    let n = m.ncols();
    // square up so the right singular basis is complete
    let gram = m.transpose() * m;
    let eig = SymmetricEigen::new(gram);
    let mut pairs: Vec<(f64, DVector<f64>)> = (0..n)
        .map(|i| (eig.eigenvalues[i].max(0.0).sqrt(), eig.eigenvectors.column(i).into_owned()))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    pairs.into_iter().unzip()
}

/// Outcome of a gap-based rank decision.
#[derive(Clone, Debug, PartialEq)]
pub struct RankDecision {
    pub rank: usize,
    /// Smallest retained singular value (infinite when nothing is retained).
    pub retained: f64,
    /// Largest discarded singular value (zero when nothing is discarded).
    pub discarded: f64,
    pub ratio: f64,
    pub determinate: bool,
    /// Right singular vectors of the discarded values.
    pub kernel: Vec<Vec<f64>>,
}

/// Rank of a square matrix. Picks the rank (among `allowed`) maximizing the gap ratio
/// `σ_r / max(σ_{r+1}, floor)`. A unit reference scale stands in for
/// `σ_0`, so the zero rank is chosen only for forms of negligible size.
pub(crate) fn gap_rank(m: &DMatrix<f64>, allowed: impl Fn(usize) -> bool, gap: f64) -> RankDecision {
    let n = m.ncols();
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("requested");
    let mut pairs: Vec<(f64, DVector<f64>)> =
        (0..n).map(|i| (svd.singular_values[i], vt.row(i).transpose().into_owned())).collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (sigma, vectors): (Vec<f64>, Vec<DVector<f64>>) = pairs.into_iter().unzip();
    let top = sigma.first().copied().unwrap_or(0.0);
    let floor = (top * n as f64 * f64::EPSILON).max(f64::MIN_POSITIVE);
    let mut best = (0usize, f64::NEG_INFINITY);
    for r in 0..=n {
        if !allowed(r) {
            continue;
        }
        let retained = if r == 0 { 1.0 } else { sigma[r - 1] };
        let discarded = if r == n { 0.0 } else { sigma[r] };
        let ratio = retained / discarded.max(floor);
        if ratio > best.1 {
            best = (r, ratio);
        }
    }
    let r = best.0;
    RankDecision {
        rank: r,
        retained: if r == 0 { f64::INFINITY } else { sigma[r - 1] },
        discarded: if r == n { 0.0 } else { sigma[r] },
        ratio: best.1,
        determinate: best.1 >= gap,
        kernel: vectors[r..].iter().map(|v| v.iter().copied().collect()).collect(),
    }
}

/// Orthonormal basis of the `dim`-dimensional subspace least stretched by
/// `j`, rows normalized first so that scale differences between equations
/// do not matter.
pub(crate) fn null_basis(j: &DMatrix<f64>, dim: usize) -> Vec<DVector<f64>> {
    let mut j = j.clone();
    for mut row in j.row_iter_mut() {
        let norm = row.norm();
        if norm > 0.0 {
            row /= norm;
        }
    }
    let (_, vectors) = sorted_svd(&j);
    let n = vectors.len();
    vectors[n - dim..].to_vec()
}

pub(crate) fn projector(basis: &[DVector<f64>], n: usize) -> DMatrix<f64> {
    let mut p = DMatrix::zeros(n, n);
    for v in basis {
        p += v * v.transpose();
    }
    p
}

/// Top-`k` eigenspace of a (nearly) symmetric matrix.
pub(crate) fn dominant_subspace(p: &DMatrix<f64>, k: usize) -> Vec<DVector<f64>> {
    let sym = (p + p.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut pairs: Vec<(f64, DVector<f64>)> =
        (0..p.nrows()).map(|i| (eig.eigenvalues[i], eig.eigenvectors.column(i).into_owned())).collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    pairs.into_iter().take(k).map(|(_, v)| v).collect()
}

/// Equations with symbolic gradients.
#[derive(Clone, Debug)]
pub struct PolySystem {
    pub equations: Vec<Poly>,
    gradients: Vec<Vec<Poly>>,
    pub vars: usize,
}

impl PolySystem {
    pub fn new(equations: Vec<Poly>, vars: usize) -> Self {
        let gradients = equations.iter().map(|f| (0..vars).map(|k| f.deriv(k)).collect()).collect();
        PolySystem { equations, gradients, vars }
    }

    pub fn residual(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.equations.len(), self.equations.iter().map(|f| f.eval_f64(x)))
    }

    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.equations.len(), self.vars, |i, k| self.gradients[i][k].eval_f64(x))
    }

    /// `max |f_i(x)|`, each equation scaled by its largest coefficient.
    pub fn scaled_residual(&self, x: &[f64]) -> f64 {
        self.equations
            .iter()
            .map(|f| f.eval_f64(x).abs() / crate::skewcore::to_f64(&f.max_abs_coeff()).max(1e-300))
            .fold(0.0, f64::max)
    }

    /// Damped Gauss–Newton with least-norm steps. `None` if it stalls.
    pub fn project(&self, start: &[f64], tol: f64, max_iter: usize) -> Option<Vec<f64>> {
        let mut x = DVector::from_column_slice(start);
        if self.equations.is_empty() {
            return Some(start.to_vec());
        }
        for _ in 0..max_iter {
            let xs: Vec<f64> = x.iter().copied().collect();
            let f = self.residual(&xs);
            let norm = f.norm();
            if self.scaled_residual(&xs) < tol {
                return Some(xs);
            }
            let j = self.jacobian(&xs);
            let pinv = j.pseudo_inverse(1e-12).ok()?;
            let step = pinv * &f;
            let mut t = 1.0;
            loop {
                let trial = &x - &step * t;
                let tv: Vec<f64> = trial.iter().copied().collect();
                if self.residual(&tv).norm() < norm || t < 1e-6 {
                    x = trial;
                    break;
                }
                t *= 0.5;
            }
            if !x.iter().all(|v| v.is_finite()) {
                return None;
            }
        }
        let xs: Vec<f64> = x.iter().copied().collect();
        (self.scaled_residual(&xs) < tol).then_some(xs)
    }
}

/// Number of principal directions above `rel` times the largest, for a
/// centered point cloud.
pub(crate) fn pca_dimension(points: &[Vec<f64>], rel: f64) -> usize {
    let n = points.first().map_or(0, |p| p.len());
    if points.len() < 2 {
        return 0;
    }
    let mean: Vec<f64> = (0..n).map(|k| points.iter().map(|p| p[k]).sum::<f64>() / points.len() as f64).collect();
    let data = DMatrix::from_fn(points.len(), n, |i, k| points[i][k] - mean[k]);
    let (sigma, _) = sorted_svd(&data);
    let top = sigma.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    sigma.iter().filter(|&&s| s > rel * top).count()
}
