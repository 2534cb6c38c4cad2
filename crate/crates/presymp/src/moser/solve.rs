//! Moser's method: `X_t⌟Ω_t = −γ_t`, integrated by classical RK4 together
//! with the Jacobian of the flow.

use nalgebra::{DMatrix, DVector};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::interp::FormFamily;
use super::MoserError;
use crate::foliation::TubeSystem;

#[derive(Clone, Debug, PartialEq)]
pub struct MoserConfig {
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
    /// Coordinates carrying `X_t`; the linear system is solved on this block.
    pub block: Vec<usize>,
    /// Required improvement when the step is halved.
    pub halving_factor: f64,
}

impl MoserConfig {
    pub fn new(t0: f64, t1: f64, steps: usize, block: Vec<usize>) -> Self {
        MoserConfig { t0, t1, steps, block, halving_factor: 8.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowResult {
    pub times: Vec<f64>,
    /// Times in glued orientation, `t ↦ 1 − t`.
    pub glued_times: Vec<f64>,
    /// `trajectories[k][j]` is sample `k` at `times[j]`.
    pub trajectories: Vec<Vec<Vec<f64>>>,
    /// `max |(φ)*Ω_{t1} − Ω_{t0}|` per sample.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    /// Same with half the step.
    pub halved_residual: f64,
    pub ratio: f64,
    /// Largest violation of the equations off the block.
    pub constraint_residual: f64,
    pub step: f64,
    pub order: u32,
    pub converged: bool,
}

/// Residuals below this are treated as converged without a ratio test.
const FLOOR: f64 = 1e-12;

fn vector_field(family: &dyn FormFamily, block: &[usize], t: f64, x: &[f64]) -> Result<(DVector<f64>, f64), MoserError> {
    let n = family.dim();
    let w = family.omega(t, x);
    let g = family.rhs(t, x);
    let k = block.len();
    // (X⌟Ω)_j = Σ_i X^i Ω_ij
    let a = DMatrix::from_fn(k, k, |r, c| w[(block[c], block[r])]);
    let b = DVector::from_fn(k, |r, _| -g[block[r]]);
    let scale = a.amax().max(1.0);
    let lu = a.clone().lu();
    let sol = lu.solve(&b).filter(|_| a.determinant().abs() > 1e-12 * scale.powi(k as i32));
    let Some(sol) = sol else {
        return Err(MoserError::Singular { t, point: x.to_vec() });
    };
    let mut v = DVector::zeros(n);
    for (r, &i) in block.iter().enumerate() {
        v[i] = sol[r];
    }
    let mut off: f64 = 0.0;
    for j in (0..n).filter(|j| !block.contains(j)) {
        let lhs: f64 = (0..n).map(|i| v[i] * w[(i, j)]).sum();
        off = off.max((lhs + g[j]).abs());
    }
    Ok((v, off))
}

/// Jacobian of `X_t` by Richardson-extrapolated central differences.
fn field_jacobian(family: &dyn FormFamily, block: &[usize], t: f64, x: &[f64]) -> Result<DMatrix<f64>, MoserError> {
    let n = x.len();
    let h = 1e-3;
    let mut j = DMatrix::zeros(n, n);
    for i in 0..n {
        let diff = |h: f64| -> Result<DVector<f64>, MoserError> {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += h;
            xm[i] -= h;
            Ok((vector_field(family, block, t, &xp)?.0 - vector_field(family, block, t, &xm)?.0) / (2.0 * h))
        };
        let col = (diff(h / 2.0)? * 4.0 - diff(h)?) / 3.0;
        j.set_column(i, &col);
    }
    Ok(j)
}

struct State {
    x: DVector<f64>,
    jac: DMatrix<f64>,
}

fn derivative(family: &dyn FormFamily, block: &[usize], t: f64, s: &State, off: &mut f64) -> Result<State, MoserError> {
    let x: Vec<f64> = s.x.iter().copied().collect();
    let (v, c) = vector_field(family, block, t, &x)?;
    *off = off.max(c);
    let dj = field_jacobian(family, block, t, &x)? * &s.jac;
    Ok(State { x: v, jac: dj })
}

fn axpy(s: &State, h: f64, d: &State) -> State {
    State { x: &s.x + &d.x * h, jac: &s.jac + &d.jac * h }
}

fn integrate(
    family: &dyn FormFamily,
    cfg: &MoserConfig,
    steps: usize,
    x0: &[f64],
    record: bool,
) -> Result<(Vec<Vec<f64>>, f64, f64), MoserError> {
    let n = family.dim();
    let h = (cfg.t1 - cfg.t0) / steps as f64;
    let mut s = State { x: DVector::from_column_slice(x0), jac: DMatrix::identity(n, n) };
    let mut path = vec![x0.to_vec()];
    let mut off: f64 = 0.0;
    for k in 0..steps {
        let t = cfg.t0 + k as f64 * h;
        let k1 = derivative(family, &cfg.block, t, &s, &mut off)?;
        let k2 = derivative(family, &cfg.block, t + h / 2.0, &axpy(&s, h / 2.0, &k1), &mut off)?;
        let k3 = derivative(family, &cfg.block, t + h / 2.0, &axpy(&s, h / 2.0, &k2), &mut off)?;
        let k4 = derivative(family, &cfg.block, t + h, &axpy(&s, h, &k3), &mut off)?;
        s = State {
            x: &s.x + (&k1.x + &k2.x * 2.0 + &k3.x * 2.0 + &k4.x) * (h / 6.0),
            jac: &s.jac + (&k1.jac + &k2.jac * 2.0 + &k3.jac * 2.0 + &k4.jac) * (h / 6.0),
        };
        if record {
            path.push(s.x.iter().copied().collect());
        }
    }
    let end: Vec<f64> = s.x.iter().copied().collect();
    let pulled = s.jac.transpose() * family.omega(cfg.t1, &end) * &s.jac;
    let residual = (pulled - family.omega(cfg.t0, x0)).amax();
    if !residual.is_finite() {
        return Err(MoserError::NonFinite { t: cfg.t1 });
    }
    Ok((path, residual, off))
}

/// Points of `[−1, 1]^n` whose fiber coordinates satisfy `½ ≤ |x_f| ≤ 1`.
pub fn off_stratum_samples(tube: &TubeSystem, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (0..tube.ambient())
                .map(|i| {
                    let u: f64 = rng.gen_range(-1.0..=1.0);
                    if tube.fiber().contains(&i) {
                        u.signum() * (0.5 + 0.5 * u.abs())
                    } else {
                        u
                    }
                })
                .collect()
        })
        .collect()
}

/// Flows every sample from `t0` to `t1`, at `steps` and `2·steps`.
pub fn moser_solve(family: &dyn FormFamily, samples: &[Vec<f64>], cfg: &MoserConfig) -> Result<FlowResult, MoserError> {
    let h = (cfg.t1 - cfg.t0) / cfg.steps as f64;
    let times: Vec<f64> = (0..=cfg.steps).map(|k| cfg.t0 + k as f64 * h).collect();
    let mut out = FlowResult {
        glued_times: times.iter().map(|t| 1.0 - t).collect(),
        times,
        trajectories: vec![],
        residuals: vec![],
        max_residual: 0.0,
        halved_residual: 0.0,
        ratio: f64::INFINITY,
        constraint_residual: 0.0,
        step: h,
        order: 4,
        converged: false,
    };
    for x in samples {
        let (path, r, off) = integrate(family, cfg, cfg.steps, x, true)?;
        let (_, r2, _) = integrate(family, cfg, 2 * cfg.steps, x, false)?;
        out.trajectories.push(path);
        out.residuals.push(r);
        out.max_residual = out.max_residual.max(r);
        out.halved_residual = out.halved_residual.max(r2);
        out.constraint_residual = out.constraint_residual.max(off);
    }
    out.ratio = if out.halved_residual > 0.0 { out.max_residual / out.halved_residual } else { f64::INFINITY };
    out.converged = out.max_residual < FLOOR || out.ratio >= cfg.halving_factor;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moser::interp::tests::model;
    use crate::moser::interp::{interpolate_forms, ClosureFamily};

    fn box_points(n: usize, count: usize, lo: f64, hi: f64, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| (0..n).map(|_| rng.gen_range(lo..=hi)).collect()).collect()
    }

    #[test]
    fn area_scaling_oracle() {
        let pts = box_points(2, 100, -1.0, 1.0, 1);
        let r = moser_solve(&ClosureFamily::area(), &pts, &MoserConfig::new(0.0, 1.0, 20, vec![0, 1])).unwrap();
        assert!(r.max_residual <= 1e-8, "{}", r.max_residual);
        let scale = (1.5f64).powf(-0.5);
        for (x, path) in pts.iter().zip(&r.trajectories) {
            let end = path.last().unwrap();
            assert!((end[0] - scale * x[0]).abs() < 1e-9 && (end[1] - scale * x[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_family_does_not_move() {
        let fam = ClosureFamily::constant(model());
        let pts = box_points(4, 5, 0.5, 1.0, 2);
        let r = moser_solve(&fam, &pts, &MoserConfig::new(0.0, 1.0, 4, vec![0, 1, 2, 3])).unwrap();
        for (x, path) in pts.iter().zip(&r.trajectories) {
            assert_eq!(path.last().unwrap(), x);
        }
        assert!(r.converged && r.max_residual < 1e-12);
    }

    #[test]
    fn model_gluing_family_converges() {
        let it = interpolate_forms(&model(), &TubeSystem::new(4, vec![0]), 1).unwrap();
        let pts = off_stratum_samples(&it.tube, 10, 3);
        assert!(pts.iter().all(|p| (0.5..=1.0).contains(&p[0].abs())));
        let r = moser_solve(&it, &pts, &MoserConfig::new(0.0, 0.5, 16, vec![0, 1, 2, 3])).unwrap();
        assert!(r.max_residual <= 1e-6, "{}", r.max_residual);
        assert!(r.ratio >= 8.0, "{}", r.ratio);
        assert!(r.converged);
        assert_eq!(r.glued_times[0], 1.0);
    }

    #[test]
    fn singular_block_is_reported() {
        let it = interpolate_forms(&model(), &TubeSystem::new(4, vec![0]), 1).unwrap();
        let e = moser_solve(&it, &[vec![0.0, 0.1, 0.2, 0.3]], &MoserConfig::new(0.0, 0.5, 4, vec![0, 1, 2, 3])).unwrap_err();
        assert!(matches!(e, MoserError::Singular { .. }));
    }
}
