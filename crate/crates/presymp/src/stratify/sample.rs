//! Random access to nullity strata inside a box.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::numeric::{pca_dimension, PolySystem};
use crate::skewcore::{ratio, snap, Rational};
use super::{numeric_rank, FormField, StratifyError, DEFAULT_GAP};

/// An axis-aligned box in chart coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Region {
    pub fn cube(n: usize, lo: f64, hi: f64) -> Self {
        Region { lower: vec![lo; n], upper: vec![hi; n] }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (a, b))| *a <= *v && *v <= *b)
    }

    pub fn draw(&self, rng: &mut impl Rng) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(a, b)| rng.gen_range(*a..=*b)).collect()
    }

    /// Center of the box, snapped to a dyadic rational.
    pub fn center(&self) -> Vec<Rational> {
        self.lower.iter().zip(&self.upper).map(|(a, b)| snap((a + b) / 2.0, 20)).collect()
    }

    /// Deterministic rational points in the box, on a grid of step `2^-6`.
    pub fn rational_points(&self, count: usize, seed: u64) -> Vec<Vec<Rational>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                self.lower
                    .iter()
                    .zip(&self.upper)
                    .map(|(a, b)| {
                        let lo = (a * 64.0).ceil() as i64;
                        let hi = (b * 64.0).floor() as i64;
                        ratio(rng.gen_range(lo..=hi.max(lo)), 64)
                    })
                    .collect()
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StratumSample {
    pub point: Vec<f64>,
    pub nullity: usize,
    pub kernel: Vec<Vec<f64>>,
    /// Smallest retained singular value of `ω_x`.
    pub retained: f64,
    /// Largest discarded singular value of `ω_x`.
    pub discarded: f64,
    pub indeterminate: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleOutcome {
    pub nullity: usize,
    pub requested: usize,
    pub samples: Vec<StratumSample>,
    pub attempts: usize,
    /// Converged points whose rank could not be decided.
    pub indeterminate: usize,
    pub shortfall: Option<String>,
}

/// Stream of attempt `k` for stratum `m`; independent of how many attempts
/// other strata consumed.
pub(crate) fn attempt_rng(seed: u64, m: usize, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((m as u64) << 32) | k as u64);
    rng
}

pub(crate) const NEWTON_TOL: f64 = 1e-14;

pub(crate) fn classify(field: &FormField, x: &[f64]) -> Result<StratumSample, StratifyError> {
    let d = numeric_rank(field, x, DEFAULT_GAP)?;
    Ok(StratumSample {
        point: x.to_vec(),
        nullity: field.dim() - d.rank,
        kernel: d.kernel,
        retained: d.retained,
        discarded: d.discarded,
        indeterminate: !d.determinate,
    })
}

/// Multistart Newton on the Pfaffian system of `Y_m`, filtered by the
/// numerical nullity. Deterministic in `seed`.
pub fn stratum_sample(
    field: &FormField,
    m: usize,
    region: &Region,
    count: usize,
    seed: u64,
) -> Result<SampleOutcome, StratifyError> {
    let n = field.dim();
    if region.dim() != n {
        return Err(StratifyError::DimensionMismatch { expected: n, got: region.dim() });
    }
    let mut out = SampleOutcome { nullity: m, requested: count, samples: vec![], attempts: 0, indeterminate: 0, shortfall: None };
    if m > n || (n - m) % 2 == 1 {
        out.shortfall = Some(format!("nullity {m} is impossible in dimension {n}"));
        return Ok(out);
    }
    let system = PolySystem::new(field.pfaffian_equations(m), n);
    let budget = 20 * count + 50;
    while out.samples.len() < count && out.attempts < budget {
        let mut rng = attempt_rng(seed, m, out.attempts);
        out.attempts += 1;
        let start = region.draw(&mut rng);
        let Some(x) = system.project(&start, NEWTON_TOL, 60) else { continue };
        if !region.contains(&x) {
            continue;
        }
        let s = classify(field, &x)?;
        if s.indeterminate {
            out.indeterminate += 1;
        } else if s.nullity == m {
            out.samples.push(s);
        }
    }
    if out.samples.len() < count {
        out.shortfall = Some(format!(
            "found {} of {} points with nullity {m} after {} attempts",
            out.samples.len(),
            count,
            out.attempts
        ));
    }
    Ok(out)
}

/// Dimension of `Y_m` near `base`, from local PCA of projected points.
/// `None` when too few nearby points land on the stratum.
pub fn local_dimension(
    field: &FormField,
    m: usize,
    base: &[f64],
    radius: f64,
    count: usize,
    seed: u64,
) -> Result<Option<usize>, StratifyError> {
    let n = field.dim();
    let system = PolySystem::new(field.pfaffian_equations(m), n);
    let mut cloud = Vec::new();
    for k in 0..4 * count {
        if cloud.len() >= count {
            break;
        }
        let mut rng = attempt_rng(seed ^ 0x5eed, m, k);
        let start: Vec<f64> = base.iter().map(|b| b + radius * rng.gen_range(-1.0..=1.0)).collect();
        let Some(x) = system.project(&start, NEWTON_TOL, 60) else { continue };
        let dist = x.iter().zip(base).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        if dist > 2.0 * radius * (n as f64).sqrt() {
            continue;
        }
        let s = classify(field, &x)?;
        if !s.indeterminate && s.nullity == m {
            cloud.push(x);
        }
    }
    if cloud.len() < 2 * n {
        return Ok(None);
    }
    Ok(Some(pca_dimension(&cloud, 0.05)))
}
