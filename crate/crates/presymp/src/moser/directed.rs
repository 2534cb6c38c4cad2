//! The one-sided generator `g(s) = (1/C) s⁻² e^{−c/s}`.

#[derive(Clone, Debug, PartialEq)]
pub struct DirectedReport {
    pub c: f64,
    pub big_c: f64,
    /// `(s, g(s))` for `s > 0` shrinking to zero.
    pub forward: Vec<(f64, f64)>,
    /// One-sided derivative estimates at `0⁺`, orders 1 through 5.
    pub derivatives: Vec<f64>,
    /// `(s, g(s))` for `s < 0` shrinking to zero.
    pub backward: Vec<(f64, f64)>,
    pub forward_smooth: bool,
    pub backward_divergent: bool,
    /// Smooth from the right, unbounded from the left: not reversible.
    pub directed: bool,
}

pub fn generator(c: f64, big_c: f64, s: f64) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    (-c / s).exp() / (big_c * s * s)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `k`-th forward difference quotient at 0 with `g(0) = 0`.
fn forward_difference(c: f64, big_c: f64, k: usize, h: f64) -> f64 {
    let mut s = 0.0;
    for j in 0..=k {
        let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
        s += sign * binomial(k, j) * generator(c, big_c, j as f64 * h);
    }
    s / h.powi(k as i32)
}

/// Evaluates `g` on both sides of zero at `samples` points each; the
/// derivative estimates use step `h = 0.002 c` with one Richardson step.
pub fn directed_extension_check(c: f64, big_c: f64, samples: usize) -> DirectedReport {
    let forward: Vec<(f64, f64)> = (0..samples).map(|k| 0.1 / 2f64.powi(k as i32)).map(|s| (s, generator(c, big_c, s))).collect();
    let backward: Vec<(f64, f64)> =
        (0..samples).map(|k| -0.1 / 2f64.powi(k as i32)).map(|s| (s, generator(c, big_c, s))).collect();
    let h = 0.002 * c;
    let derivatives: Vec<f64> = (1..=5)
        .map(|k| 2.0 * forward_difference(c, big_c, k, h / 2.0) - forward_difference(c, big_c, k, h))
        .collect();
    let forward_smooth = derivatives.iter().all(|d| d.abs() <= 1e-10)
        && forward.windows(2).all(|w| w[1].1 <= w[0].1)
        && forward.last().is_some_and(|p| p.1 < 1e-12);
    let backward_divergent =
        backward.windows(2).all(|w| w[1].1 >= w[0].1) && backward.first().is_some_and(|p| p.1 >= 1e3);
    DirectedReport {
        c,
        big_c,
        forward,
        derivatives,
        backward,
        forward_smooth,
        backward_divergent,
        directed: forward_smooth && backward_divergent,
    }
}
