//! Small numeric helpers shared across modules.

/// Log of a sum of exponentials, shifted by the maximum for stability.
///
/// Returns `-inf` for an empty slice or when every entry is `-inf`.
pub(crate) fn log_sum_exp(log_terms: &[f64]) -> f64 {
    let max = log_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = log_terms.iter().map(|&lw| (lw - max).exp()).sum();
    max + sum.ln()
}

/// Mean, sample standard deviation (n-1 denominator), and standard error.
///
/// Standard deviation and error are 0 for fewer than two samples.
pub(crate) fn sample_stats(xs: &[f64]) -> (f64, f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, 0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let sd = var.sqrt();
    (mean, sd, sd / n.sqrt())
}

/// Wilson score interval for a binomial proportion at `z` standard deviations.
///
/// Unlike the naive normal interval this stays informative at observed
/// frequencies of exactly 0 or 1, which is where lower-bound checks need it.
pub(crate) fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    assert!(trials > 0, "wilson interval needs at least one trial");
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = (z / denom) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Ratio-of-means estimator `mean(xs) / mean(ys)` with its delta-method
/// standard error. `None` when there are fewer than two samples or the
/// denominator mean is nonpositive.
pub(crate) fn ratio_stats(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    assert_eq!(xs.len(), ys.len(), "paired samples required");
    if xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    if mean_y <= 0.0 {
        return None;
    }
    let ratio = mean_x / mean_y;
    let (mut s_xx, mut s_yy, mut s_xy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mean_x, y - mean_y);
        s_xx += dx * dx;
        s_yy += dy * dy;
        s_xy += dx * dy;
    }
    let scale = (n - 1.0) * n * mean_y * mean_y;
    let var = (s_xx - 2.0 * ratio * s_xy + ratio * ratio * s_yy) / scale;
    Some((ratio, var.max(0.0).sqrt()))
}
