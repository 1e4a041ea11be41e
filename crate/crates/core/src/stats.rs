//! Small statistical helpers shared by the channel validator and the SER estimator.

/// Two-sided standard-normal quantile for 95% coverage.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for a binomial proportion `successes / trials`.
///
/// Returns `(low, high)`; always contains the point estimate. For zero trials
/// the interval is the whole unit range.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let low = (center - half).max(0.0);
    let high = (center + half).min(1.0);
    // guard the containment invariant against rounding at p = 0 or 1
    (low.min(p), high.max(p))
}

/// Empirical mean and scintillation index `E[I²]/E[I]² − 1`.
pub fn mean_and_scintillation(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let (s1, s2) = samples
        .iter()
        .fold((0.0, 0.0), |(a, b), &x| (a + x, b + x * x));
    let mean = s1 / n;
    let second = s2 / n;
    (mean, second / (mean * mean) - 1.0)
}

/// One-sample Kolmogorov–Smirnov statistic of `samples` against `cdf`.
///
/// `samples` is sorted in place.
pub fn ks_statistic<F: FnMut(f64) -> f64>(samples: &mut [f64], mut cdf: F) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let above = (i as f64 + 1.0) / n - f;
            let below = f - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic critical value of the KS statistic at significance `alpha`.
pub fn ks_critical_value(n: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}
