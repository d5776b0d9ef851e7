//! Goodness-of-fit helpers for the translation sampler.

/// Upper 1% point of χ² with 31 degrees of freedom (32 bins).
pub const CHI2_CRIT_DF31_ALPHA01: f64 = 52.191_394_833_191_93;

/// Exact probability of each integer offset `-L..=L` (`L = ⌊b⌋`) when
/// `v ~ U(-b, b)` is rounded to the nearest integer and clamped to `±L`.
pub fn rounded_uniform_pmf(bound: f64) -> Vec<f64> {
    assert!(bound >= 0.0 && bound.is_finite());
    let limit = bound.floor() as i64;
    if limit == 0 {
        return vec![1.0];
    }
    (-limit..=limit)
        .map(|k| {
            let lo = if k == -limit { -bound } else { k as f64 - 0.5 };
            let hi = if k == limit { bound } else { k as f64 + 0.5 };
            (hi - lo) / (2.0 * bound)
        })
        .collect()
}

/// Bin of offset `k ∈ [-limit, limit]` when the `2·limit + 1` integers are
/// split into `bins` contiguous groups of near-equal size.
pub fn bin_of(k: i64, limit: i64, bins: usize) -> usize {
    ((k + limit) as usize * bins) / (2 * limit as usize + 1)
}

/// Pearson χ² of integer `draws` against [`rounded_uniform_pmf`] grouped
/// into `bins` bins.
pub fn chi_square_rounded_uniform(draws: &[i64], bound: f64, bins: usize) -> f64 {
    let pmf = rounded_uniform_pmf(bound);
    let limit = bound.floor() as i64;
    let mut expected = vec![0.0; bins];
    for (i, p) in pmf.iter().enumerate() {
        expected[bin_of(i as i64 - limit, limit, bins)] += p;
    }
    let mut observed = vec![0u64; bins];
    for &d in draws {
        observed[bin_of(d.clamp(-limit, limit), limit, bins)] += 1;
    }
    let n = draws.len() as f64;
    observed
        .iter()
        .zip(&expected)
        .map(|(&o, &p)| {
            let e = p * n;
            (o as f64 - e).powi(2) / e
        })
        .sum()
}
