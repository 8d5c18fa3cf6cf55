//! Summary statistics, the normality battery and order-stable reductions.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Sum with a fixed pairwise reduction tree: the result depends only on the
/// order of `values`, never on how the work was scheduled.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 8;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Element-wise pairwise sum of equally long vectors.
pub fn pairwise_sum_vectors(vectors: &[&[f64]]) -> Vec<f64> {
    match vectors.len() {
        0 => Vec::new(),
        1 => vectors[0].to_vec(),
        n => {
            let (a, b) = vectors.split_at(n / 2);
            let (mut left, right) = (pairwise_sum_vectors(a), pairwise_sum_vectors(b));
            for (l, r) in left.iter_mut().zip(&right) {
                *l += r;
            }
            left
        }
    }
}

/// Central moments of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Moments {
    pub count: usize,
    pub mean: f64,
    /// Population variance (divides by `n`).
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

impl Moments {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Moments {
                count: 0,
                mean: f64::NAN,
                variance: f64::NAN,
                skewness: f64::NAN,
                excess_kurtosis: f64::NAN,
            };
        }
        let nf = n as f64;
        let mean = pairwise_sum(values) / nf;
        let dev: Vec<f64> = values.iter().map(|x| x - mean).collect();
        let m2 = pairwise_sum(&dev.iter().map(|d| d * d).collect::<Vec<_>>()) / nf;
        let m3 = pairwise_sum(&dev.iter().map(|d| d * d * d).collect::<Vec<_>>()) / nf;
        let m4 = pairwise_sum(&dev.iter().map(|d| (d * d) * (d * d)).collect::<Vec<_>>()) / nf;
        let (skewness, excess_kurtosis) = if m2 > 0.0 {
            (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
        } else {
            (0.0, 0.0)
        };
        Moments {
            count: n,
            mean,
            variance: m2,
            skewness,
            excess_kurtosis,
        }
    }

    pub fn std(&self) -> f64 {
        self.variance.sqrt()
    }

    /// Sample (n - 1) standard deviation.
    pub fn sample_std(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        (self.variance * self.count as f64 / (self.count as f64 - 1.0)).sqrt()
    }
}

/// Mean and sample standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let m = Moments::of(values);
    (m.mean, m.sample_std())
}

/// Median of a sample (NaN for an empty one).
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

/// Kolmogorov distribution tail `Q(λ) = 2 Σ (-1)^{j-1} exp(-2 j² λ²)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov-Smirnov test of `sample` against `cdf`.
/// Returns `(D, p)` with Stephens' finite-size correction.
pub fn ks_test(sample: &[f64], cdf: impl Fn(f64) -> f64) -> (f64, f64) {
    let n = sample.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    let nf = n as f64;
    let d = v
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / nf).max((i as f64 + 1.0) / nf - f)
        })
        .fold(0.0, f64::max);
    let sq = nf.sqrt();
    (d, kolmogorov_q((sq + 0.12 + 0.11 / sq) * d))
}

/// Acceptance thresholds of the normality battery.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NormalityThresholds {
    pub max_abs_skewness: f64,
    pub max_abs_excess_kurtosis: f64,
    pub min_ks_p_value: f64,
    pub min_samples: usize,
}

impl Default for NormalityThresholds {
    fn default() -> Self {
        NormalityThresholds {
            max_abs_skewness: 0.15,
            max_abs_excess_kurtosis: 0.3,
            min_ks_p_value: 0.05,
            min_samples: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NormalityReport {
    pub samples: usize,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub ks_statistic: f64,
    pub ks_p_value: f64,
    pub pass: bool,
}

/// Standardize `sample` by its own mean and standard deviation and run the
/// battery: bounded skewness, bounded excess kurtosis and a KS test against
/// the standard normal. All three must hold.
pub fn normality_test(sample: &[f64], thresholds: &NormalityThresholds) -> Result<NormalityReport> {
    if sample.len() < thresholds.min_samples.max(2) {
        return Err(Error::InsufficientSamples {
            needed: thresholds.min_samples.max(2),
            got: sample.len(),
        });
    }
    let m = Moments::of(sample);
    let sd = m.std();
    if !(sd > 0.0) {
        return Ok(NormalityReport {
            samples: sample.len(),
            skewness: 0.0,
            excess_kurtosis: -3.0,
            ks_statistic: 1.0,
            ks_p_value: 0.0,
            pass: false,
        });
    }
    let z: Vec<f64> = sample.iter().map(|x| (x - m.mean) / sd).collect();
    let (d, p) = ks_test(&z, normal_cdf);
    let pass = m.skewness.abs() < thresholds.max_abs_skewness
        && m.excess_kurtosis.abs() < thresholds.max_abs_excess_kurtosis
        && p > thresholds.min_ks_p_value;
    Ok(NormalityReport {
        samples: sample.len(),
        skewness: m.skewness,
        excess_kurtosis: m.excess_kurtosis,
        ks_statistic: d,
        ks_p_value: p,
        pass,
    })
}

/// Ordinary least-squares line `y = a + b x`; returns `(a, b)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    Some((my - b * mx, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Exp1, StandardNormal};

    fn normal_sample(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn moments_of_known_sample() {
        let m = Moments::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mean, 2.5);
        assert!((m.variance - 1.25).abs() < 1e-15);
        assert!(m.skewness.abs() < 1e-15);
        assert!((m.excess_kurtosis - (-1.36)).abs() < 1e-12);
    }

    #[test]
    fn pairwise_sum_matches_naive() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64 * 0.5).collect();
        assert_eq!(pairwise_sum(&v), 249750.0);
        let a = [1.0, 2.0];
        let b = [3.0, 4.0];
        let c = [5.0, 6.0];
        assert_eq!(pairwise_sum_vectors(&[&a, &b, &c]), alloc::vec![9.0, 12.0]);
    }

    #[test]
    fn kolmogorov_tail_reference_values() {
        // Q(1.36) ≈ 0.049, Q(1.63) ≈ 0.0098 (classic critical values).
        assert!((kolmogorov_q(1.3581) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_q(1.6276) - 0.01).abs() < 1e-3);
        assert_eq!(kolmogorov_q(0.0), 1.0);
    }

    #[test]
    fn normal_cdf_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.96) - 0.975_002_1).abs() < 1e-6);
    }

    #[test]
    fn gaussian_sample_passes() {
        let r = normality_test(&normal_sample(5000, 3), &NormalityThresholds::default()).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn exponential_sample_fails() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let x: Vec<f64> = (0..5000).map(|_| Exp1.sample(&mut rng)).collect();
        let r = normality_test(&x, &NormalityThresholds::default()).unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn too_few_samples() {
        assert!(matches!(
            normality_test(&[0.0; 10], &NormalityThresholds::default()),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn constant_sample_fails() {
        let r = normality_test(&[1.0; 2000], &NormalityThresholds::default()).unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn median_and_line() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        let (a, b) = linear_fit(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert!((a - 1.0).abs() < 1e-14 && (b - 2.0).abs() < 1e-14);
    }
}
