//! Localization measures of exact eigenstates: participation ratio, its
//! normalization by the interaction-only reference, and the component
//! randomness test.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::spectral::SpectralDecomposition;
use crate::stats::{self, NormalityReport, NormalityThresholds};
use crate::{Error, Result};

/// Allowed deviation of `Σ|C|²` from one.
pub const NORM_TOLERANCE: f64 = 1e-8;

fn check_norm(coefficients: &[f64]) -> Result<()> {
    let norm_sq = stats::pairwise_sum(&coefficients.iter().map(|c| c * c).collect::<Vec<_>>());
    if (norm_sq - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::NotNormalized { norm_sq });
    }
    Ok(())
}

/// `PR = 1 / Σ_k |C_k|⁴` of a normalized vector.
pub fn participation_ratio(coefficients: &[f64]) -> Result<f64> {
    check_norm(coefficients)?;
    let s = stats::pairwise_sum(&coefficients.iter().map(|c| (c * c) * (c * c)).collect::<Vec<_>>());
    Ok(1.0 / s)
}

/// Exponentiated Shannon entropy `exp(-Σ p ln p)` with `p = |C_k|²`.
pub fn entropy_count(coefficients: &[f64]) -> Result<f64> {
    check_norm(coefficients)?;
    let terms: Vec<f64> = coefficients
        .iter()
        .map(|c| c * c)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .collect();
    Ok(stats::pairwise_sum(&terms).exp())
}

/// Participation ratios of every eigenstate, in eigenvalue order.
pub fn participation_ratios(spec: &SpectralDecomposition) -> Result<Vec<f64>> {
    (0..spec.dimension()).map(|a| participation_ratio(spec.eigenvector(a))).collect()
}

/// Eigenvalues in units of the spectrum's own mean and standard deviation.
pub fn rescaled_energies(eigenvalues: &[f64]) -> Vec<f64> {
    let m = stats::Moments::of(eigenvalues);
    let sd = m.std();
    eigenvalues
        .iter()
        .map(|e| if sd > 0.0 { (e - m.mean) / sd } else { 0.0 })
        .collect()
}

/// Reference `PR_∞` profile on a rescaled-energy axis `(E - Ē)/σ(E)`,
/// accumulated from interaction-only spectra.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PrReference {
    pub edges: Vec<f64>,
    pub sums: Vec<f64>,
    pub counts: Vec<usize>,
    pub runs: usize,
    pub description: alloc::string::String,
}

impl PrReference {
    /// Empty reference with `n_bins` over `±half_range` standard deviations.
    pub fn new(n_bins: usize, half_range: f64, description: impl Into<alloc::string::String>) -> Self {
        PrReference {
            edges: crate::fit::linspace(-half_range, half_range, n_bins + 1),
            sums: alloc::vec![0.0; n_bins],
            counts: alloc::vec![0; n_bins],
            runs: 0,
            description: description.into(),
        }
    }

    fn bin(&self, x: f64) -> Option<usize> {
        let n = self.sums.len();
        let lo = self.edges[0];
        let hi = self.edges[n];
        if !(x >= lo && x <= hi) {
            return None;
        }
        Some((((x - lo) / (hi - lo) * n as f64) as usize).min(n - 1))
    }

    /// Add one interaction-only decomposition.
    pub fn add(&mut self, spec: &SpectralDecomposition) -> Result<()> {
        let prs = participation_ratios(spec)?;
        self.add_values(spec.eigenvalues(), &prs);
        Ok(())
    }

    pub fn add_values(&mut self, eigenvalues: &[f64], prs: &[f64]) {
        for (x, pr) in rescaled_energies(eigenvalues).into_iter().zip(prs) {
            if let Some(i) = self.bin(x) {
                self.sums[i] += pr;
                self.counts[i] += 1;
            }
        }
        self.runs += 1;
    }

    /// Bin centres and mean PR of populated bins.
    pub fn profile(&self) -> Vec<(f64, f64)> {
        self.edges
            .windows(2)
            .zip(self.sums.iter().zip(&self.counts))
            .filter(|(_, (_, &c))| c > 0)
            .map(|(w, (&s, &c))| (0.5 * (w[0] + w[1]), s / c as f64))
            .collect()
    }

    /// Linear interpolation of the profile, clamped at the outermost
    /// populated bins. `None` when nothing was added.
    pub fn value_at(&self, x: f64) -> Option<f64> {
        let p = self.profile();
        let (first, last) = (p.first()?, p.last()?);
        if x <= first.0 {
            return Some(first.1);
        }
        if x >= last.0 {
            return Some(last.1);
        }
        let i = p.partition_point(|q| q.0 <= x);
        let (a, b) = (p[i - 1], p[i]);
        Some(a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0))
    }
}

/// One point of a PR map.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PrRecord {
    pub v: f64,
    pub energy: f64,
    pub pr: f64,
    pub pr_over_nh: f64,
    pub pr_over_ref: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PrMap {
    pub records: Vec<PrRecord>,
    pub reference: Option<alloc::string::String>,
}

impl PrMap {
    pub fn new(reference: Option<&PrReference>) -> Self {
        PrMap {
            records: Vec::new(),
            reference: reference.map(|r| r.description.clone()),
        }
    }

    /// Append every eigenstate of `spec` at interaction strength `v`.
    pub fn add(&mut self, v: f64, spec: &SpectralDecomposition, reference: Option<&PrReference>) -> Result<()> {
        let prs = participation_ratios(spec)?;
        let nh = spec.dimension() as f64;
        let x = rescaled_energies(spec.eigenvalues());
        for ((&e, pr), xr) in spec.eigenvalues().iter().zip(prs).zip(x) {
            self.records.push(PrRecord {
                v,
                energy: e,
                pr,
                pr_over_nh: pr / nh,
                pr_over_ref: reference.and_then(|r| r.value_at(xr)).map(|r| pr / r),
            });
        }
        Ok(())
    }
}

/// Basis indices sorted by unperturbed energy (ties by index).
pub fn energy_order(h0_energies: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..h0_energies.len()).collect();
    order.sort_by(|&a, &b| h0_energies[a].total_cmp(&h0_energies[b]).then(a.cmp(&b)));
    order
}

/// Components divided by the square root of their local mean `|C|²`, taken
/// over a moving window of `2·half_window + 1` neighbours in `order`
/// (truncated at the ends). Components with a vanishing envelope are dropped.
pub fn rescaled_components(vector: &[f64], order: &[usize], half_window: usize) -> Vec<f64> {
    let n = order.len();
    let sq: Vec<f64> = order.iter().map(|&k| vector[k] * vector[k]).collect();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for (i, s) in sq.iter().enumerate() {
        prefix.push(prefix[i] + s);
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let lo = i.saturating_sub(half_window);
        let hi = (i + half_window + 1).min(n);
        let envelope = (prefix[hi] - prefix[lo]) / (hi - lo) as f64;
        if envelope > 0.0 {
            out.push(vector[order[i]] / envelope.sqrt());
        }
    }
    out
}

/// Default half-width of the envelope window (21 components).
pub const DEFAULT_HALF_WINDOW: usize = 10;

/// Pool envelope-rescaled components of the given eigenvectors and run the
/// normality battery on them.
pub fn component_gaussianity<'a>(
    vectors: impl IntoIterator<Item = &'a [f64]>,
    order: &[usize],
    half_window: usize,
    thresholds: &NormalityThresholds,
) -> Result<NormalityReport> {
    let mut pooled = Vec::new();
    for v in vectors {
        if v.len() != order.len() {
            return Err(Error::InvalidParameter("vector length does not match the ordering".into()));
        }
        pooled.extend(rescaled_components(v, order, half_window));
    }
    stats::normality_test(&pooled, thresholds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn pr_examples() {
        assert_eq!(participation_ratio(&[0.0, 1.0, 0.0]).unwrap(), 1.0);
        let k = 16;
        let u = vec![1.0 / (k as f64).sqrt(); k];
        assert!((participation_ratio(&u).unwrap() - k as f64).abs() < 1e-12);
        let two = [0.8f64.sqrt(), 0.2f64.sqrt()];
        assert!((participation_ratio(&two).unwrap() - 1.0 / 0.68).abs() < 1e-12);
        assert!(matches!(participation_ratio(&[1.0, 1.0]), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn entropy_count_bounds() {
        let u = vec![0.5; 4];
        assert!((entropy_count(&u).unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(entropy_count(&[1.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn reference_interpolates() {
        let mut r = PrReference::new(4, 2.0, "test");
        r.add_values(&[-1.0, 1.0], &[2.0, 4.0]);
        // Rescaled to -1 and +1, landing in bins 1 and 3.
        assert_eq!(r.profile(), vec![(-0.5, 2.0), (1.5, 4.0)]);
        assert_eq!(r.value_at(0.5), Some(3.0));
        assert_eq!(r.value_at(-5.0), Some(2.0));
        assert_eq!(PrReference::new(4, 2.0, "").value_at(0.0), None);
    }

    #[test]
    fn gaussian_components_pass() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 400;
        let order: Vec<usize> = (0..n).collect();
        let vecs: Vec<Vec<f64>> = (0..10)
            .map(|_| {
                let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                v.into_iter().map(|x| x / norm).collect()
            })
            .collect();
        let r = component_gaussianity(vecs.iter().map(|v| v.as_slice()), &order, 10, &NormalityThresholds::default())
            .unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn permutation_vectors_fail() {
        let n = 200;
        let order: Vec<usize> = (0..n).collect();
        let vecs: Vec<Vec<f64>> = (0..n)
            .map(|a| {
                let mut v = vec![0.0; n];
                v[a] = 1.0;
                v
            })
            .collect();
        let r = component_gaussianity(vecs.iter().map(|v| v.as_slice()), &order, 10, &NormalityThresholds::default())
            .unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn envelope_rescaling_of_flat_vector() {
        let v = vec![0.5, -0.5, 0.5, -0.5];
        let r = rescaled_components(&v, &[0, 1, 2, 3], 1);
        assert_eq!(r, vec![1.0, -1.0, 1.0, -1.0]);
    }
}
