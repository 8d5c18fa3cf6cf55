//! Dense exact diagonalization and density-of-states utilities.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::hamiltonian::SparseHamiltonian;
use crate::stats::Moments;
use crate::{Error, Result};

/// Default upper limit on `N_H` for dense diagonalization.
pub const DEFAULT_DIMENSION_CAP: usize = 20_000;

/// Eigenvalues `E^α` (ascending) and coefficients `C_k^α = ⟨k|α⟩`.
///
/// Coefficients are stored column-major: eigenvector `α` is the contiguous
/// slice `α·N_H .. (α+1)·N_H`. Its largest-magnitude component is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    coefficients: Vec<f64>,
}

impl SpectralDecomposition {
    /// Wrap precomputed eigenpairs given as a column-major `n × n` matrix;
    /// columns are reordered by eigenvalue and sign-normalized.
    pub fn from_eigenpairs(eigenvalues: Vec<f64>, coefficients: Vec<f64>) -> Result<Self> {
        let n = eigenvalues.len();
        if coefficients.len() != n * n {
            return Err(Error::InvalidParameter(alloc::format!(
                "{n} eigenvalues but {} coefficients",
                coefficients.len()
            )));
        }
        Ok(Self::build(eigenvalues, |a, k| coefficients[a * n + k]))
    }

    fn build(eigenvalues: Vec<f64>, entry: impl Fn(usize, usize) -> f64) -> Self {
        let n = eigenvalues.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]).then(a.cmp(&b)));
        let mut sorted = Vec::with_capacity(n * n);
        for &src in &order {
            let pivot = (0..n).fold(0.0f64, |best, k| {
                let x = entry(src, k);
                if x.abs() > best.abs() {
                    x
                } else {
                    best
                }
            });
            let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
            sorted.extend((0..n).map(|k| sign * entry(src, k)));
        }
        SpectralDecomposition {
            eigenvalues: order.iter().map(|&i| eigenvalues[i]).collect(),
            coefficients: sorted,
        }
    }

    pub fn dimension(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// All coefficients, column-major.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// `C_k^α`.
    #[inline]
    pub fn coefficient(&self, k: usize, alpha: usize) -> f64 {
        self.coefficients[alpha * self.dimension() + k]
    }

    /// Eigenvector `α` in the unperturbed basis.
    pub fn eigenvector(&self, alpha: usize) -> &[f64] {
        let n = self.dimension();
        &self.coefficients[alpha * n..(alpha + 1) * n]
    }

    /// `|C_k^α|²` over `α` for fixed basis state `k`.
    pub fn basis_state_weights(&self, k: usize) -> Vec<f64> {
        let n = self.dimension();
        (0..n).map(|a| self.coefficients[a * n + k].powi(2)).collect()
    }

    /// `|C_k^α|²` over `k` for fixed eigenstate `α`.
    pub fn eigenstate_weights(&self, alpha: usize) -> Vec<f64> {
        self.eigenvector(alpha).iter().map(|c| c * c).collect()
    }

    /// `‖H|α⟩ - E^α|α⟩‖` for every `α`, using the sparse matrix.
    pub fn residuals(&self, h: &SparseHamiltonian) -> Vec<f64> {
        (0..self.dimension())
            .map(|a| {
                let v = self.eigenvector(a);
                let mut hv: Vec<f64> = h.diagonal().iter().zip(v).map(|(d, x)| d * x).collect();
                for e in h.off_diagonal() {
                    let (r, c) = (e.row as usize, e.col as usize);
                    hv[r] += e.value * v[c];
                    hv[c] += e.value * v[r];
                }
                let e = self.eigenvalues[a];
                hv.iter().zip(v).map(|(y, x)| (y - e * x).powi(2)).sum::<f64>().sqrt()
            })
            .collect()
    }
}

/// Full dense eigendecomposition with the default dimension cap.
pub fn diagonalize(h: &SparseHamiltonian) -> Result<SpectralDecomposition> {
    diagonalize_with_cap(h, DEFAULT_DIMENSION_CAP)
}

pub fn diagonalize_with_cap(h: &SparseHamiltonian, cap: usize) -> Result<SpectralDecomposition> {
    let n = h.dimension();
    if n > cap {
        return Err(Error::DimensionOverCap { dimension: n, cap });
    }
    if n == 0 {
        return Ok(SpectralDecomposition::build(Vec::new(), |_, _| 0.0));
    }
    let eig = h
        .to_dense()
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::NoConvergence(alloc::format!("eigensolver: {e:?}")))?;
    let values: Vec<f64> = eig.S().column_vector().iter().copied().collect();
    let u = eig.U();
    Ok(SpectralDecomposition::build(values, |a, k| u[(k, a)]))
}

/// Eigenvalues only, ascending. Skips eigenvector accumulation.
pub fn eigenvalues_only(h: &SparseHamiltonian, cap: usize) -> Result<Vec<f64>> {
    let n = h.dimension();
    if n > cap {
        return Err(Error::DimensionOverCap { dimension: n, cap });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut e = h
        .to_dense()
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| Error::NoConvergence(alloc::format!("eigensolver: {e:?}")))?;
    e.sort_by(f64::total_cmp);
    Ok(e)
}

/// Histogram of eigenvalues.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DosHistogram {
    /// `n_bins + 1` ascending edges.
    pub bin_edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// `counts / bin width`; integrates to the number of eigenvalues.
    pub density: Vec<f64>,
    pub moments: Moments,
}

impl DosHistogram {
    pub fn bin_centers(&self) -> Vec<f64> {
        self.bin_edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Density of states over `[min E, max E]` with `n_bins` equal bins.
pub fn dos(eigenvalues: &[f64], n_bins: usize) -> Result<DosHistogram> {
    if n_bins < 2 {
        return Err(Error::InvalidParameter(alloc::format!("need at least 2 bins, got {n_bins}")));
    }
    if eigenvalues.is_empty() {
        return Err(Error::InvalidParameter("no eigenvalues".into()));
    }
    let lo = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // A single repeated value gets a unit-width window around it.
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
    let width = (hi - lo) / n_bins as f64;
    let bin_edges: Vec<f64> = (0..=n_bins).map(|i| lo + width * i as f64).collect();
    let mut counts = alloc::vec![0usize; n_bins];
    for &e in eigenvalues {
        let i = (((e - lo) / width) as usize).min(n_bins - 1);
        counts[i] += 1;
    }
    let density = counts.iter().map(|&c| c as f64 / width).collect();
    Ok(DosHistogram {
        bin_edges,
        counts,
        density,
        moments: Moments::of(eigenvalues),
    })
}
