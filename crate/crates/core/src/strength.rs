//! Strength functions, F-functions and their line shapes.
//!
//! The strength function of basis state `k` distributes `|C_k^α|²` over the
//! exact energies `E^α`; the F-function of eigenstate `α` distributes the same
//! weights over the unperturbed energies `E⁰_k`. Both are binned around their
//! exact centroid in units of their exact width, then fitted with a
//! normalized Lorentzian (Breit-Wigner) and a Gaussian.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::fit::{grid_scan, linspace, nelder_mead_2d};
use crate::hamiltonian::SparseHamiltonian;
use crate::spectral::SpectralDecomposition;
use crate::stats::{self, normal_cdf};
use crate::{Error, Result};

/// Top-bin weight above which a profile counts as perturbative.
pub const DELTA_LIKE_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Shape {
    DeltaLike,
    BreitWigner,
    Gaussian,
    Undetermined,
}

impl core::fmt::Display for Shape {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Shape::DeltaLike => "delta-like",
            Shape::BreitWigner => "breit-wigner",
            Shape::Gaussian => "gaussian",
            Shape::Undetermined => "undetermined",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Subject {
    /// Strength function of basis state `k`.
    BasisState(usize),
    /// F-function of eigenstate `α`.
    Eigenstate(usize),
}

/// Histogram layout: `n_bins` equal bins over `centroid ± half_width · width`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Binning {
    pub n_bins: usize,
    /// Half-range in units of the exact width.
    pub half_width: f64,
}

impl Default for Binning {
    fn default() -> Self {
        Binning {
            n_bins: 51,
            half_width: 4.0,
        }
    }
}

impl Binning {
    pub fn validate(&self) -> Result<()> {
        if self.n_bins < 3 || !(self.half_width > 0.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "binning needs at least 3 bins and a positive half width, got {} and {}",
                self.n_bins,
                self.half_width
            )));
        }
        Ok(())
    }

    /// Bin edges in units of the exact width, centred on zero.
    pub fn unit_edges(&self) -> Vec<f64> {
        linspace(-self.half_width, self.half_width, self.n_bins + 1)
    }
}

/// Binned weights. The first and last bins also hold everything beyond the
/// outer edges.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProfileHistogram {
    pub edges: Vec<f64>,
    pub weights: Vec<f64>,
}

impl ProfileHistogram {
    pub fn empty(edges: Vec<f64>) -> Self {
        let n = edges.len() - 1;
        ProfileHistogram {
            edges,
            weights: alloc::vec![0.0; n],
        }
    }

    /// Bin `weights` located at `positions`.
    pub fn from_weighted(edges: Vec<f64>, positions: &[f64], weights: &[f64]) -> Self {
        let mut h = Self::empty(edges);
        for (&x, &w) in positions.iter().zip(weights) {
            let i = h.bin_of(x);
            h.weights[i] += w;
        }
        h
    }

    fn bin_of(&self, x: f64) -> usize {
        let n = self.weights.len();
        let lo = self.edges[0];
        let hi = self.edges[n];
        if !(x > lo) {
            return 0;
        }
        if x >= hi {
            return n - 1;
        }
        (((x - lo) / (hi - lo) * n as f64) as usize).min(n - 1)
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn bin_width(&self) -> f64 {
        (self.edges[self.edges.len() - 1] - self.edges[0]) / self.weights.len() as f64
    }

    pub fn total(&self) -> f64 {
        stats::pairwise_sum(&self.weights)
    }

    pub fn top_bin_weight(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    /// Mean and variance of the binned distribution using bin centres.
    pub fn binned_moments(&self) -> (f64, f64) {
        let total = self.total();
        let c = self.centers();
        let mean = c.iter().zip(&self.weights).map(|(x, w)| x * w).sum::<f64>() / total;
        let var = c.iter().zip(&self.weights).map(|(x, w)| (x - mean).powi(2) * w).sum::<f64>() / total;
        (mean, var)
    }
}

/// One fitted line shape.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShapeFit {
    pub center: f64,
    /// `Γ` (full width at half maximum) for Breit-Wigner, `σ` for Gaussian.
    pub width: f64,
    /// Sum of squared deviations of bin weights.
    pub sse: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineShape {
    BreitWigner,
    Gaussian,
}

impl LineShape {
    /// Cumulative distribution of the normalized shape.
    pub fn cdf(self, x: f64, center: f64, width: f64) -> f64 {
        match self {
            LineShape::BreitWigner => 0.5 + (2.0 * (x - center) / width).atan() / PI,
            LineShape::Gaussian => normal_cdf((x - center) / width),
        }
    }

    /// Normalized density.
    pub fn density(self, x: f64, center: f64, width: f64) -> f64 {
        match self {
            LineShape::BreitWigner => {
                let h = 0.5 * width;
                h / (PI * ((x - center).powi(2) + h * h))
            }
            LineShape::Gaussian => {
                let z = (x - center) / width;
                (-0.5 * z * z).exp() / (width * (2.0 * PI).sqrt())
            }
        }
    }

    /// Expected bin weights; the outer bins absorb the tails.
    pub fn bin_weights(self, edges: &[f64], center: f64, width: f64) -> Vec<f64> {
        let n = edges.len() - 1;
        (0..n)
            .map(|i| {
                let lo = if i == 0 { 0.0 } else { self.cdf(edges[i], center, width) };
                let hi = if i == n - 1 { 1.0 } else { self.cdf(edges[i + 1], center, width) };
                hi - lo
            })
            .collect()
    }

    /// Least-squares fit of `center` and `width` to normalized bin weights.
    pub fn fit(self, hist: &ProfileHistogram) -> ShapeFit {
        let edges = &hist.edges;
        let lo = edges[0];
        let hi = edges[edges.len() - 1];
        let range = hi - lo;
        let bw = hist.bin_width();
        let sse = |p: [f64; 2]| {
            let width = p[1].exp();
            if !width.is_finite() || width <= 0.0 {
                return f64::INFINITY;
            }
            self.bin_weights(edges, p[0], width)
                .iter()
                .zip(&hist.weights)
                .map(|(m, w)| (m - w) * (m - w))
                .sum::<f64>()
        };
        let centers = linspace(lo + 0.25 * range, hi - 0.25 * range, 21);
        let log_widths = linspace((0.05 * bw).ln(), (2.0 * range).ln(), 40);
        let (start, _) = grid_scan(sse, &centers, &log_widths);
        let m = nelder_mead_2d(sse, start, [0.5 * bw, 0.2], 1e-12, 4000);
        let width = m.point[1].exp();
        ShapeFit {
            center: m.point[0],
            width,
            sse: m.value,
            converged: m.converged && m.value.is_finite() && width.is_finite(),
        }
    }
}

/// Both fits and the resulting classification.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShapeAnalysis {
    pub breit_wigner: ShapeFit,
    pub gaussian: ShapeFit,
    pub top_bin_weight: f64,
    pub preferred: Shape,
}

/// Fit both shapes to a normalized histogram and pick the preferred one:
/// delta-like when the top bin exceeds `delta_threshold`, otherwise the
/// smaller SSE, or undetermined when a fit fails to converge.
pub fn analyze_shapes(hist: &ProfileHistogram, delta_threshold: f64) -> ShapeAnalysis {
    let breit_wigner = LineShape::BreitWigner.fit(hist);
    let gaussian = LineShape::Gaussian.fit(hist);
    let top_bin_weight = hist.top_bin_weight() / hist.total();
    let preferred = if top_bin_weight > delta_threshold {
        Shape::DeltaLike
    } else if !(breit_wigner.converged && gaussian.converged) {
        Shape::Undetermined
    } else if breit_wigner.sse < gaussian.sse {
        Shape::BreitWigner
    } else {
        Shape::Gaussian
    };
    ShapeAnalysis {
        breit_wigner,
        gaussian,
        top_bin_weight,
        preferred,
    }
}

/// Binned strength function or F-function of one state.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StrengthProfile {
    pub subject: Subject,
    /// `Σ w E`.
    pub centroid: f64,
    /// `sqrt(Σ w (E - centroid)²)`.
    pub exact_width: f64,
    /// Bins in absolute energy.
    pub histogram: ProfileHistogram,
    pub fit_bw: ShapeFit,
    pub fit_gauss: ShapeFit,
    pub preferred_shape: Shape,
}

impl StrengthProfile {
    /// Refit both shapes with a different delta-like threshold.
    pub fn fit_shapes(&mut self, delta_threshold: f64) {
        let a = analyze_shapes(&self.histogram, delta_threshold);
        self.fit_bw = a.breit_wigner;
        self.fit_gauss = a.gaussian;
        self.preferred_shape = a.preferred;
    }
}

/// Centroid and width of a weighted point set.
pub fn weighted_moments(positions: &[f64], weights: &[f64]) -> (f64, f64) {
    let total: f64 = weights.iter().sum();
    let centroid = positions.iter().zip(weights).map(|(x, w)| x * w).sum::<f64>() / total;
    let var = positions
        .iter()
        .zip(weights)
        .map(|(x, w)| (x - centroid).powi(2) * w)
        .sum::<f64>()
        / total;
    (centroid, var.max(0.0).sqrt())
}

/// Bin weights in units of the exact width around the centroid. A zero width
/// puts everything in the central bin(s).
pub fn unit_histogram(positions: &[f64], weights: &[f64], centroid: f64, width: f64, binning: &Binning) -> ProfileHistogram {
    let scaled: Vec<f64> = if width > 0.0 {
        positions.iter().map(|x| (x - centroid) / width).collect()
    } else {
        alloc::vec![0.0; positions.len()]
    };
    ProfileHistogram::from_weighted(binning.unit_edges(), &scaled, weights)
}

fn profile(subject: Subject, positions: &[f64], weights: &[f64], binning: &Binning) -> Result<StrengthProfile> {
    binning.validate()?;
    let (centroid, exact_width) = weighted_moments(positions, weights);
    let scale = if exact_width > 0.0 { exact_width } else { 1.0 };
    let edges: Vec<f64> = binning.unit_edges().iter().map(|u| centroid + u * scale).collect();
    let histogram = ProfileHistogram::from_weighted(edges, positions, weights);
    let a = analyze_shapes(&histogram, DELTA_LIKE_THRESHOLD);
    Ok(StrengthProfile {
        subject,
        centroid,
        exact_width,
        histogram,
        fit_bw: a.breit_wigner,
        fit_gauss: a.gaussian,
        preferred_shape: a.preferred,
    })
}

/// Strength function `F_k(E) = Σ_α |C_k^α|² δ(E - E^α)` of basis state `k`.
pub fn strength_function(spec: &SpectralDecomposition, k: usize, binning: &Binning) -> Result<StrengthProfile> {
    if k >= spec.dimension() {
        return Err(Error::IndexOutOfRange {
            index: k,
            dimension: spec.dimension(),
        });
    }
    profile(Subject::BasisState(k), spec.eigenvalues(), &spec.basis_state_weights(k), binning)
}

/// F-function `F^α(E) = Σ_k |C_k^α|² δ(E - E⁰_k)` of eigenstate `α`.
pub fn f_function(spec: &SpectralDecomposition, h0_energies: &[f64], alpha: usize, binning: &Binning) -> Result<StrengthProfile> {
    if alpha >= spec.dimension() {
        return Err(Error::IndexOutOfRange {
            index: alpha,
            dimension: spec.dimension(),
        });
    }
    if h0_energies.len() != spec.dimension() {
        return Err(Error::InvalidParameter("unperturbed energies do not match the decomposition".into()));
    }
    profile(Subject::Eigenstate(alpha), h0_energies, &spec.eigenstate_weights(alpha), binning)
}

/// Indices of the `count` entries closest to the middle of `energies` by rank.
pub fn mid_spectrum_indices(energies: &[f64], count: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..energies.len()).collect();
    order.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]).then(a.cmp(&b)));
    let count = count.min(order.len());
    let start = (order.len() - count) / 2;
    order[start..start + count].to_vec()
}

/// Fermi golden rule width `Γ_E = 2π V² / d_f`.
pub fn fermi_golden_rule_width(v: f64, d_f: f64) -> Result<f64> {
    if !(d_f > 0.0) {
        return Err(Error::InvalidParameter(alloc::format!("d_f must be positive, got {d_f}")));
    }
    Ok(2.0 * PI * v * v / d_f)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpacingEntry {
    /// `E⁰_k`.
    pub energy: f64,
    /// Number of structurally coupled states `M_eff^k`.
    pub m_eff: usize,
    /// Energy range spanned by `k` and its coupled states.
    pub energy_range: f64,
    /// `None` for isolated rows.
    pub d_f: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpacingSummary {
    pub mean: f64,
    /// Spread (sample standard deviation) of `d_f` across states.
    pub std: f64,
    pub count: usize,
}

/// Fraction window `[lower, upper)` of states ranked by `E⁰_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RankWindow {
    pub lower: f64,
    pub upper: f64,
}

impl RankWindow {
    pub const FULL: RankWindow = RankWindow { lower: 0.0, upper: 1.0 };
    pub const CENTRAL_HALF: RankWindow = RankWindow { lower: 0.25, upper: 0.75 };
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EffectiveSpacing {
    pub per_state: Vec<SpacingEntry>,
    pub window: RankWindow,
    /// Statistics over states in the window that have couplings.
    pub summary: Option<SpacingSummary>,
    /// Isolated rows dropped from the summary.
    pub excluded: usize,
}

/// Effective spacing `d_f(E⁰_k) = (ΔE₀)_eff^k / M_eff^k` between directly
/// coupled states, summarized over the central half of the unperturbed
/// spectrum.
pub fn effective_spacing(h: &SparseHamiltonian) -> EffectiveSpacing {
    effective_spacing_in(h, RankWindow::CENTRAL_HALF)
}

pub fn effective_spacing_in(h: &SparseHamiltonian, window: RankWindow) -> EffectiveSpacing {
    let e0 = h.h0_diagonal();
    let (offsets, neighbours) = h.adjacency();
    let per_state: Vec<SpacingEntry> = (0..h.dimension())
        .map(|k| {
            let nb = &neighbours[offsets[k]..offsets[k + 1]];
            let (lo, hi) = nb
                .iter()
                .map(|&j| e0[j as usize])
                .fold((e0[k], e0[k]), |(lo, hi), e| (lo.min(e), hi.max(e)));
            let m_eff = nb.len();
            SpacingEntry {
                energy: e0[k],
                m_eff,
                energy_range: hi - lo,
                d_f: (m_eff > 0).then(|| (hi - lo) / m_eff as f64),
            }
        })
        .collect();

    let mut order: Vec<usize> = (0..per_state.len()).collect();
    order.sort_by(|&a, &b| e0[a].total_cmp(&e0[b]).then(a.cmp(&b)));
    let n = order.len();
    let start = ((window.lower * n as f64).floor() as usize).min(n);
    let end = ((window.upper * n as f64).ceil() as usize).clamp(start, n);
    let mut values = Vec::new();
    let mut excluded = 0;
    for &k in &order[start..end] {
        match per_state[k].d_f {
            Some(d) => values.push(d),
            None => excluded += 1,
        }
    }
    let summary = (!values.is_empty()).then(|| {
        let (mean, std) = stats::mean_std(&values);
        SpacingSummary {
            mean,
            std,
            count: values.len(),
        }
    });
    EffectiveSpacing {
        per_state,
        window,
        summary,
        excluded,
    }
}

/// Predicted Breit-Wigner to Gaussian crossover `V_c = ⟨d_f⟩ √(N+1)` and the
/// band `(⟨d_f⟩ ± δd_f) √(N+1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Crossover {
    pub v_c: f64,
    pub low: f64,
    pub high: f64,
}

pub fn crossover_estimate(spacing: &EffectiveSpacing, n_particles: usize) -> Result<Crossover> {
    let s = spacing
        .summary
        .ok_or_else(|| Error::InvalidParameter("effective spacing summary is empty".into()))?;
    Ok(crossover_from_summary(&s, n_particles))
}

pub fn crossover_from_summary(s: &SpacingSummary, n_particles: usize) -> Crossover {
    let f = (n_particles as f64 + 1.0).sqrt();
    Crossover {
        v_c: s.mean * f,
        low: (s.mean - s.std) * f,
        high: (s.mean + s.std) * f,
    }
}

/// One point of an interaction-strength sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepPoint {
    pub v: f64,
    /// Fitted Breit-Wigner `Γ` in energy units.
    pub gamma_fit: f64,
    /// Mean exact width `ΔE_k`.
    pub exact_width: f64,
    pub shape: Shape,
}

/// Power laws fitted along a sweep.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScalingReport {
    /// `d ln Γ / d ln V` over the Breit-Wigner points.
    pub gamma_slope: Option<f64>,
    pub gamma_intercept: Option<f64>,
    pub bw_points: usize,
    /// `d ln ΔE / d ln V` over all points with `V > 0`.
    pub width_slope: Option<f64>,
    pub width_intercept: Option<f64>,
    /// `V` at which the two power laws cross.
    pub intersection: Option<f64>,
}

pub fn analyze_sweep(points: &[SweepPoint]) -> ScalingReport {
    let bw: Vec<&SweepPoint> = points
        .iter()
        .filter(|p| p.shape == Shape::BreitWigner && p.v > 0.0 && p.gamma_fit > 0.0)
        .collect();
    let gamma = stats::linear_fit(
        &bw.iter().map(|p| p.v.ln()).collect::<Vec<_>>(),
        &bw.iter().map(|p| p.gamma_fit.ln()).collect::<Vec<_>>(),
    );
    let all: Vec<&SweepPoint> = points.iter().filter(|p| p.v > 0.0 && p.exact_width > 0.0).collect();
    let width = stats::linear_fit(
        &all.iter().map(|p| p.v.ln()).collect::<Vec<_>>(),
        &all.iter().map(|p| p.exact_width.ln()).collect::<Vec<_>>(),
    );
    let intersection = match (gamma, width) {
        (Some((ag, bg)), Some((aw, bw))) if (bg - bw).abs() > 1e-12 => Some(((aw - ag) / (bg - bw)).exp()),
        _ => None,
    };
    ScalingReport {
        gamma_slope: gamma.map(|g| g.1),
        gamma_intercept: gamma.map(|g| g.0),
        bw_points: bw.len(),
        width_slope: width.map(|w| w.1),
        width_intercept: width.map(|w| w.0),
        intersection,
    }
}

/// True when shapes along increasing `V` never step back from Gaussian to
/// Breit-Wigner or from either to delta-like, and undetermined never occurs.
pub fn shapes_are_ordered(shapes: &[Shape]) -> bool {
    shapes.iter().all(|s| *s != Shape::Undetermined) && shapes.windows(2).all(|w| w[0] <= w[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::FockBasis;
    use crate::hamiltonian::{self, OffDiagonal};
    use crate::model::{ModelParams, SpMode};
    use crate::spectral::diagonalize;
    use alloc::vec;

    fn sampled(shape: LineShape, width: f64, n_bins: usize, half: f64) -> ProfileHistogram {
        let edges = linspace(-half, half, n_bins + 1);
        let weights = shape.bin_weights(&edges, 0.0, width);
        ProfileHistogram { edges, weights }
    }

    #[test]
    fn self_fit_gaussian() {
        let h = sampled(LineShape::Gaussian, 1.0, 51, 4.0);
        let a = analyze_shapes(&h, DELTA_LIKE_THRESHOLD);
        assert_eq!(a.preferred, Shape::Gaussian);
        assert!((a.gaussian.width - 1.0).abs() < 1e-4, "{a:?}");
        assert!(a.gaussian.center.abs() < 1e-4);
    }

    #[test]
    fn self_fit_lorentzian() {
        // Truncated at ±10Γ.
        let gamma = 0.4;
        let h = sampled(LineShape::BreitWigner, gamma, 51, 10.0 * gamma);
        let a = analyze_shapes(&h, DELTA_LIKE_THRESHOLD);
        assert_eq!(a.preferred, Shape::BreitWigner);
        assert!((a.breit_wigner.width - gamma).abs() < 1e-4 * gamma, "{a:?}");
    }

    #[test]
    fn bin_weights_are_normalized() {
        let edges = linspace(-2.0, 2.0, 11);
        for shape in [LineShape::BreitWigner, LineShape::Gaussian] {
            let w: f64 = shape.bin_weights(&edges, 0.3, 0.7).iter().sum();
            assert!((w - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn density_integrates_to_cdf() {
        for shape in [LineShape::BreitWigner, LineShape::Gaussian] {
            let (a, b) = (-0.7, 1.1);
            let n = 20000;
            let dx = (b - a) / n as f64;
            let integral: f64 = (0..n).map(|i| shape.density(a + (i as f64 + 0.5) * dx, 0.2, 0.6) * dx).sum();
            let exact = shape.cdf(b, 0.2, 0.6) - shape.cdf(a, 0.2, 0.6);
            assert!((integral - exact).abs() < 1e-8);
        }
    }

    #[test]
    fn golden_rule() {
        assert!((fermi_golden_rule_width(0.1, 0.5).unwrap() - 0.125_663_706).abs() < 1e-8);
        assert_eq!(fermi_golden_rule_width(0.0, 0.3).unwrap(), 0.0);
        let a = fermi_golden_rule_width(0.2, 0.3).unwrap();
        let b = fermi_golden_rule_width(0.4, 0.3).unwrap();
        assert!((b / a - 4.0).abs() < 1e-12);
        assert!(fermi_golden_rule_width(0.1, 0.0).is_err());
        assert!(fermi_golden_rule_width(0.1, -1.0).is_err());
    }

    #[test]
    fn crossover_values() {
        let s = SpacingSummary { mean: 0.1, std: 0.02, count: 10 };
        let c = crossover_from_summary(&s, 3);
        assert!((c.v_c - 0.2).abs() < 1e-15);
        assert!(((c.v_c - c.low) - (c.high - c.v_c)).abs() < 1e-15);
    }

    #[test]
    fn zero_interaction_profiles_are_delta_like() {
        let basis = FockBasis::enumerate(3, 6).unwrap();
        let model = ModelParams::new(3, 6, 0.0, SpMode::UniformRandom).draw(1).unwrap();
        let h = hamiltonian::assemble(&model, &basis).unwrap();
        let s = diagonalize(&h).unwrap();
        let p = strength_function(&s, 10, &Binning::default()).unwrap();
        assert_eq!(p.preferred_shape, Shape::DeltaLike);
        assert_eq!(p.exact_width, 0.0);
        assert!((p.centroid - h.h0_diagonal()[10]).abs() < 1e-12);
        let f = f_function(&s, h.h0_diagonal(), 7, &Binning::default()).unwrap();
        assert_eq!(f.preferred_shape, Shape::DeltaLike);
        assert!((f.centroid - s.eigenvalues()[7]).abs() < 1e-12);
    }

    #[test]
    fn two_state_strength_function() {
        let v = 0.25;
        let h = SparseHamiltonian::from_parts(
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            vec![OffDiagonal { row: 0, col: 1, value: v }],
        )
        .unwrap();
        let s = diagonalize(&h).unwrap();
        let p = strength_function(&s, 0, &Binning::default()).unwrap();
        assert!(p.centroid.abs() < 1e-15);
        assert!((p.exact_width - v).abs() < 1e-14);
        let c = p.histogram.centers();
        let nonzero: Vec<(f64, f64)> = c
            .iter()
            .zip(&p.histogram.weights)
            .filter(|(_, &w)| w > 0.0)
            .map(|(&x, &w)| (x, w))
            .collect();
        assert_eq!(nonzero.len(), 2);
        for (_, w) in &nonzero {
            assert!((w - 0.5).abs() < 1e-14);
        }
        assert!(nonzero[0].0 < 0.0 && nonzero[1].0 > 0.0);
    }

    #[test]
    fn two_state_spacing() {
        let g = 1.7;
        let h = SparseHamiltonian::from_parts(
            vec![0.0, g],
            vec![0.0, g],
            vec![OffDiagonal { row: 0, col: 1, value: 0.1 }],
        )
        .unwrap();
        let sp = effective_spacing_in(&h, RankWindow::FULL);
        assert_eq!(sp.per_state[0].d_f, Some(g));
        assert_eq!(sp.per_state[1].d_f, Some(g));
        assert_eq!(sp.summary.unwrap().mean, g);
    }

    #[test]
    fn single_particle_spacing_is_empty() {
        let basis = FockBasis::enumerate(1, 6).unwrap();
        let model = ModelParams::new(1, 6, 0.3, SpMode::UniformRandom).draw(1).unwrap();
        let h = hamiltonian::assemble(&model, &basis).unwrap();
        let sp = effective_spacing(&h);
        assert!(sp.summary.is_none());
        assert!(sp.per_state.iter().all(|e| e.d_f.is_none()));
        assert!(sp.excluded > 0);
        assert!(crossover_estimate(&sp, 1).is_err());
    }

    #[test]
    fn sweep_power_laws() {
        let pts: Vec<SweepPoint> = [0.05, 0.1, 0.2, 0.4]
            .iter()
            .map(|&v| SweepPoint {
                v,
                gamma_fit: 3.0 * v * v,
                exact_width: 1.5 * v,
                shape: Shape::BreitWigner,
            })
            .collect();
        let r = analyze_sweep(&pts);
        assert!((r.gamma_slope.unwrap() - 2.0).abs() < 1e-12);
        assert!((r.width_slope.unwrap() - 1.0).abs() < 1e-12);
        assert!((r.intersection.unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn shape_ordering() {
        use Shape::*;
        assert!(shapes_are_ordered(&[DeltaLike, DeltaLike, BreitWigner, Gaussian, Gaussian]));
        assert!(!shapes_are_ordered(&[DeltaLike, Gaussian, BreitWigner]));
        assert!(!shapes_are_ordered(&[DeltaLike, Undetermined, Gaussian]));
    }

    #[test]
    fn out_of_range() {
        let h = SparseHamiltonian::from_parts(vec![0.0], vec![0.0], vec![]).unwrap();
        let s = diagonalize(&h).unwrap();
        assert!(strength_function(&s, 1, &Binning::default()).is_err());
        assert!(f_function(&s, &[0.0], 3, &Binning::default()).is_err());
    }

    #[test]
    fn mid_window_is_centered() {
        let e = [5.0, 1.0, 3.0, 2.0, 4.0];
        assert_eq!(mid_spectrum_indices(&e, 3), vec![3, 2, 4]);
        assert_eq!(mid_spectrum_indices(&e, 10).len(), 5);
    }
}
