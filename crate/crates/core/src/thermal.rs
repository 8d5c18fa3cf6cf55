//! Occupation-number distributions of eigenstates, the Bose-Einstein
//! distribution with bare and dressed energies, occupation fluctuations and
//! the local thermalization criterion `V > d_loc`.

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::basis::FockBasis;
use crate::eigenstate;
use crate::model::TbriModel;
use crate::spectral::SpectralDecomposition;
use crate::stats::{self, NormalityReport, NormalityThresholds};
use crate::{Error, Result};

/// Occupation numbers `n_s = ⟨α|n̂_s|α⟩` of one eigenstate.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OccupationDistribution {
    pub eigenstate: usize,
    pub values: Vec<f64>,
    /// `E^α`.
    pub energy: f64,
    /// `⟨α|H₀|α⟩ = E^α + Δ_α`.
    pub dressed_energy: f64,
    /// `Δ_α`.
    pub shift: f64,
}

pub fn occupation_numbers(
    spec: &SpectralDecomposition,
    basis: &FockBasis,
    model: &TbriModel,
    alpha: usize,
) -> Result<OccupationDistribution> {
    if alpha >= spec.dimension() {
        return Err(Error::IndexOutOfRange {
            index: alpha,
            dimension: spec.dimension(),
        });
    }
    if basis.len() != spec.dimension() || basis.n_levels() != model.n_levels() {
        return Err(Error::InvalidParameter("basis does not match the decomposition or model".into()));
    }
    let m = basis.n_levels();
    let weights = spec.eigenstate_weights(alpha);
    let mut per_level: Vec<Vec<f64>> = (0..m).map(|_| Vec::with_capacity(weights.len())).collect();
    let mut h0 = Vec::with_capacity(weights.len());
    for (k, &w) in weights.iter().enumerate() {
        let occ = basis.state(k);
        for s in 0..m {
            per_level[s].push(w * occ[s] as f64);
        }
        h0.push(w * model.unperturbed_energy(occ));
    }
    let values: Vec<f64> = per_level.iter().map(|v| stats::pairwise_sum(v)).collect();
    let energy = spec.eigenvalues()[alpha];
    let dressed_energy = stats::pairwise_sum(&h0);
    Ok(OccupationDistribution {
        eigenstate: alpha,
        values,
        energy,
        dressed_energy,
        shift: dressed_energy - energy,
    })
}

/// Elementwise mean of several distributions (used for window averages).
pub fn mean_occupations(dists: &[&[f64]]) -> Vec<f64> {
    let n = dists.len() as f64;
    stats::pairwise_sum_vectors(dists).into_iter().map(|x| x / n).collect()
}

/// Solution of the Bose-Einstein particle and energy constraints.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BedSolution {
    pub beta: f64,
    /// `ln z`; `z` itself may underflow at large `β`.
    pub ln_z: f64,
    pub z: f64,
    /// `μ = ln z / β`, absent at `β = 0`.
    pub mu: Option<f64>,
    pub predicted: Vec<f64>,
    pub particle_residual: f64,
    pub energy_residual: f64,
    pub iterations: usize,
}

/// Bracketing and iteration limits of the nested bisection.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BedSolverOptions {
    /// Initial `β` bracket `[-beta_bracket, beta_bracket]`.
    pub beta_bracket: f64,
    /// The bracket is doubled up to this bound when the target lies outside.
    pub max_beta: f64,
    pub max_iterations: usize,
}

impl Default for BedSolverOptions {
    fn default() -> Self {
        BedSolverOptions {
            beta_bracket: 50.0,
            max_beta: 1e8,
            max_iterations: 200,
        }
    }
}

/// Occupations at fixed `β` as a function of `u = ln z - min_s β ε_s < 0`.
fn occupations_at(scaled: &[f64], u: f64, out: &mut [f64]) -> f64 {
    for (o, &a) in out.iter_mut().zip(scaled) {
        *o = 1.0 / (a - u).exp_m1();
    }
    out.iter().sum()
}

/// Inner solve: the `u` reproducing `n_particles`, with the resulting
/// occupations left in `out`.
fn solve_particles(scaled: &[f64], n: f64, out: &mut [f64], max_iter: usize) -> f64 {
    let m = scaled.len() as f64;
    // Every n_s ≤ 1/expm1(-u), and the lowest level alone reaches it.
    let mut lo = -(m / n).ln_1p();
    let mut hi = -(1.0 / n).ln_1p();
    for _ in 0..max_iter.max(1) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if occupations_at(scaled, mid, out) < n {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lo_err = (occupations_at(scaled, lo, out) - n).abs();
    let hi_err = (occupations_at(scaled, hi, out) - n).abs();
    let u = if lo_err <= hi_err { lo } else { hi };
    occupations_at(scaled, u, out);
    u
}

struct Evaluation {
    u: f64,
    min_scaled: f64,
    energy: f64,
}

fn evaluate(eps: &[f64], n: f64, beta: f64, out: &mut [f64], scratch: &mut [f64], max_iter: usize) -> Evaluation {
    let min_scaled = eps.iter().map(|e| beta * e).fold(f64::INFINITY, f64::min);
    for (s, e) in scratch.iter_mut().zip(eps) {
        *s = beta * e - min_scaled;
    }
    let u = solve_particles(scratch, n, out, max_iter);
    let energy = eps.iter().zip(out.iter()).map(|(e, x)| e * x).sum();
    Evaluation { u, min_scaled, energy }
}

/// Solve `Σ n_s = N`, `Σ ε_s n_s = E` for `n_s = 1/(z⁻¹e^{βε_s} - 1)`.
pub fn solve_bed(sp_energies: &[f64], n_particles: usize, target_energy: f64) -> Result<BedSolution> {
    solve_bed_with(sp_energies, n_particles, target_energy, &BedSolverOptions::default())
}

pub fn solve_bed_with(
    sp_energies: &[f64],
    n_particles: usize,
    target_energy: f64,
    options: &BedSolverOptions,
) -> Result<BedSolution> {
    if n_particles == 0 || sp_energies.len() < 2 {
        return Err(Error::InvalidParameter("need at least one particle and two levels".into()));
    }
    let n = n_particles as f64;
    let e_min = sp_energies.iter().copied().fold(f64::INFINITY, f64::min);
    let e_max = sp_energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (low, high) = (n * e_min, n * e_max);
    if !(target_energy > low && target_energy < high) {
        return Err(Error::EnergyOutOfRange {
            target: target_energy,
            low,
            high,
        });
    }

    let m = sp_energies.len();
    let mut out = alloc::vec![0.0; m];
    let mut scratch = alloc::vec![0.0; m];
    let iters = options.max_iterations;
    let mut eval = |beta: f64, out: &mut [f64]| evaluate(sp_energies, n, beta, out, &mut scratch, iters);

    // E(β) decreases in β.
    let mut b_lo = -options.beta_bracket;
    let mut b_hi = options.beta_bracket;
    while eval(b_lo, &mut out).energy < target_energy {
        b_lo *= 2.0;
        if -b_lo > options.max_beta {
            return Err(Error::NoConvergence(alloc::format!(
                "target energy {target_energy} needs beta below {b_lo}"
            )));
        }
    }
    while eval(b_hi, &mut out).energy > target_energy {
        b_hi *= 2.0;
        if b_hi > options.max_beta {
            return Err(Error::NoConvergence(alloc::format!(
                "target energy {target_energy} needs beta above {b_hi}"
            )));
        }
    }

    let mut iterations = 0;
    while iterations < options.max_iterations {
        iterations += 1;
        let mid = 0.5 * (b_lo + b_hi);
        if mid <= b_lo || mid >= b_hi {
            break;
        }
        let e = eval(mid, &mut out).energy;
        if e == target_energy {
            b_lo = mid;
            b_hi = mid;
            break;
        }
        if e > target_energy {
            b_lo = mid;
        } else {
            b_hi = mid;
        }
    }
    let e_lo = eval(b_lo, &mut out).energy;
    let e_hi = eval(b_hi, &mut out).energy;
    let beta = if (e_lo - target_energy).abs() <= (e_hi - target_energy).abs() {
        b_lo
    } else {
        b_hi
    };
    let ev = eval(beta, &mut out);
    let ln_z = ev.u + ev.min_scaled;
    let particles: f64 = out.iter().sum();
    let energy_scale = (high - low).max(target_energy.abs());
    let particle_residual = particles - n;
    let energy_residual = ev.energy - target_energy;
    if particle_residual.abs() > 1e-9 * n || energy_residual.abs() > 1e-9 * energy_scale {
        return Err(Error::NoConvergence(alloc::format!(
            "residuals {particle_residual:e} (particles), {energy_residual:e} (energy) at beta {beta}"
        )));
    }
    Ok(BedSolution {
        beta,
        ln_z,
        z: ln_z.exp(),
        mu: (beta != 0.0).then(|| ln_z / beta),
        predicted: out,
        particle_residual,
        energy_residual,
        iterations,
    })
}

/// Squared deviation `Σ (n_s - p_s)²`, optionally divided by `δn_s²`.
pub fn chi2(measured: &[f64], predicted: &[f64], sigma: Option<&[f64]>) -> f64 {
    measured
        .iter()
        .zip(predicted)
        .enumerate()
        .map(|(s, (m, p))| {
            let d = m - p;
            match sigma {
                Some(sig) if sig[s] > 0.0 => (d / sig[s]).powi(2),
                _ => d * d,
            }
        })
        .sum()
}

/// Bose-Einstein fits at the bare energy `E^α` and the dressed energy
/// `E^α + Δ_α`. Each branch fails independently.
#[derive(Debug, Clone)]
pub struct BedComparison {
    pub bare: Result<BedSolution>,
    pub dressed: Result<BedSolution>,
    pub chi2_bare: Option<f64>,
    pub chi2_dressed: Option<f64>,
}

pub fn bed_comparison(dist: &OccupationDistribution, sp_energies: &[f64], sigma: Option<&[f64]>) -> BedComparison {
    let n = stats::pairwise_sum(&dist.values).round() as usize;
    let bare = solve_bed(sp_energies, n, dist.energy);
    let dressed = solve_bed(sp_energies, n, dist.dressed_energy);
    let chi2_bare = bare.as_ref().ok().map(|b| chi2(&dist.values, &b.predicted, sigma));
    let chi2_dressed = dressed.as_ref().ok().map(|b| chi2(&dist.values, &b.predicted, sigma));
    BedComparison {
        bare,
        dressed,
        chi2_bare,
        chi2_dressed,
    }
}

impl BedComparison {
    /// Whether the dressed-energy fit describes the occupations better.
    /// A bare energy outside the reachable band `(Nε_min, Nε_max)` admits no
    /// Bose-Einstein solution at all and counts as a win for the dressed
    /// fit. `None` when the dressed fit failed or the bare one failed for
    /// another reason.
    pub fn dressed_preferred(&self) -> Option<bool> {
        let dressed = self.chi2_dressed?;
        match (&self.bare, self.chi2_bare) {
            (_, Some(bare)) => Some(dressed < bare),
            (Err(Error::EnergyOutOfRange { .. }), None) => Some(true),
            _ => None,
        }
    }
}

/// Pooled `ζ_s = (n_s - ⟨n_s⟩)/δn_s` statistics.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FluctuationReport {
    pub samples: usize,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    /// Orbitals with zero variance, left out of the pool.
    pub excluded_orbitals: Vec<usize>,
    pub zeta: Vec<f64>,
    pub normality: NormalityReport,
}

impl FluctuationReport {
    /// Histogram of the pooled `ζ` over `[-half_range, half_range]`, as a
    /// probability density; values outside are dropped.
    pub fn zeta_histogram(&self, n_bins: usize, half_range: f64) -> (Vec<f64>, Vec<f64>) {
        let edges = crate::fit::linspace(-half_range, half_range, n_bins + 1);
        let mut counts = alloc::vec![0.0; n_bins];
        let width = 2.0 * half_range / n_bins as f64;
        for &z in &self.zeta {
            if z >= -half_range && z <= half_range {
                let i = (((z + half_range) / width) as usize).min(n_bins - 1);
                counts[i] += 1.0;
            }
        }
        let norm = self.zeta.len() as f64 * width;
        (edges, counts.into_iter().map(|c| c / norm).collect())
    }
}

/// Standardize every orbital over the ensemble (realizations × eigenstate
/// window) and test the pooled distribution for normality.
pub fn occupation_fluctuations(samples: &[&[f64]], thresholds: &NormalityThresholds) -> Result<FluctuationReport> {
    occupation_fluctuations_grouped(&[samples], thresholds)
}

/// As [`occupation_fluctuations`], but `⟨n_s⟩` and `δn_s` are taken within
/// each group separately before pooling (for example one group per position
/// in the eigenstate window, so that statistics run over realizations only).
/// An orbital with zero variance inside a group is skipped for that group.
/// The reported means and spreads cover all samples together.
pub fn occupation_fluctuations_grouped(groups: &[&[&[f64]]], thresholds: &NormalityThresholds) -> Result<FluctuationReport> {
    let m = groups.iter().flat_map(|g| g.first()).next().map_or(0, |s| s.len());
    if groups.iter().flat_map(|g| g.iter()).any(|s| s.len() != m) {
        return Err(Error::InvalidParameter("occupation samples differ in length".into()));
    }
    let total: usize = groups.iter().map(|g| g.len()).sum();
    let mut means = Vec::with_capacity(m);
    let mut stds = Vec::with_capacity(m);
    let mut excluded_orbitals = Vec::new();
    let mut zeta = Vec::with_capacity(total * m);
    for s in 0..m {
        let all: Vec<f64> = groups.iter().flat_map(|g| g.iter().map(|x| x[s])).collect();
        let mo = stats::Moments::of(&all);
        means.push(mo.mean);
        stds.push(mo.std());
        let mut skipped = false;
        for g in groups {
            let column: Vec<f64> = g.iter().map(|x| x[s]).collect();
            let mo = stats::Moments::of(&column);
            let sd = mo.std();
            if !(sd > 1e-12 * mo.mean.abs().max(1.0)) {
                skipped = true;
                continue;
            }
            zeta.extend(column.iter().map(|x| (x - mo.mean) / sd));
        }
        if skipped {
            excluded_orbitals.push(s);
        }
    }
    let normality = stats::normality_test(&zeta, thresholds)?;
    Ok(FluctuationReport {
        samples: total,
        means,
        stds,
        excluded_orbitals,
        zeta,
        normality,
    })
}

/// How the number of principal components is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum NpcMeasure {
    #[default]
    ParticipationRatio,
    ShannonEntropy,
}

impl core::str::FromStr for NpcMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pr" | "participation-ratio" => Ok(NpcMeasure::ParticipationRatio),
            "entropy" | "shannon-entropy" => Ok(NpcMeasure::ShannonEntropy),
            _ => Err(Error::InvalidParameter(alloc::format!("unknown N_pc measure '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Verdict {
    Thermal,
    NonThermal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ThermalVerdict {
    pub alpha: usize,
    pub energy: f64,
    pub delta0: f64,
    pub n_pc: f64,
    pub d_loc: f64,
    /// `V / d_loc`; absent when `d_loc = 0`.
    pub ratio: Option<f64>,
    pub fluctuation_pass: bool,
    pub verdict: Verdict,
}

impl ThermalVerdict {
    pub fn ln_ratio(&self) -> Option<f64> {
        self.ratio.filter(|r| *r > 0.0).map(|r| r.ln())
    }
}

/// Energy width `δ₀` of an eigenstate in the unperturbed basis.
pub fn delta0(weights: &[f64], h0_energies: &[f64]) -> f64 {
    let mean = stats::pairwise_sum(&weights.iter().zip(h0_energies).map(|(w, e)| w * e).collect::<Vec<_>>());
    let var = stats::pairwise_sum(
        &weights
            .iter()
            .zip(h0_energies)
            .map(|(w, e)| w * (e - mean) * (e - mean))
            .collect::<Vec<_>>(),
    );
    let d = var.max(0.0).sqrt();
    // Rounding noise of an unperturbed eigenvector.
    if d < 1e-10 * mean.abs().max(1.0) {
        0.0
    } else {
        d
    }
}

/// `d_loc = δ₀ / N_pc` and the verdict `V > d_loc` combined with the
/// fluctuation test outcome.
pub fn local_criterion(
    spec: &SpectralDecomposition,
    h0_energies: &[f64],
    alpha: usize,
    v: f64,
    measure: NpcMeasure,
    fluctuation_pass: bool,
) -> Result<ThermalVerdict> {
    if alpha >= spec.dimension() {
        return Err(Error::IndexOutOfRange {
            index: alpha,
            dimension: spec.dimension(),
        });
    }
    if h0_energies.len() != spec.dimension() {
        return Err(Error::InvalidParameter("unperturbed energies do not match the decomposition".into()));
    }
    if !(v >= 0.0) {
        return Err(Error::InvalidParameter(alloc::format!("V must be non-negative, got {v}")));
    }
    let vector = spec.eigenvector(alpha);
    let n_pc = match measure {
        NpcMeasure::ParticipationRatio => eigenstate::participation_ratio(vector)?,
        NpcMeasure::ShannonEntropy => eigenstate::entropy_count(vector)?,
    };
    let d0 = delta0(&spec.eigenstate_weights(alpha), h0_energies);
    let d_loc = d0 / n_pc;
    let ratio = (d_loc > 0.0).then(|| v / d_loc);
    let thermal = ratio.is_some_and(|r| r > 1.0) && fluctuation_pass;
    Ok(ThermalVerdict {
        alpha,
        energy: spec.eigenvalues()[alpha],
        delta0: d0,
        n_pc,
        d_loc,
        ratio,
        fluctuation_pass,
        verdict: if thermal { Verdict::Thermal } else { Verdict::NonThermal },
    })
}

/// Short label for reports.
pub fn verdict_label(v: Verdict) -> String {
    String::from(match v {
        Verdict::Thermal => "thermal",
        Verdict::NonThermal => "non-thermal",
    })
}
