//! The per-realization pipeline: draw, assemble, diagonalize and run the
//! enabled analyses, leaving everything the aggregation step needs in one
//! task directory.

use std::path::Path;

use serde::{Deserialize, Serialize};
use tbri_core::basis::FockBasis;
use tbri_core::eigenstate;
use tbri_core::hamiltonian::{self, Parts};
use tbri_core::model::TbriModel;
use tbri_core::spectral::{self, SpectralDecomposition};
use tbri_core::stats::Moments;
use tbri_core::strength::{self, SpacingSummary};
use tbri_core::thermal::{self, BedComparison, BedSolution, OccupationDistribution};

use crate::error::Result;
use crate::export;
use crate::plan::{SweepPlan, Task};

pub const RESULT_FILE: &str = "result.json";
pub const STATES_FILE: &str = "states.csv";
pub const OND_FILE: &str = "ond.bin";

/// Interaction strength of the interaction-only reference runs. PR does not
/// depend on the overall scale of `H_I`.
const REFERENCE_V: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskResult {
    pub format_version: u32,
    pub task: Task,
    pub v: f64,
    pub sp_seed: u64,
    pub two_body_seed: u64,
    pub dimension: usize,
    pub spectrum: SpectrumSummary,
    pub spacing: Option<SpacingSummary>,
    pub strength: Option<StrengthResult>,
    pub probes: Vec<ProbeResult>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub std: f64,
}

impl SpectrumSummary {
    pub fn of(eigenvalues: &[f64]) -> Self {
        let m = Moments::of(eigenvalues);
        SpectrumSummary {
            min: eigenvalues.first().copied().unwrap_or(0.0),
            max: eigenvalues.last().copied().unwrap_or(0.0),
            mean: m.mean,
            std: m.std(),
        }
    }
}

/// Strength functions of the mid-spectrum basis states of one realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrengthResult {
    /// Mean unit histogram over the window.
    pub histogram: Vec<f64>,
    /// Exact widths `ΔE_k` of the window states.
    pub widths: Vec<f64>,
}

/// Window-averaged occupations of one probe and their Bose-Einstein fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub label: String,
    pub lower_half: bool,
    pub first: usize,
    pub count: usize,
    pub energy: f64,
    pub dressed_energy: f64,
    pub occupations: Vec<f64>,
    pub bare: FitOutcome,
    pub dressed: FitOutcome,
    pub dressed_preferred: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOutcome {
    pub beta: Option<f64>,
    pub mu: Option<f64>,
    pub predicted: Option<Vec<f64>>,
    pub chi2: Option<f64>,
    pub error: Option<String>,
}

impl FitOutcome {
    pub fn new(solution: &tbri_core::Result<BedSolution>, chi2: Option<f64>) -> Self {
        match solution {
            Ok(s) => FitOutcome {
                beta: Some(s.beta),
                mu: s.mu,
                predicted: Some(s.predicted.clone()),
                chi2,
                error: None,
            },
            Err(e) => FitOutcome {
                beta: None,
                mu: None,
                predicted: None,
                chi2: None,
                error: Some(e.to_string()),
            },
        }
    }
}

/// One eigenstate of one realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateRow {
    pub alpha: usize,
    pub energy: f64,
    pub pr: f64,
    pub dressed_energy: Option<f64>,
    pub delta0: Option<f64>,
    pub n_pc: Option<f64>,
    pub d_loc: Option<f64>,
    pub ln_ratio: Option<f64>,
}

/// Everything the aggregation reads back from a task directory.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskData {
    pub result: TaskResult,
    pub states: Vec<StateRow>,
    /// Occupations, `n_levels` values per eigenstate in eigenvalue order.
    pub ond: Option<Vec<f64>>,
}

impl TaskData {
    pub fn occupations(&self, alpha: usize, n_levels: usize) -> Option<&[f64]> {
        self.ond.as_ref().map(|o| &o[alpha * n_levels..(alpha + 1) * n_levels])
    }
}

pub fn draw_model(plan: &SweepPlan, task: Task) -> Result<TbriModel> {
    let (v, v_index) = match task {
        Task::Point { v_index, .. } => (plan.v_grid[v_index], v_index),
        Task::Reference { .. } => (REFERENCE_V, 0),
    };
    Ok(plan
        .params(v)
        .draw_with_seeds(plan.sp_seed(), plan.two_body_seed(v_index, task.realization()))?)
}

/// Run one task and write its files into `dir`, which must exist.
pub fn run_task(plan: &SweepPlan, basis: &FockBasis, task: Task, dir: &Path) -> Result<TaskData> {
    let model = draw_model(plan, task)?;
    let parts = match task {
        Task::Point { .. } => Parts::Full,
        Task::Reference { .. } => Parts::InteractionOnly,
    };
    let h = hamiltonian::assemble_parts(&model, basis, parts)?;
    let spec = spectral::diagonalize_with_cap(&h, plan.dimension_cap)?;
    let eigs = spec.eigenvalues();
    let is_point = matches!(task, Task::Point { .. });

    if is_point && plan.export.matrix {
        export::write_matrix(dir, &model, &h)?;
    }
    if is_point && plan.export.coefficients {
        export::write_coefficients(dir, &export::MatrixHeader::new(&model, &h), &spec)?;
    }

    let strength = if is_point && plan.analyses.strength {
        Some(strength_window(&spec, h.h0_diagonal(), plan)?)
    } else {
        None
    };
    let spacing = if is_point { strength::effective_spacing(&h).summary } else { None };

    let prs = eigenstate::participation_ratios(&spec)?;
    let mut states: Vec<StateRow> = eigs
        .iter()
        .zip(&prs)
        .enumerate()
        .map(|(alpha, (&energy, &pr))| StateRow {
            alpha,
            energy,
            pr,
            dressed_energy: None,
            delta0: None,
            n_pc: None,
            d_loc: None,
            ln_ratio: None,
        })
        .collect();

    let mut probes = Vec::new();
    let mut ond = None;
    if is_point && plan.analyses.thermal {
        let dists: Vec<OccupationDistribution> = (0..spec.dimension())
            .map(|a| thermal::occupation_numbers(&spec, basis, &model, a))
            .collect::<tbri_core::Result<_>>()?;
        for (row, d) in states.iter_mut().zip(&dists) {
            let c = thermal::local_criterion(&spec, h.h0_diagonal(), row.alpha, model.interaction_strength(), plan.thermal.npc, true)?;
            row.dressed_energy = Some(d.dressed_energy);
            row.delta0 = Some(c.delta0);
            row.n_pc = Some(c.n_pc);
            row.d_loc = Some(c.d_loc);
            row.ln_ratio = c.ln_ratio();
        }
        for p in &plan.probes {
            let window = p.window(eigs);
            let members: Vec<&OccupationDistribution> = window.iter().map(|&a| &dists[a]).collect();
            let cmp = window_comparison(&members, &model.sp_energies);
            let avg = &cmp.0;
            probes.push(ProbeResult {
                label: p.label.clone(),
                lower_half: p.lower_half,
                first: window[0],
                count: window.len(),
                energy: avg.energy,
                dressed_energy: avg.dressed_energy,
                occupations: avg.values.clone(),
                bare: FitOutcome::new(&cmp.1.bare, cmp.1.chi2_bare),
                dressed: FitOutcome::new(&cmp.1.dressed, cmp.1.chi2_dressed),
                dressed_preferred: cmp.1.dressed_preferred(),
            });
        }
        ond = Some(dists.iter().flat_map(|d| d.values.iter().copied()).collect::<Vec<f64>>());
    }

    let result = TaskResult {
        format_version: export::FORMAT_VERSION,
        task,
        v: model.interaction_strength(),
        sp_seed: model.sp_seed,
        two_body_seed: model.rng_seed,
        dimension: spec.dimension(),
        spectrum: SpectrumSummary::of(eigs),
        spacing,
        strength,
        probes,
    };
    export::write_json(&dir.join(RESULT_FILE), &result)?;
    export::write_csv(&dir.join(STATES_FILE), &states)?;
    if let Some(o) = &ond {
        export::write_f64_bin(&dir.join(OND_FILE), o)?;
    }
    Ok(TaskData { result, states, ond })
}

/// Read a finished task directory back.
pub fn load_task(dir: &Path, n_levels: usize) -> Result<TaskData> {
    let result: TaskResult = export::read_json(&dir.join(RESULT_FILE))?;
    let states: Vec<StateRow> = export::read_csv(&dir.join(STATES_FILE))?;
    if states.len() != result.dimension {
        return Err(crate::AppError::Format {
            path: dir.join(STATES_FILE),
            message: format!("expected {} rows, found {}", result.dimension, states.len()),
        });
    }
    let ond_path = dir.join(OND_FILE);
    let ond = if ond_path.exists() {
        Some(export::read_f64_bin(&ond_path, result.dimension * n_levels)?)
    } else {
        None
    };
    Ok(TaskData { result, states, ond })
}

fn strength_window(spec: &SpectralDecomposition, h0: &[f64], plan: &SweepPlan) -> Result<StrengthResult> {
    let binning = &plan.strength.binning;
    let ks = strength::mid_spectrum_indices(h0, plan.strength.window);
    let mut hists = Vec::with_capacity(ks.len());
    let mut widths = Vec::with_capacity(ks.len());
    for &k in &ks {
        let w = spec.basis_state_weights(k);
        let (centroid, width) = strength::weighted_moments(spec.eigenvalues(), &w);
        hists.push(strength::unit_histogram(spec.eigenvalues(), &w, centroid, width, binning).weights);
        widths.push(width);
    }
    let refs: Vec<&[f64]> = hists.iter().map(|h| h.as_slice()).collect();
    let n = ks.len() as f64;
    let histogram = tbri_core::stats::pairwise_sum_vectors(&refs).into_iter().map(|x| x / n).collect();
    Ok(StrengthResult { histogram, widths })
}

/// Average occupations and energies over a window and fit both energies.
pub fn window_comparison(members: &[&OccupationDistribution], sp_energies: &[f64]) -> (OccupationDistribution, BedComparison) {
    let values: Vec<&[f64]> = members.iter().map(|d| d.values.as_slice()).collect();
    let n = members.len() as f64;
    let energies: Vec<f64> = members.iter().map(|d| d.energy).collect();
    let dressed: Vec<f64> = members.iter().map(|d| d.dressed_energy).collect();
    let energy = tbri_core::stats::pairwise_sum(&energies) / n;
    let dressed_energy = tbri_core::stats::pairwise_sum(&dressed) / n;
    let avg = OccupationDistribution {
        eigenstate: members.first().map_or(0, |d| d.eigenstate),
        values: thermal::mean_occupations(&values),
        energy,
        dressed_energy,
        shift: dressed_energy - energy,
    };
    let cmp = thermal::bed_comparison(&avg, sp_energies, None);
    (avg, cmp)
}
