//! Merge finished tasks from one or more run stores into ensemble tables.
//!
//! Tasks are keyed by `(V, realization)`, sorted, and reduced in that order,
//! so the output does not depend on completion order or on how the tasks
//! were split between stores.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use log::info;
use serde::{Deserialize, Serialize};
use tbri_core::eigenstate::{rescaled_energies, PrReference};
use tbri_core::fit::linspace;
use tbri_core::model::SpMode;
use tbri_core::stats::{self, NormalityReport, NormalityThresholds};
use tbri_core::strength::{
    analyze_sweep, crossover_from_summary, shapes_are_ordered, Crossover, ProfileHistogram, ScalingReport, Shape,
    ShapeFit, SpacingSummary, SweepPoint,
};
use tbri_core::thermal::{self, BedComparison, FluctuationReport, OccupationDistribution, Verdict};

use crate::error::{AppError, Result};
use crate::export;
use crate::pipeline::{self, FitOutcome, TaskData, TaskResult};
use crate::plan::{SweepPlan, Task, ZetaPooling};
use crate::runner::{Manifest, RunStore, TASKS_DIR};

pub const SUMMARY_FILE: &str = "summary.json";

/// Half-range of the rescaled-energy axis of the PR map.
const PR_MAP_HALF_RANGE: f64 = 3.0;
/// Half-range of the `ζ` histogram.
const ZETA_HALF_RANGE: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateSummary {
    pub format_version: u32,
    pub fingerprint: String,
    pub n_particles: usize,
    pub n_levels: usize,
    pub sp_mode: SpMode,
    pub sp_energies: Vec<f64>,
    pub v_grid: Vec<f64>,
    /// Realizations found per grid point.
    pub realizations: Vec<usize>,
    pub references: usize,
    /// Some planned task is missing or failed.
    pub partial: bool,
    pub failures: usize,
    pub spacing: Option<SpacingSummary>,
    pub crossover: Option<Crossover>,
    pub strength: Vec<StrengthPoint>,
    pub scaling: Option<ScalingReport>,
    pub shapes_ordered: Option<bool>,
    pub probes: Vec<ProbeSummary>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrengthPoint {
    pub v: f64,
    pub states: usize,
    pub top_bin_weight: f64,
    pub preferred: Shape,
    /// Fits in units of the exact width.
    pub breit_wigner: ShapeFit,
    pub gaussian: ShapeFit,
    /// Mean exact width `ΔE_k`.
    pub exact_width: f64,
    /// Breit-Wigner `Γ` in energy units.
    pub gamma_fit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSummary {
    pub v: f64,
    pub label: String,
    pub lower_half: bool,
    /// Number of (realization, window) pairs.
    pub windows: usize,
    pub dressed_better: usize,
    /// Windows where the comparison could not be made.
    pub undecided: usize,
    pub dressed_better_fraction: f64,
    /// Median of `χ²_dressed / χ²_bare` over windows where both exist.
    pub median_chi2_ratio: Option<f64>,
    pub energy: f64,
    pub dressed_energy: f64,
    /// Fits to the ensemble-averaged occupations.
    pub ensemble_bare: FitOutcome,
    pub ensemble_dressed: FitOutcome,
    pub zeta: Option<NormalityReport>,
    pub zeta_error: Option<String>,
    pub excluded_orbitals: Vec<usize>,
    pub median_ln_ratio: Option<f64>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    /// `V` by bit pattern; grid values are non-negative so this orders them.
    Point(u64, u64),
    Reference(u64),
}

fn key_of(task: Task, v: f64) -> Key {
    match task {
        Task::Point { realization, .. } => Key::Point(v.to_bits(), realization),
        Task::Reference { realization } => Key::Reference(realization),
    }
}

struct Indexed {
    dir: PathBuf,
    result: TaskResult,
}

/// Aggregate every completed task of `stores` into `out`. With `v_filter`
/// only the listed grid points enter.
pub fn aggregate(stores: &[PathBuf], out: &Path, v_filter: Option<&[f64]>) -> Result<AggregateSummary> {
    if stores.is_empty() {
        return Err(AppError::Validation("no run store given".into()));
    }
    let mut plans = Vec::with_capacity(stores.len());
    let mut manifests = Vec::with_capacity(stores.len());
    for root in stores {
        let s = RunStore::new(root);
        plans.push(s.plan()?);
        manifests.push(s.manifest()?);
    }
    let plan = plans[0].clone();
    let fingerprint = plan.fingerprint();
    for (p, root) in plans.iter().zip(stores) {
        if p.fingerprint() != fingerprint {
            return Err(AppError::Incompatible(format!(
                "{} was run with different model or analysis settings than {}",
                root.display(),
                stores[0].display()
            )));
        }
    }

    let (index, partial, failures) = index_tasks(stores, &plans, &manifests, v_filter)?;
    let mut v_grid: Vec<f64> = Vec::new();
    for k in index.keys() {
        if let Key::Point(bits, _) = *k {
            let v = f64::from_bits(bits);
            if v_grid.last() != Some(&v) {
                v_grid.push(v);
            }
        }
    }
    if v_grid.is_empty() {
        return Err(AppError::Validation("no completed tasks to aggregate".into()));
    }
    info!("aggregating {} tasks over {} grid points", index.len(), v_grid.len());

    let sp_energies = plan.params(v_grid[0]).draw_with_seeds(plan.sp_seed(), 0)?.sp_energies;
    export::create_dir(out)?;

    let reference = build_reference(&index, &plan)?;
    if let Some(r) = &reference {
        export::write_csv(
            &out.join("pr_reference.csv"),
            r.profile().into_iter().map(|(x, pr)| ReferenceRow { x, pr_ref: pr }),
        )?;
    }

    // Common energy axis of the classifier map.
    let points: Vec<&Indexed> = index
        .iter()
        .filter(|(k, _)| matches!(k, Key::Point(..)))
        .map(|(_, v)| v)
        .collect();
    let e_lo = points.iter().map(|p| p.result.spectrum.min).fold(f64::INFINITY, f64::min);
    let e_hi = points.iter().map(|p| p.result.spectrum.max).fold(f64::NEG_INFINITY, f64::max);
    let map_edges = linspace(e_lo, e_hi, plan.thermal.map_bins + 1);

    let mut realizations = Vec::new();
    let mut strength = Vec::new();
    let mut spacings = Vec::new();
    let mut probes = Vec::new();
    let mut pr_rows = Vec::new();
    let mut map_rows = Vec::new();
    for (vi, &v) in v_grid.iter().enumerate() {
        let members: Vec<&Indexed> = index
            .range(Key::Point(v.to_bits(), 0)..=Key::Point(v.to_bits(), u64::MAX))
            .map(|(_, x)| x)
            .collect();
        realizations.push(members.len());
        spacings.extend(members.iter().filter_map(|m| m.result.spacing));
        let data: Vec<TaskData> = members
            .iter()
            .map(|m| pipeline::load_task(&m.dir, plan.n_levels))
            .collect::<Result<_>>()?;

        if data.iter().all(|d| d.result.strength.is_some()) {
            let (point, hist, analysis) = strength_point(v, &data, &plan);
            export::write_profile(&out.join(format!("strength_v{vi:03}.csv")), &hist, &analysis)?;
            strength.push(point);
        }
        if plan.analyses.participation || plan.analyses.pr_reference {
            pr_rows.extend(pr_map(v, &data, reference.as_ref(), plan.thermal.map_bins));
        }
        if plan.analyses.thermal {
            for (pi, probe) in plan.probes.iter().enumerate() {
                let (summary, windows, ond, zeta_hist) = probe_summary(v, pi, &probe.label, &data, &plan, &sp_energies);
                let stem = format!("v{vi:03}_{}", probe.label);
                export::write_csv(&out.join(format!("windows_{stem}.csv")), &windows)?;
                export::write_csv(&out.join(format!("ond_{stem}.csv")), &ond)?;
                export::write_csv(&out.join(format!("zeta_{stem}.csv")), &zeta_hist)?;
                probes.push(summary);
            }
            map_rows.extend(classifier_map(v, &data, &map_edges, &plan));
        }
    }

    let spacing = (!spacings.is_empty()).then(|| pooled_spacing(&spacings));
    let crossover = spacing.map(|s| crossover_from_summary(&s, plan.n_particles));
    let (scaling, shapes_ordered) = if strength.is_empty() {
        (None, None)
    } else {
        let sweep: Vec<SweepPoint> = strength
            .iter()
            .map(|p| SweepPoint {
                v: p.v,
                gamma_fit: p.gamma_fit,
                exact_width: p.exact_width,
                shape: p.preferred,
            })
            .collect();
        let shapes: Vec<Shape> = strength.iter().map(|p| p.preferred).collect();
        (Some(analyze_sweep(&sweep)), Some(shapes_are_ordered(&shapes)))
    };
    if !strength.is_empty() {
        export::write_csv(&out.join("strength.csv"), strength.iter().map(StrengthRow::from))?;
    }
    if !pr_rows.is_empty() {
        export::write_csv(&out.join("pr_map.csv"), &pr_rows)?;
    }
    if !map_rows.is_empty() {
        export::write_csv(&out.join("classifier_map.csv"), &map_rows)?;
    }

    let summary = AggregateSummary {
        format_version: export::FORMAT_VERSION,
        fingerprint,
        n_particles: plan.n_particles,
        n_levels: plan.n_levels,
        sp_mode: plan.sp_mode,
        sp_energies,
        v_grid,
        realizations,
        references: reference.as_ref().map_or(0, |r| r.runs),
        partial,
        failures,
        spacing,
        crossover,
        strength,
        scaling,
        shapes_ordered,
        probes,
    };
    export::write_json(&out.join(SUMMARY_FILE), &summary)?;
    Ok(summary)
}

type TaskIndex = BTreeMap<Key, Indexed>;

fn index_tasks(
    stores: &[PathBuf],
    plans: &[SweepPlan],
    manifests: &[Manifest],
    v_filter: Option<&[f64]>,
) -> Result<(TaskIndex, bool, usize)> {
    let keep = |v: f64| v_filter.is_none_or(|f| f.iter().any(|&x| (x - v).abs() <= 1e-12 * x.abs().max(1.0)));
    let mut index: TaskIndex = BTreeMap::new();
    let mut expected = std::collections::BTreeSet::new();
    let mut failures = 0;
    for ((root, plan), manifest) in stores.iter().zip(plans).zip(manifests) {
        failures += manifest.failures.len();
        for t in plan.tasks() {
            let v = match t {
                Task::Point { v_index, .. } => plan.v_grid[v_index],
                Task::Reference { .. } => 0.0,
            };
            if matches!(t, Task::Reference { .. }) || keep(v) {
                expected.insert(key_of(t, v));
            }
        }
        for name in &manifest.completed {
            let dir = root.join(TASKS_DIR).join(name);
            let result: TaskResult = export::read_json(&dir.join(pipeline::RESULT_FILE))?;
            if matches!(result.task, Task::Point { .. }) && !keep(result.v) {
                continue;
            }
            let key = key_of(result.task, result.v);
            if let Some(prev) = index.get(&key) {
                if prev.result != result {
                    return Err(AppError::Incompatible(format!(
                        "{} and {} hold different results for the same task",
                        prev.dir.display(),
                        dir.display()
                    )));
                }
                continue;
            }
            index.insert(key, Indexed { dir, result });
        }
    }
    let partial = failures > 0 || expected.iter().any(|k| !index.contains_key(k));
    Ok((index, partial, failures))
}

#[derive(Serialize)]
struct ReferenceRow {
    x: f64,
    pr_ref: f64,
}

fn build_reference(index: &TaskIndex, plan: &SweepPlan) -> Result<Option<PrReference>> {
    let refs: Vec<&Indexed> = index
        .iter()
        .filter(|(k, _)| matches!(k, Key::Reference(_)))
        .map(|(_, v)| v)
        .collect();
    if refs.is_empty() {
        return Ok(None);
    }
    let mut r = PrReference::new(
        plan.thermal.map_bins,
        PR_MAP_HALF_RANGE,
        format!("interaction-only spectra, {} realizations", refs.len()),
    );
    for m in refs {
        let d = pipeline::load_task(&m.dir, plan.n_levels)?;
        let e: Vec<f64> = d.states.iter().map(|s| s.energy).collect();
        let pr: Vec<f64> = d.states.iter().map(|s| s.pr).collect();
        r.add_values(&e, &pr);
    }
    Ok(Some(r))
}

fn pooled_spacing(s: &[SpacingSummary]) -> SpacingSummary {
    let means: Vec<f64> = s.iter().map(|x| x.mean).collect();
    let stds: Vec<f64> = s.iter().map(|x| x.std).collect();
    let n = s.len() as f64;
    SpacingSummary {
        mean: stats::pairwise_sum(&means) / n,
        std: stats::pairwise_sum(&stds) / n,
        count: s.iter().map(|x| x.count).sum(),
    }
}

#[derive(Serialize)]
struct StrengthRow {
    v: f64,
    states: usize,
    preferred: Shape,
    top_bin_weight: f64,
    bw_width: f64,
    bw_sse: f64,
    gauss_width: f64,
    gauss_sse: f64,
    exact_width: f64,
    gamma_fit: f64,
}

impl From<&StrengthPoint> for StrengthRow {
    fn from(p: &StrengthPoint) -> Self {
        StrengthRow {
            v: p.v,
            states: p.states,
            preferred: p.preferred,
            top_bin_weight: p.top_bin_weight,
            bw_width: p.breit_wigner.width,
            bw_sse: p.breit_wigner.sse,
            gauss_width: p.gaussian.width,
            gauss_sse: p.gaussian.sse,
            exact_width: p.exact_width,
            gamma_fit: p.gamma_fit,
        }
    }
}

fn strength_point(
    v: f64,
    data: &[TaskData],
    plan: &SweepPlan,
) -> (StrengthPoint, ProfileHistogram, tbri_core::strength::ShapeAnalysis) {
    let results: Vec<&pipeline::StrengthResult> = data.iter().filter_map(|d| d.result.strength.as_ref()).collect();
    let hists: Vec<&[f64]> = results.iter().map(|r| r.histogram.as_slice()).collect();
    let n = hists.len() as f64;
    let weights = stats::pairwise_sum_vectors(&hists).into_iter().map(|x| x / n).collect();
    let hist = ProfileHistogram {
        edges: plan.strength.binning.unit_edges(),
        weights,
    };
    let analysis = tbri_core::strength::analyze_shapes(&hist, plan.strength.delta_threshold);
    let widths: Vec<f64> = results.iter().flat_map(|r| r.widths.iter().copied()).collect();
    let exact_width = stats::pairwise_sum(&widths) / widths.len() as f64;
    let point = StrengthPoint {
        v,
        states: widths.len(),
        top_bin_weight: analysis.top_bin_weight,
        preferred: analysis.preferred,
        breit_wigner: analysis.breit_wigner,
        gaussian: analysis.gaussian,
        exact_width,
        gamma_fit: analysis.breit_wigner.width * exact_width,
    };
    (point, hist, analysis)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrMapRow {
    pub v: f64,
    /// Bin centre in units of the spectrum's standard deviation.
    pub x: f64,
    pub states: usize,
    pub mean_pr: f64,
    pub mean_pr_over_nh: f64,
    pub mean_pr_over_ref: Option<f64>,
}

fn pr_map(v: f64, data: &[TaskData], reference: Option<&PrReference>, n_bins: usize) -> Vec<PrMapRow> {
    let edges = linspace(-PR_MAP_HALF_RANGE, PR_MAP_HALF_RANGE, n_bins + 1);
    let width = 2.0 * PR_MAP_HALF_RANGE / n_bins as f64;
    let mut pr: Vec<Vec<f64>> = vec![Vec::new(); n_bins];
    let mut over_ref: Vec<Vec<f64>> = vec![Vec::new(); n_bins];
    let mut nh = 1.0;
    for d in data {
        nh = d.states.len() as f64;
        let e: Vec<f64> = d.states.iter().map(|s| s.energy).collect();
        for (x, s) in rescaled_energies(&e).into_iter().zip(&d.states) {
            if !(x >= -PR_MAP_HALF_RANGE && x <= PR_MAP_HALF_RANGE) {
                continue;
            }
            let i = (((x + PR_MAP_HALF_RANGE) / width) as usize).min(n_bins - 1);
            pr[i].push(s.pr);
            if let Some(r) = reference.and_then(|r| r.value_at(x)) {
                over_ref[i].push(s.pr / r);
            }
        }
    }
    (0..n_bins)
        .filter(|&i| !pr[i].is_empty())
        .map(|i| {
            let mean = stats::pairwise_sum(&pr[i]) / pr[i].len() as f64;
            PrMapRow {
                v,
                x: 0.5 * (edges[i] + edges[i + 1]),
                states: pr[i].len(),
                mean_pr: mean,
                mean_pr_over_nh: mean / nh,
                mean_pr_over_ref: (!over_ref[i].is_empty())
                    .then(|| stats::pairwise_sum(&over_ref[i]) / over_ref[i].len() as f64),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowRow {
    pub realization: u64,
    pub first: usize,
    pub energy: f64,
    pub dressed_energy: f64,
    pub beta_bare: Option<f64>,
    pub beta_dressed: Option<f64>,
    pub chi2_bare: Option<f64>,
    pub chi2_dressed: Option<f64>,
    pub dressed_preferred: Option<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OndRow {
    pub s: usize,
    pub eps: f64,
    pub n_measured: f64,
    pub n_bare: Option<f64>,
    pub n_dressed: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZetaRow {
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub density: f64,
}

fn fluctuations(groups: &[Vec<&[f64]>], thresholds: &NormalityThresholds) -> tbri_core::Result<FluctuationReport> {
    let slices: Vec<&[&[f64]]> = groups.iter().map(|g| g.as_slice()).collect();
    thermal::occupation_fluctuations_grouped(&slices, thresholds)
}

fn probe_summary(
    v: f64,
    probe_index: usize,
    label: &str,
    data: &[TaskData],
    plan: &SweepPlan,
    sp_energies: &[f64],
) -> (ProbeSummary, Vec<WindowRow>, Vec<OndRow>, Vec<ZetaRow>) {
    let m = plan.n_levels;
    let lower_half = plan.probes[probe_index].lower_half;
    let mut windows = Vec::with_capacity(data.len());
    let mut means = Vec::with_capacity(data.len());
    let mut energies = Vec::with_capacity(data.len());
    let mut dressed = Vec::with_capacity(data.len());
    let mut ratios = Vec::new();
    let mut ln_ratios = Vec::new();
    let mut groups: Vec<Vec<&[f64]>> = Vec::new();
    for d in data {
        let p = &d.result.probes[probe_index];
        windows.push(WindowRow {
            realization: d.result.task.realization(),
            first: p.first,
            energy: p.energy,
            dressed_energy: p.dressed_energy,
            beta_bare: p.bare.beta,
            beta_dressed: p.dressed.beta,
            chi2_bare: p.bare.chi2,
            chi2_dressed: p.dressed.chi2,
            dressed_preferred: p.dressed_preferred,
        });
        if let (Some(b), Some(dr)) = (p.bare.chi2, p.dressed.chi2) {
            if b > 0.0 {
                ratios.push(dr / b);
            }
        }
        means.push(p.occupations.as_slice());
        energies.push(p.energy);
        dressed.push(p.dressed_energy);
        for (pos, alpha) in (p.first..p.first + p.count).enumerate() {
            let Some(occ) = d.occupations(alpha, m) else { continue };
            let g = match plan.thermal.zeta_pooling {
                ZetaPooling::Window => 0,
                ZetaPooling::Realizations => pos,
            };
            if groups.len() <= g {
                groups.resize_with(g + 1, Vec::new);
            }
            groups[g].push(occ);
            if let Some(l) = d.states[alpha].ln_ratio {
                ln_ratios.push(l);
            }
        }
    }
    let n = data.len() as f64;
    let avg = OccupationDistribution {
        eigenstate: 0,
        values: thermal::mean_occupations(&means),
        energy: stats::pairwise_sum(&energies) / n,
        dressed_energy: stats::pairwise_sum(&dressed) / n,
        shift: 0.0,
    };
    let cmp: BedComparison = thermal::bed_comparison(&avg, sp_energies, None);
    let ond = (0..m)
        .map(|s| OndRow {
            s,
            eps: sp_energies[s],
            n_measured: avg.values[s],
            n_bare: cmp.bare.as_ref().ok().map(|b| b.predicted[s]),
            n_dressed: cmp.dressed.as_ref().ok().map(|b| b.predicted[s]),
        })
        .collect();

    let report = fluctuations(&groups, &plan.thermal.normality);
    let zeta_hist = match &report {
        Ok(r) => {
            let (edges, density) = r.zeta_histogram(plan.thermal.zeta_bins, ZETA_HALF_RANGE);
            edges
                .windows(2)
                .zip(density)
                .map(|(w, density)| ZetaRow {
                    bin_lo: w[0],
                    bin_hi: w[1],
                    density,
                })
                .collect()
        }
        Err(_) => Vec::new(),
    };
    let better = windows.iter().filter(|w| w.dressed_preferred == Some(true)).count();
    let undecided = windows.iter().filter(|w| w.dressed_preferred.is_none()).count();
    let median_ln_ratio = (!ln_ratios.is_empty()).then(|| stats::median(&ln_ratios));
    let fluctuation_pass = report.as_ref().is_ok_and(|r| r.normality.pass);
    let verdict = if median_ln_ratio.is_some_and(|l| l > 0.0) && fluctuation_pass {
        Verdict::Thermal
    } else {
        Verdict::NonThermal
    };
    let summary = ProbeSummary {
        v,
        label: label.to_string(),
        lower_half,
        windows: windows.len(),
        dressed_better: better,
        undecided,
        dressed_better_fraction: better as f64 / windows.len().max(1) as f64,
        median_chi2_ratio: (!ratios.is_empty()).then(|| stats::median(&ratios)),
        energy: avg.energy,
        dressed_energy: avg.dressed_energy,
        ensemble_bare: FitOutcome::new(&cmp.bare, cmp.chi2_bare),
        ensemble_dressed: FitOutcome::new(&cmp.dressed, cmp.chi2_dressed),
        zeta: report.as_ref().ok().map(|r| r.normality),
        zeta_error: report.as_ref().err().map(|e| e.to_string()),
        excluded_orbitals: report.as_ref().map(|r| r.excluded_orbitals.clone()).unwrap_or_default(),
        median_ln_ratio,
        verdict,
    };
    (summary, windows, ond, zeta_hist)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapRow {
    pub v: f64,
    pub energy_lo: f64,
    pub energy_hi: f64,
    pub states: usize,
    /// States with `d_loc > 0`, the only ones with a defined ratio.
    pub resolved: usize,
    pub median_ln_ratio: Option<f64>,
    pub fluctuation_pass: bool,
    /// Eigenstates that are individually above the line and sit in a bin
    /// with Gaussian fluctuations.
    pub thermal_states: usize,
    pub verdict: Verdict,
}

fn classifier_map(v: f64, data: &[TaskData], edges: &[f64], plan: &SweepPlan) -> Vec<MapRow> {
    let n_bins = edges.len() - 1;
    let (lo, hi) = (edges[0], edges[n_bins]);
    let m = plan.n_levels;
    let mut ln: Vec<Vec<f64>> = vec![Vec::new(); n_bins];
    let mut counts = vec![0usize; n_bins];
    let mut occ: Vec<Vec<&[f64]>> = vec![Vec::new(); n_bins];
    for d in data {
        for s in &d.states {
            let i = if hi > lo {
                (((s.energy - lo) / (hi - lo) * n_bins as f64) as usize).min(n_bins - 1)
            } else {
                0
            };
            counts[i] += 1;
            if let Some(l) = s.ln_ratio {
                ln[i].push(l);
            }
            if let Some(o) = d.occupations(s.alpha, m) {
                occ[i].push(o);
            }
        }
    }
    (0..n_bins)
        .filter(|&i| counts[i] > 0)
        .map(|i| {
            let pass = thermal::occupation_fluctuations(&occ[i], &plan.thermal.normality)
                .is_ok_and(|r| r.normality.pass);
            let median = (!ln[i].is_empty()).then(|| stats::median(&ln[i]));
            let above = ln[i].iter().filter(|&&l| l > 0.0).count();
            MapRow {
                v,
                energy_lo: edges[i],
                energy_hi: edges[i + 1],
                states: counts[i],
                resolved: ln[i].len(),
                median_ln_ratio: median,
                fluctuation_pass: pass,
                thermal_states: if pass { above } else { 0 },
                verdict: if pass && median.is_some_and(|l| l > 0.0) {
                    Verdict::Thermal
                } else {
                    Verdict::NonThermal
                },
            }
        })
        .collect()
}

/// Load the summary written by [`aggregate`].
pub fn read_summary(dir: &Path) -> Result<AggregateSummary> {
    export::read_json(&dir.join(SUMMARY_FILE))
}
