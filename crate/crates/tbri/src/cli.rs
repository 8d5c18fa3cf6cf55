//! Command-line interface.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::info;
use serde::Serialize;
use tbri_core::basis::FockBasis;
use tbri_core::hamiltonian;
use tbri_core::model::SpMode;
use tbri_core::spectral;
use tbri_core::strength::{self, Binning, Crossover, SpacingSummary};
use tbri_core::thermal::NpcMeasure;

use crate::aggregate;
use crate::error::{AppError, Result};
use crate::export;
use crate::plan::{self, Analyses, Probe, ProbePosition, Scale, StrengthConfig, SweepPlan, ThermalConfig};
use crate::runner::{self, RunStore};

#[derive(Debug, Parser)]
#[command(name = "tbri", version, about = "Bosons with two-body random interactions: spectra, strength functions, localization and thermalization")]
pub struct Cli {
    /// More log output (-v info, -vv debug). `RUST_LOG` overrides.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build and diagonalize one realization; write the matrix, spectrum,
    /// density of states and effective spacing.
    Spectrum(SpectrumArgs),
    /// Strength functions of mid-spectrum basis states and their fits.
    Sf(SfArgs),
    /// Participation ratios of all eigenstates.
    Pr(PrArgs),
    /// Occupation numbers, Bose-Einstein fits, fluctuations and the local
    /// thermalization criterion in one eigenstate window.
    Therm(ThermArgs),
    /// Run a sweep plan (from a file or a preset) into a run store.
    Sweep(SweepArgs),
    /// Print a preset plan as JSON.
    Plan(PlanArgs),
    /// Merge the results of one or more run stores.
    Aggregate(AggregateArgs),
    /// Show the manifest of a run store.
    Status(StatusArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Number of bosons.
    #[arg(short = 'n', long = "n", default_value_t = 4)]
    pub n_particles: usize,
    /// Number of single-particle levels.
    #[arg(short = 'm', long = "m", default_value_t = 9)]
    pub n_levels: usize,
    /// Interaction strength.
    #[arg(short = 'V', long = "v", default_value_t = 0.1)]
    pub v: f64,
    /// Base seed.
    #[arg(long, default_value_t = 2017)]
    pub seed: u64,
    #[arg(long, default_value = "uniform-random")]
    pub sp_mode: SpMode,
    /// Largest basis dimension that will be diagonalized.
    #[arg(long, default_value_t = spectral::DEFAULT_DIMENSION_CAP)]
    pub cap: usize,
}

impl ModelArgs {
    fn plan(&self, name: &str, realizations: u64) -> SweepPlan {
        SweepPlan {
            name: name.into(),
            n_particles: self.n_particles,
            n_levels: self.n_levels,
            sp_mode: self.sp_mode,
            v_grid: vec![self.v],
            n_realizations: realizations,
            realization_offset: 0,
            base_seed: self.seed,
            share_disorder_across_v: true,
            analyses: Analyses::default(),
            strength: StrengthConfig::default(),
            probes: Vec::new(),
            thermal: ThermalConfig::default(),
            dimension_cap: self.cap,
            export: Default::default(),
        }
    }
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Realization index.
    #[arg(long, default_value_t = 0)]
    pub realization: u64,
    /// Density-of-states bins.
    #[arg(long, default_value_t = 50)]
    pub bins: usize,
    /// Also write all eigenvector coefficients.
    #[arg(long)]
    pub coefficients: bool,
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SfArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Mid-spectrum basis states averaged per realization.
    #[arg(long, default_value_t = 100)]
    pub window: usize,
    #[arg(long, default_value_t = 1)]
    pub realizations: u64,
    /// Histogram bins on the unit axis.
    #[arg(long, default_value_t = 51)]
    pub bins: usize,
    /// Half-width of the unit axis in exact widths.
    #[arg(long, default_value_t = 4.0)]
    pub half_width: f64,
    #[arg(long, default_value_t = strength::DELTA_LIKE_THRESHOLD)]
    pub delta_threshold: f64,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct PrArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 1)]
    pub realizations: u64,
    /// Also run interaction-only references and report `PR/PR_∞`.
    #[arg(long)]
    pub reference: bool,
    /// Energy bins of the binned map.
    #[arg(long, default_value_t = 24)]
    pub bins: usize,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct ThermArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 50)]
    pub realizations: u64,
    /// Eigenstates per window.
    #[arg(long, default_value_t = 20)]
    pub window: usize,
    /// Window centre as a fraction of the eigenvalue index range.
    #[arg(long, conflicts_with = "energy", default_value_t = 0.5)]
    pub fraction: f64,
    /// Window centre at the eigenvalue closest to this energy.
    #[arg(long)]
    pub energy: Option<f64>,
    /// How the number of principal components is measured: pr or entropy.
    #[arg(long, default_value = "pr")]
    pub npc: NpcMeasure,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Run store directory.
    #[arg(short, long)]
    pub out: PathBuf,
    /// Worker threads (default: TBRI_WORKERS or the number of cores).
    #[arg(long, env = runner::WORKERS_ENV)]
    pub workers: Option<usize>,
}

impl RunArgs {
    fn workers(&self) -> usize {
        self.workers.unwrap_or_else(runner::default_workers)
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Plan file (JSON).
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub plan: Option<PathBuf>,
    /// Named preset: fig3, fig4, fig7, fig9, fig10 or fig11.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long, value_enum, default_value_t = Scale::Desk)]
    pub scale: Scale,
    /// Override the number of realizations.
    #[arg(long)]
    pub realizations: Option<u64>,
    /// Override the first realization index.
    #[arg(long)]
    pub offset: Option<u64>,
    /// Override the base seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    pub preset: String,
    #[arg(long, value_enum, default_value_t = Scale::Desk)]
    pub scale: Scale,
    /// Write to a file instead of standard output.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    /// Run stores to merge.
    #[arg(required = true)]
    pub stores: Vec<PathBuf>,
    /// Output directory.
    #[arg(short, long)]
    pub out: PathBuf,
    /// Restrict to these grid points.
    #[arg(long, value_delimiter = ',')]
    pub v: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct StatusArgs {
    pub store: PathBuf,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Spectrum(a) => spectrum(&a),
        Command::Sf(a) => sf(&a),
        Command::Pr(a) => pr(&a),
        Command::Therm(a) => therm(&a),
        Command::Sweep(a) => sweep(&a),
        Command::Plan(a) => plan_cmd(&a),
        Command::Aggregate(a) => {
            let s = aggregate::aggregate(&a.stores, &a.out, a.v.as_deref())?;
            print_json(&s)
        }
        Command::Status(a) => {
            let store = RunStore::new(&a.store);
            let plan = store.plan()?;
            let m = store.manifest()?;
            println!(
                "{}: {} of {} tasks complete, {} failed, aggregated: {}",
                plan.name,
                m.completed.len(),
                plan.tasks().len(),
                m.failures.len(),
                m.aggregated
            );
            for f in &m.failures {
                println!("  {}: {}", f.task, f.error);
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct SpectrumSummary {
    n_particles: usize,
    n_levels: usize,
    interaction_strength: f64,
    dimension: usize,
    connectivity_min: usize,
    connectivity_max: usize,
    ground_energy: f64,
    top_energy: f64,
    spacing: Option<SpacingSummary>,
    crossover: Option<Crossover>,
    max_residual: f64,
}

fn spectrum(a: &SpectrumArgs) -> Result<()> {
    let plan = a.model.plan("spectrum", 1);
    plan.validate()?;
    let basis = FockBasis::enumerate(plan.n_particles, plan.n_levels)?;
    let model = plan
        .params(a.model.v)
        .draw_with_seeds(plan.sp_seed(), plan.two_body_seed(0, a.realization))?;
    let h = hamiltonian::assemble(&model, &basis)?;
    let spec = spectral::diagonalize_with_cap(&h, a.model.cap)?;
    let (cmin, cmax) = hamiltonian::connectivity_bounds(plan.n_particles, plan.n_levels);
    let spacing = strength::effective_spacing(&h);

    export::create_dir(&a.out)?;
    export::write_matrix(&a.out, &model, &h)?;
    export::write_basis(&a.out.join("basis.txt"), &basis)?;
    export::write_eigenvalues(&a.out.join("eigenvalues.csv"), spec.eigenvalues())?;
    export::write_dos(&a.out.join("dos.csv"), &spectral::dos(spec.eigenvalues(), a.bins)?)?;
    export::write_spacing(&a.out.join("spacing.csv"), &spacing)?;
    if a.coefficients {
        export::write_coefficients(&a.out, &export::MatrixHeader::new(&model, &h), &spec)?;
    }
    let eigs = spec.eigenvalues();
    let summary = SpectrumSummary {
        n_particles: plan.n_particles,
        n_levels: plan.n_levels,
        interaction_strength: a.model.v,
        dimension: basis.len(),
        connectivity_min: cmin,
        connectivity_max: cmax,
        ground_energy: eigs[0],
        top_energy: eigs[eigs.len() - 1],
        spacing: spacing.summary,
        crossover: spacing.summary.map(|s| strength::crossover_from_summary(&s, plan.n_particles)),
        max_residual: spec.residuals(&h).into_iter().fold(0.0, f64::max),
    };
    export::write_json(&a.out.join("summary.json"), &summary)?;
    print_json(&summary)
}

fn sf(a: &SfArgs) -> Result<()> {
    let mut plan = a.model.plan("sf", a.realizations);
    plan.analyses.strength = true;
    plan.strength = StrengthConfig {
        window: a.window,
        binning: Binning {
            n_bins: a.bins,
            half_width: a.half_width,
        },
        delta_threshold: a.delta_threshold,
    };
    let s = run_plan(&plan, &a.run)?;
    print_json(&s.strength)
}

fn pr(a: &PrArgs) -> Result<()> {
    let mut plan = a.model.plan("pr", a.realizations);
    plan.analyses.participation = true;
    plan.analyses.pr_reference = a.reference;
    plan.thermal.map_bins = a.bins;
    run_plan(&plan, &a.run)?;
    println!("{}", RunStore::new(&a.run.out).aggregate_dir().join("pr_map.csv").display());
    Ok(())
}

fn therm(a: &ThermArgs) -> Result<()> {
    let mut plan = a.model.plan("therm", a.realizations);
    plan.analyses.participation = true;
    plan.analyses.thermal = true;
    plan.thermal.npc = a.npc;
    let position = match a.energy {
        Some(e) => ProbePosition::Energy(e),
        None => ProbePosition::Fraction(a.fraction),
    };
    plan.probes = vec![Probe {
        label: "window".into(),
        position,
        width: a.window,
        lower_half: a.fraction <= 0.5,
    }];
    let s = run_plan(&plan, &a.run)?;
    print_json(&s.probes)
}

fn run_plan(plan: &SweepPlan, run: &RunArgs) -> Result<aggregate::AggregateSummary> {
    let store = RunStore::new(&run.out);
    let report = runner::execute(plan, &store, run.workers())?;
    info!(
        "{} tasks run, {} already present, {} failed",
        report.ran, report.skipped, report.failed
    );
    aggregate::read_summary(&store.aggregate_dir())
}

fn sweep(a: &SweepArgs) -> Result<()> {
    let mut plan = match (&a.plan, &a.preset) {
        (Some(path), _) => load_plan(path)?,
        (None, Some(name)) => plan::preset(name, a.scale)?,
        (None, None) => return Err(AppError::Validation("give --plan or --preset".into())),
    };
    if let Some(r) = a.realizations {
        plan.n_realizations = r;
    }
    if let Some(o) = a.offset {
        plan.realization_offset = o;
    }
    if let Some(s) = a.seed {
        plan.base_seed = s;
    }
    let store = RunStore::new(&a.run.out);
    let report = runner::execute(&plan, &store, a.run.workers())?;
    println!(
        "{}: {} tasks run, {} already present, {} failed; results in {}",
        plan.name,
        report.ran,
        report.skipped,
        report.failed,
        store.aggregate_dir().display()
    );
    if report.failed > 0 {
        return Err(AppError::Incompatible(format!(
            "{} tasks failed; see {}",
            report.failed,
            store.root().join(runner::MANIFEST_FILE).display()
        )));
    }
    Ok(())
}

fn load_plan(path: &Path) -> Result<SweepPlan> {
    let plan: SweepPlan = export::read_json(path)?;
    plan.validate()?;
    Ok(plan)
}

fn plan_cmd(a: &PlanArgs) -> Result<()> {
    let plan = plan::preset(&a.preset, a.scale)?;
    match &a.out {
        Some(p) => export::write_json(p, &plan),
        None => print_json(&plan),
    }
}

fn print_json<T: Serialize + ?Sized>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| AppError::json("<stdout>", e))?;
    println!("{text}");
    Ok(())
}
