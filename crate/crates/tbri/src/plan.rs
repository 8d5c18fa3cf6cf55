//! Sweep plans and the named presets.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tbri_core::basis::basis_dimension;
use tbri_core::model::{ModelParams, SpMode};
use tbri_core::seed;
use tbri_core::spectral::DEFAULT_DIMENSION_CAP;
use tbri_core::stats::NormalityThresholds;
use tbri_core::strength::{Binning, DELTA_LIKE_THRESHOLD};
use tbri_core::thermal::NpcMeasure;

use crate::error::{AppError, Result};

/// Key mixed into the base seed for the single-particle energies.
const SP_KEY: u64 = 0x5350;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPlan {
    pub name: String,
    pub n_particles: usize,
    pub n_levels: usize,
    pub sp_mode: SpMode,
    pub v_grid: Vec<f64>,
    pub n_realizations: u64,
    /// First realization index; lets disjoint seed sets be run separately
    /// and merged later.
    #[serde(default)]
    pub realization_offset: u64,
    pub base_seed: u64,
    /// Reuse the same two-body draws (up to the factor `V`) at every grid
    /// point instead of drawing fresh ones per `V`.
    #[serde(default = "yes")]
    pub share_disorder_across_v: bool,
    pub analyses: Analyses,
    #[serde(default)]
    pub strength: StrengthConfig,
    #[serde(default)]
    pub probes: Vec<Probe>,
    #[serde(default)]
    pub thermal: ThermalConfig,
    #[serde(default = "default_cap")]
    pub dimension_cap: usize,
    #[serde(default)]
    pub export: ExportConfig,
}

fn yes() -> bool {
    true
}

fn default_cap() -> usize {
    DEFAULT_DIMENSION_CAP
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Analyses {
    /// Window-averaged strength functions and their fits.
    #[serde(default)]
    pub strength: bool,
    /// Participation ratios of every eigenstate.
    #[serde(default)]
    pub participation: bool,
    /// Interaction-only reference runs for `PR/PR_∞`.
    #[serde(default)]
    pub pr_reference: bool,
    /// Occupation numbers, Bose-Einstein fits and the local criterion in the
    /// probe windows.
    #[serde(default)]
    pub thermal: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrengthConfig {
    /// Number of mid-spectrum basis states averaged per realization.
    pub window: usize,
    pub binning: Binning,
    pub delta_threshold: f64,
}

impl Default for StrengthConfig {
    fn default() -> Self {
        StrengthConfig {
            window: 100,
            binning: Binning::default(),
            delta_threshold: DELTA_LIKE_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalConfig {
    pub npc: NpcMeasure,
    /// Bins of the pooled `ζ` histogram over `±4`.
    pub zeta_bins: usize,
    /// Energy bins of the classifier and PR maps.
    pub map_bins: usize,
    #[serde(default)]
    pub zeta_pooling: ZetaPooling,
    #[serde(default)]
    pub normality: NormalityThresholds,
}

/// Over which samples `⟨n_s⟩` and `δn_s` are taken for `ζ_s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZetaPooling {
    /// Realizations and all eigenstates of the window together.
    #[default]
    Window,
    /// Realizations only, separately for each position in the window.
    Realizations,
}

impl Default for ThermalConfig {
    fn default() -> Self {
        ThermalConfig {
            npc: NpcMeasure::ParticipationRatio,
            zeta_bins: 40,
            map_bins: 24,
            zeta_pooling: ZetaPooling::Window,
            normality: NormalityThresholds::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportConfig {
    #[serde(default)]
    pub matrix: bool,
    #[serde(default)]
    pub coefficients: bool,
}

/// A window of consecutive eigenstates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Probe {
    pub label: String,
    pub position: ProbePosition,
    /// Number of eigenstates in the window.
    pub width: usize,
    /// Whether the window counts as low or mid spectrum.
    #[serde(default)]
    pub lower_half: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbePosition {
    /// Centre at this fraction of the eigenvalue index range.
    Fraction(f64),
    /// Centre on the eigenvalue closest to this energy.
    Energy(f64),
}

impl Probe {
    pub fn fraction(label: &str, f: f64, width: usize) -> Self {
        Probe {
            label: label.into(),
            position: ProbePosition::Fraction(f),
            width,
            lower_half: f <= 0.5,
        }
    }

    pub fn energy(label: &str, e: f64, width: usize, lower_half: bool) -> Self {
        Probe {
            label: label.into(),
            position: ProbePosition::Energy(e),
            width,
            lower_half,
        }
    }

    /// Indices of the window in an ascending spectrum.
    pub fn window(&self, eigenvalues: &[f64]) -> Vec<usize> {
        let n = eigenvalues.len();
        let width = self.width.min(n);
        let center = match self.position {
            ProbePosition::Fraction(f) => ((f.clamp(0.0, 1.0) * (n - 1) as f64).round()) as usize,
            ProbePosition::Energy(e) => {
                let i = eigenvalues.partition_point(|&x| x < e);
                if i == 0 {
                    0
                } else if i == n || e - eigenvalues[i - 1] <= eigenvalues[i] - e {
                    i - 1
                } else {
                    i
                }
            }
        };
        let start = center.saturating_sub(width / 2).min(n - width);
        (start..start + width).collect()
    }
}

/// One unit of work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Task {
    Point { v_index: usize, realization: u64 },
    /// Interaction-only run for the PR reference.
    Reference { realization: u64 },
}

impl Task {
    pub fn dir_name(&self) -> String {
        match *self {
            Task::Point { v_index, realization } => format!("v{v_index:03}_r{realization:06}"),
            Task::Reference { realization } => format!("ref_r{realization:06}"),
        }
    }

    pub fn realization(&self) -> u64 {
        match *self {
            Task::Point { realization, .. } | Task::Reference { realization } => realization,
        }
    }
}

impl SweepPlan {
    pub fn params(&self, v: f64) -> ModelParams {
        ModelParams::new(self.n_particles, self.n_levels, v, self.sp_mode)
    }

    /// Validate every physical and bookkeeping parameter.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(AppError::Validation(m));
        if self.v_grid.is_empty() {
            return bad("the V grid is empty".into());
        }
        for &v in &self.v_grid {
            self.params(v).validate()?;
        }
        if self.n_realizations == 0 {
            return bad("n_realizations must be at least 1".into());
        }
        if self.realization_offset.checked_add(self.n_realizations).is_none() {
            return bad("realization indices overflow".into());
        }
        let dim = basis_dimension(self.n_particles, self.n_levels)?;
        if dim > self.dimension_cap {
            return bad(format!(
                "basis dimension {dim} exceeds the cap {}; reduce N or M or raise dimension_cap",
                self.dimension_cap
            ));
        }
        self.strength.binning.validate()?;
        if self.strength.window == 0 {
            return bad("strength window must be positive".into());
        }
        if !(self.strength.delta_threshold > 0.0 && self.strength.delta_threshold <= 1.0) {
            return bad("delta threshold must lie in (0, 1]".into());
        }
        if self.thermal.zeta_bins < 2 || self.thermal.map_bins < 2 {
            return bad("histograms need at least two bins".into());
        }
        if self.analyses.thermal && self.probes.is_empty() {
            return bad("thermal analysis needs at least one probe window".into());
        }
        for p in &self.probes {
            if p.width == 0 {
                return bad(format!("probe '{}' has zero width", p.label));
            }
            match p.position {
                ProbePosition::Fraction(f) if !(0.0..=1.0).contains(&f) => {
                    return bad(format!("probe '{}' fraction {f} outside [0, 1]", p.label))
                }
                ProbePosition::Energy(e) if !e.is_finite() => return bad(format!("probe '{}' energy is not finite", p.label)),
                _ => {}
            }
        }
        let mut labels: Vec<&str> = self.probes.iter().map(|p| p.label.as_str()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return bad("probe labels must be unique".into());
        }
        Ok(())
    }

    pub fn sp_seed(&self) -> u64 {
        seed::derive(&[self.base_seed, SP_KEY])
    }

    pub fn two_body_seed(&self, v_index: usize, realization: u64) -> u64 {
        let v_key = if self.share_disorder_across_v { 0 } else { v_index as u64 + 1 };
        seed::realization_seed(self.base_seed, v_key, realization)
    }

    pub fn realizations(&self) -> std::ops::Range<u64> {
        self.realization_offset..self.realization_offset + self.n_realizations
    }

    /// Every task of the plan in canonical order.
    pub fn tasks(&self) -> Vec<Task> {
        let mut tasks: Vec<Task> = (0..self.v_grid.len())
            .flat_map(|v_index| self.realizations().map(move |realization| Task::Point { v_index, realization }))
            .collect();
        if self.analyses.pr_reference {
            tasks.extend(self.realizations().map(|realization| Task::Reference { realization }));
        }
        tasks
    }

    /// SHA-256 of the canonical JSON form.
    pub fn content_hash(&self) -> String {
        hash_json(self)
    }

    /// Hash of everything that must agree for results to be merged: all
    /// settings except the V grid, the realization range and the name.
    pub fn fingerprint(&self) -> String {
        let mut p = self.clone();
        p.name.clear();
        p.v_grid.clear();
        p.n_realizations = 0;
        p.realization_offset = 0;
        p.export = ExportConfig::default();
        hash_json(&p)
    }
}

fn hash_json<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("plan serializes");
    hex::encode(Sha256::digest(&bytes))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scale {
    /// N = 4, M = 9; minutes on one core.
    #[default]
    Desk,
    /// N = 6, M = 11; hours.
    Full,
}

pub const PRESETS: [&str; 6] = ["fig3", "fig4", "fig7", "fig9", "fig10", "fig11"];

/// Logarithmic grid of `n` points on `[lo, hi]`, rounded to 4 significant
/// digits so plans stay readable.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let x = lo * (hi / lo).powf(i as f64 / (n - 1) as f64);
            let digits = 3 - x.log10().floor() as i32;
            let s = 10f64.powi(digits);
            (x * s).round() / s
        })
        .collect()
}

/// Named plan template.
pub fn preset(name: &str, scale: Scale) -> Result<SweepPlan> {
    let full = scale == Scale::Full;
    let (n, m) = if full { (6, 11) } else { (4, 9) };
    let base = SweepPlan {
        name: format!("{name}-{}", if full { "full" } else { "desk" }),
        n_particles: n,
        n_levels: m,
        sp_mode: SpMode::UniformRandom,
        v_grid: Vec::new(),
        n_realizations: 1,
        realization_offset: 0,
        base_seed: 2017,
        share_disorder_across_v: true,
        analyses: Analyses::default(),
        strength: StrengthConfig {
            window: if full { 100 } else { 50 },
            ..StrengthConfig::default()
        },
        probes: Vec::new(),
        thermal: ThermalConfig::default(),
        dimension_cap: DEFAULT_DIMENSION_CAP,
        export: ExportConfig::default(),
    };
    let thermal_probes = if full {
        vec![
            Probe::energy("upper", 28.0, 20, false),
            Probe::energy("middle", 17.0, 20, true),
            Probe::energy("lower", 11.0, 20, true),
        ]
    } else {
        desk_probes()
    };
    let plan = match name {
        "fig3" => SweepPlan {
            v_grid: vec![0.01, 0.02, 0.04, 0.06, 0.1, 0.14, 0.18, 0.26, 0.31, 0.35, 0.4],
            n_realizations: if full { 100 } else { 50 },
            analyses: Analyses {
                strength: true,
                ..Analyses::default()
            },
            ..base
        },
        "fig4" => SweepPlan {
            v_grid: log_grid(0.01, 0.5, 14),
            n_realizations: if full { 100 } else { 50 },
            analyses: Analyses {
                strength: true,
                ..Analyses::default()
            },
            ..base
        },
        "fig7" => SweepPlan {
            v_grid: log_grid(0.02, 1.0, 10),
            n_realizations: if full { 20 } else { 20 },
            analyses: Analyses {
                participation: true,
                pr_reference: true,
                ..Analyses::default()
            },
            ..base
        },
        "fig9" | "fig10" => SweepPlan {
            v_grid: if full { vec![0.04, 0.1, 0.4] } else { vec![0.02, 0.1, 1.5] },
            n_realizations: if full { 500 } else { 200 },
            analyses: Analyses {
                participation: true,
                thermal: true,
                ..Analyses::default()
            },
            probes: thermal_probes,
            ..base
        },
        "fig11" => SweepPlan {
            v_grid: log_grid(0.02, 1.0, 8),
            n_realizations: if full { 100 } else { 50 },
            analyses: Analyses {
                participation: true,
                thermal: true,
                ..Analyses::default()
            },
            probes: thermal_probes,
            ..base
        },
        _ => {
            return Err(AppError::Validation(format!(
                "unknown preset '{name}'; available: {}",
                PRESETS.join(", ")
            )))
        }
    };
    Ok(plan)
}

/// Probe windows at fixed spectral fractions for the reduced system.
pub fn desk_probes() -> Vec<Probe> {
    vec![
        Probe::fraction("f0.15", 0.15, 20),
        Probe::fraction("f0.25", 0.25, 20),
        Probe::fraction("f0.35", 0.35, 20),
        Probe::fraction("f0.50", 0.5, 20),
        Probe::fraction("f0.75", 0.75, 20),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for name in PRESETS {
            for scale in [Scale::Desk, Scale::Full] {
                preset(name, scale).unwrap().validate().unwrap();
            }
        }
        assert!(matches!(preset("fig5", Scale::Desk), Err(AppError::Validation(_))));
    }

    #[test]
    fn json_round_trip_and_hash() {
        let p = preset("fig9", Scale::Desk).unwrap();
        let text = serde_json::to_string(&p).unwrap();
        let back: SweepPlan = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.content_hash(), p.content_hash());
        let mut q = p.clone();
        q.n_realizations += 1;
        assert_ne!(q.content_hash(), p.content_hash());
        assert_eq!(q.fingerprint(), p.fingerprint());
        q.base_seed += 1;
        assert_ne!(q.fingerprint(), p.fingerprint());
    }

    #[test]
    fn seeds_depend_on_realization_only_when_shared() {
        let mut p = preset("fig4", Scale::Desk).unwrap();
        assert_eq!(p.two_body_seed(0, 3), p.two_body_seed(5, 3));
        assert_ne!(p.two_body_seed(0, 3), p.two_body_seed(0, 4));
        p.share_disorder_across_v = false;
        assert_ne!(p.two_body_seed(0, 3), p.two_body_seed(5, 3));
    }

    #[test]
    fn validation_rejects_bad_plans() {
        let mut p = preset("fig4", Scale::Desk).unwrap();
        p.n_levels = 1;
        assert!(p.validate().is_err());
        let mut p = preset("fig4", Scale::Desk).unwrap();
        p.v_grid.push(-0.1);
        assert!(p.validate().is_err());
        let mut p = preset("fig4", Scale::Desk).unwrap();
        p.dimension_cap = 10;
        assert!(matches!(p.validate(), Err(AppError::Validation(_))));
        let mut p = preset("fig9", Scale::Desk).unwrap();
        p.probes.clear();
        assert!(p.validate().is_err());
    }

    #[test]
    fn probe_windows() {
        let e: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert_eq!(Probe::fraction("a", 0.5, 4).window(&e), vec![48, 49, 50, 51]);
        assert_eq!(Probe::fraction("a", 0.0, 4).window(&e), vec![0, 1, 2, 3]);
        assert_eq!(Probe::fraction("a", 1.0, 4).window(&e), vec![96, 97, 98, 99]);
        assert_eq!(Probe::energy("a", 10.4, 3, true).window(&e), vec![9, 10, 11]);
        assert_eq!(Probe::energy("a", 500.0, 200, true).window(&e).len(), 100);
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(0.01, 0.5, 14);
        assert_eq!(g.len(), 14);
        assert_eq!(g[0], 0.01);
        assert_eq!(g[13], 0.5);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }
}
