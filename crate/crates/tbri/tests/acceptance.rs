//! Acceptance suite. Prints one PASS or FAIL line per criterion.
//!
//! The process exits 0 even when a criterion fails so the workspace test run
//! stays usable; set `TBRI_ACCEPTANCE_STRICT=1` to turn failures into a
//! non-zero exit.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use tbri::aggregate::{self, AggregateSummary, MapRow};
use tbri::export;
use tbri::plan::{self, Scale};
use tbri::runner::{self, RunStore};
use tbri_core::basis::{self, FockBasis};
use tbri_core::hamiltonian;
use tbri_core::model::{ModelParams, SpMode};
use tbri_core::seed::mix64;
use tbri_core::spectral;
use tbri_core::strength::Shape;
use tbri_core::thermal::{self, Verdict};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }

    fn error(e: impl std::fmt::Display) -> Self {
        Outcome::new(false, format!("error: {e}"))
    }
}

type Check = Result<Outcome, Box<dyn std::error::Error>>;

/// Uniform in [0, 1) from a counter.
fn unit(key: u64) -> f64 {
    (mix64(key) >> 11) as f64 / (1u64 << 53) as f64
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

struct Ctx {
    root: PathBuf,
    workers: usize,
    fig4: Option<(PathBuf, AggregateSummary, Duration)>,
}

impl Ctx {
    fn sweep(&self, name: &str, dir: &str, workers: usize) -> Result<(PathBuf, AggregateSummary, Duration), Box<dyn std::error::Error>> {
        let plan = plan::preset(name, Scale::Desk)?;
        let store = RunStore::new(self.root.join(dir));
        let t = Instant::now();
        runner::execute(&plan, &store, workers)?;
        let elapsed = t.elapsed();
        let summary = aggregate::read_summary(&store.aggregate_dir())?;
        Ok((store.root().to_path_buf(), summary, elapsed))
    }

    fn fig4(&mut self) -> Result<&(PathBuf, AggregateSummary, Duration), Box<dyn std::error::Error>> {
        if self.fig4.is_none() {
            self.fig4 = Some(self.sweep("fig4", "fig4", self.workers)?);
        }
        Ok(self.fig4.as_ref().unwrap())
    }
}

fn dimension_and_connectivity() -> Check {
    let t = Instant::now();
    let dim = basis::basis_dimension(6, 11)?;
    let b = FockBasis::enumerate(6, 11)?;
    let model = ModelParams::new(6, 11, 0.1, SpMode::UniformRandom).draw(1)?;
    let h = hamiltonian::assemble(&model, &b)?;
    let conn = h.row_connectivity();
    let (lo, hi) = (*conn.iter().min().unwrap(), *conn.iter().max().unwrap());
    let elapsed = t.elapsed();
    let pass = dim == 8008 && b.len() == 8008 && lo == 65 && hi == 735 && elapsed < Duration::from_secs(10);
    Ok(Outcome::new(
        pass,
        format!("dimension {dim}, connectivity {lo}/{hi}, {:.2} s", elapsed.as_secs_f64()),
    ))
}

fn sum_rules() -> Check {
    let t = Instant::now();
    let b = FockBasis::enumerate(4, 9)?;
    let model = ModelParams::new(4, 9, 0.2, SpMode::UniformRandom).draw(7)?;
    let h = hamiltonian::assemble(&model, &b)?;
    let spec = spectral::diagonalize(&h)?;
    let eigs = spec.eigenvalues();
    let diag = h.diagonal();
    let row_sq = h.off_diagonal_row_norms_sq();
    let (mut first, mut second, mut complete) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..h.dimension() {
        let w = spec.basis_state_weights(k);
        let norm: f64 = w.iter().sum();
        let centroid: f64 = w.iter().zip(eigs).map(|(w, e)| w * e).sum();
        let var: f64 = w.iter().zip(eigs).map(|(w, e)| w * (e - diag[k]).powi(2)).sum();
        complete = complete.max((norm - 1.0).abs());
        first = first.max(rel(centroid, diag[k]));
        second = second.max(rel(var, row_sq[k]));
    }
    let elapsed = t.elapsed();
    let pass = first < 1e-9 && second < 1e-9 && complete < 1e-10 && elapsed < Duration::from_secs(60);
    Ok(Outcome::new(
        pass,
        format!(
            "max relative error centroid {first:.1e}, width {second:.1e}; completeness {complete:.1e}; {:.2} s",
            elapsed.as_secs_f64()
        ),
    ))
}

fn width_scaling(ctx: &mut Ctx) -> Check {
    let (_, s, elapsed) = ctx.fig4()?;
    let sc = s.scaling.as_ref().ok_or("no scaling report")?;
    let cr = s.crossover.ok_or("no crossover estimate")?;
    let g = sc.gamma_slope.ok_or("no Breit-Wigner points")?;
    let w = sc.width_slope.ok_or("no width slope")?;
    let x = sc.intersection.ok_or("no intersection")?;
    let in_band = x >= cr.low && x <= cr.high;
    let pass = (g - 2.0).abs() <= 0.3 && (w - 1.0).abs() <= 0.1 && in_band && *elapsed < Duration::from_secs(1800);
    Ok(Outcome::new(
        pass,
        format!(
            "gamma slope {g:.3} over {} points, width slope {w:.3}, intersection {x:.4} vs band [{:.4}, {:.4}], {:.0} s",
            sc.bw_points,
            cr.low,
            cr.high,
            elapsed.as_secs_f64()
        ),
    ))
}

fn shape_crossover(ctx: &mut Ctx) -> Check {
    let (_, s, _) = ctx.fig4()?;
    let shapes: Vec<Shape> = s.strength.iter().map(|p| p.preferred).collect();
    let has = |x: Shape| shapes.contains(&x);
    let ordered = s.shapes_ordered == Some(true);
    let pass = ordered && has(Shape::DeltaLike) && has(Shape::BreitWigner) && has(Shape::Gaussian);
    let seq: Vec<String> = s.strength.iter().map(|p| format!("{}:{}", p.v, p.preferred)).collect();
    Ok(Outcome::new(pass, seq.join(" ")))
}

fn ond_identities() -> Check {
    let b = FockBasis::enumerate(4, 9)?;
    let model = ModelParams::new(4, 9, 0.2, SpMode::UniformRandom).draw(11)?;
    let h = hamiltonian::assemble(&model, &b)?;
    let spec = spectral::diagonalize(&h)?;
    let e0 = h.h0_diagonal();
    let (mut particles, mut energy) = (0.0f64, 0.0f64);
    for i in 0..100u64 {
        let alpha = (mix64(0x4f4e44 ^ i) % spec.dimension() as u64) as usize;
        let d = thermal::occupation_numbers(&spec, &b, &model, alpha)?;
        let n: f64 = d.values.iter().sum();
        let e: f64 = d.values.iter().zip(&model.sp_energies).map(|(n, e)| n * e).sum();
        let h0: f64 = spec.eigenvector(alpha).iter().zip(e0).map(|(c, e)| c * c * e).sum();
        particles = particles.max(rel(n, 4.0));
        energy = energy.max(rel(e, h0));
    }
    Ok(Outcome::new(
        particles < 1e-9 && energy < 1e-9,
        format!("max relative error particles {particles:.1e}, energy {energy:.1e}"),
    ))
}

fn bed_solver() -> Check {
    let (mut worst, mut failures, mut wrong_sign, mut above) = (0.0f64, 0usize, 0usize, 0usize);
    let mut beta0 = 0.0f64;
    for i in 0..1000u64 {
        let key = i << 8;
        let m = 2 + (mix64(key) % 19) as usize;
        let n = 1 + (mix64(key + 1) % 10) as usize;
        let eps: Vec<f64> = (0..m).map(|s| m as f64 * unit(key + 16 + s as u64)).collect();
        let lo = n as f64 * eps.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = n as f64 * eps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let target = lo + (hi - lo) * (0.01 + 0.98 * unit(key + 2));
        let sol = match thermal::solve_bed(&eps, n, target) {
            Ok(s) => s,
            Err(_) => {
                failures += 1;
                continue;
            }
        };
        // Recompute occupations from (β, ln z) without the solver's internals.
        let occ: Vec<f64> = eps.iter().map(|e| 1.0 / (sol.beta * e - sol.ln_z).exp_m1()).collect();
        let np: f64 = occ.iter().sum();
        let en: f64 = occ.iter().zip(&eps).map(|(n, e)| n * e).sum();
        worst = worst.max((np - n as f64).abs() / n as f64).max((en - target).abs() / (hi - lo));
        let mean = n as f64 * eps.iter().sum::<f64>() / m as f64;
        if target > mean {
            above += 1;
            if sol.beta >= 0.0 {
                wrong_sign += 1;
            }
        }
        match thermal::solve_bed(&eps, n, mean) {
            Ok(s) => beta0 = beta0.max(s.beta.abs()),
            Err(_) => failures += 1,
        }
    }
    let pass = failures == 0 && worst < 1e-9 && beta0 < 1e-8 && wrong_sign == 0;
    Ok(Outcome::new(
        pass,
        format!(
            "1000 instances, {failures} failures, max residual {worst:.1e}, max |beta| at mean energy {beta0:.1e}, {wrong_sign}/{above} above the middle with beta >= 0"
        ),
    ))
}

struct Fig9 {
    summary: AggregateSummary,
}

fn dressed_energy(f: &Fig9) -> Check {
    let s = &f.summary;
    let cr = s.crossover.ok_or("no crossover estimate")?;
    let v_hi = *s.v_grid.last().unwrap();
    let v_lo = s.v_grid[0];
    let (mut better, mut total) = (0usize, 0usize);
    for p in s.probes.iter().filter(|p| p.v == v_hi && p.lower_half) {
        better += p.dressed_better;
        total += p.windows;
    }
    let frac = better as f64 / total.max(1) as f64;
    let ratios: Vec<(String, Option<f64>)> = s
        .probes
        .iter()
        .filter(|p| p.v == v_lo)
        .map(|p| (p.label.clone(), p.median_chi2_ratio))
        .collect();
    let weak_ok = ratios.iter().all(|(_, r)| r.is_some_and(|r| (0.5..=2.0).contains(&r)));
    let factor = v_hi / cr.v_c;
    let scale_ok = (3.0..=5.0).contains(&factor) && v_lo < cr.low;
    let listing: Vec<String> = ratios
        .iter()
        .map(|(l, r)| format!("{l}={}", r.map_or("none".into(), |r| format!("{r:.3}"))))
        .collect();
    Ok(Outcome::new(
        frac >= 0.9 && weak_ok && scale_ok,
        format!(
            "V={v_hi} ({factor:.2} V_c): dressed better in {better}/{total} windows ({:.1}%); V={v_lo} median ratios {}",
            100.0 * frac,
            listing.join(" ")
        ),
    ))
}

fn fluctuations(f: &Fig9) -> Check {
    let s = &f.summary;
    let v_hi = *s.v_grid.last().unwrap();
    let v_lo = s.v_grid[0];
    let find = |v: f64| {
        s.probes
            .iter()
            .find(|p| p.v == v && p.label == "f0.50")
            .and_then(|p| p.zeta)
    };
    let chaotic = find(v_hi).ok_or("no chaotic-window zeta report")?;
    let pert = find(v_lo).ok_or("no perturbative-window zeta report")?;
    let describe = |r: &tbri_core::stats::NormalityReport| {
        format!(
            "skew {:.3}, excess kurtosis {:.3}, KS p {:.2e}, n={}, {}",
            r.skewness,
            r.excess_kurtosis,
            r.ks_p_value,
            r.samples,
            if r.pass { "normal" } else { "not normal" }
        )
    };
    Ok(Outcome::new(
        chaotic.pass && !pert.pass,
        format!("chaotic V={v_hi}: {}; perturbative V={v_lo}: {}", describe(&chaotic), describe(&pert)),
    ))
}

fn classifier(dir: &Path) -> Check {
    let rows: Vec<MapRow> = export::read_csv(&dir.join("aggregate").join("classifier_map.csv"))?;
    let mut by_bin: BTreeMap<u64, Vec<&MapRow>> = BTreeMap::new();
    for r in &rows {
        by_bin.entry(r.energy_lo.to_bits()).or_default().push(r);
    }
    let (mut bins, mut inversions) = (0usize, 0usize);
    for rs in by_bin.values_mut() {
        rs.sort_by(|a, b| a.v.total_cmp(&b.v));
        let medians: Vec<f64> = rs.iter().filter_map(|r| r.median_ln_ratio).collect();
        if medians.len() >= 2 {
            bins += 1;
        }
        inversions += medians.windows(2).filter(|w| w[1] <= w[0]).count();
    }
    let thermal: Vec<&MapRow> = rows.iter().filter(|r| r.verdict == Verdict::Thermal).collect();
    let misplaced = thermal
        .iter()
        .filter(|r| !r.median_ln_ratio.is_some_and(|l| l > 0.0))
        .count();
    Ok(Outcome::new(
        inversions == 0 && misplaced == 0,
        format!(
            "{bins} energy bins with two or more V points, {inversions} inversions; {} thermal cells, {misplaced} with V <= d_loc",
            thermal.len()
        ),
    ))
}

fn tree(root: &Path) -> Result<BTreeMap<PathBuf, Vec<u8>>, Box<dyn std::error::Error>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir)? {
            let p = entry?.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root)?.to_path_buf(), fs::read(&p)?);
            }
        }
    }
    Ok(out)
}

fn determinism(ctx: &mut Ctx) -> Check {
    let first = ctx.fig4()?.0.clone();
    let other = if ctx.workers == 1 { 3 } else { 1 };
    let (second, _, _) = ctx.sweep("fig4", "fig4-rerun", other)?;
    let (a, b) = (tree(&first)?, tree(&second)?);
    let differing: Vec<String> = a
        .keys()
        .chain(b.keys())
        .filter(|k| a.get(*k) != b.get(*k))
        .map(|k| k.display().to_string())
        .collect();
    let plan = plan::preset("fig4", Scale::Desk)?;
    let again = runner::execute(&plan, &RunStore::new(&second), other)?;
    let unchanged = tree(&second)? == b;
    let pass = differing.is_empty() && again.ran == 0 && unchanged;
    Ok(Outcome::new(
        pass,
        format!(
            "{} files compared between {} and {other} workers, {} differ{}; rerun ran {} tasks, store {}",
            a.len(),
            ctx.workers,
            differing.len(),
            differing.first().map_or(String::new(), |d| format!(" (first: {d})")),
            again.ran,
            if unchanged { "unchanged" } else { "modified" }
        ),
    ))
}

fn report(n: usize, c: Check, failed: &mut Vec<usize>) {
    let o = c.unwrap_or_else(Outcome::error);
    println!("{} criterion {n}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    if !o.pass {
        failed.push(n);
    }
}

fn main() {
    let root = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    if root.exists() {
        fs::remove_dir_all(&root).expect("clean acceptance directory");
    }
    fs::create_dir_all(&root).expect("create acceptance directory");
    let mut ctx = Ctx {
        root,
        workers: runner::default_workers(),
        fig4: None,
    };
    let mut failed = Vec::new();

    report(1, dimension_and_connectivity(), &mut failed);
    report(2, sum_rules(), &mut failed);
    report(3, width_scaling(&mut ctx), &mut failed);
    report(4, shape_crossover(&mut ctx), &mut failed);
    report(5, ond_identities(), &mut failed);
    report(6, bed_solver(), &mut failed);

    match ctx.sweep("fig9", "fig9", ctx.workers) {
        Ok((_, summary, _)) => {
            let f = Fig9 { summary };
            report(7, dressed_energy(&f), &mut failed);
            report(8, fluctuations(&f), &mut failed);
        }
        Err(e) => {
            let msg = e.to_string();
            report(7, Err(msg.clone().into()), &mut failed);
            report(8, Err(msg.into()), &mut failed);
        }
    }

    let c9 = ctx
        .sweep("fig11", "fig11", ctx.workers)
        .and_then(|(dir, _, _)| classifier(&dir));
    report(9, c9, &mut failed);
    report(10, determinism(&mut ctx), &mut failed);

    if failed.is_empty() {
        println!("acceptance: all 10 criteria pass");
    } else {
        let list: Vec<String> = failed.iter().map(|n| n.to_string()).collect();
        println!("acceptance: {} of 10 criteria fail ({})", failed.len(), list.join(", "));
        if std::env::var("TBRI_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
            std::process::exit(1);
        }
    }
}
