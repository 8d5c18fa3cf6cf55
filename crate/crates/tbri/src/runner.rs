//! Run stores and the parallel executor.
//!
//! Layout of a store:
//!
//! ```text
//! <root>/plan.json        the plan this store belongs to
//! <root>/manifest.json    completed and failed tasks
//! <root>/tasks/<task>/    per-task files (see `pipeline`)
//! <root>/aggregate/       merged tables
//! ```

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tbri_core::basis::FockBasis;

use crate::aggregate;
use crate::error::{AppError, Result};
use crate::export;
use crate::pipeline;
use crate::plan::{SweepPlan, Task};

pub const MANIFEST_VERSION: u32 = 1;
pub const PLAN_FILE: &str = "plan.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const TASKS_DIR: &str = "tasks";
pub const AGGREGATE_DIR: &str = "aggregate";

/// Environment variable with the default worker count.
pub const WORKERS_ENV: &str = "TBRI_WORKERS";

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub plan_hash: String,
    /// Task directory names, sorted.
    pub completed: BTreeSet<String>,
    pub failures: Vec<Failure>,
    pub aggregated: bool,
    pub partial: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Failure {
    pub task: String,
    pub error: String,
}

#[derive(Debug, Clone)]
pub struct RunStore {
    root: PathBuf,
}

impl RunStore {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        RunStore { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn task_dir(&self, task: &Task) -> PathBuf {
        self.root.join(TASKS_DIR).join(task.dir_name())
    }

    pub fn aggregate_dir(&self) -> PathBuf {
        self.root.join(AGGREGATE_DIR)
    }

    pub fn plan(&self) -> Result<SweepPlan> {
        export::read_json(&self.root.join(PLAN_FILE))
    }

    pub fn manifest(&self) -> Result<Manifest> {
        export::read_json(&self.root.join(MANIFEST_FILE))
    }

    fn write_manifest(&self, m: &Manifest) -> Result<()> {
        let tmp = self.root.join(".manifest.json.tmp");
        export::write_json(&tmp, m)?;
        let dest = self.root.join(MANIFEST_FILE);
        fs::rename(&tmp, &dest).map_err(|e| AppError::io(dest, e))
    }

    /// Bind the store to `plan`, creating it if needed. A store created for
    /// a different plan is refused.
    fn open_for(&self, plan: &SweepPlan) -> Result<Manifest> {
        export::create_dir(&self.root.join(TASKS_DIR))?;
        let hash = plan.content_hash();
        let plan_path = self.root.join(PLAN_FILE);
        if plan_path.exists() {
            let stored = self.plan()?;
            if stored.content_hash() != hash {
                return Err(AppError::PlanMismatch { path: self.root.clone() });
            }
        } else {
            export::write_json(&plan_path, plan)?;
        }
        if self.root.join(MANIFEST_FILE).exists() {
            let m = self.manifest()?;
            if m.plan_hash != hash {
                return Err(AppError::PlanMismatch { path: self.root.clone() });
            }
            Ok(m)
        } else {
            let m = Manifest {
                schema_version: MANIFEST_VERSION,
                plan_hash: hash,
                ..Manifest::default()
            };
            self.write_manifest(&m)?;
            Ok(m)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExecuteReport {
    pub ran: usize,
    pub skipped: usize,
    pub failed: usize,
    pub aggregated: bool,
}

/// Worker count from `TBRI_WORKERS`, falling back to the available cores.
pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|s| s.parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Run every pending task of `plan` into `store` and aggregate. Completed
/// tasks are skipped, so running the same plan again does nothing.
pub fn execute(plan: &SweepPlan, store: &RunStore, workers: usize) -> Result<ExecuteReport> {
    plan.validate()?;
    let mut manifest = store.open_for(plan)?;
    let all = plan.tasks();
    let pending: Vec<Task> = all
        .iter()
        .copied()
        .filter(|t| !manifest.completed.contains(&t.dir_name()))
        .collect();
    let skipped = all.len() - pending.len();
    if pending.is_empty() && manifest.aggregated {
        info!("{}: nothing to do", store.root().display());
        return Ok(ExecuteReport {
            skipped,
            ..ExecuteReport::default()
        });
    }

    let basis = FockBasis::enumerate(plan.n_particles, plan.n_levels)?;
    manifest.aggregated = false;
    store.write_manifest(&manifest)?;
    let shared = Mutex::new(manifest);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| AppError::Validation(format!("cannot start worker pool: {e}")))?;
    info!("running {} tasks on {} workers", pending.len(), workers.max(1));

    let outcomes: Vec<Result<()>> = pool.install(|| {
        pending
            .par_iter()
            .map(|task| {
                let outcome = run_one(plan, &basis, store, *task);
                let mut m = shared.lock().expect("manifest lock");
                let name = task.dir_name();
                m.failures.retain(|f| f.task != name);
                match &outcome {
                    Ok(()) => {
                        m.completed.insert(name);
                    }
                    Err(e) => {
                        warn!("task {name} failed: {e}");
                        m.failures.push(Failure {
                            task: name,
                            error: e.to_string(),
                        });
                        m.failures.sort();
                    }
                }
                store.write_manifest(&m)?;
                Ok(())
            })
            .collect()
    });
    for o in outcomes {
        o?;
    }

    let mut manifest = shared.into_inner().expect("manifest lock");
    let failed = manifest.failures.len();
    aggregate::aggregate(&[store.root().to_path_buf()], &store.aggregate_dir(), None)?;
    manifest.aggregated = true;
    manifest.partial = failed > 0;
    store.write_manifest(&manifest)?;
    Ok(ExecuteReport {
        ran: pending.len() - failed.min(pending.len()),
        skipped,
        failed,
        aggregated: true,
    })
}

/// Run a task into a scratch directory and move it into place, so a task
/// directory either holds complete output or does not exist.
fn run_one(plan: &SweepPlan, basis: &FockBasis, store: &RunStore, task: Task) -> Result<()> {
    let dest = store.task_dir(&task);
    let tmp = store.root().join(TASKS_DIR).join(format!(".tmp-{}", task.dir_name()));
    if tmp.exists() {
        fs::remove_dir_all(&tmp).map_err(|e| AppError::io(&tmp, e))?;
    }
    export::create_dir(&tmp)?;
    if let Err(e) = pipeline::run_task(plan, basis, task, &tmp) {
        let _ = fs::remove_dir_all(&tmp);
        return Err(e);
    }
    if dest.exists() {
        fs::remove_dir_all(&dest).map_err(|e| AppError::io(&dest, e))?;
    }
    fs::rename(&tmp, &dest).map_err(|e| AppError::io(&dest, e))
}
