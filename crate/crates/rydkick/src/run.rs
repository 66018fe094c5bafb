//! Task graph execution: one task per (engine, ν0), then the analysis
//! passes. Workers compute and write their own files; only this module's
//! collector touches the manifest.

use std::path::Path;
use std::sync::{mpsc, OnceLock};
use std::time::{Duration, Instant};

use log::{info, warn};
use rayon::prelude::*;
use rydkick_core::classical::{block_ranges, run_block, BlockTally};
use rydkick_core::quantum::{
    evolve_direct, evolve_floquet, observe, EnergyBasis, FloquetDecomposition, FloquetOperator,
    QuantumState,
};
use rydkick_core::series::{EngineTag, ObservableSeries};
use rydkick_core::{Checkpoints, SystemParams};

use crate::config::{ExperimentConfig, QuantumMethod};
use crate::format::{histograms_to_bytes, nu0_dir, series_to_text, HISTOGRAM_FILE, SERIES_FILE};
use crate::manifest::{FileRecord, Manifest, TaskStatus, CONFIG_FILE, MANIFEST_FILE};
use crate::{analyze, config, Error, Result};

pub const ANALYSIS_TASK: &str = "analysis";

/// Minimum time between manifest rewrites while tasks finish. A task that
/// completes inside the window and is then lost to a crash is recomputed.
const SAVE_INTERVAL: Duration = Duration::from_secs(1);

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    /// Worker threads; results do not depend on it.
    pub workers: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Task {
    pub engine: EngineTag,
    pub nu0: f64,
}

impl Task {
    /// Directory of the task's files relative to the run root.
    pub fn dir(&self) -> String {
        format!("series/{}/{}", self.engine.as_str(), nu0_dir(self.nu0))
    }

    pub fn id(&self) -> String {
        format!("{}/{}", self.engine.as_str(), nu0_dir(self.nu0))
    }
}

pub fn tasks(cfg: &ExperimentConfig) -> Vec<Task> {
    let mut out = Vec::new();
    for (on, engine) in [
        (cfg.engine.quantum(), EngineTag::Quantum),
        (cfg.engine.classical(), EngineTag::Classical),
    ] {
        if on {
            out.extend(cfg.nu0_grid().into_iter().map(|nu0| Task { engine, nu0 }));
        }
    }
    out
}

fn task_ids(cfg: &ExperimentConfig) -> Vec<String> {
    let mut ids: Vec<String> = tasks(cfg).iter().map(Task::id).collect();
    if !cfg.analysis.passes.is_empty() {
        ids.push(ANALYSIS_TASK.to_owned());
    }
    ids
}

pub fn build_basis(cfg: &ExperimentConfig) -> Result<EnergyBasis> {
    Ok(EnergyBasis::build(
        cfg.quantum.q_max,
        cfg.quantum.points,
        cfg.grid_spec(),
    )?)
}

pub fn quantum_series(
    cfg: &ExperimentConfig,
    basis: &EnergyBasis,
    nu0: f64,
) -> Result<ObservableSeries> {
    let params = cfg.params(nu0)?;
    let ks = cfg.checkpoints()?;
    let mask = cfg.mask();
    let op = FloquetOperator::build(
        basis,
        &params,
        (mask.applications_per_period > 0).then_some(&mask),
    )?;
    let psi = QuantumState::eigenstate(basis, cfg.system.n_i as usize)?;
    let hist = cfg.quantum.histograms;
    if params.dp == 0.0 {
        // Without a kick the initial eigenstate is stationary; the mask only
        // sees its exponentially small tail, far below double precision.
        let mut series = ObservableSeries::new(EngineTag::Quantum);
        for &k in ks.as_slice() {
            let mut row = observe(&psi, basis, params.period, hist);
            row.k = k;
            row.t_au = k as f64 * params.period;
            series.rows.push(row);
        }
        return Ok(series);
    }
    Ok(match cfg.quantum.method {
        QuantumMethod::Direct => evolve_direct(&psi, &op, basis, &ks, hist),
        QuantumMethod::Floquet => {
            evolve_floquet(&FloquetDecomposition::new(&op, &psi)?, basis, &ks, hist)
        }
    })
}

/// Classical ensemble run with blocks spread over the current rayon pool
/// and merged in block order.
pub fn classical_series(
    params: &SystemParams,
    n_traj: u64,
    seed: u64,
    ks: &Checkpoints,
    hist_n_max: usize,
    keep_histograms: bool,
) -> Result<ObservableSeries> {
    let tallies = block_ranges(n_traj)
        .into_par_iter()
        .map(|r| run_block(params, seed, r, ks, hist_n_max))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut total = BlockTally::new(ks.len(), hist_n_max);
    for t in &tallies {
        total.merge(t);
    }
    let mut series = total.into_series(ks, params.period);
    if !keep_histograms {
        series.rows.iter_mut().for_each(|r| r.histogram = None);
    }
    Ok(series)
}

fn run_task(
    cfg: &ExperimentConfig,
    root: &Path,
    task: &Task,
    basis: &OnceLock<std::result::Result<EnergyBasis, String>>,
) -> Result<Vec<FileRecord>> {
    let params = cfg.params(task.nu0)?;
    let series = match task.engine {
        EngineTag::Quantum => {
            let basis = basis
                .get_or_init(|| build_basis(cfg).map_err(|e| e.to_string()))
                .as_ref()
                .map_err(|e| Error::Config(e.clone()))?;
            quantum_series(cfg, basis, task.nu0)?
        }
        EngineTag::Classical => classical_series(
            &params,
            cfg.classical.trajectories,
            cfg.classical.seed,
            &cfg.checkpoints()?,
            cfg.hist_n_max(),
            cfg.classical.histograms,
        )?,
    };
    let dir = task.dir();
    let mut files = vec![FileRecord::write(
        root,
        &format!("{dir}/{SERIES_FILE}"),
        series_to_text(&series, &params).as_bytes(),
    )?];
    if let Some(bytes) = histograms_to_bytes(&series) {
        files.push(FileRecord::write(
            root,
            &format!("{dir}/{HISTOGRAM_FILE}"),
            &bytes,
        )?);
    }
    Ok(files)
}

/// Runs everything not yet complete and checksummed, then the analysis
/// passes if any engine output changed or the analysis itself is stale.
fn execute(
    cfg: &ExperimentConfig,
    root: &Path,
    manifest: &mut Manifest,
    opts: RunOptions,
) -> Result<()> {
    let start = Instant::now();
    let todo: Vec<Task> = tasks(cfg)
        .into_iter()
        .filter(|t| !manifest.tasks.get(&t.id()).is_some_and(|r| r.is_done(root)))
        .collect();
    info!("{} of {} engine tasks to run", todo.len(), tasks(cfg).len());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let basis = OnceLock::new();
    let (tx, rx) = mpsc::channel();
    let mut save_error = None;
    let mut last_save = Instant::now();
    std::thread::scope(|s| {
        let todo = &todo;
        let basis = &basis;
        s.spawn(|| {
            pool.install(|| {
                todo.par_iter().for_each_with(tx, |tx, task| {
                    let t0 = Instant::now();
                    let result = run_task(cfg, root, task, basis);
                    let _ = tx.send((task.id(), result, t0.elapsed().as_secs_f64()));
                })
            })
        });
        for (id, result, wall) in rx {
            let rec = manifest
                .tasks
                .entry(id.clone())
                .or_insert_with(crate::manifest::TaskRecord::pending);
            rec.wall_seconds = wall;
            match result {
                Ok(files) => {
                    rec.status = TaskStatus::Complete;
                    rec.files = files;
                    rec.error = None;
                    info!("{id} done in {wall:.2} s");
                }
                Err(e) => {
                    warn!("{id} failed: {e}");
                    rec.status = TaskStatus::Failed;
                    rec.files.clear();
                    rec.error = Some(e.to_string());
                }
            }
            if last_save.elapsed() >= SAVE_INTERVAL {
                if let Err(e) = manifest.save(root) {
                    save_error.get_or_insert(e);
                }
                last_save = Instant::now();
            }
        }
    });
    if let Some(e) = save_error {
        return Err(e);
    }

    if !cfg.analysis.passes.is_empty() {
        let engines_done = tasks(cfg)
            .iter()
            .all(|t| manifest.tasks[&t.id()].status == TaskStatus::Complete);
        let analysis_stale = !todo.is_empty()
            || !manifest
                .tasks
                .get(ANALYSIS_TASK)
                .is_some_and(|r| r.is_done(root));
        if engines_done && analysis_stale {
            let t0 = Instant::now();
            let result = analyze::run_passes(cfg, root);
            let rec = manifest
                .tasks
                .entry(ANALYSIS_TASK.to_owned())
                .or_insert_with(crate::manifest::TaskRecord::pending);
            rec.wall_seconds = t0.elapsed().as_secs_f64();
            match result {
                Ok(files) => {
                    rec.status = TaskStatus::Complete;
                    rec.files = files;
                    rec.error = None;
                }
                Err(e) => {
                    warn!("analysis failed: {e}");
                    rec.status = TaskStatus::Failed;
                    rec.files.clear();
                    rec.error = Some(e.to_string());
                }
            }
        }
    }
    manifest.wall_seconds += start.elapsed().as_secs_f64();
    manifest.save(root)
}

/// Starts a fresh run in `out`, which must not already hold one.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path, opts: RunOptions) -> Result<Manifest> {
    cfg.validate()?;
    if out.join(MANIFEST_FILE).exists() {
        return Err(Error::Occupied(out.to_path_buf()));
    }
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut stored = cfg.clone();
    stored.output.dir = None;
    crate::format::write_atomic(&out.join(CONFIG_FILE), stored.to_toml().as_bytes())?;
    let mut manifest = Manifest::new(cfg.hash(), cfg.classical.seed, task_ids(cfg));
    manifest.save(out)?;
    execute(cfg, out, &mut manifest, opts)?;
    Ok(manifest)
}

/// Finishes an interrupted run. Tasks that are complete with intact files
/// are left alone; missing, failed or corrupted ones are recomputed.
pub fn resume(out: &Path, config: Option<&ExperimentConfig>, opts: RunOptions) -> Result<Manifest> {
    let mut manifest = Manifest::load(out)?;
    let stored = ExperimentConfig::load(&out.join(CONFIG_FILE))?;
    if stored.hash() != manifest.config_hash {
        return Err(Error::ConfigMismatch(format!(
            "{} was edited after the run started",
            CONFIG_FILE
        )));
    }
    if let Some(cfg) = config {
        if cfg.hash() != manifest.config_hash {
            return Err(Error::ConfigMismatch(config::diff_summary(&stored, cfg)));
        }
    }
    let stale = crate::format::remove_partials(out)?;
    if stale > 0 {
        info!("removed {stale} interrupted writes");
    }
    for id in task_ids(&stored) {
        manifest
            .tasks
            .entry(id)
            .or_insert_with(crate::manifest::TaskRecord::pending);
    }
    if manifest.is_complete(out) {
        info!("nothing to resume");
        return Ok(manifest);
    }
    execute(&stored, out, &mut manifest, opts)?;
    Ok(manifest)
}
