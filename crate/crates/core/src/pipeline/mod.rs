//! End-to-end commands: dataset generation, graph building, evaluation,
//! ablations and reports. Each is a pure function of its on-disk inputs,
//! the configuration and the root seed.

mod ablate;
mod config;
mod dataset;
mod eval;
mod graphs;

use std::path::{Path, PathBuf};

use serde::Serialize;

pub use ablate::{ablation_series, render_ablation, run_ablation, AblationParts, AblationReport, MergeOrderSpread, SweepRow};
pub use config::{PolicyTuning, RunConfig, SplitSizes, CONFIG_VERSION};
pub use dataset::{generate_dataset, write_dataset, Dataset, Manifest, SceneSplits, Split, ENV_DIR, MANIFEST_FILE};
pub use eval::{
    episode_jobs, episode_seed, render_table, run_jobs, simulators, summarize, summary_csv, Cell,
    EpisodeJob, Summary, SummaryRow,
};
pub use graphs::{
    build_graphs, cooccurrence_counts, load_run_artifacts, merge_order, merge_shuffle_seed, room_graph,
    room_graphs, scene_graphs, scene_names, GraphArtifacts, COOCCURRENCE_FILE, GLOBAL_FILE, PARAMS_FILE,
    ROOM_DIR, SCENE_DIR,
};

use crate::env::GridEnvironment;
use crate::error::{HozError, Result};
use crate::gcn::GcnParams;
use crate::hoz::GlobalGraph;
use crate::policy::PolicyMode;
use crate::sim::{read_episode_log, write_episode_log, EpisodeRecord, Simulator};

pub const EPISODE_LOG: &str = "episodes.ndjson";
pub const REPORT_JSON: &str = "report.json";
pub const REPORT_TXT: &str = "report.txt";
pub const REPORT_CSV: &str = "report.csv";
pub const ABLATION_JSON: &str = "ablation.json";
pub const ABLATION_TXT: &str = "ablation.txt";

/// Refuse to write into an existing non-empty directory unless forced.
pub(crate) fn prepare_output(out: &Path, force: bool) -> Result<()> {
    if out.exists() {
        let occupied = !out.is_dir()
            || std::fs::read_dir(out)
                .map_err(|e| HozError::io(out, e))?
                .next()
                .is_some();
        if occupied && !force {
            return Err(HozError::PathCollision(out.to_path_buf()));
        }
    }
    std::fs::create_dir_all(out).map_err(|e| HozError::io(out, e))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("value serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| HozError::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| HozError::io(path, e))
}

/// Run `f` on a pool of `jobs` threads, or on the global pool when `jobs` is 0.
pub fn with_threads<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if jobs == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| HozError::InvalidInput(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Simulators and episode jobs for a fixed set of evaluation rooms.
pub struct Evaluator<'a> {
    cfg: &'a RunConfig,
    sims: Vec<Simulator<'a>>,
    jobs: Vec<EpisodeJob>,
}

impl<'a> Evaluator<'a> {
    pub fn new(envs: &'a [GridEnvironment], cfg: &'a RunConfig) -> Result<Self> {
        let sims = simulators(envs, cfg)?;
        let jobs = episode_jobs(envs, &sims, cfg);
        if jobs.is_empty() {
            return Err(HozError::Empty("evaluation episodes"));
        }
        Ok(Self { cfg, sims, jobs })
    }

    pub fn jobs(&self) -> &[EpisodeJob] {
        &self.jobs
    }

    pub fn run(
        &self,
        graphs: &GlobalGraph,
        gcn: Option<&GcnParams>,
        mode: PolicyMode,
        lambda: f64,
    ) -> Result<Vec<EpisodeRecord>> {
        run_jobs(&self.sims, &self.jobs, graphs, gcn, self.cfg, mode, lambda)
    }
}

/// `gen`: write a dataset of rooms with a split manifest.
pub fn cmd_gen(out: &Path, cfg: &RunConfig, force: bool) -> Result<Manifest> {
    let (manifest, envs) = generate_dataset(cfg)?;
    write_dataset(out, &manifest, &envs, force)?;
    Ok(manifest)
}

/// `build-graph`: room, scene and global graphs plus GCN inputs from the training split.
pub fn cmd_build_graph(dataset: &Path, out: &Path, cfg: &RunConfig, force: bool) -> Result<GraphArtifacts> {
    let ds = Dataset::open(dataset)?;
    let artifacts = with_threads(cfg.jobs, || build_graphs(&ds, cfg, cfg.k))??;
    artifacts.write(out, &scene_names(&ds), force)?;
    Ok(artifacts)
}

/// `run`: evaluate each configured policy on the test split.
pub fn cmd_run(dataset: &Path, graphs: &Path, out: &Path, cfg: &RunConfig, force: bool) -> Result<Summary> {
    cfg.validate()?;
    let ds = Dataset::open(dataset)?;
    let (global, params) = load_run_artifacts(graphs)?;
    let test = ds.load_split(Split::Test)?;
    let records = with_threads(cfg.jobs, || -> Result<Vec<EpisodeRecord>> {
        let evaluator = Evaluator::new(&test, cfg)?;
        let mut all = Vec::new();
        for &mode in &cfg.modes {
            all.extend(evaluator.run(&global, Some(&params), mode, cfg.lambda)?);
        }
        Ok(all)
    })??;
    let summary = summarize(&records)?;
    prepare_output(out, force)?;
    write_episode_log(&out.join(EPISODE_LOG), &records)?;
    write_report(out, &summary)?;
    Ok(summary)
}

fn write_report(out: &Path, summary: &Summary) -> Result<()> {
    write_json(&out.join(REPORT_JSON), summary)?;
    write_text(&out.join(REPORT_TXT), &render_table(summary))?;
    write_text(&out.join(REPORT_CSV), &summary_csv(summary))
}

/// `ablate`: run the sweeps and write the report plus one CSV per sweep.
pub fn cmd_ablate(dataset: &Path, out: &Path, cfg: &RunConfig, force: bool) -> Result<AblationReport> {
    let ds = Dataset::open(dataset)?;
    let report = with_threads(cfg.jobs, || run_ablation(&ds, cfg, AblationParts::ALL))??;
    prepare_output(out, force)?;
    write_json(&out.join(ABLATION_JSON), &report)?;
    write_text(&out.join(ABLATION_TXT), &render_ablation(&report))?;
    for (name, csv) in ablation_series(&report) {
        write_text(&out.join(name), &csv)?;
    }
    Ok(report)
}

/// `report`: re-derive the metrics tables from episode logs. Each argument
/// is a log file or a run directory containing one.
pub fn cmd_report(logs: &[PathBuf], out: Option<&Path>, force: bool) -> Result<(Summary, String)> {
    if logs.is_empty() {
        return Err(HozError::Empty("episode logs"));
    }
    let mut records = Vec::new();
    for path in logs {
        let file = if path.is_dir() { path.join(EPISODE_LOG) } else { path.clone() };
        if !file.is_file() {
            return Err(HozError::MissingArtifact(file.display().to_string()));
        }
        records.extend(read_episode_log(&file)?);
    }
    let summary = summarize(&records)?;
    let table = render_table(&summary);
    if let Some(out) = out {
        prepare_output(out, force)?;
        write_report(out, &summary)?;
    }
    Ok((summary, table))
}
