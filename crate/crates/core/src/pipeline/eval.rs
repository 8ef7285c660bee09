use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::env::GridEnvironment;
use crate::error::{HozError, Result};
use crate::gcn::GcnParams;
use crate::hoz::GlobalGraph;
use crate::metrics::{report, MetricsReport, Subset};
use crate::policy::{run_episode, PolicyMode};
use crate::rng::{derive_seed, tag_of};
use crate::sim::{EpisodeRecord, Simulator};

/// One episode to run: a room, a target and a trial index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpisodeJob {
    pub room: usize,
    pub target: usize,
    pub trial: u32,
    pub seed: u64,
}

/// Per-episode seed; shared across policies so they start from the same poses.
pub fn episode_seed(root: u64, trial: u32, room_id: &str, target: usize) -> u64 {
    derive_seed(root, &[tag_of("episode"), u64::from(trial), tag_of(room_id), target as u64])
}

/// Every (trial, room, present target) combination whose target is
/// reachable from the drawn start.
pub fn episode_jobs(envs: &[GridEnvironment], sims: &[Simulator<'_>], cfg: &RunConfig) -> Vec<EpisodeJob> {
    let mut jobs = Vec::new();
    for trial in 0..cfg.trials as u32 {
        for (room, env) in envs.iter().enumerate() {
            for target in env.present_categories() {
                let seed = episode_seed(cfg.seed, trial, &env.room_id, target);
                // Episodes whose target cannot be reached are excluded.
                let mut rng = crate::rng::SeededRng::new(seed);
                let Ok(start) = sims[room].reset(target, &mut rng) else { continue };
                if sims[room].shortest_path_length(&start.pose, target).is_none() {
                    continue;
                }
                jobs.push(EpisodeJob {
                    room,
                    target,
                    trial,
                    seed,
                });
            }
        }
    }
    jobs
}

/// Precomputed simulators for a list of rooms.
pub fn simulators<'a>(envs: &'a [GridEnvironment], cfg: &RunConfig) -> Result<Vec<Simulator<'a>>> {
    envs.par_iter()
        .map(|env| Simulator::new(env, cfg.sim_params()))
        .collect()
}

/// Run every job under one policy; records come back in job order.
pub fn run_jobs(
    sims: &[Simulator<'_>],
    jobs: &[EpisodeJob],
    graphs: &GlobalGraph,
    gcn: Option<&GcnParams>,
    cfg: &RunConfig,
    mode: PolicyMode,
    lambda: f64,
) -> Result<Vec<EpisodeRecord>> {
    let ep_cfg = cfg.episode_config(mode, lambda);
    jobs.par_iter()
        .map(|job| {
            let mut r = run_episode(&sims[job.room], job.target, graphs, gcn, &ep_cfg, job.seed)?;
            r.trial = job.trial;
            Ok(r)
        })
        .collect()
}

/// Mean over trials, with the sample variance when there are at least two.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub mean: f64,
    pub variance: Option<f64>,
}

impl Cell {
    pub fn of(values: &[f64]) -> Cell {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let variance = (values.len() >= 2)
            .then(|| values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0));
        Cell { mean, variance }
    }
}

/// Metrics of one policy on one subset, aggregated over trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub mode: String,
    pub subset: Subset,
    pub trials: usize,
    pub n_episodes: usize,
    pub sr: Cell,
    pub spl: Cell,
    pub sae: Cell,
    pub per_trial: Vec<MetricsReport>,
}

/// Machine-readable result of a run or a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
}

impl Summary {
    pub fn row(&self, mode: &str, subset: Subset) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.mode == mode && r.subset == subset)
    }
}

/// Group records by policy and trial, then compute metrics for the whole
/// set and the long-path subset. Policies appear in first-seen order.
pub fn summarize(records: &[EpisodeRecord]) -> Result<Summary> {
    if records.is_empty() {
        return Err(HozError::Empty("episode records"));
    }
    let mut modes: Vec<&str> = Vec::new();
    let mut groups: BTreeMap<&str, BTreeMap<u32, Vec<EpisodeRecord>>> = BTreeMap::new();
    for r in records {
        if !modes.contains(&r.mode.as_str()) {
            modes.push(&r.mode);
        }
        groups
            .entry(&r.mode)
            .or_default()
            .entry(r.trial)
            .or_default()
            .push(r.clone());
    }
    let mut rows = Vec::new();
    for mode in modes {
        let trials = &groups[mode];
        for subset in [Subset::All, Subset::LongPath] {
            let per_trial = match trials
                .values()
                .map(|recs| report(recs, subset))
                .collect::<Result<Vec<_>>>()
            {
                Ok(p) => p,
                // A trial without long-path episodes leaves that row out.
                Err(HozError::Empty(_)) if subset == Subset::LongPath => continue,
                Err(e) => return Err(e),
            };
            let col = |f: fn(&MetricsReport) -> f64| Cell::of(&per_trial.iter().map(f).collect::<Vec<_>>());
            rows.push(SummaryRow {
                mode: mode.to_string(),
                subset,
                trials: per_trial.len(),
                n_episodes: per_trial.iter().map(|r| r.n_episodes).sum(),
                sr: col(|r| r.sr),
                spl: col(|r| r.spl),
                sae: col(|r| r.sae),
                per_trial,
            });
        }
    }
    Ok(Summary { rows })
}

fn fmt_cell(c: &Cell) -> String {
    match c.variance {
        Some(v) => format!("{:6.2} ± {:5.2}", 100.0 * c.mean, 100.0 * v.sqrt()),
        None => format!("{:6.2}        ", 100.0 * c.mean),
    }
}

/// Table of policy × subset × metric, in percent (mean ± standard deviation over trials).
pub fn render_table(summary: &Summary) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<14} {:<6} {:>7} {:>15} {:>15} {:>15}",
        "mode", "subset", "episodes", "SR %", "SPL %", "SAE %"
    );
    for r in &summary.rows {
        let _ = writeln!(
            out,
            "{:<14} {:<6} {:>7} {:>15} {:>15} {:>15}",
            r.mode,
            r.subset.label(),
            r.n_episodes,
            fmt_cell(&r.sr),
            fmt_cell(&r.spl),
            fmt_cell(&r.sae)
        );
    }
    out
}

/// Flat CSV series (one line per row) for external plotting.
pub fn summary_csv(summary: &Summary) -> String {
    let mut out = String::from("mode,subset,trials,episodes,sr,sr_var,spl,spl_var,sae,sae_var\n");
    let var = |c: &Cell| c.variance.map_or(String::new(), |v| v.to_string());
    for r in &summary.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.mode,
            r.subset.label(),
            r.trials,
            r.n_episodes,
            r.sr.mean,
            var(&r.sr),
            r.spl.mean,
            var(&r.spl),
            r.sae.mean,
            var(&r.sae)
        );
    }
    out
}
