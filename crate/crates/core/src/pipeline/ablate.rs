use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::dataset::{Dataset, Split};
use super::eval::{summarize, Cell, SummaryRow};
use super::graphs::{merge_shuffle_seed, room_graphs, scene_graphs};
use super::Evaluator;
use crate::error::{HozError, Result};
use crate::metrics::Subset;
use crate::policy::PolicyMode;

/// One cell of a sweep: the setting varied and the resulting metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: usize,
    pub lambda: f64,
    pub mode: String,
    /// Index of the merge-order shuffle, when one was applied.
    pub shuffle: Option<usize>,
    pub all: SummaryRow,
    pub long_path: Option<SummaryRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeOrderSpread {
    pub shuffles: usize,
    /// Success rate (whole test set) per shuffle, trial-averaged.
    pub sr: Vec<f64>,
    pub sr_mean: f64,
    pub sr_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub k_sweep: Vec<SweepRow>,
    pub lambda_sweep: Vec<SweepRow>,
    pub modes: Vec<SweepRow>,
    pub merge_order: Vec<SweepRow>,
    pub merge_order_spread: Option<MergeOrderSpread>,
}

fn row(
    records: &[crate::sim::EpisodeRecord],
    k: usize,
    lambda: f64,
    mode: PolicyMode,
    shuffle: Option<usize>,
) -> Result<SweepRow> {
    let summary = summarize(records)?;
    let pick = |subset| summary.row(mode.name(), subset).cloned();
    Ok(SweepRow {
        k,
        lambda,
        mode: mode.name().to_string(),
        shuffle,
        all: pick(Subset::All).ok_or(HozError::Empty("sweep records"))?,
        long_path: pick(Subset::LongPath),
    })
}

/// Which parts of the ablation to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AblationParts {
    pub k_sweep: bool,
    pub lambda_sweep: bool,
    pub modes: bool,
    pub merge_order: bool,
}

impl AblationParts {
    pub const ALL: AblationParts = AblationParts {
        k_sweep: true,
        lambda_sweep: true,
        modes: true,
        merge_order: true,
    };
}

/// Zone-count sweep, online-update sweep, policy comparison and merge-order
/// robustness, all evaluated on the test split.
pub fn run_ablation(dataset: &Dataset, cfg: &RunConfig, parts: AblationParts) -> Result<AblationReport> {
    cfg.validate()?;
    let train = dataset.load_split(Split::Train)?;
    let test = dataset.load_split(Split::Test)?;
    let evaluator = Evaluator::new(&test, cfg)?;
    let mut report = AblationReport {
        k_sweep: Vec::new(),
        lambda_sweep: Vec::new(),
        modes: Vec::new(),
        merge_order: Vec::new(),
        merge_order_spread: None,
    };

    if parts.k_sweep {
        for &k in &cfg.k_sweep {
            let rooms = room_graphs(&train, cfg, k)?;
            let global = scene_graphs(dataset, &rooms, cfg, None)?;
            let records = evaluator.run(&global, None, PolicyMode::Hoz, cfg.lambda)?;
            report.k_sweep.push(row(&records, k, cfg.lambda, PolicyMode::Hoz, None)?);
        }
    }

    let rooms = room_graphs(&train, cfg, cfg.k)?;
    let global = scene_graphs(dataset, &rooms, cfg, None)?;
    if parts.lambda_sweep {
        for &lambda in &cfg.lambda_sweep {
            let records = evaluator.run(&global, None, PolicyMode::Hoz, lambda)?;
            report.lambda_sweep.push(row(&records, cfg.k, lambda, PolicyMode::Hoz, None)?);
        }
    }
    if parts.modes {
        for mode in PolicyMode::ALL {
            let records = evaluator.run(&global, None, mode, cfg.lambda)?;
            report.modes.push(row(&records, cfg.k, cfg.lambda, mode, None)?);
        }
    }
    if parts.merge_order && cfg.merge_shuffles > 0 {
        for i in 0..cfg.merge_shuffles {
            let shuffled = scene_graphs(dataset, &rooms, cfg, Some(merge_shuffle_seed(cfg, i as u64 + 1)))?;
            let records = evaluator.run(&shuffled, None, PolicyMode::Hoz, cfg.lambda)?;
            report.merge_order.push(row(&records, cfg.k, cfg.lambda, PolicyMode::Hoz, Some(i))?);
        }
        let sr: Vec<f64> = report.merge_order.iter().map(|r| r.all.sr.mean).collect();
        let spread = Cell::of(&sr);
        report.merge_order_spread = Some(MergeOrderSpread {
            shuffles: sr.len(),
            sr_mean: spread.mean,
            sr_std: spread.variance.unwrap_or(0.0).sqrt(),
            sr,
        });
    }
    Ok(report)
}

/// One CSV series per sweep: `(name, contents)` pairs.
pub fn ablation_series(report: &AblationReport) -> Vec<(&'static str, String)> {
    let table = |rows: &[SweepRow]| {
        let mut out = String::from("k,lambda,mode,shuffle,sr,spl,sae,sr_long,spl_long,sae_long\n");
        for r in rows {
            let long = r.long_path.as_ref();
            let m = |f: fn(&SummaryRow) -> f64| long.map_or(String::new(), |l| f(l).to_string());
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.k,
                r.lambda,
                r.mode,
                r.shuffle.map_or(String::new(), |s| s.to_string()),
                r.all.sr.mean,
                r.all.spl.mean,
                r.all.sae.mean,
                m(|l| l.sr.mean),
                m(|l| l.spl.mean),
                m(|l| l.sae.mean)
            );
        }
        out
    };
    vec![
        ("k_sweep.csv", table(&report.k_sweep)),
        ("lambda_sweep.csv", table(&report.lambda_sweep)),
        ("modes.csv", table(&report.modes)),
        ("merge_order.csv", table(&report.merge_order)),
    ]
}

/// Human-readable ablation tables, in percent.
pub fn render_ablation(report: &AblationReport) -> String {
    let mut out = String::new();
    let section = |out: &mut String, title: &str, rows: &[SweepRow]| {
        if rows.is_empty() {
            return;
        }
        let _ = writeln!(out, "== {title}");
        let _ = writeln!(
            out,
            "{:>3} {:>6} {:<14} {:>7} {:>7} {:>7} {:>9} {:>9} {:>9}",
            "K", "lambda", "mode", "SR", "SPL", "SAE", "SR L>=5", "SPL L>=5", "SAE L>=5"
        );
        for r in rows {
            let long = |f: fn(&SummaryRow) -> f64| {
                r.long_path.as_ref().map_or("-".to_string(), |l| format!("{:.2}", 100.0 * f(l)))
            };
            let _ = writeln!(
                out,
                "{:>3} {:>6.2} {:<14} {:>7.2} {:>7.2} {:>7.2} {:>9} {:>9} {:>9}",
                r.k,
                r.lambda,
                r.mode,
                100.0 * r.all.sr.mean,
                100.0 * r.all.spl.mean,
                100.0 * r.all.sae.mean,
                long(|l| l.sr.mean),
                long(|l| l.spl.mean),
                long(|l| l.sae.mean)
            );
        }
    };
    section(&mut out, "zone count", &report.k_sweep);
    section(&mut out, "online update", &report.lambda_sweep);
    section(&mut out, "policy", &report.modes);
    if let Some(s) = &report.merge_order_spread {
        let _ = writeln!(
            out,
            "== merge order ({} shuffles)\nSR mean {:.2} %, std {:.2} points",
            s.shuffles,
            100.0 * s.sr_mean,
            100.0 * s.sr_std
        );
    }
    out
}
