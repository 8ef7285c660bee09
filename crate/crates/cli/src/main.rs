//! `hoz`: generate rooms, build zone graphs, evaluate navigation policies
//! and render reports.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use hoz_core::hoz::SceneRecognition;
use hoz_core::pipeline::{self, RunConfig};
use hoz_core::policy::PolicyMode;

#[derive(Parser)]
#[command(name = "hoz", version, about = "Zone-graph navigation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate rooms for every scene category with train/val/test splits.
    Gen {
        #[command(flatten)]
        common: Common,
    },
    /// Build room, scene and global graphs from a dataset's training split.
    BuildGraph {
        /// Dataset directory written by `gen`.
        dataset: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate policies on the test split and write episode logs and metrics.
    Run {
        dataset: PathBuf,
        /// Graph directory written by `build-graph`.
        graphs: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Sweep zone count, online update rate, policy mode and merge order.
    Ablate {
        dataset: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Recompute metric tables from episode logs or run directories.
    Report {
        #[arg(required = true)]
        logs: Vec<PathBuf>,
        /// Also write report.json/.txt/.csv here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },
}

/// Settings shared by the pipeline commands. Flags override the config file,
/// which overrides built-in defaults.
#[derive(Args)]
struct Common {
    /// Versioned TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Overwrite a non-empty output directory.
    #[arg(long)]
    force: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Zones per room graph.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Comma-separated policies: hoz, target-zone, greedy-target, random.
    #[arg(long, value_delimiter = ',')]
    mode: Option<Vec<String>>,
    /// Maximum actions per episode.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    /// Merge room graphs in a seeded random order instead of by room id.
    #[arg(long)]
    shuffle_merge_order: bool,
    /// How episodes pick their scene graph: oracle or nearest.
    #[arg(long)]
    scene_recognition: Option<String>,
    /// Steer toward the zone-GCN encoding of the sub-goal.
    #[arg(long)]
    use_gcn_embedding: bool,
    /// Localize the target zone on the graph as built, ignoring online updates.
    #[arg(long)]
    pristine_target_zone: bool,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

impl Common {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field.clone() {
                    cfg.$field = v;
                }
            )*};
        }
        set!(seed, k, epsilon, alpha, beta, lambda, budget, trials, jobs);
        if let Some(modes) = &self.mode {
            cfg.modes = modes
                .iter()
                .map(|m| PolicyMode::parse(m.trim()).with_context(|| format!("unknown mode `{m}`")))
                .collect::<Result<_>>()?;
        }
        if let Some(s) = &self.scene_recognition {
            cfg.scene_recognition = match s.as_str() {
                "oracle" => SceneRecognition::Oracle,
                "nearest" => SceneRecognition::Nearest,
                other => bail!("unknown scene recognition `{other}` (expected oracle or nearest)"),
            };
        }
        cfg.shuffle_merge_order |= self.shuffle_merge_order;
        cfg.use_gcn_embedding |= self.use_gcn_embedding;
        cfg.pristine_target_zone |= self.pristine_target_zone;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn save_config(out: &Path, cfg: &RunConfig) -> Result<()> {
    let path = out.join("config.toml");
    std::fs::write(&path, cfg.to_toml()).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen { common } => {
            let cfg = common.config()?;
            let manifest = pipeline::cmd_gen(&common.out, &cfg, common.force)?;
            save_config(&common.out, &cfg)?;
            let rooms = manifest.all_room_ids().len();
            println!("wrote {rooms} rooms in {} scenes to {}", manifest.scenes.len(), common.out.display());
        }
        Command::BuildGraph { dataset, common } => {
            let cfg = common.config()?;
            let artifacts = pipeline::cmd_build_graph(&dataset, &common.out, &cfg, common.force)?;
            save_config(&common.out, &cfg)?;
            println!(
                "built {} room graphs and {} scene graphs (K = {}) in {}",
                artifacts.rooms.len(),
                artifacts.global.len(),
                cfg.k,
                common.out.display()
            );
        }
        Command::Run { dataset, graphs, common } => {
            let cfg = common.config()?;
            let summary = pipeline::cmd_run(&dataset, &graphs, &common.out, &cfg, common.force)?;
            save_config(&common.out, &cfg)?;
            print!("{}", pipeline::render_table(&summary));
        }
        Command::Ablate { dataset, common } => {
            let cfg = common.config()?;
            let report = pipeline::cmd_ablate(&dataset, &common.out, &cfg, common.force)?;
            save_config(&common.out, &cfg)?;
            print!("{}", pipeline::render_ablation(&report));
        }
        Command::Report { logs, out, force } => {
            let (_, table) = pipeline::cmd_report(&logs, out.as_deref(), force)?;
            print!("{table}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
