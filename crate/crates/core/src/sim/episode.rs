use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{HozError, Result};
use crate::hoz::PlannerStep;
use crate::model::{Action, Pose};

/// Everything that happened in one navigation episode.
///
/// Logged as one JSON object per line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub env_id: String,
    /// Policy that produced the episode; empty for hand-built records.
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub mode: String,
    /// Repetition index within an evaluation run.
    #[serde(default)]
    pub trial: u32,
    pub target: usize,
    pub seed: u64,
    pub actions: Vec<Action>,
    pub poses: Vec<Pose>,
    pub success: bool,
    /// Position-changing MoveAhead count.
    pub actual_length: u32,
    /// Oracle shortest path; `None` when the target is unreachable.
    pub optimal_length: Option<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub planner_trace: Vec<PlannerStep>,
}

impl EpisodeRecord {
    pub fn moves(&self) -> usize {
        self.actions.iter().filter(|a| a.changes_location()).count()
    }

    /// Structural invariants of a finished record.
    pub fn check(&self, budget: usize) -> std::result::Result<(), String> {
        if self.poses.len() != self.actions.len() + 1 {
            return Err(format!(
                "{} poses for {} actions",
                self.poses.len(),
                self.actions.len()
            ));
        }
        let ended = self.actions.last() == Some(&Action::Done) || self.actions.len() >= budget;
        if !ended {
            return Err("episode neither ended with Done nor exhausted its budget".into());
        }
        let moved = self
            .poses
            .windows(2)
            .filter(|w| w[0].cell() != w[1].cell())
            .count() as u32;
        if moved != self.actual_length {
            return Err(format!(
                "actual_length {} but {moved} position changes",
                self.actual_length
            ));
        }
        if self.success && self.actions.last() != Some(&Action::Done) {
            return Err("successful episode must end with Done".into());
        }
        Ok(())
    }
}

pub fn write_episode_log(path: &Path, records: &[EpisodeRecord]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| HozError::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    for r in records {
        let line = serde_json::to_string(r).expect("episode record serializes");
        writeln!(out, "{line}").map_err(|e| HozError::io(path, e))?;
    }
    out.flush().map_err(|e| HozError::io(path, e))
}

/// Read a newline-delimited episode log; corrupt lines are reported by number.
pub fn read_episode_log(path: &Path) -> Result<Vec<EpisodeRecord>> {
    let file = std::fs::File::open(path).map_err(|e| HozError::io(path, e))?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| HozError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| HozError::CorruptLog {
            path: path.to_path_buf(),
            line: i + 1,
            reason: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}
