use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{HozError, Result};
use crate::hoz::{KMeansConfig, RoomGraphConfig, SceneRecognition};
use crate::policy::{EpisodeConfig, PolicyConfig, PolicyMode};
use crate::sim::{SimParams, VisibilityParams};

pub const CONFIG_VERSION: u32 = 1;

/// Rooms per scene category in each split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitSizes {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

impl Default for SplitSizes {
    fn default() -> Self {
        Self {
            train: 20,
            val: 5,
            test: 5,
        }
    }
}

impl SplitSizes {
    pub fn total(&self) -> usize {
        self.train + self.val + self.test
    }
}

/// Policy knobs that are not exposed as top-level settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PolicyTuning {
    pub done_threshold: f64,
    pub w_target: f64,
    pub w_visit: f64,
    pub loop_escape: usize,
}

impl Default for PolicyTuning {
    fn default() -> Self {
        let p = PolicyConfig::default();
        Self {
            done_threshold: p.done_threshold,
            w_target: p.w_target,
            w_visit: p.w_visit,
            loop_escape: p.loop_escape,
        }
    }
}

/// Every setting of the pipeline, readable from a versioned TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub version: u32,
    pub seed: u64,
    pub k: usize,
    pub epsilon: f64,
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub k_sweep: Vec<usize>,
    pub lambda_sweep: Vec<f64>,
    /// Policies evaluated by `run`, in order.
    pub modes: Vec<PolicyMode>,
    pub budget: usize,
    pub trials: usize,
    /// Shuffled merge orders tried by the robustness sweep.
    pub merge_shuffles: usize,
    pub shuffle_merge_order: bool,
    pub scene_recognition: SceneRecognition,
    pub use_gcn_embedding: bool,
    /// Localize the target zone on the graph as built, not the updated one.
    pub pristine_target_zone: bool,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
    pub kmeans_restarts: usize,
    pub success_radius: f64,
    /// Detection range of small objects, in cells.
    pub small_object_range: f64,
    pub splits: SplitSizes,
    pub policy: PolicyTuning,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            version: CONFIG_VERSION,
            seed: 0,
            k: 8,
            epsilon: 0.25,
            alpha: 0.1,
            beta: 0.6,
            lambda: 0.5,
            k_sweep: vec![2, 4, 8, 16],
            lambda_sweep: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            modes: vec![PolicyMode::Hoz],
            budget: 100,
            trials: 5,
            merge_shuffles: 20,
            shuffle_merge_order: false,
            scene_recognition: SceneRecognition::Oracle,
            use_gcn_embedding: false,
            pristine_target_zone: false,
            jobs: 0,
            kmeans_restarts: KMeansConfig::default().restarts,
            success_radius: SimParams::default().success_radius,
            small_object_range: SimParams::default().visibility.small_object_range,
            splits: SplitSizes::default(),
            policy: PolicyTuning::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HozError::InvalidInput(msg));
        if self.version != CONFIG_VERSION {
            return bad(format!("unsupported config version {}", self.version));
        }
        if self.k == 0 || self.k_sweep.contains(&0) {
            return bad("zone count must be at least 1".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.splits.train == 0 || self.splits.test == 0 {
            return bad("train and test splits must be non-empty".into());
        }
        if !(self.epsilon >= 0.0) || !(self.alpha > 0.0) {
            return bad("epsilon must be >= 0 and alpha > 0".into());
        }
        if self.modes.is_empty() {
            return bad("at least one policy mode is required".into());
        }
        if self.kmeans_restarts == 0 {
            return bad("kmeans_restarts must be at least 1".into());
        }
        if let Some(l) = std::iter::once(&self.lambda)
            .chain(&self.lambda_sweep)
            .find(|l| !(0.0..=1.0).contains(*l))
        {
            return bad(format!("lambda must lie in [0, 1], got {l}"));
        }
        self.policy_config(PolicyMode::Hoz).validate()
    }

    pub fn room_graph_config(&self, k: usize) -> RoomGraphConfig {
        RoomGraphConfig {
            k,
            epsilon: self.epsilon,
            kmeans: KMeansConfig {
                restarts: self.kmeans_restarts,
                ..KMeansConfig::default()
            },
            ..RoomGraphConfig::default()
        }
    }

    pub fn policy_config(&self, mode: PolicyMode) -> PolicyConfig {
        PolicyConfig {
            beta: self.beta,
            done_threshold: self.policy.done_threshold,
            w_target: self.policy.w_target,
            w_visit: self.policy.w_visit,
            loop_escape: self.policy.loop_escape,
            mode,
            ..PolicyConfig::default()
        }
    }

    pub fn episode_config(&self, mode: PolicyMode, lambda: f64) -> EpisodeConfig {
        EpisodeConfig {
            policy: self.policy_config(mode),
            lambda,
            alpha: self.alpha,
            budget: self.budget,
            scene_recognition: self.scene_recognition,
            use_gcn_embedding: self.use_gcn_embedding,
            pristine_target_zone: self.pristine_target_zone,
        }
    }

    pub fn sim_params(&self) -> SimParams {
        let defaults = SimParams::default();
        SimParams {
            success_radius: self.success_radius,
            visibility: VisibilityParams {
                small_object_range: self.small_object_range,
                ..defaults.visibility.clone()
            },
            ..defaults
        }
    }

    pub fn from_toml(text: &str, origin: &Path) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| HozError::parse(origin, e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HozError::io(path, e))?;
        Self::from_toml(&text, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
