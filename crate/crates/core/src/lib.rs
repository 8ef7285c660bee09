//! Hierarchical object-to-zone graphs for object-goal navigation in a
//! deterministic gridworld: graph construction and merging, run-time zone
//! localization and planning, a lookahead policy, and evaluation metrics.

// Range checks are written as `!(x >= lo)` on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod env;
pub mod error;
pub mod gcn;
pub mod hoz;
pub mod model;
pub mod metrics;
pub mod pipeline;
pub mod policy;
pub mod rng;
pub mod sim;

pub use env::{load_environment, GridEnvironment, ObjectInstance};
pub use error::{HozError, Result};
pub use model::{
    category_index, category_name, one_hot, Action, AppearanceFeatures, BagOfObjects,
    DetectionFrame, HeightBand, ObservationSample, Pitch, Pose, Yaw, APPEARANCE_DIM,
    CATEGORY_NAMES, DEFAULT_CATEGORY_COUNT,
};
pub use rng::SeededRng;
pub use hoz::{GlobalGraph, HozGraph};
pub use metrics::{MetricsReport, Subset};
pub use policy::{EpisodeConfig, PolicyConfig, PolicyMode};
pub use sim::{EpisodeRecord, SimParams, Simulator};
