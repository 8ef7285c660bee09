//! Hierarchical object-to-zone graphs: construction from explored rooms,
//! matching and merging into scene graphs, and per-episode runtime use.

mod build;
mod graph;
mod hungarian;
mod kmeans;
mod merge;
mod runtime;

pub use build::{
    build_room_graph, compute_edge, zone_embedding, ClusterFeatures, RoomGraphConfig,
};
pub use graph::{GlobalGraph, GraphMeta, GraphScope, HozGraph};
pub use hungarian::{kuhn_munkres, Matching};
pub use kmeans::{assignment_cost, kmeans, kmeans_with, ClusterAssignment, KMeansConfig};
pub use merge::{build_global_graph, build_scene_graph, match_weight, merge_pair, node_distance};
pub use runtime::{
    localize_current_zone, localize_target_zone, plan_path, recognize_scene, select_sub_goal,
    EpisodeGraphState, PlanResult, PlannerStep, SceneRecognition, TargetZone,
};
