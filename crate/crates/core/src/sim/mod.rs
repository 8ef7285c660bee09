//! Deterministic gridworld: procedural rooms, agent dynamics, ground-truth
//! detection and the shortest-path oracle.

mod episode;
mod templates;
mod world;

pub use episode::{read_episode_log, write_episode_log, EpisodeRecord};
pub use templates::{
    generate_environment, standard_templates, GroupSpec, ItemSpec, SceneTemplate, SizeRange,
    SCENE_NAMES,
};
pub use world::{
    line_of_sight_cells, AgentState, PitchBandMap, SimParams, Simulator,
    VisibilityParams,
};
