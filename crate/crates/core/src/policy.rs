//! A deterministic one-step-lookahead navigation policy driven by zone
//! sub-goals, and the episode loop that ties observation, zone
//! localization, online updates and planning together.

use serde::{Deserialize, Serialize};

use crate::error::{HozError, Result};
use crate::gcn::{normalize_edges, zone_forward, GcnParams};
use crate::hoz::{
    localize_current_zone, localize_target_zone, plan_path, recognize_scene, select_sub_goal,
    EpisodeGraphState, GlobalGraph, HozGraph, PlanResult, PlannerStep, SceneRecognition,
};
use crate::model::{Action, BagOfObjects, DetectionFrame, Pose};
use crate::rng::SeededRng;
use crate::sim::{AgentState, EpisodeRecord, Simulator};

/// Which vector the lookahead steers toward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyMode {
    /// Embedding of the sub-goal zone on the planned path.
    Hoz,
    /// Embedding of the target zone itself, skipping the planned path.
    TargetZone,
    /// One-hot vector of the target category; no zone guidance.
    GreedyTarget,
    /// Uniformly random actions.
    Random,
}

impl PolicyMode {
    pub const ALL: [PolicyMode; 4] = [
        PolicyMode::Hoz,
        PolicyMode::TargetZone,
        PolicyMode::GreedyTarget,
        PolicyMode::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyMode::Hoz => "hoz",
            PolicyMode::TargetZone => "target-zone",
            PolicyMode::GreedyTarget => "greedy-target",
            PolicyMode::Random => "random",
        }
    }

    pub fn parse(s: &str) -> Option<PolicyMode> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }

    fn uses_graph(self) -> bool {
        matches!(self, PolicyMode::Hoz | PolicyMode::TargetZone)
    }
}

impl std::fmt::Display for PolicyMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PolicyConfig {
    /// Gain of the done reminder.
    pub beta: f64,
    /// Done is taken once its adjusted score reaches this value.
    pub done_threshold: f64,
    /// Only one-step lookahead is supported.
    pub lookahead_depth: usize,
    /// Bonus for views that contain the target, scaled up as it gets closer.
    pub w_target: f64,
    /// Penalty per earlier visit of the pose an action leads to.
    pub w_visit: f64,

    pub mode: PolicyMode,
    /// Force MoveAhead after this many actions without one; 0 disables.
    pub loop_escape: usize,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            beta: 0.6,
            done_threshold: 0.3,
            lookahead_depth: 1,
            w_target: 1.0,
            w_visit: 0.1,
            mode: PolicyMode::Hoz,
            loop_escape: 8,
        }
    }
}

impl PolicyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0) {
            return Err(HozError::InvalidInput(format!("beta must be >= 0, got {}", self.beta)));
        }
        if !(self.done_threshold > 0.0 && self.done_threshold <= 1.0) {
            return Err(HozError::InvalidInput(format!(
                "done_threshold must lie in (0, 1], got {}",
                self.done_threshold
            )));
        }
        if self.lookahead_depth != 1 {
            return Err(HozError::InvalidInput(format!(
                "only lookahead depth 1 is supported, got {}",
                self.lookahead_depth
            )));
        }
        if !(self.w_target >= 0.0 && self.w_visit >= 0.0) {
            return Err(HozError::InvalidInput("policy weights must be >= 0".into()));
        }
        Ok(())
    }
}

/// Per-episode memory of the policy: heading visit counts and recent actions.
#[derive(Debug, Clone)]
pub struct PolicyMemory {
    width: usize,
    visits: Vec<u32>,
    recent: Vec<Action>,
}

impl PolicyMemory {
    pub fn new(sim: &Simulator<'_>) -> Self {
        let env = sim.env();
        Self {
            width: env.width,
            visits: vec![0; env.width * env.depth * 4],
            recent: Vec::new(),
        }
    }

    /// Visits are counted per cell and heading; pitch is ignored so that
    /// looking up or down never counts as exploring.
    fn slot(&self, pose: &Pose) -> usize {
        (pose.z as usize * self.width + pose.x as usize) * 4 + pose.yaw.index()
    }

    pub fn visits(&self, pose: &Pose) -> u32 {
        self.visits[self.slot(pose)]
    }

    pub fn visit(&mut self, pose: &Pose) {
        let s = self.slot(pose);
        self.visits[s] += 1;
    }

    pub fn record(&mut self, action: Action) {
        self.recent.push(action);
    }

    fn stuck(&self, window: usize) -> bool {
        window > 0
            && self.recent.len() >= window
            && !self.recent[self.recent.len() - window..].contains(&Action::MoveAhead)
    }
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Score of the Done action before the reminder: 0 when the target's box is
/// large enough to place it within the success radius, -1 otherwise.
pub fn done_base_score(frame: &DetectionFrame, target: usize, success_radius: f64) -> f64 {
    if frame.confidences[target] > 0.0 && frame.box_size(target) >= 1.0 / success_radius.max(1.0) {
        0.0
    } else {
        -1.0
    }
}

/// Raise the Done score by `beta` times the target's detection confidence.
/// Scores are indexed by [`Action::index`].
pub fn done_reminder(scores: &[f64; 6], target: usize, confidences: &[f64], beta: f64) -> [f64; 6] {
    let mut adjusted = *scores;
    adjusted[Action::Done.index()] += beta * confidences[target];
    adjusted
}

/// Lookahead scores for every action, indexed by [`Action::index`]. Done
/// carries its base score; apply [`done_reminder`] before choosing.
pub fn action_scores(
    sim: &Simulator<'_>,
    state: &AgentState,
    frame: &DetectionFrame,
    guide: &[f64],
    target: usize,
    cfg: &PolicyConfig,
    memory: &PolicyMemory,
) -> [f64; 6] {
    let mut scores = [0.0; 6];
    for action in Action::MOVES {
        let pose = sim.peek(&state.pose, action);
        if pose == state.pose {
            // Blocked moves and pitch changes at the limit waste an action.
            scores[action.index()] = f64::NEG_INFINITY;
            continue;
        }
        let (bag, next_frame) = sim.observe(&AgentState::at(pose));
        let seen = bag.values()[target];
        let proximity = if seen > 0.0 { next_frame.box_size(target) } else { 0.0 };
        scores[action.index()] = cosine(bag.values(), guide)
            + cfg.w_target * seen * (1.0 + proximity)
            - cfg.w_visit * f64::from(memory.visits(&pose));
    }
    scores[Action::Done.index()] = done_base_score(frame, target, sim.params().success_radius);
    scores
}

/// Pick the next action. Done wins once its reminded score reaches the
/// threshold; otherwise the best-scoring move, ties broken in
/// [`Action::MOVES`] order, subject to the loop-escape rule.
#[allow(clippy::too_many_arguments)]
pub fn decide_action(
    sim: &Simulator<'_>,
    state: &AgentState,
    obs: (&BagOfObjects, &DetectionFrame),
    guide: &[f64],
    target: usize,
    cfg: &PolicyConfig,
    memory: &PolicyMemory,
    rng: &mut SeededRng,
) -> Action {
    if cfg.mode == PolicyMode::Random {
        return Action::ALL[rng.index(Action::ALL.len())];
    }
    let (_, frame) = obs;
    let scores = action_scores(sim, state, frame, guide, target, cfg, memory);
    let scores = done_reminder(&scores, target, &frame.confidences, cfg.beta);
    if scores[Action::Done.index()] >= cfg.done_threshold {
        return Action::Done;
    }
    if memory.stuck(cfg.loop_escape) && sim.peek(&state.pose, Action::MoveAhead) != state.pose {
        return Action::MoveAhead;
    }
    let mut best = Action::MOVES[0];
    for action in Action::MOVES {
        if scores[action.index()] > scores[best.index()] {
            best = action;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EpisodeConfig {
    pub policy: PolicyConfig,
    /// Blend factor of the online node update.
    pub lambda: f64,
    pub alpha: f64,
    /// Maximum number of actions, Done included.
    pub budget: usize,
    pub scene_recognition: SceneRecognition,
    /// Steer toward the zone-GCN encoding of the sub-goal instead of its raw node.
    pub use_gcn_embedding: bool,
    /// Localize the target zone on the nodes as built rather than the
    /// online-updated ones.
    pub pristine_target_zone: bool,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            policy: PolicyConfig::default(),
            lambda: 0.5,
            alpha: 0.1,
            budget: 100,
            scene_recognition: SceneRecognition::Oracle,
            use_gcn_embedding: false,
            pristine_target_zone: false,
        }
    }
}

/// Graph-side state of one episode: which scene graph is in use, its
/// working nodes, and the last plan.
struct Planner<'g> {
    graph: &'g HozGraph,
    e_hat: ndarray::Array2<f64>,
    state: EpisodeGraphState,
    plan: Option<(usize, usize, PlanResult)>,
    pristine_target: bool,
}

impl<'g> Planner<'g> {
    fn new(graph: &'g HozGraph, lambda: f64, pristine_target: bool) -> Result<Self> {
        Ok(Self {
            graph,
            e_hat: normalize_edges(&graph.edges)?,
            state: EpisodeGraphState::new(graph, lambda)?,
            plan: None,
            pristine_target,
        })
    }

    /// Localize, update, localize the target, and replan when either zone changed.
    fn step(&mut self, f: &BagOfObjects, target: usize, alpha: f64) -> Result<PlannerStep> {
        let current = localize_current_zone(f, &self.state.nodes, alpha)?;
        self.state.update(current, f)?;
        let nodes = if self.pristine_target { &self.graph.nodes } else { &self.state.nodes };
        let target_zone = localize_target_zone(target, nodes)?.zone;
        let replanned = !matches!(&self.plan, Some((c, t, _)) if *c == current && *t == target_zone);
        if replanned {
            let plan = plan_path(&self.graph.edges, current, target_zone)?;
            self.plan = Some((current, target_zone, plan));
        }
        let (_, _, plan) = self.plan.as_ref().expect("plan computed above");
        Ok(PlannerStep {
            current_zone: current,
            target_zone,
            path: plan.path.clone(),
            sub_goal: select_sub_goal(plan),
            product: plan.product,
            replanned,
        })
    }
}

fn pick_scene<'g>(
    graphs: &'g GlobalGraph,
    seen: &[BagOfObjects],
    mode: SceneRecognition,
    oracle: usize,
    alpha: f64,
) -> Result<&'g HozGraph> {
    let label = recognize_scene(seen, graphs, mode, oracle, alpha)?;
    graphs
        .get(label)
        .ok_or_else(|| HozError::MissingArtifact(format!("scene graph for label {label}")))
}

/// Run one navigation episode from a seeded random start.
///
/// Errors only when the episode cannot start (target absent, missing scene
/// graph, invalid configuration); navigation failures are recorded.
pub fn run_episode(
    sim: &Simulator<'_>,
    target: usize,
    graphs: &GlobalGraph,
    gcn: Option<&GcnParams>,
    cfg: &EpisodeConfig,
    seed: u64,
) -> Result<EpisodeRecord> {
    cfg.policy.validate()?;
    let mode = cfg.policy.mode;
    if cfg.use_gcn_embedding && gcn.is_none() && mode.uses_graph() {
        return Err(HozError::MissingArtifact("GCN parameters".into()));
    }
    let mut rng = SeededRng::new(seed);
    let mut policy_rng = rng.fork(&[1]);
    let mut state = sim.reset(target, &mut rng)?;
    let env = sim.env();
    let mut record = EpisodeRecord {
        env_id: env.room_id.clone(),
        mode: mode.name().to_string(),
        trial: 0,
        target,
        seed,
        actions: Vec::new(),
        poses: vec![state.pose],
        success: false,
        actual_length: 0,
        optimal_length: sim.shortest_path_length(&state.pose, target),
        planner_trace: Vec::new(),
    };
    let n = env.categories;
    let one_hot_target: Vec<f64> = (0..n).map(|c| f64::from(c == target)).collect();
    let mut memory = PolicyMemory::new(sim);
    memory.visit(&state.pose);

    let mut seen: Vec<BagOfObjects> = Vec::new();
    let mut scene_locked = cfg.scene_recognition == SceneRecognition::Oracle;
    let mut planner = None;

    while record.actions.len() < cfg.budget {
        let (bag, frame) = sim.observe(&state);
        let guide = if mode.uses_graph() {
            if !scene_locked || planner.is_none() {
                seen.push(bag.clone());
                let graph = pick_scene(graphs, &seen, cfg.scene_recognition, env.scene_label, cfg.alpha)?;
                if planner.as_ref().is_none_or(|p: &Planner| !std::ptr::eq(p.graph, graph)) {
                    planner = Some(Planner::new(graph, cfg.lambda, cfg.pristine_target_zone)?);
                }
                scene_locked = scene_locked || bag.count() > 0;
            }
            let planner = planner.as_mut().expect("planner initialized");
            let step = planner.step(&bag, target, cfg.alpha)?;
            let zone = match mode {
                PolicyMode::Hoz => step.sub_goal,
                _ => step.target_zone,
            };
            let guide = match (cfg.use_gcn_embedding, gcn) {
                (true, Some(params)) => {
                    zone_forward(&planner.e_hat, &planner.state.nodes, params, zone)?
                        .selected
                        .to_vec()
                }
                _ => planner.state.nodes.row(zone).to_vec(),
            };
            record.planner_trace.push(step);
            guide
        } else {
            one_hot_target.clone()
        };

        let action = decide_action(
            sim,
            &state,
            (&bag, &frame),
            &guide,
            target,
            &cfg.policy,
            &memory,
            &mut policy_rng,
        );
        let next = sim.step(&state, action);
        if next.pose.cell() != state.pose.cell() {
            record.actual_length += 1;
        }
        record.actions.push(action);
        record.poses.push(next.pose);
        memory.record(action);
        memory.visit(&next.pose);
        state = next;
        if action == Action::Done {
            record.success = sim.success_check(&state, target);
            break;
        }
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{GridEnvironment, ObjectInstance};
    use crate::hoz::{GraphMeta, GraphScope};
    use crate::model::{HeightBand, Pitch, Yaw};
    use crate::sim::SimParams;
    use ndarray::Array2;

    /// 5x5 open room with objects on the boundary row z = 4 and the
    /// column x = 0; the agent stands in the middle.
    fn room() -> GridEnvironment {
        let rows = [".....", ".....", ".....", ".....", "#####"];
        let mut objects = vec![
            ObjectInstance { category: 0, x: 2, z: 4, band: HeightBand::Mid },
            ObjectInstance { category: 1, x: 0, z: 4, band: HeightBand::Mid },
            ObjectInstance { category: 2, x: 4, z: 4, band: HeightBand::Mid },
            ObjectInstance { category: 3, x: 1, z: 4, band: HeightBand::Mid },
        ];
        objects.sort();
        GridEnvironment::from_rows("t", 0, &rows, objects).unwrap()
    }

    fn graph_for(env: &GridEnvironment) -> GlobalGraph {
        let n = env.categories;
        let mut nodes = Array2::zeros((2, n));
        nodes[[0, 0]] = 1.0;
        nodes[[1, 1]] = 1.0;
        let mut edges = Array2::zeros((2, 2));
        edges[[0, 1]] = 1.0;
        edges[[1, 0]] = 1.0;
        let mut global = GlobalGraph::default();
        global
            .insert(HozGraph {
                scope: GraphScope::Scene,
                scene_label: Some(env.scene_label),
                nodes,
                edges,
                meta: GraphMeta::default(),
            })
            .unwrap();
        global
    }

    #[test]
    fn done_reminder_examples() {
        let base = [0.2, 0.1, 0.1, 0.0, 0.0, 0.0];
        let conf = vec![0.0; 22];
        assert_eq!(done_reminder(&base, 3, &conf, 0.6), base);
        let mut conf = vec![0.0; 22];
        conf[3] = 1.0;
        let adjusted = done_reminder(&base, 3, &conf, 0.6);
        assert!((adjusted[Action::Done.index()] - 0.6).abs() < 1e-15);
        assert_eq!(adjusted[..5], base[..5]);
    }

    #[test]
    fn done_when_target_close_and_visible() {
        let env = room();
        let sim = Simulator::new(&env, SimParams::default()).unwrap();
        let state = AgentState::at(Pose::new(2, 3, Yaw::North, Pitch::Level));
        let (bag, frame) = sim.observe(&state);
        let memory = PolicyMemory::new(&sim);
        let mut rng = SeededRng::new(0);
        let cfg = PolicyConfig::default();
        let guide = vec![0.0; env.categories];
        let a = decide_action(&sim, &state, (&bag, &frame), &guide, 0, &cfg, &memory, &mut rng);
        assert_eq!(a, Action::Done);
    }

    #[test]
    fn lookahead_follows_guide() {
        // Facing east from (1, 3): category 1 at (0, 4) is only visible after
        // turning around, category 3 at (1, 4) after turning left.
        let env = room();
        let sim = Simulator::new(&env, SimParams::default()).unwrap();
        let state = AgentState::at(Pose::new(1, 1, Yaw::East, Pitch::Level));
        let (bag, frame) = sim.observe(&state);
        let memory = PolicyMemory::new(&sim);
        let mut rng = SeededRng::new(0);
        let cfg = PolicyConfig {
            w_target: 0.0,
            ..PolicyConfig::default()
        };
        let left = sim.observe_bag(&sim.peek(&state.pose, Action::RotateLeft));
        let mut guide = vec![0.0; env.categories];
        for c in left.present() {
            guide[c] = 1.0;
        }
        assert!(!guide.iter().all(|&g| g == 0.0));
        for action in [Action::MoveAhead, Action::RotateRight, Action::LookUp, Action::LookDown] {
            let bag = sim.observe_bag(&sim.peek(&state.pose, action));
            assert!(cosine(bag.values(), &guide) < 1.0, "{action:?}");
        }
        let a = decide_action(&sim, &state, (&bag, &frame), &guide, 2, &cfg, &memory, &mut rng);
        assert_eq!(a, Action::RotateLeft);
    }

    #[test]
    fn loop_escape_forces_move() {
        let env = room();
        let sim = Simulator::new(&env, SimParams::default()).unwrap();
        let state = AgentState::at(Pose::new(2, 1, Yaw::South, Pitch::Level));
        let (bag, frame) = sim.observe(&state);
        let mut memory = PolicyMemory::new(&sim);
        for _ in 0..8 {
            memory.record(Action::RotateLeft);
        }
        let mut rng = SeededRng::new(0);
        let guide = vec![0.0; env.categories];
        // MoveAhead from (2,1) facing south reaches (2,0): legal.
        let cfg = PolicyConfig {
            w_visit: 10.0,
            ..PolicyConfig::default()
        };
        let mut m2 = memory.clone();
        m2.visit(&sim.peek(&state.pose, Action::MoveAhead));
        let a = decide_action(&sim, &state, (&bag, &frame), &guide, 2, &cfg, &m2, &mut rng);
        assert_eq!(a, Action::MoveAhead);
        let off = PolicyConfig { loop_escape: 0, ..cfg };
        let b = decide_action(&sim, &state, (&bag, &frame), &guide, 2, &off, &m2, &mut rng);
        assert_ne!(b, Action::MoveAhead);
    }

    #[test]
    fn random_mode_is_reproducible() {
        let env = room();
        let sim = Simulator::new(&env, SimParams::default()).unwrap();
        let graphs = graph_for(&env);
        let cfg = EpisodeConfig {
            policy: PolicyConfig {
                mode: PolicyMode::Random,
                ..PolicyConfig::default()
            },
            ..EpisodeConfig::default()
        };
        let a = run_episode(&sim, 1, &graphs, None, &cfg, 5).unwrap();
        let b = run_episode(&sim, 1, &graphs, None, &cfg, 5).unwrap();
        assert_eq!(a, b);
        assert!(a.planner_trace.is_empty());
    }

    #[test]
    fn zero_budget_fails_immediately() {
        let env = room();
        let sim = Simulator::new(&env, SimParams::default()).unwrap();
        let cfg = EpisodeConfig {
            budget: 0,
            ..EpisodeConfig::default()
        };
        let r = run_episode(&sim, 0, &graph_for(&env), None, &cfg, 1).unwrap();
        assert!(r.actions.is_empty());
        assert!(!r.success);
        assert_eq!(r.poses.len(), 1);
    }

    #[test]
    fn hoz_episode_reaches_nearby_target() {
        let env = room();
        let sim = Simulator::new(&env, SimParams::default()).unwrap();
        let graphs = graph_for(&env);
        let cfg = EpisodeConfig::default();
        for seed in 0..20 {
            let r = run_episode(&sim, 0, &graphs, None, &cfg, seed).unwrap();
            r.check(cfg.budget).unwrap();
            assert_eq!(r.planner_trace.len(), r.actions.len());
            assert!(r.success, "seed {seed}: {:?}", r.actions);
            assert!(r.actual_length >= r.optimal_length.unwrap());
            let again = run_episode(&sim, 0, &graphs, None, &cfg, seed).unwrap();
            assert_eq!(r, again);
        }
    }
}
