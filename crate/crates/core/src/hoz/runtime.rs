//! Per-episode use of a scene graph: zone localization, online node
//! updates, maximum-connectivity planning and sub-goal selection.

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use super::graph::{GlobalGraph, HozGraph};
use super::merge::node_distance;
use crate::error::{HozError, Result};
use crate::model::BagOfObjects;

/// Zone whose node is closest to the observation under [`node_distance`]; ties go to the lowest index.
pub fn localize_current_zone(f: &BagOfObjects, nodes: &Array2<f64>, alpha: f64) -> Result<usize> {
    if nodes.nrows() == 0 {
        return Err(HozError::Empty("zone nodes"));
    }
    let f = ArrayView1::from(f.values());
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (k, row) in nodes.rows().into_iter().enumerate() {
        let d = node_distance(f, row, alpha)?;
        if d < best_d {
            best = k;
            best_d = d;
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetZone {
    pub zone: usize,
    /// False when no zone has ever seen the target category.
    pub supported: bool,
}

/// Zone with the highest frequency of the target category; ties go to the lowest index.
pub fn localize_target_zone(target: usize, nodes: &Array2<f64>) -> Result<TargetZone> {
    if target >= nodes.ncols() {
        return Err(HozError::IndexOutOfRange {
            index: target,
            len: nodes.ncols(),
        });
    }
    if nodes.nrows() == 0 {
        return Err(HozError::Empty("zone nodes"));
    }
    let column = nodes.column(target);
    let mut zone = 0;
    for (k, &v) in column.iter().enumerate() {
        if v > column[zone] {
            zone = k;
        }
    }
    Ok(TargetZone {
        zone,
        supported: column[zone] > 0.0,
    })
}

/// Working copy of a scene graph's nodes for one episode. Edges are never touched.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeGraphState {
    pub nodes: Array2<f64>,
    pub lambda: f64,
    pub step: usize,
}

impl EpisodeGraphState {
    pub fn new(graph: &HozGraph, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(HozError::InvalidInput(format!(
                "lambda must lie in [0, 1], got {lambda}"
            )));
        }
        Ok(Self {
            nodes: graph.nodes.clone(),
            lambda,
            step: 0,
        })
    }

    /// Blend the current zone's node toward the observation:
    /// `row_c <- lambda * f + (1 - lambda) * row_c`. Other rows are untouched.
    pub fn update(&mut self, current_zone: usize, f: &BagOfObjects) -> Result<()> {
        let k = self.nodes.nrows();
        if current_zone >= k {
            return Err(HozError::IndexOutOfRange {
                index: current_zone,
                len: k,
            });
        }
        if f.len() != self.nodes.ncols() {
            return Err(HozError::DimensionMismatch {
                expected: self.nodes.ncols(),
                actual: f.len(),
            });
        }
        let lambda = self.lambda;
        for (v, &obs) in self.nodes.row_mut(current_zone).iter_mut().zip(f.values()) {
            *v = lambda * obs + (1.0 - lambda) * *v;
        }
        self.step += 1;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    /// Zone indices from the current zone to the target zone.
    pub path: Vec<usize>,
    pub sub_goal: usize,
    /// Product of edge probabilities along `path`; 1 for a single-node path.
    pub product: f64,
    /// False when no positive-probability path exists and the plan falls back to `(current, target)`.
    pub reachable: bool,
}

/// Path maximizing the product of edge probabilities from `current` to
/// `target`: Dijkstra under `-ln e` with zero-probability edges removed.
pub fn plan_path(edges: &Array2<f64>, current: usize, target: usize) -> Result<PlanResult> {
    let k = edges.nrows();
    for idx in [current, target] {
        if idx >= k {
            return Err(HozError::IndexOutOfRange { index: idx, len: k });
        }
    }
    if current == target {
        return Ok(PlanResult {
            path: vec![current],
            sub_goal: current,
            product: 1.0,
            reachable: true,
        });
    }
    let mut cost = vec![f64::INFINITY; k];
    let mut prev = vec![usize::MAX; k];
    let mut done = vec![false; k];
    cost[current] = 0.0;
    loop {
        let mut u = None;
        for i in 0..k {
            if !done[i] && cost[i].is_finite() && u.is_none_or(|b: usize| cost[i] < cost[b]) {
                u = Some(i);
            }
        }
        let Some(u) = u else { break };
        if u == target {
            break;
        }
        done[u] = true;
        for v in 0..k {
            let e = edges[[u, v]];
            if done[v] || v == u || !(e > 0.0) {
                continue;
            }
            let c = cost[u] - e.ln();
            if c < cost[v] {
                cost[v] = c;
                prev[v] = u;
            }
        }
    }
    if !cost[target].is_finite() {
        return Ok(PlanResult {
            path: vec![current, target],
            sub_goal: target,
            product: 0.0,
            reachable: false,
        });
    }
    let mut path = vec![target];
    while let Some(&last) = path.last() {
        if last == current {
            break;
        }
        path.push(prev[last]);
    }
    path.reverse();
    let product = path.windows(2).map(|w| edges[[w[0], w[1]]]).product();
    Ok(PlanResult {
        sub_goal: path[1],
        path,
        product,
        reachable: true,
    })
}

/// The zone after the current one on the plan, or the current zone for a single-node path.
pub fn select_sub_goal(plan: &PlanResult) -> usize {
    plan.path.get(1).or(plan.path.first()).copied().unwrap_or(plan.sub_goal)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SceneRecognition {
    /// Use the simulator's scene label.
    Oracle,
    /// Pick the scene with the node closest to any observed sample.
    Nearest,
}

/// Choose which scene graph an episode should use.
pub fn recognize_scene(
    samples: &[BagOfObjects],
    graphs: &GlobalGraph,
    mode: SceneRecognition,
    oracle_label: usize,
    alpha: f64,
) -> Result<usize> {
    if graphs.is_empty() {
        return Err(HozError::Empty("scene graphs"));
    }
    match mode {
        SceneRecognition::Oracle => Ok(oracle_label),
        SceneRecognition::Nearest => {
            if samples.is_empty() {
                return Err(HozError::Empty("observation samples"));
            }
            let mut best = None;
            let mut best_d = f64::INFINITY;
            for (label, g) in graphs.iter() {
                for s in samples {
                    for row in g.nodes.rows() {
                        let d = node_distance(ArrayView1::from(s.values()), row, alpha)?;
                        if d < best_d {
                            best_d = d;
                            best = Some(label);
                        }
                    }
                }
            }
            Ok(best.expect("non-empty graphs"))
        }
    }
}

/// One planner invocation, logged per step of an episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerStep {
    pub current_zone: usize,
    pub target_zone: usize,
    pub path: Vec<usize>,
    pub sub_goal: usize,
    pub product: f64,
    /// Whether the path was recomputed at this step.
    pub replanned: bool,
}
