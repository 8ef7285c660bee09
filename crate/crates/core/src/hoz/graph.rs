use std::collections::BTreeMap;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{HozError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphScope {
    Room,
    Scene,
    GlobalComposite,
}

/// Construction provenance stored alongside a graph.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GraphMeta {
    pub seed: Option<u64>,
    pub epsilon: Option<f64>,
    pub alpha: Option<f64>,
    pub sample_count: usize,
    /// Room ids folded into this graph, in merge order.
    pub merge_order: Vec<String>,
    /// Members per zone for room graphs; empty for merged graphs.
    pub zone_sizes: Vec<usize>,
}

/// Zone nodes (`K x N` cluster centers) and zone adjacency probabilities (`K x K`).
#[derive(Debug, Clone, PartialEq)]
pub struct HozGraph {
    pub scope: GraphScope,
    pub scene_label: Option<usize>,
    pub nodes: Array2<f64>,
    pub edges: Array2<f64>,
    pub meta: GraphMeta,
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    scope: GraphScope,
    scene_label: Option<usize>,
    k: usize,
    n: usize,
    nodes: Vec<Vec<f64>>,
    edges: Vec<Vec<f64>>,
    meta: GraphMeta,
}

fn rows(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn from_rows(rows: &[Vec<f64>], ncols: usize, what: &str) -> Result<Array2<f64>> {
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(HozError::ShapeMismatch(format!(
            "{what} rows must have {ncols} entries"
        )));
    }
    Array2::from_shape_vec((rows.len(), ncols), flat)
        .map_err(|e| HozError::ShapeMismatch(format!("{what}: {e}")))
}

impl HozGraph {
    pub fn k(&self) -> usize {
        self.nodes.nrows()
    }

    pub fn n(&self) -> usize {
        self.nodes.ncols()
    }

    /// Check shapes, symmetry, zero diagonal, ranges and finiteness.
    pub fn validate(&self) -> Result<()> {
        let k = self.k();
        if k == 0 {
            return Err(HozError::Empty("graph has no zone nodes"));
        }
        if self.edges.dim() != (k, k) {
            return Err(HozError::ShapeMismatch(format!(
                "edge matrix is {:?}, expected {k}x{k}",
                self.edges.dim()
            )));
        }
        for ((r, c), &v) in self.nodes.indexed_iter() {
            if !v.is_finite() {
                return Err(HozError::NonFinite { row: r, col: c });
            }
            if v < 0.0 {
                return Err(HozError::InvalidInput(format!(
                    "negative node entry {v} at ({r}, {c})"
                )));
            }
        }
        for ((r, c), &v) in self.edges.indexed_iter() {
            if !v.is_finite() {
                return Err(HozError::NonFinite { row: r, col: c });
            }
            if !(0.0..=1.0).contains(&v) {
                return Err(HozError::InvalidInput(format!(
                    "edge ({r}, {c}) = {v} outside [0, 1]"
                )));
            }
            if r == c && v != 0.0 {
                return Err(HozError::InvalidInput(format!("non-zero diagonal edge at {r}")));
            }
            if v != self.edges[[c, r]] {
                return Err(HozError::InvalidInput(format!(
                    "edge matrix not symmetric at ({r}, {c})"
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let file = GraphFile {
            scope: self.scope,
            scene_label: self.scene_label,
            k: self.k(),
            n: self.n(),
            nodes: rows(&self.nodes),
            edges: rows(&self.edges),
            meta: self.meta.clone(),
        };
        let mut text = serde_json::to_string_pretty(&file).expect("graph serializes");
        text.push('\n');
        text
    }

    fn from_file(file: GraphFile) -> Result<Self> {
        if file.nodes.len() != file.k || file.edges.len() != file.k {
            return Err(HozError::ShapeMismatch(format!(
                "declared k = {} but found {} node rows and {} edge rows",
                file.k,
                file.nodes.len(),
                file.edges.len()
            )));
        }
        let graph = HozGraph {
            scope: file.scope,
            scene_label: file.scene_label,
            nodes: from_rows(&file.nodes, file.n, "nodes")?,
            edges: from_rows(&file.edges, file.k, "edges")?,
            meta: file.meta,
        };
        graph.validate()?;
        Ok(graph)
    }

    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text).map_err(|e| HozError::parse(origin, e))?;
        Self::from_file(file)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| HozError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HozError::io(path, e))?;
        Self::from_json(&text, path)
    }
}

/// One scene graph per scene label. Scenes are never merged with each other.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GlobalGraph {
    scenes: BTreeMap<usize, HozGraph>,
}

#[derive(Serialize, Deserialize)]
struct GlobalFile {
    scope: GraphScope,
    scenes: Vec<GraphFile>,
}

impl GlobalGraph {
    pub fn insert(&mut self, graph: HozGraph) -> Result<()> {
        let label = graph
            .scene_label
            .ok_or_else(|| HozError::InvalidInput("scene graph without a scene label".into()))?;
        if self.scenes.contains_key(&label) {
            return Err(HozError::DuplicateScene(label));
        }
        self.scenes.insert(label, graph);
        Ok(())
    }

    pub fn get(&self, label: usize) -> Option<&HozGraph> {
        self.scenes.get(&label)
    }

    pub fn len(&self) -> usize {
        self.scenes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenes.is_empty()
    }

    /// Scenes in ascending label order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &HozGraph)> {
        self.scenes.iter().map(|(&l, g)| (l, g))
    }

    pub fn to_json(&self) -> String {
        let file = GlobalFile {
            scope: GraphScope::GlobalComposite,
            scenes: self
                .scenes
                .values()
                .map(|g| GraphFile {
                    scope: g.scope,
                    scene_label: g.scene_label,
                    k: g.k(),
                    n: g.n(),
                    nodes: rows(&g.nodes),
                    edges: rows(&g.edges),
                    meta: g.meta.clone(),
                })
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&file).expect("graph serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        let file: GlobalFile = serde_json::from_str(text).map_err(|e| HozError::parse(origin, e))?;
        if file.scope != GraphScope::GlobalComposite {
            return Err(HozError::parse(origin, "expected a global-composite graph file"));
        }
        let mut global = GlobalGraph::default();
        for g in file.scenes {
            global.insert(HozGraph::from_file(g)?)?;
        }
        Ok(global)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| HozError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HozError::io(path, e))?;
        Self::from_json(&text, path)
    }
}
