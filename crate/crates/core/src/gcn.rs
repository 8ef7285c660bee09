//! Zone and object graph-convolution forward passes with frozen weights.

use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{HozError, Result};
use crate::model::{BagOfObjects, DetectionFrame};
use crate::rng::SeededRng;

/// Columns of the object-GCN input: four box coordinates, confidence, target flag.
pub const OBJECT_INPUT_DIM: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct GcnParams {
    /// `N x N` zone layer weights.
    pub w_z: Array2<f64>,
    /// `6 x N` object layer weights.
    pub w_o: Array2<f64>,
    /// `N x N` row-stochastic object adjacency.
    pub adjacency: Array2<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZoneEncoding {
    /// `K x N` node representation.
    pub h_z: Array2<f64>,
    /// Row of `h_z` for the sub-goal zone.
    pub selected: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectEncoding {
    /// `N x 6` input rows.
    pub x_o: Array2<f64>,
    /// `N x N` object representation.
    pub h_o: Array2<f64>,
    /// `N x D_v` appearance features weighted by `h_o`.
    pub fused: Array2<f64>,
}

fn relu(m: Array2<f64>) -> Array2<f64> {
    m.mapv_into(|v| v.max(0.0))
}

/// Symmetric normalization with self-loops: `D^-1/2 (E + I) D^-1/2`.
pub fn normalize_edges(edges: &Array2<f64>) -> Result<Array2<f64>> {
    let (k, c) = edges.dim();
    if k != c {
        return Err(HozError::ShapeMismatch(format!(
            "edge matrix must be square, got {k}x{c}"
        )));
    }
    if let Some(((r, c), v)) = edges.indexed_iter().find(|(_, &v)| !(v >= 0.0)) {
        return Err(HozError::InvalidInput(format!(
            "edge ({r}, {c}) = {v} is negative or undefined"
        )));
    }
    let with_loops = edges + &Array2::<f64>::eye(k);
    let inv_sqrt: Vec<f64> = with_loops
        .rows()
        .into_iter()
        .map(|r| 1.0 / r.sum().sqrt())
        .collect();
    Ok(Array2::from_shape_fn((k, k), |(i, j)| {
        inv_sqrt[i] * with_loops[[i, j]] * inv_sqrt[j]
    }))
}

/// `ReLU(E_hat . nodes . W_z)`, plus the sub-goal row.
pub fn zone_forward(
    e_hat: &Array2<f64>,
    nodes: &Array2<f64>,
    params: &GcnParams,
    sub_goal: usize,
) -> Result<ZoneEncoding> {
    let (k, n) = nodes.dim();
    if e_hat.dim() != (k, k) {
        return Err(HozError::ShapeMismatch(format!(
            "normalized edges {:?} do not match {k} zones",
            e_hat.dim()
        )));
    }
    if params.w_z.dim() != (n, n) {
        return Err(HozError::ShapeMismatch(format!(
            "W_z is {:?}, expected {n}x{n}",
            params.w_z.dim()
        )));
    }
    if sub_goal >= k {
        return Err(HozError::IndexOutOfRange {
            index: sub_goal,
            len: k,
        });
    }
    let h_z = relu(e_hat.dot(nodes).dot(&params.w_z));
    let selected = h_z.row(sub_goal).to_owned();
    Ok(ZoneEncoding { h_z, selected })
}

/// Object-GCN input: box, confidence and a target indicator per category.
pub fn object_input(frame: &DetectionFrame, target: usize) -> Result<Array2<f64>> {
    let n = frame.category_count();
    if target >= n {
        return Err(HozError::IndexOutOfRange { index: target, len: n });
    }
    Ok(Array2::from_shape_fn((n, OBJECT_INPUT_DIM), |(c, j)| match j {
        0..=3 => frame.boxes[c][j],
        4 => frame.confidences[c],
        _ => f64::from(c == target),
    }))
}

/// `H_o = ReLU(A . X_o . W_o)` and `fused = H_o . f_v`.
pub fn object_forward(
    x_o: &Array2<f64>,
    appearance: &Array2<f64>,
    params: &GcnParams,
) -> Result<ObjectEncoding> {
    let n = params.adjacency.nrows();
    if x_o.dim() != (n, OBJECT_INPUT_DIM) {
        return Err(HozError::ShapeMismatch(format!(
            "X_o is {:?}, expected {n}x{OBJECT_INPUT_DIM}",
            x_o.dim()
        )));
    }
    if appearance.nrows() != n {
        return Err(HozError::ShapeMismatch(format!(
            "appearance has {} rows, expected {n}",
            appearance.nrows()
        )));
    }
    let h_o = relu(params.adjacency.dot(x_o).dot(&params.w_o));
    let fused = h_o.dot(appearance);
    Ok(ObjectEncoding {
        x_o: x_o.clone(),
        h_o,
        fused,
    })
}

fn row_normalize(m: &Array2<f64>) -> Array2<f64> {
    let mut out = m.clone();
    for mut row in out.rows_mut() {
        let total = row.sum();
        if total > 0.0 {
            row.mapv_inplace(|v| v / total);
        }
    }
    out
}

/// Seeded weights in `(-1/sqrt(N), 1/sqrt(N))` and an adjacency from
/// co-occurrence counts (plus self-loops), or uniform when none are given.
pub fn init_params(n: usize, seed: u64, co_occurrence: Option<&Array2<f64>>) -> Result<GcnParams> {
    if n == 0 {
        return Err(HozError::InvalidInput("category count must be positive".into()));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let mut rng = SeededRng::new(seed);
    let mut uniform = |rows, cols| {
        Array2::from_shape_simple_fn((rows, cols), || (2.0 * rng.unit() - 1.0) * scale)
    };
    let w_z = uniform(n, n);
    let w_o = uniform(OBJECT_INPUT_DIM, n);
    let adjacency = match co_occurrence {
        Some(counts) => {
            if counts.dim() != (n, n) {
                return Err(HozError::ShapeMismatch(format!(
                    "co-occurrence is {:?}, expected {n}x{n}",
                    counts.dim()
                )));
            }
            let mut c = counts.clone();
            c.diag_mut().fill(0.0);
            row_normalize(&(c + Array2::<f64>::eye(n)))
        }
        None => Array2::from_elem((n, n), 1.0 / n as f64),
    };
    Ok(GcnParams {
        w_z,
        w_o,
        adjacency,
        seed,
    })
}

/// How the joint policy state concatenates its parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSegment {
    pub name: String,
    pub len: usize,
}

pub fn state_layout(n: usize, appearance_dim: usize) -> Vec<StateSegment> {
    let seg = |name: &str, len| StateSegment {
        name: name.to_string(),
        len,
    };
    vec![
        seg("observation", n),
        seg("sub_goal_zone_embedding", n),
        seg("object_embedding", n * appearance_dim),
    ]
}

/// Observation, sub-goal zone embedding and flattened object embedding, in that order.
pub fn joint_state(obs: &BagOfObjects, zone: &ZoneEncoding, objects: &ObjectEncoding) -> Vec<f64> {
    obs.values()
        .iter()
        .chain(zone.selected.iter())
        .chain(objects.fused.iter())
        .copied()
        .collect()
}

#[derive(Serialize, Deserialize)]
struct ParamFile {
    seed: u64,
    n: usize,
    w_z: Vec<Vec<f64>>,
    w_o: Vec<Vec<f64>>,
    adjacency: Vec<Vec<f64>>,
    state_layout: Vec<StateSegment>,
}

fn to_rows(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn from_rows(rows: Vec<Vec<f64>>, shape: (usize, usize), what: &str) -> Result<Array2<f64>> {
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Array2::from_shape_vec(shape, flat)
        .map_err(|e| HozError::ShapeMismatch(format!("{what}: {e}")))
}

impl GcnParams {
    pub fn n(&self) -> usize {
        self.w_z.nrows()
    }

    pub fn to_json(&self, appearance_dim: usize) -> String {
        let file = ParamFile {
            seed: self.seed,
            n: self.n(),
            w_z: to_rows(&self.w_z),
            w_o: to_rows(&self.w_o),
            adjacency: to_rows(&self.adjacency),
            state_layout: state_layout(self.n(), appearance_dim),
        };
        let mut text = serde_json::to_string_pretty(&file).expect("params serialize");
        text.push('\n');
        text
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HozError::io(path, e))?;
        let file: ParamFile = serde_json::from_str(&text).map_err(|e| HozError::parse(path, e))?;
        let n = file.n;
        let params = GcnParams {
            w_z: from_rows(file.w_z, (n, n), "w_z")?,
            w_o: from_rows(file.w_o, (OBJECT_INPUT_DIM, n), "w_o")?,
            adjacency: from_rows(file.adjacency, (n, n), "adjacency")?,
            seed: file.seed,
        };
        for (i, row) in params.adjacency.rows().into_iter().enumerate() {
            if (row.sum() - 1.0).abs() > 1e-9 {
                return Err(HozError::parse(path, format!("adjacency row {i} does not sum to 1")));
            }
        }
        Ok(params)
    }

    pub fn save(&self, path: &Path, appearance_dim: usize) -> Result<()> {
        std::fs::write(path, self.to_json(appearance_dim)).map_err(|e| HozError::io(path, e))
    }

    /// Identity zone weights; used to check the forward pass composes cleanly.
    pub fn with_identity_zone_weights(mut self) -> Self {
        let n = self.n();
        self.w_z = Array2::eye(n);
        self
    }
}
