//! Fusing room graphs into scene graphs.

use ndarray::{Array2, ArrayView1};

use super::graph::{GlobalGraph, GraphMeta, GraphScope, HozGraph};
use super::hungarian::{kuhn_munkres, Matching};
use crate::error::{HozError, Result};

/// Euclidean separation plus an inverse-overlap term `1 / (a . b + alpha)`.
pub fn node_distance(a: ArrayView1<f64>, b: ArrayView1<f64>, alpha: f64) -> Result<f64> {
    if a.len() != b.len() {
        return Err(HozError::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    if !(alpha > 0.0) {
        return Err(HozError::InvalidInput(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let mut sq = 0.0;
    let mut dot = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        sq += (x - y) * (x - y);
        dot += x * y;
    }
    Ok(sq.sqrt() + 1.0 / (dot + alpha))
}

/// Similarity used as the bipartite edge weight: `1 / node_distance`.
pub fn match_weight(a: ArrayView1<f64>, b: ArrayView1<f64>, alpha: f64) -> Result<f64> {
    Ok(1.0 / node_distance(a, b, alpha)?)
}

/// Average matched nodes and the edges between them. The result keeps `g1`'s indexing.
pub fn merge_pair(g1: &HozGraph, g2: &HozGraph, m: &Matching) -> Result<HozGraph> {
    if g1.nodes.dim() != g2.nodes.dim() {
        return Err(HozError::ShapeMismatch(format!(
            "cannot merge {:?} nodes with {:?}",
            g1.nodes.dim(),
            g2.nodes.dim()
        )));
    }
    let k = g1.k();
    if m.permutation.len() != k || !m.is_bijection() {
        return Err(HozError::InvalidInput(format!(
            "matching is not a bijection on 0..{k}"
        )));
    }
    let p = &m.permutation;
    let mut nodes = Array2::zeros(g1.nodes.dim());
    for r in 0..k {
        for c in 0..g1.n() {
            nodes[[r, c]] = (g1.nodes[[r, c]] + g2.nodes[[p[r], c]]) / 2.0;
        }
    }
    let edges = Array2::from_shape_fn((k, k), |(a, b)| {
        (g1.edges[[a, b]] + g2.edges[[p[a], p[b]]]) / 2.0
    });
    let mut merge_order = g1.meta.merge_order.clone();
    merge_order.extend(g2.meta.merge_order.iter().cloned());
    Ok(HozGraph {
        scope: GraphScope::Scene,
        scene_label: g1.scene_label.or(g2.scene_label),
        nodes,
        edges,
        meta: GraphMeta {
            seed: g1.meta.seed,
            epsilon: g1.meta.epsilon,
            alpha: g1.meta.alpha,
            sample_count: g1.meta.sample_count + g2.meta.sample_count,
            merge_order,
            zone_sizes: Vec::new(),
        },
    })
}

/// Match weights between every node of `a` and every node of `b`.
pub(crate) fn weight_matrix(a: &HozGraph, b: &HozGraph, alpha: f64) -> Result<Array2<f64>> {
    let k = a.k();
    let mut w = Array2::zeros((k, b.k()));
    for i in 0..k {
        for j in 0..b.k() {
            w[[i, j]] = match_weight(a.nodes.row(i), b.nodes.row(j), alpha)?;
        }
    }
    Ok(w)
}

/// Fold room graphs left to right: match each room against the running
/// scene graph and average the matched pairs.
pub fn build_scene_graph(rooms: &[HozGraph], alpha: f64) -> Result<HozGraph> {
    let (first, rest) = rooms.split_first().ok_or(HozError::Empty("room graphs"))?;
    let mut scene = first.clone();
    scene.scope = GraphScope::Scene;
    scene.meta.alpha = Some(alpha);
    scene.meta.zone_sizes.clear();
    for room in rest {
        if room.nodes.dim() != scene.nodes.dim() {
            return Err(HozError::ShapeMismatch(format!(
                "room graph {:?} has shape {:?}, expected {:?}",
                room.meta.merge_order,
                room.nodes.dim(),
                scene.nodes.dim()
            )));
        }
        let matching = kuhn_munkres(&weight_matrix(&scene, room, alpha)?)?;
        scene = merge_pair(&scene, room, &matching)?;
    }
    Ok(scene)
}

/// Collect scene graphs into the global composite, keyed by scene label.
pub fn build_global_graph(scene_graphs: Vec<HozGraph>) -> Result<GlobalGraph> {
    let mut global = GlobalGraph::default();
    for g in scene_graphs {
        global.insert(g)?;
    }
    Ok(global)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn graph(nodes: Array2<f64>, edges: Array2<f64>, id: &str) -> HozGraph {
        HozGraph {
            scope: GraphScope::Room,
            scene_label: Some(0),
            nodes,
            edges,
            meta: GraphMeta {
                merge_order: vec![id.to_string()],
                ..Default::default()
            },
        }
    }

    #[test]
    fn distance_examples() {
        let e1 = array![1.0, 0.0];
        let e2 = array![0.0, 1.0];
        let same = node_distance(e1.view(), e1.view(), 0.1).unwrap();
        assert!((same - 1.0 / 1.1).abs() < 1e-12);
        let apart = node_distance(e1.view(), e2.view(), 0.1).unwrap();
        assert!((apart - (2f64.sqrt() + 10.0)).abs() < 1e-12);
        assert!((match_weight(e1.view(), e1.view(), 0.1).unwrap() - 1.1).abs() < 1e-12);
        assert!(node_distance(e1.view(), array![1.0].view(), 0.1).is_err());
        assert!(node_distance(e1.view(), e1.view(), 0.0).is_err());
    }

    #[test]
    fn weight_falls_with_separation_at_fixed_overlap() {
        // a . b = 1 throughout; the second coordinate only adds separation.
        let a = array![1.0, 0.0];
        let mut last = f64::INFINITY;
        for s in [0.0, 0.5, 1.0, 2.0] {
            let b = array![1.0, s];
            let w = match_weight(a.view(), b.view(), 0.1).unwrap();
            assert!(w < last);
            last = w;
        }
    }

    #[test]
    fn merge_with_self_is_identity() {
        let g = graph(
            array![[1.0, 0.0], [0.5, 0.5]],
            array![[0.0, 0.3], [0.3, 0.0]],
            "a",
        );
        let merged = merge_pair(&g, &g, &Matching::identity(2)).unwrap();
        assert_eq!(merged.nodes, g.nodes);
        assert_eq!(merged.edges, g.edges);
    }

    #[test]
    fn merge_follows_permutation() {
        let g1 = graph(
            array![[1.0, 0.0], [0.0, 1.0]],
            array![[0.0, 0.2], [0.2, 0.0]],
            "a",
        );
        let g2 = graph(
            array![[0.0, 0.8], [0.6, 0.0]],
            array![[0.0, 0.6], [0.6, 0.0]],
            "b",
        );
        let m = Matching {
            permutation: vec![1, 0],
            total_weight: 0.0,
        };
        let merged = merge_pair(&g1, &g2, &m).unwrap();
        assert_eq!(merged.nodes, array![[0.8, 0.0], [0.0, 0.9]]);
        assert_eq!(merged.edges, array![[0.0, 0.4], [0.4, 0.0]]);
        assert_eq!(merged.meta.merge_order, vec!["a", "b"]);
        let bad = Matching {
            permutation: vec![0, 0],
            total_weight: 0.0,
        };
        assert!(merge_pair(&g1, &g2, &bad).is_err());
    }

    #[test]
    fn scene_fold_aligns_swapped_rooms() {
        let g1 = graph(
            array![[1.0, 0.0], [0.0, 1.0]],
            array![[0.0, 0.5], [0.5, 0.0]],
            "a",
        );
        let g2 = graph(
            array![[0.0, 1.0], [1.0, 0.0]],
            array![[0.0, 0.5], [0.5, 0.0]],
            "b",
        );
        let scene = build_scene_graph(&[g1.clone(), g2], 0.1).unwrap();
        assert_eq!(scene.nodes, g1.nodes);
        assert_eq!(scene.scope, GraphScope::Scene);
        assert_eq!(scene.meta.merge_order, vec!["a", "b"]);
        let single = build_scene_graph(std::slice::from_ref(&g1), 0.1).unwrap();
        assert_eq!(single.nodes, g1.nodes);
        assert_eq!(single.edges, g1.edges);
        assert!(build_scene_graph(&[], 0.1).is_err());
    }

    #[test]
    fn global_rejects_duplicates() {
        let g = graph(array![[1.0]], array![[0.0]], "a");
        let mut other = g.clone();
        other.scene_label = Some(1);
        let global = build_global_graph(vec![g.clone(), other]).unwrap();
        assert_eq!(global.len(), 2);
        assert!(global.get(1).is_some());
        assert!(global.get(7).is_none());
        assert!(matches!(
            build_global_graph(vec![g.clone(), g]),
            Err(HozError::DuplicateScene(0))
        ));
    }
}
