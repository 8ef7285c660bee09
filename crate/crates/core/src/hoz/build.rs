//! Room-wise graph construction.

use ndarray::Array2;

use super::graph::{GraphMeta, GraphScope, HozGraph};
use super::kmeans::{kmeans_with, KMeansConfig};
use crate::error::{HozError, Result};
use crate::model::ObservationSample;
use crate::rng::SeededRng;

/// What the zone clustering sees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClusterFeatures {
    /// Bag-of-objects features only.
    Visual,
    /// Features concatenated with `(x, z) * weight`; ablation only.
    VisualLocation { weight: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoomGraphConfig {
    pub k: usize,
    /// L1 radius under which two sample locations count as adjacent.
    pub epsilon: f64,
    pub features: ClusterFeatures,
    pub kmeans: KMeansConfig,
}

impl Default for RoomGraphConfig {
    fn default() -> Self {
        Self {
            k: 8,
            epsilon: 0.25,
            features: ClusterFeatures::Visual,
            kmeans: KMeansConfig::default(),
        }
    }
}

/// Mean feature of a zone's members: entry `j` is how often category `j` is seen in the zone.
pub fn zone_embedding(members: &[&ObservationSample]) -> Result<Vec<f64>> {
    let first = members.first().ok_or(HozError::EmptyZone)?;
    let n = first.feature.len();
    let mut mean = vec![0.0; n];
    for m in members {
        if m.feature.len() != n {
            return Err(HozError::DimensionMismatch {
                expected: n,
                actual: m.feature.len(),
            });
        }
        for (acc, v) in mean.iter_mut().zip(m.feature.values()) {
            *acc += v;
        }
    }
    let count = members.len() as f64;
    mean.iter_mut().for_each(|v| *v /= count);
    Ok(mean)
}

/// Fraction of cross-zone location pairs `(x, z)` within L1 distance `epsilon`.
pub fn compute_edge(zone_k: &[(f64, f64)], zone_j: &[(f64, f64)], epsilon: f64) -> Result<f64> {
    if zone_k.is_empty() || zone_j.is_empty() {
        return Err(HozError::EmptyZone);
    }
    let near = zone_k
        .iter()
        .map(|a| {
            zone_j
                .iter()
                .filter(|b| (a.0 - b.0).abs() + (a.1 - b.1).abs() <= epsilon)
                .count()
        })
        .sum::<usize>();
    Ok(near as f64 / (zone_k.len() * zone_j.len()) as f64)
}

/// Cluster a room's observations into zones and connect them by spatial adjacency.
pub fn build_room_graph(
    samples: &[ObservationSample],
    cfg: &RoomGraphConfig,
    rng: &mut SeededRng,
) -> Result<HozGraph> {
    if samples.len() < cfg.k {
        return Err(HozError::TooFewSamples {
            needed: cfg.k,
            got: samples.len(),
        });
    }
    let seed = rng.seed();
    let points: Vec<Vec<f64>> = samples
        .iter()
        .map(|s| {
            let mut v = s.feature.values().to_vec();
            if let ClusterFeatures::VisualLocation { weight } = cfg.features {
                v.push(s.location.x as f64 * weight);
                v.push(s.location.z as f64 * weight);
            }
            v
        })
        .collect();
    let clusters = kmeans_with(&points, cfg.k, rng, &cfg.kmeans)?;

    let k = cfg.k;
    let n = samples[0].feature.len();
    let mut nodes = Array2::zeros((k, n));
    let mut zones: Vec<Vec<&ObservationSample>> = vec![Vec::new(); k];
    for (s, &a) in samples.iter().zip(&clusters.assignment) {
        zones[a].push(s);
    }
    for (z, members) in zones.iter().enumerate() {
        let emb = zone_embedding(members)?;
        nodes.row_mut(z).assign(&ndarray::ArrayView1::from(&emb));
    }
    let locations: Vec<Vec<(f64, f64)>> = zones
        .iter()
        .map(|m| {
            m.iter()
                .map(|s| (s.location.x as f64, s.location.z as f64))
                .collect()
        })
        .collect();
    let mut edges = Array2::zeros((k, k));
    for a in 0..k {
        for b in (a + 1)..k {
            let e = compute_edge(&locations[a], &locations[b], cfg.epsilon)?;
            edges[[a, b]] = e;
            edges[[b, a]] = e;
        }
    }
    Ok(HozGraph {
        scope: GraphScope::Room,
        scene_label: None,
        nodes,
        edges,
        meta: GraphMeta {
            seed: Some(seed),
            epsilon: Some(cfg.epsilon),
            alpha: None,
            sample_count: samples.len(),
            merge_order: Vec::new(),
            zone_sizes: clusters.sizes(),
        },
    })
}
