use std::collections::BTreeMap;
use std::path::Path;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::dataset::{Dataset, Split};
use super::{prepare_output, write_json};
use crate::env::GridEnvironment;
use crate::error::{HozError, Result};
use crate::gcn::{init_params, GcnParams};
use crate::hoz::{build_global_graph, build_room_graph, build_scene_graph, GlobalGraph, HozGraph};
use crate::model::APPEARANCE_DIM;
use crate::rng::{derive_seed, tag_of, SeededRng};
use crate::sim::{SimParams, Simulator};

pub const ROOM_DIR: &str = "rooms";
pub const SCENE_DIR: &str = "scenes";
pub const GLOBAL_FILE: &str = "global.json";
pub const COOCCURRENCE_FILE: &str = "cooccurrence.json";
pub const PARAMS_FILE: &str = "params.json";

/// Everything `build-graph` produces.
#[derive(Debug, Clone)]
pub struct GraphArtifacts {
    /// Room graphs keyed by room id.
    pub rooms: BTreeMap<String, HozGraph>,
    pub global: GlobalGraph,
    pub cooccurrence: Array2<f64>,
    pub params: GcnParams,
}

#[derive(Serialize, Deserialize)]
struct CooccurrenceFile {
    categories: usize,
    counts: Vec<Vec<f64>>,
}

/// Zone graph of one room from its exhaustive sweep.
pub fn room_graph(env: &GridEnvironment, sim_params: &SimParams, cfg: &RunConfig, k: usize) -> Result<HozGraph> {
    let sim = Simulator::new(env, sim_params.clone())?;
    let samples = sim.sweep_observations();
    let seed = derive_seed(cfg.seed, &[tag_of("room-graph"), tag_of(&env.room_id), k as u64]);
    let mut graph = build_room_graph(&samples, &cfg.room_graph_config(k), &mut SeededRng::new(seed))?;
    graph.scene_label = Some(env.scene_label);
    graph.meta.merge_order = vec![env.room_id.clone()];
    Ok(graph)
}

/// Views in which both categories appear, summed over the rooms' sweeps.
pub fn cooccurrence_counts(envs: &[GridEnvironment], sim_params: &SimParams, n: usize) -> Result<Array2<f64>> {
    let mut counts = Array2::zeros((n, n));
    for env in envs {
        let sim = Simulator::new(env, sim_params.clone())?;
        for sample in sim.sweep_observations() {
            let present: Vec<usize> = sample.feature.present().collect();
            for &i in &present {
                for &j in &present {
                    if i != j {
                        counts[[i, j]] += 1.0;
                    }
                }
            }
        }
    }
    Ok(counts)
}

/// Room graphs for every environment, computed in parallel, keyed by room id.
pub fn room_graphs(envs: &[GridEnvironment], cfg: &RunConfig, k: usize) -> Result<BTreeMap<String, HozGraph>> {
    let sim_params = cfg.sim_params();
    envs.par_iter()
        .map(|env| Ok((env.room_id.clone(), room_graph(env, &sim_params, cfg, k)?)))
        .collect()
}

/// Merge order of a scene's rooms: lexicographic by room id, or a seeded
/// shuffle of it when `shuffle` carries a seed.
pub fn merge_order(room_ids: &[String], shuffle: Option<u64>) -> Vec<String> {
    let mut order = room_ids.to_vec();
    order.sort();
    if let Some(seed) = shuffle {
        SeededRng::new(seed).shuffle(&mut order);
    }
    order
}

/// Fold each scene's room graphs into a scene graph and collect them.
pub fn scene_graphs(
    dataset: &Dataset,
    rooms: &BTreeMap<String, HozGraph>,
    cfg: &RunConfig,
    shuffle: Option<u64>,
) -> Result<GlobalGraph> {
    let mut scenes = Vec::new();
    for scene in &dataset.manifest.scenes {
        let shuffle_seed = shuffle.map(|s| derive_seed(s, &[scene.label as u64]));
        let order = merge_order(&scene.train, shuffle_seed);
        let graphs = order
            .iter()
            .map(|id| {
                rooms
                    .get(id)
                    .cloned()
                    .ok_or_else(|| HozError::MissingArtifact(format!("room graph {id}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut g = build_scene_graph(&graphs, cfg.alpha)?;
        g.scene_label = Some(scene.label);
        g.meta.seed = Some(cfg.seed);
        g.meta.epsilon = Some(cfg.epsilon);
        scenes.push(g);
    }
    build_global_graph(scenes)
}

/// Seed of the merge-order shuffle applied by `build-graph --shuffle-merge-order`.
pub fn merge_shuffle_seed(cfg: &RunConfig, index: u64) -> u64 {
    derive_seed(cfg.seed, &[tag_of("merge-order"), index])
}

/// Build all graph artifacts from the training split.
pub fn build_graphs(dataset: &Dataset, cfg: &RunConfig, k: usize) -> Result<GraphArtifacts> {
    cfg.validate()?;
    let train = dataset.load_split(Split::Train)?;
    let rooms = room_graphs(&train, cfg, k)?;
    let shuffle = cfg.shuffle_merge_order.then(|| merge_shuffle_seed(cfg, 0));
    let global = scene_graphs(dataset, &rooms, cfg, shuffle)?;
    let n = train[0].categories;
    let cooccurrence = cooccurrence_counts(&train, &cfg.sim_params(), n)?;
    let params = init_params(n, derive_seed(cfg.seed, &[tag_of("gcn")]), Some(&cooccurrence))?;
    Ok(GraphArtifacts {
        rooms,
        global,
        cooccurrence,
        params,
    })
}

impl GraphArtifacts {
    /// Layout: `rooms/<room>.json`, `scenes/<scene>.json`, `global.json`,
    /// `cooccurrence.json`, `params.json`.
    pub fn write(&self, out: &Path, scene_names: &BTreeMap<usize, String>, force: bool) -> Result<()> {
        prepare_output(out, force)?;
        let room_dir = out.join(ROOM_DIR);
        let scene_dir = out.join(SCENE_DIR);
        for dir in [&room_dir, &scene_dir] {
            std::fs::create_dir_all(dir).map_err(|e| HozError::io(dir, e))?;
        }
        for (id, g) in &self.rooms {
            g.save(&room_dir.join(format!("{id}.json")))?;
        }
        for (label, g) in self.global.iter() {
            let name = scene_names.get(&label).cloned().unwrap_or_else(|| format!("scene_{label}"));
            g.save(&scene_dir.join(format!("{name}.json")))?;
        }
        self.global.save(&out.join(GLOBAL_FILE))?;
        let n = self.cooccurrence.nrows();
        write_json(
            &out.join(COOCCURRENCE_FILE),
            &CooccurrenceFile {
                categories: n,
                counts: self.cooccurrence.rows().into_iter().map(|r| r.to_vec()).collect(),
            },
        )?;
        self.params.save(&out.join(PARAMS_FILE), APPEARANCE_DIM)
    }
}

/// The artifacts `run` needs: the global graph and GCN parameters.
pub fn load_run_artifacts(dir: &Path) -> Result<(GlobalGraph, GcnParams)> {
    for file in [GLOBAL_FILE, PARAMS_FILE] {
        let p = dir.join(file);
        if !p.is_file() {
            return Err(HozError::MissingArtifact(p.display().to_string()));
        }
    }
    Ok((
        GlobalGraph::load(&dir.join(GLOBAL_FILE))?,
        GcnParams::load(&dir.join(PARAMS_FILE))?,
    ))
}

pub fn scene_names(dataset: &Dataset) -> BTreeMap<usize, String> {
    dataset
        .manifest
        .scenes
        .iter()
        .map(|s| (s.label, s.name.clone()))
        .collect()
}
