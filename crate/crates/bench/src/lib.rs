//! Deterministic fixtures shared by the benchmarks in `benches/`.

use hoz_core::hoz::{build_global_graph, build_room_graph, build_scene_graph, RoomGraphConfig};
use hoz_core::sim::{generate_environment, standard_templates};
use hoz_core::{GlobalGraph, GridEnvironment, SeededRng, SimParams, Simulator};
use ndarray::Array2;

/// Uniform `[0, 1)` square matrix.
pub fn random_matrix(k: usize, seed: u64) -> Array2<f64> {
    let mut rng = SeededRng::new(seed);
    Array2::from_shape_fn((k, k), |_| rng.unit())
}

/// Symmetric, zero-diagonal edge matrix with roughly half the pairs connected.
pub fn random_edges(k: usize, seed: u64) -> Array2<f64> {
    let mut rng = SeededRng::new(seed);
    let mut e = Array2::zeros((k, k));
    for i in 0..k {
        for j in i + 1..k {
            if rng.bernoulli(0.5) {
                let w = rng.unit();
                e[[i, j]] = w;
                e[[j, i]] = w;
            }
        }
    }
    e
}

/// `n` binary points of dimension `dim`, each coordinate set with probability 0.3.
pub fn binary_points(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = SeededRng::new(seed);
    (0..n)
        .map(|_| (0..dim).map(|_| f64::from(u8::from(rng.bernoulli(0.3)))).collect())
        .collect()
}

/// One generated room per scene template plus a global graph built from
/// `rooms_per_scene` training rooms of each.
pub fn scene_fixture(rooms_per_scene: u64, k: usize) -> (Vec<GridEnvironment>, GlobalGraph) {
    let cfg = RoomGraphConfig { k, ..RoomGraphConfig::default() };
    let mut test_rooms = Vec::new();
    let mut scenes = Vec::new();
    for (label, template) in standard_templates().iter().enumerate() {
        let mut rooms = Vec::new();
        for i in 0..rooms_per_scene {
            let env = generate_environment(template, &format!("{label}_{i}"), &mut SeededRng::new(i)).unwrap();
            let sim = Simulator::new(&env, SimParams::default()).unwrap();
            let mut g = build_room_graph(&sim.sweep_observations(), &cfg, &mut SeededRng::new(i)).unwrap();
            g.scene_label = Some(label);
            rooms.push(g);
        }
        let mut scene = build_scene_graph(&rooms, 0.1).unwrap();
        scene.scene_label = Some(label);
        scenes.push(scene);
        let test = generate_environment(template, &format!("{label}_test"), &mut SeededRng::new(1000)).unwrap();
        test_rooms.push(test);
    }
    (test_rooms, build_global_graph(scenes).unwrap())
}
