//! Property tests of the combinatorial solvers and graph invariants against
//! independent brute-force oracles.

mod common;

use hoz_core::env::ObjectInstance;
use hoz_core::hoz::{
    assignment_cost, build_room_graph, kmeans, kuhn_munkres, match_weight, merge_pair, plan_path, RoomGraphConfig,
};
use hoz_core::model::{BagOfObjects, HeightBand, ObservationSample, Pitch, Pose, Yaw};
use hoz_core::sim::{SimParams, Simulator};
use hoz_core::{GridEnvironment, SeededRng};
use ndarray::Array2;
use proptest::prelude::*;

use common::{brute_force_matching, brute_force_path, permutations};

fn matrix(k: usize, values: &[f64]) -> Array2<f64> {
    Array2::from_shape_fn((k, k), |(i, j)| values[i * k + j])
}

fn symmetric(k: usize, values: &[f64]) -> Array2<f64> {
    Array2::from_shape_fn((k, k), |(i, j)| match i.cmp(&j) {
        std::cmp::Ordering::Equal => 0.0,
        std::cmp::Ordering::Less => values[i * k + j],
        std::cmp::Ordering::Greater => values[j * k + i],
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn matching_is_optimal(k in 1usize..=6, values in prop::collection::vec(-5.0f64..5.0, 36)) {
        let w = matrix(k, &values);
        let m = kuhn_munkres(&w).unwrap();
        prop_assert!(m.is_bijection());
        let best = brute_force_matching(&w, &permutations(k));
        prop_assert!((m.total_weight - best).abs() <= 1e-9 * best.abs().max(1.0));
    }

    #[test]
    fn matching_on_integer_ties_is_optimal(k in 1usize..=6, values in prop::collection::vec(0u8..3, 36)) {
        let w = matrix(k, &values.iter().map(|&v| f64::from(v)).collect::<Vec<_>>());
        let m = kuhn_munkres(&w).unwrap();
        prop_assert_eq!(m.total_weight, brute_force_matching(&w, &permutations(k)));
    }

    #[test]
    fn plan_matches_path_enumeration(
        k in 2usize..=7,
        values in prop::collection::vec(0.0f64..1.0, 49),
        keep in prop::collection::vec(any::<bool>(), 49),
        s in 0usize..7,
        t in 0usize..7,
    ) {
        let masked: Vec<f64> = values.iter().zip(&keep).map(|(&v, &k)| if k { v } else { 0.0 }).collect();
        let e = symmetric(k, &masked);
        let (s, t) = (s % k, t % k);
        let plan = plan_path(&e, s, t).unwrap();
        let best = brute_force_path(&e, s, t);
        prop_assert_eq!(plan.path.first(), Some(&s));
        prop_assert_eq!(plan.path.last(), Some(&t));
        let mut seen = plan.path.clone();
        seen.sort_unstable();
        seen.dedup();
        prop_assert_eq!(seen.len(), plan.path.len(), "path repeats a zone");
        if best > 0.0 {
            prop_assert!(plan.reachable);
            prop_assert!((plan.product - best).abs() <= 1e-12 * best);
        } else {
            prop_assert!(!plan.reachable);
        }
    }

    #[test]
    fn kmeans_beats_random_assignments(seed in any::<u64>()) {
        let mut rng = SeededRng::new(seed);
        let points: Vec<Vec<f64>> = (0..50)
            .map(|_| (0..6).map(|_| f64::from(u8::from(rng.bernoulli(0.4)))).collect())
            .collect();
        let clusters = kmeans(&points, 4, &mut rng).unwrap();
        let best_random = (0..1000)
            .map(|_| {
                let a: Vec<usize> = (0..points.len()).map(|_| rng.index(4)).collect();
                assignment_cost(&points, 4, &a)
            })
            .fold(f64::INFINITY, f64::min);
        prop_assert!(clusters.sizes().iter().all(|&s| s > 0));
        prop_assert!(clusters.cost <= best_random + 1e-9);
    }

    #[test]
    fn room_graph_invariants(seed in any::<u64>(), k in 1usize..=5) {
        let mut rng = SeededRng::new(seed);
        let samples: Vec<ObservationSample> = (0..40)
            .map(|_| ObservationSample {
                feature: BagOfObjects::from_categories(8, (0..8).filter(|_| rng.bernoulli(0.3))).unwrap(),
                location: Pose::new(rng.index(6) as i32, rng.index(6) as i32, Yaw::North, Pitch::Level),
            })
            .collect();
        let cfg = RoomGraphConfig { k, epsilon: 1.0, ..RoomGraphConfig::default() };
        let g = build_room_graph(&samples, &cfg, &mut SeededRng::new(seed)).unwrap();
        g.validate().unwrap();
        for i in 0..k {
            prop_assert_eq!(g.edges[[i, i]], 0.0);
            for j in 0..k {
                prop_assert_eq!(g.edges[[i, j]], g.edges[[j, i]]);
                prop_assert!((0.0..=1.0).contains(&g.edges[[i, j]]));
            }
        }
        // Size-weighted node rows recombine into the grand mean.
        let sizes = &g.meta.zone_sizes;
        for c in 0..8 {
            let grand: f64 = samples.iter().map(|s| s.feature.values()[c]).sum::<f64>() / 40.0;
            let recombined: f64 = (0..k).map(|z| g.nodes[[z, c]] * sizes[z] as f64).sum::<f64>() / 40.0;
            prop_assert!((grand - recombined).abs() <= 1e-12);
        }
        // Moving the samples changes edges only.
        let moved: Vec<ObservationSample> = samples
            .iter()
            .map(|s| ObservationSample { feature: s.feature.clone(), location: Pose::new(s.location.z, s.location.x, Yaw::East, Pitch::Level) })
            .collect();
        let g2 = build_room_graph(&moved, &cfg, &mut SeededRng::new(seed)).unwrap();
        prop_assert_eq!(&g2.nodes, &g.nodes);
    }

    #[test]
    fn merge_averages_matched_pairs(seed in any::<u64>(), k in 1usize..=5) {
        let mut rng = SeededRng::new(seed);
        let graph = |rng: &mut SeededRng| {
            let samples: Vec<ObservationSample> = (0..20)
                .map(|_| ObservationSample {
                    feature: BagOfObjects::from_categories(6, (0..6).filter(|_| rng.bernoulli(0.4))).unwrap(),
                    location: Pose::new(rng.index(4) as i32, rng.index(4) as i32, Yaw::North, Pitch::Level),
                })
                .collect();
            let cfg = RoomGraphConfig { k, epsilon: 1.0, ..RoomGraphConfig::default() };
            build_room_graph(&samples, &cfg, rng).unwrap()
        };
        let (a, b) = (graph(&mut rng), graph(&mut rng));
        let w = Array2::from_shape_fn((k, k), |(i, j)| match_weight(a.nodes.row(i), b.nodes.row(j), 0.1).unwrap());
        let m = kuhn_munkres(&w).unwrap();
        let merged = merge_pair(&a, &b, &m).unwrap();
        merged.validate().unwrap();
        prop_assert_eq!(merged.nodes.dim(), a.nodes.dim());
        let p = &m.permutation;
        for i in 0..k {
            for c in 0..6 {
                prop_assert_eq!(merged.nodes[[i, c]], (a.nodes[[i, c]] + b.nodes[[p[i], c]]) / 2.0);
            }
            for j in 0..k {
                prop_assert_eq!(merged.edges[[i, j]], (a.edges[[i, j]] + b.edges[[p[i], p[j]]]) / 2.0);
            }
        }
    }
}

/// Random connected 8x8 room: walls at random, then every cell not reachable
/// from the first open cell is walled in too.
fn random_room(seed: u64) -> GridEnvironment {
    let mut rng = SeededRng::new(seed);
    let n = 8usize;
    let mut open: Vec<bool> = (0..n * n).map(|_| !rng.bernoulli(0.25)).collect();
    open[0] = true;
    let mut seen = vec![false; n * n];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(c) = stack.pop() {
        let (x, z) = ((c % n) as i32, (c / n) as i32);
        for (dx, dz) in [(0, 1), (1, 0), (0, -1), (-1, 0)] {
            let (nx, nz) = (x + dx, z + dz);
            if (0..n as i32).contains(&nx) && (0..n as i32).contains(&nz) {
                let i = nz as usize * n + nx as usize;
                if open[i] && !seen[i] {
                    seen[i] = true;
                    stack.push(i);
                }
            }
        }
    }
    for (o, s) in open.iter_mut().zip(&seen) {
        *o &= *s;
    }
    let objects = (0..6)
        .map(|c| ObjectInstance {
            category: [1, 6, 10, 14, 17, 19][c],
            x: rng.index(n) as i32,
            z: rng.index(n) as i32,
            band: HeightBand::Mid,
        })
        .collect();
    GridEnvironment::new(format!("r{seed}"), 0, 22, n, n, open, objects).unwrap()
}

/// Distances by repeated relaxation until nothing changes (Bellman-Ford on
/// unit edges), independent of the simulator's queue-based search.
fn relaxation_distances(env: &GridEnvironment, start: (i32, i32)) -> Vec<Option<u32>> {
    let (w, d) = (env.width, env.depth);
    let mut dist = vec![u32::MAX; w * d];
    dist[start.1 as usize * w + start.0 as usize] = 0;
    loop {
        let mut changed = false;
        for z in 0..d as i32 {
            for x in 0..w as i32 {
                if !env.is_walkable(x, z) {
                    continue;
                }
                let here = z as usize * w + x as usize;
                for (dx, dz) in [(0, 1), (1, 0), (0, -1), (-1, 0)] {
                    let (nx, nz) = (x + dx, z + dz);
                    if env.is_walkable(nx, nz) {
                        let there = dist[nz as usize * w + nx as usize];
                        if there != u32::MAX && there + 1 < dist[here] {
                            dist[here] = there + 1;
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    dist.into_iter().map(|v| (v != u32::MAX).then_some(v)).collect()
}

#[test]
fn bfs_matches_relaxation_oracle() {
    for seed in 0..40 {
        let env = random_room(seed);
        let sim = Simulator::new(&env, SimParams::default()).unwrap();
        let start = env.walkable_cells()[0];
        let dist = relaxation_distances(&env, start);
        let pose = Pose::new(start.0, start.1, Yaw::North, Pitch::Level);
        for target in env.present_categories() {
            let oracle = env
                .walkable_cells()
                .into_iter()
                .filter(|&(x, z)| {
                    Yaw::ALL.iter().any(|&yaw| {
                        Pitch::ALL.iter().any(|&pitch| {
                            sim.success_check(&hoz_core::sim::AgentState::at(Pose::new(x, z, yaw, pitch)), target)
                        })
                    })
                })
                .filter_map(|(x, z)| dist[z as usize * env.width + x as usize])
                .min();
            assert_eq!(sim.shortest_path_length(&pose, target), oracle, "room {seed} target {target}");
        }
    }
}

#[test]
fn matching_relabeling_is_equivariant() {
    let mut rng = SeededRng::new(17);
    for _ in 0..50 {
        let k = 2 + rng.index(5);
        let w = Array2::from_shape_fn((k, k), |_| rng.unit());
        let mut rows: Vec<usize> = (0..k).collect();
        rng.shuffle(&mut rows);
        let permuted = Array2::from_shape_fn((k, k), |(i, j)| w[[rows[i], j]]);
        let a = kuhn_munkres(&w).unwrap();
        let b = kuhn_munkres(&permuted).unwrap();
        assert!((a.total_weight - b.total_weight).abs() <= 1e-12);
    }
}
