use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hoz_bench::{binary_points, random_edges, random_matrix, scene_fixture};
use hoz_core::gcn::normalize_edges;
use hoz_core::hoz::{kmeans, kuhn_munkres, plan_path, RoomGraphConfig, build_room_graph};
use hoz_core::policy::run_episode;
use hoz_core::{EpisodeConfig, SeededRng, SimParams, Simulator};

fn matching(c: &mut Criterion) {
    let mut group = c.benchmark_group("kuhn_munkres");
    for k in [4, 8, 16, 32] {
        let w = random_matrix(k, k as u64);
        group.bench_with_input(BenchmarkId::from_parameter(k), &w, |b, w| b.iter(|| kuhn_munkres(w).unwrap()));
    }
    group.finish();
}

fn clustering(c: &mut Criterion) {
    let mut group = c.benchmark_group("kmeans");
    for n in [256, 1024] {
        let points = binary_points(n, 22, 7);
        group.bench_with_input(BenchmarkId::from_parameter(n), &points, |b, p| {
            b.iter(|| kmeans(p, 8, &mut SeededRng::new(1)).unwrap())
        });
    }
    group.finish();
}

fn planning(c: &mut Criterion) {
    let mut group = c.benchmark_group("plan_path");
    for k in [8, 32] {
        let e = random_edges(k, 3);
        group.bench_with_input(BenchmarkId::from_parameter(k), &e, |b, e| b.iter(|| plan_path(e, 0, k - 1).unwrap()));
    }
    group.finish();
    let e = random_edges(8, 5);
    c.bench_function("normalize_edges/8", |b| b.iter(|| normalize_edges(&e).unwrap()));
}

fn construction_and_episodes(c: &mut Criterion) {
    let (rooms, global) = scene_fixture(3, 8);
    let sim = Simulator::new(&rooms[0], SimParams::default()).unwrap();
    let samples = sim.sweep_observations();
    let cfg = RoomGraphConfig { k: 8, ..RoomGraphConfig::default() };
    c.bench_function("build_room_graph", |b| {
        b.iter(|| build_room_graph(&samples, &cfg, &mut SeededRng::new(2)).unwrap())
    });
    let target = rooms[0].present_categories()[0];
    let episode = EpisodeConfig::default();
    c.bench_function("run_episode/hoz", |b| {
        b.iter(|| run_episode(&sim, target, &global, None, &episode, 11).ok())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = matching, clustering, planning, construction_and_episodes
}
criterion_main!(benches);
