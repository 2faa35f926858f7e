use std::hint::black_box;

use bia_core::harness::ScenarioConfig;
use bia_core::topology::{kmeans_users, Point2};
use bia_core::{
    bia_user_rate, build_channel_set, build_schedule, evaluate_network, place_users_uniform, uc_topology,
    verify_decodability, NoiseModel, RateParams,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::DMatrix;

fn schedule(c: &mut Criterion) {
    let mut group = c.benchmark_group("schedule");
    for (l, k) in [(4, 4), (6, 5), (8, 5)] {
        let id = format!("L{l}_K{k}");
        group.bench_with_input(BenchmarkId::new("build", &id), &(l, k), |b, &(l, k)| {
            b.iter(|| build_schedule(black_box(l), black_box(k)).unwrap())
        });
        let s = build_schedule(l, k).unwrap();
        group
            .bench_with_input(BenchmarkId::new("verify", &id), &s, |b, s| b.iter(|| verify_decodability(black_box(s))));
    }
    group.finish();
}

fn user_rate(c: &mut Criterion) {
    let mut group = c.benchmark_group("bia_user_rate");
    let noise = NoiseModel::new(1e-3);
    for l in [4, 8, 16] {
        let h = DMatrix::from_fn(l, l, |i, j| 1.0 / (1.0 + (i as f64 - j as f64).abs()));
        group.bench_with_input(BenchmarkId::from_parameter(l), &h, |b, h| {
            b.iter(|| bia_user_rate(black_box(h), 10.0, &noise, l, 5).unwrap())
        });
    }
    group.finish();
}

fn kmeans(c: &mut Criterion) {
    let cfg = ScenarioConfig::default();
    let users = place_users_uniform(&cfg.room(), 50, cfg.receive_height, 7, &cfg.detector().unwrap()).unwrap();
    let pts: Vec<Point2> = users.iter().map(|u| [u.position.x, u.position.y]).collect();
    c.bench_function("kmeans_50_users_g5", |b| b.iter(|| kmeans_users(black_box(&pts), 5, 3, 100).unwrap()));
}

fn network(c: &mut Criterion) {
    let cfg = ScenarioConfig::default();
    let aps = cfg.aps();
    let detector = cfg.detector().unwrap();
    let emitter = cfg.emitter().unwrap();
    let noise_variance = cfg.noise_variance().unwrap();
    let users = place_users_uniform(&cfg.room(), cfg.users, cfg.receive_height, 11, &detector).unwrap();
    let channels = build_channel_set(&aps, &users, &emitter, noise_variance, None).unwrap();
    let topology = uc_topology(&aps, &users, 4, 5, 100).unwrap();
    let params = RateParams {
        p_str: emitter.stream_power(),
        noise_variance,
        slot_duration_s: cfg.slot_duration,
        coherence_time_s: cfg.coherence_time,
    };
    c.bench_function("channel_set_16ap_10users", |b| {
        b.iter(|| build_channel_set(black_box(&aps), black_box(&users), &emitter, noise_variance, None).unwrap())
    });
    c.bench_function("evaluate_network_uc4", |b| {
        b.iter(|| evaluate_network(black_box(&topology), black_box(&channels), &params).unwrap())
    });
}

criterion_group!(benches, schedule, user_rate, kmeans, network);
criterion_main!(benches);
