use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use supplyfrag_bench::{low_cost_economy, unit_grid};
use supplyfrag_core::chain_dynamics::limit_map;
use supplyfrag_core::dist_core::{eta, BetaParams};
use supplyfrag_core::firm_policy::optimal_sourcing_correlated;
use supplyfrag_core::mc_sim::{build_tree_network, run_trials};
use supplyfrag_core::planner::planner_solve;
use supplyfrag_core::{propagate_chain, BasalMode, PlannerOptions};

fn dist(c: &mut Criterion) {
    let base = BetaParams::new(0.4, 0.1).unwrap();
    c.bench_function("eta s=8 S=64", |b| {
        b.iter(|| eta(black_box(8), black_box(64), &base))
    });
    c.bench_function("moment 1e6", |b| b.iter(|| base.moment(black_box(1e6))));
}

fn policy(c: &mut Criterion) {
    let base = BetaParams::new(0.4, 0.1).unwrap();
    c.bench_function("optimal sourcing S=16", |b| {
        b.iter(|| optimal_sourcing_correlated(black_box(16), base.moment(16.0), &base, 1.0, 0.04))
    });
    let econ = low_cost_economy(1, 0.5, 0.05);
    c.bench_function("propagate chain", |b| b.iter(|| propagate_chain(black_box(&econ), 64)));
    let grid = unit_grid(99);
    c.bench_function("limit map 99 points", |b| {
        b.iter(|| limit_map(black_box(&grid), 0.1, 1.0, 0.04))
    });
}

fn planner(c: &mut Criterion) {
    let econ = low_cost_economy(6, 0.5, 0.1);
    let opts = PlannerOptions::default();
    c.bench_function("planner K=6 s_max=12", |b| {
        b.iter(|| planner_solve(black_box(&econ), &opts))
    });
}

fn simulation(c: &mut Criterion) {
    let net = build_tree_network(&[3, 3, 3]).unwrap();
    let base = BetaParams::new(0.4, 0.2).unwrap();
    c.bench_function("tree 27 basal x 1000 trials", |b| {
        b.iter(|| run_trials(&net, &BasalMode::CommonDraw, &base, 1000, black_box(1), false))
    });
}

criterion_group!(benches, dist, policy, planner, simulation);
criterion_main!(benches);
