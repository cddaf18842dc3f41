use criterion::{black_box, criterion_group, criterion_main, Criterion};
use mcdp_bench::{battery_grid, compiled, drone_query, prepared};
use mcdp_cli::sweep::sweep;
use mcdp_core::graph::AfsStrategy;
use mcdp_core::solver::solve;
use mcdp_core::{IterationBudget, Value};

fn toy(c: &mut Criterion) {
    let p = prepared("Toy");
    for k in [2u64, 20] {
        c.bench_function(&format!("toy solve c={k}"), |b| {
            b.iter(|| solve(&p.tree, black_box(&Value::Nat(k)), IterationBudget::default()).unwrap())
        });
    }
}

fn drone(c: &mut Criterion) {
    let p = prepared("Drone");
    let f = drone_query(&p);
    c.bench_function("drone solve", |b| b.iter(|| solve(&p.tree, black_box(&f), IterationBudget::default()).unwrap()));
}

fn batteries(c: &mut Criterion) {
    let p = prepared("Batteries");
    let spec = battery_grid();
    c.bench_function("battery sweep 10x10", |b| b.iter(|| sweep(&p, &spec, IterationBudget::default()).unwrap()));
}

fn decompose(c: &mut Criterion) {
    let drone = compiled("Drone");
    for s in [AfsStrategy::Exhaustive, AfsStrategy::Greedy] {
        c.bench_function(&format!("decompose drone {s:?}"), |b| b.iter(|| drone.graph.to_tree(s).unwrap()));
    }
}

criterion_group!(benches, toy, drone, batteries, decompose);
criterion_main!(benches);
