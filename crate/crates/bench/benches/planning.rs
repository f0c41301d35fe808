use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use transport_bench::random_grid;
use transport_core::nav::astar::astar;
use transport_core::planners::{high_level_step, PlannerState, RuleParams};
use transport_core::taskgen::{generate_house, HouseParams};

fn bench_astar(c: &mut Criterion) {
    let mut group = c.benchmark_group("astar");
    for n in [32usize, 64, 128] {
        let grids: Vec<_> = (0..16).map(|s| random_grid(n, 0.3, s)).collect();
        group.bench_with_input(BenchmarkId::new("corner_to_corner_30pct", n), &grids, |b, grids| {
            b.iter(|| {
                for g in grids {
                    black_box(astar(g, (0, 0), (n - 1, n - 1)));
                }
            })
        });
    }
    group.finish();
}

fn bench_house_generation(c: &mut Criterion) {
    let p = HouseParams::default();
    let mut seed = 0u64;
    c.bench_function("generate_house_40x40", |b| {
        b.iter(|| {
            seed += 1;
            black_box(generate_house("bench", seed, &p).unwrap())
        })
    });
}

fn bench_rules(c: &mut Criterion) {
    let p = RuleParams::default();
    let states: Vec<PlannerState> = (0..64usize)
        .map(|i| PlannerState {
            steps_charged: i as u32 * 15,
            budget: 1000,
            container_found: i % 2 == 0,
            container_held: i % 3 == 0,
            container_available: i % 5 == 0,
            targets_known: i % 4,
            targets_in_arms: i % 3,
            carrying: i % 4,
            free_slots: 2 - (i % 3).min(2),
            container_space: i % 4,
            remaining_required: 8 - (i % 8),
        })
        .collect();
    c.bench_function("high_level_step_x64", |b| {
        b.iter(|| {
            for s in &states {
                black_box(high_level_step(s, &p));
            }
        })
    });
}

criterion_group!(benches, bench_astar, bench_house_generation, bench_rules);
criterion_main!(benches);
