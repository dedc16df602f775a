use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use biloc::choice::{RhoTable, ScenarioSet};
use biloc::instance::{generate, GeneratorParams};
use biloc::milp::build;
use biloc::oracle::{simulate, Mode};
use biloc::par::Exec;
use biloc::solver::{enumerate_oracle, solve, SolveOptions};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn rho_saa(c: &mut Criterion) {
    let inst = generate(&GeneratorParams::default()).unwrap();
    let scenarios = ScenarioSet::new(20_000, inst.choice_model.beta, 1);
    let mut g = c.benchmark_group("rho_saa");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| RhoTable::saa(&inst, &scenarios, exec).unwrap())
        });
    }
    g.finish();
}

fn scenario_simulation(c: &mut Criterion) {
    let inst = generate(&GeneratorParams::default()).unwrap();
    let model = build(&inst, &RhoTable::closed_form(&inst).unwrap()).unwrap();
    let sol = solve(&model, &SolveOptions::default()).unwrap();
    let scenarios = ScenarioSet::new(50_000, inst.choice_model.beta, 1);
    let mut g = c.benchmark_group("simulate");
    g.sample_size(10);
    for mode in [Mode::ReducedConsistent, Mode::Reallocation] {
        for (name, exec) in MODES {
            g.bench_function(BenchmarkId::new(mode.to_string(), name), |b| {
                b.iter(|| simulate(&inst, &sol, &scenarios, mode, exec).unwrap())
            });
        }
    }
    g.finish();
}

fn brute_force(c: &mut Criterion) {
    let inst = generate(&GeneratorParams {
        facilities: 2,
        customers: 4,
        shippers: 2,
        categories: 2,
        services: 2,
        prices: 2,
        ..GeneratorParams::default()
    })
    .unwrap();
    let rho = RhoTable::closed_form(&inst).unwrap();
    let mut g = c.benchmark_group("enumerate_oracle");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| enumerate_oracle(&inst, &rho, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, rho_saa, scenario_simulation, brute_force);
criterion_main!(benches);
