use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion, Throughput};
use qeraser_core::config::ExperimentConfig;
use qeraser_core::instrument::{simulate_run, RunPlan};
use qeraser_core::quantum::{joint_probabilities, HybridState, InterferometerConfig, MeasurementChain};
use qeraser_core::timetag::{estimate_clock_offset_near, find_coincidences};

fn quantum(c: &mut Criterion) {
    let state = HybridState::new(0.98, 0.969).unwrap();
    let chain = MeasurementChain::vienna().with_drive(1.0);
    c.bench_function("joint_probabilities", |b| {
        b.iter(|| joint_probabilities(black_box(&state), &InterferometerConfig::new(black_box(0.3)), &chain))
    });
}

fn simulation(c: &mut Criterion) {
    let mut g = c.benchmark_group("simulate_run");
    g.sample_size(10);
    for name in ["vienna-II", "canaries-II"] {
        let exp = ExperimentConfig::bundled(name).unwrap().experiment().unwrap();
        let plan = RunPlan::single(0.0, 0.1);
        let tags = simulate_run(&exp, &plan, 1).unwrap().system.len();
        g.throughput(Throughput::Elements(tags as u64));
        g.bench_function(format!("{name} 0.1 s"), |b| b.iter(|| simulate_run(&exp, &plan, black_box(1)).unwrap()));
    }
    g.finish();
}

fn coincidences(c: &mut Criterion) {
    let mut g = c.benchmark_group("reconstruction");
    g.sample_size(10);
    let exp = ExperimentConfig::bundled("vienna-II").unwrap().experiment().unwrap();
    let run = simulate_run(&exp, &RunPlan::single(0.0, 1.0), 3).unwrap();
    let (d_sys, d_env) = exp.detection_delays().unwrap();
    let offset = estimate_clock_offset_near(run.system.tags(), run.environment.tags(), d_sys - d_env, 2e-6, 1e-9)
        .unwrap()
        .offset_s;
    g.throughput(Throughput::Elements((run.system.len() + run.environment.len()) as u64));
    g.bench_function("find_coincidences 1 s vienna", |b| {
        b.iter(|| find_coincidences(&run.system, &run.environment, 1e-9, black_box(offset)).unwrap())
    });
    g.bench_function("estimate_clock_offset 1 s vienna", |b| {
        b.iter(|| estimate_clock_offset_near(run.system.tags(), run.environment.tags(), black_box(d_sys - d_env), 2e-6, 1e-9))
    });
    g.finish();
}

criterion_group!(benches, quantum, simulation, coincidences);
criterion_main!(benches);
