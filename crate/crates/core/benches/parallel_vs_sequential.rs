use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kickdmp::dmp::{DmpParams, DmpSystem, ForcingTerm, StartState};
use kickdmp::kick::{nominal_primitive, sweep, GridSpec, KickRig, KickScenario};
use kickdmp::motor::{fit_error_with, simulate_delayed_step_response, MotorParams};
use kickdmp::par::{self, Execution};

fn modes() -> Vec<Execution> {
    if cfg!(feature = "parallel") {
        vec![Execution::Sequential, Execution::Parallel]
    } else {
        vec![Execution::Sequential]
    }
}

fn bench_sweep(c: &mut Criterion) {
    let rig = KickRig::standard(nominal_primitive()).unwrap();
    let grid = GridSpec::parse("speed_factor=1,0.75,0.5;ball_dx=0,0.04;ball_dy=-0.03,0.03").unwrap();
    let scenarios = grid.expand(&KickScenario::default());
    let mut group = c.benchmark_group("kick_sweep_12");
    group.sample_size(10);
    for exec in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| sweep(black_box(&scenarios), &rig, exec).unwrap())
        });
    }
    group.finish();
}

fn bench_fit_error(c: &mut Criterion) {
    let truth = MotorParams::new(0.05, 1.0, 7.0).unwrap();
    let responses: Vec<_> = (1..=64).map(|i| simulate_delayed_step_response(&truth, i as f64, 200, 3)).collect();
    let guess = MotorParams::new(0.06, 0.9, 8.0).unwrap();
    let mut group = c.benchmark_group("fit_error_64");
    for exec in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| fit_error_with(black_box(&guess), &responses, exec).unwrap())
        });
    }
    group.finish();
}

fn bench_rollouts(c: &mut Criterion) {
    let n = 30;
    let systems: Vec<DmpSystem> = (0..64)
        .map(|i| {
            let w = (0..n).map(|k| ((i * n + k) as f64).sin() * 20.0).collect();
            let ft = ForcingTerm::uniform_in_time(n, 100f64.ln()).unwrap().with_weights(w).unwrap();
            DmpSystem::new(DmpParams::default(), ft, StartState::default(), 1.0, 0.5 * i as f64 / 64.0).unwrap()
        })
        .collect();
    let mut group = c.benchmark_group("dmp_rollout_64");
    group.sample_size(20);
    for exec in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| par::try_map(exec, black_box(&systems), |s| s.rollout(1e-3)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_sweep, bench_fit_error, bench_rollouts);
criterion_main!(benches);
