use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ladlag::barrier::{BarrierTable, GridSpec};
use ladlag::calibration::{compute_constants, McConfig, SampleBank};
use ladlag::par::Execution;
use ladlag::path_model::ModelParams;
use ladlag::rng::Stream;
use ladlag::sensor::SensorSpec;
use ladlag::study::{grid_covering, scenario_paths, value_sweep};
use std::hint::black_box;

const SAMPLES: usize = 20_000;
const PATHS: usize = 5_000;

fn modes() -> Vec<(&'static str, Execution)> {
    let mut v = vec![("sequential", Execution::Sequential)];
    if Execution::available() {
        v.push(("parallel", Execution::Parallel));
    }
    v
}

fn engine(c: &mut Criterion) {
    let params = ModelParams::illustration();
    let etas = [SensorSpec::Threshold(0.0), SensorSpec::Threshold(3.0), SensorSpec::Infinite];
    let mut g = c.benchmark_group("engine");
    g.sample_size(10);

    for (name, exec) in modes() {
        let mc = McConfig { exec, ..McConfig::with_samples(SAMPLES, 0) };
        g.bench_function(BenchmarkId::new("sample_bank", name), |b| b.iter(|| SampleBank::build(black_box(&params), &mc).unwrap()));

        let bank = SampleBank::build(&params, &mc).unwrap();
        let constants = compute_constants(&bank).unwrap();
        let paths = scenario_paths(&params, PATHS, 0, Stream::ValueSweep, mc.eps_trunc, exec);
        let grid = grid_covering(&params, &GridSpec { points: 50, p_min: None }, &paths);
        g.bench_function(BenchmarkId::new("barrier_table", name), |b| {
            b.iter(|| BarrierTable::build(&bank, &constants, black_box(SensorSpec::Threshold(3.0)), &grid, exec).unwrap())
        });

        let tables: Vec<BarrierTable> = etas.iter().map(|&e| BarrierTable::build(&bank, &constants, e, &grid, exec).unwrap()).collect();
        g.bench_function(BenchmarkId::new("value_sweep", name), |b| b.iter(|| value_sweep(&params, black_box(&tables), &paths, exec)));
    }
    g.finish();
}

criterion_group!(benches, engine);
criterion_main!(benches);
