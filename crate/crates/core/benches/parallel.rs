use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ellipsf::presets::{quincunx, quincunx_nonstationary, second};
use ellipsf::scalingfn::{cascade_eval, ScalingFunctionSpec, DEFAULT_TRUNC};
use ellipsf::strangfix::{delta_matrix, strang_fix_order};
use ellipsf::Exec;

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn numeric_delta(c: &mut Criterion) {
    let kind = quincunx_nonstationary().unwrap();
    let spec = ScalingFunctionSpec::nonstationary(&quincunx(), &kind, DEFAULT_TRUNC).unwrap();
    let jets = spec.numeric(DEFAULT_TRUNC).unwrap();
    let mut g = c.benchmark_group("numeric_delta_l6");
    for radius in [2i64, 4] {
        for (name, exec) in POLICIES {
            g.bench_with_input(BenchmarkId::new(name, radius), &radius, |b, &r| {
                b.iter(|| black_box(delta_matrix(&jets, 6, r, exec).unwrap()))
            });
        }
    }
    g.finish();
}

fn exact_order(c: &mut Criterion) {
    let spec = ScalingFunctionSpec::stationary(&quincunx(), 2).unwrap();
    let mut g = c.benchmark_group("exact_order_m2");
    for (name, exec) in POLICIES {
        g.bench_function(name, |b| {
            b.iter(|| {
                // a fresh provider each time so the jet cache does not hide the work
                let sym = spec.symbolic();
                black_box(strang_fix_order(&sym, 10, 4, exec).unwrap())
            })
        });
    }
    g.finish();
}

fn cascade(c: &mut Criterion) {
    let spec = ScalingFunctionSpec::stationary(&second(), 1).unwrap();
    let mut g = c.benchmark_group("cascade_second");
    for levels in [8usize, 10] {
        for (name, exec) in POLICIES {
            g.bench_with_input(BenchmarkId::new(name, levels), &levels, |b, &j| {
                b.iter(|| black_box(cascade_eval(&spec, j, exec).unwrap()))
            });
        }
    }
    g.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10).measurement_time(Duration::from_secs(3));
    targets = numeric_delta, exact_order, cascade
}
criterion_main!(benches);
