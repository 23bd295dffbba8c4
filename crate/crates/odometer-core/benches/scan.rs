//! Sequential vs parallel scan throughput on the two hot loops: the
//! carry-DP translate sweep and the window carry-class sweep.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num::BigUint;
use odometer_core::example_d::{self, Dc1Options};
use odometer_core::exec::{map_collect, ExecPolicy};
use odometer_core::mixed_radix::{BaseSeq, MixedRadixDigits};
use odometer_core::MeasureSeq;

fn policies() -> Vec<(&'static str, ExecPolicy)> {
    vec![("sequential", ExecPolicy::Sequential), ("parallel", ExecPolicy::with_degree(0))]
}

fn bench_dc1_scan(c: &mut Criterion) {
    let mut g = c.benchmark_group("dc1-scan");
    g.sample_size(10);
    for (name, policy) in policies() {
        let opts = Dc1Options {
            samples: 8,
            seed: 3,
            smallest: 2,
            tol: odometer_core::default_tol(),
            cap: 4096,
        };
        g.bench_with_input(BenchmarkId::from_parameter(name), &policy, |b, &policy| {
            b.iter(|| example_d::dc1_scan(1, 2, &opts, policy).unwrap())
        });
    }
    g.finish();
}

fn bench_window_classes(c: &mut Criterion) {
    let ms = MeasureSeq::example_d();
    let base = BaseSeq::dyadic();
    let mut g = c.benchmark_group("window-classes");
    g.sample_size(10);
    for (name, policy) in policies() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &policy, |b, &policy| {
            b.iter(|| {
                map_collect(policy, (1u64..=2048).collect(), |n| {
                    let t = MixedRadixDigits::neg_digits(&BigUint::from(*n), &base).unwrap();
                    let v: Vec<u32> = (1..=14).map(|i| t.digit(i)).collect();
                    example_d::window_image_masses(&ms, &v)
                })
            })
        });
    }
    g.finish();
}

criterion_group!(benches, bench_dc1_scan, bench_window_classes);
criterion_main!(benches);
