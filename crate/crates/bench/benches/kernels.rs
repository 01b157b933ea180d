use criterion::{criterion_group, criterion_main, Criterion};
use noma_core::specfun::{avg_ber_i, avg_ber_j, gauss_2f1, q_func};
use noma_core::{ber_pair_avg, FadingProfile, LinkConfig, SignVariant};
use std::hint::black_box;

fn specfun(c: &mut Criterion) {
    let mut g = c.benchmark_group("specfun");
    g.bench_function("q_func", |b| b.iter(|| q_func(black_box(2.3)).unwrap()));
    g.bench_function("gauss_2f1/z=0.5", |b| {
        b.iter(|| gauss_2f1(black_box(1.0), 2.5, 3.0, black_box(0.5)).unwrap())
    });
    g.bench_function("gauss_2f1/z=0.99", |b| {
        b.iter(|| gauss_2f1(black_box(1.0), 2.5, 3.0, black_box(0.99)).unwrap())
    });
    g.bench_function("avg_ber_i/c=10,m=3", |b| b.iter(|| avg_ber_i(black_box(10.0), 3.0).unwrap()));
    g.bench_function("avg_ber_j/c=10,m=1.5", |b| b.iter(|| avg_ber_j(black_box(10.0), 1.5).unwrap()));
    g.finish();
}

fn analytic(c: &mut Criterion) {
    let cfg = |m: f64| {
        let p = FadingProfile::new(m, 1.0).unwrap();
        LinkConfig::from_snr_db(0.3, 20.0, p, p).unwrap()
    };
    let mut g = c.benchmark_group("analytic");
    for m in [1.0, 1.5] {
        let cfg = cfg(m);
        g.bench_function(format!("ber_pair_avg/m={m}"), |b| {
            b.iter(|| ber_pair_avg(black_box(&cfg), SignVariant::DerivedPlus).unwrap())
        });
    }
    g.bench_function("fig1a_curve/16_points", |b| {
        b.iter(|| {
            (0..=15)
                .map(|k| {
                    let p = FadingProfile::new(2.0, 1.0).unwrap();
                    let cfg = LinkConfig::from_snr_db(0.3, f64::from(2 * k), p, p).unwrap();
                    ber_pair_avg(&cfg, SignVariant::DerivedPlus).unwrap().near
                })
                .sum::<f64>()
        })
    });
    g.finish();
}

criterion_group!(benches, specfun, analytic);
criterion_main!(benches);
