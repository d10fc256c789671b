use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use moore_bench::{dvr_input, ramp};
use moore_core::moduli::canonicalize_dvr;
use moore_core::noncomm::{check_square_zero, mstar_even};
use moore_core::selftest::universal_even_series;
use moore_core::CoeffRing;

fn series(c: &mut Criterion) {
    let q = CoeffRing::rationals();
    let f7 = CoeffRing::prime_field(7).unwrap();
    let mut g = c.benchmark_group("compose");
    for n in [8, 16, 32] {
        let (a, b) = (ramp(&f7, n), ramp(&f7, n));
        g.bench_with_input(BenchmarkId::new("F7", n), &n, |bch, _| {
            bch.iter(|| black_box(&a).compose(black_box(&b)))
        });
        let (a, b) = (ramp(&q, n), ramp(&q, n));
        g.bench_with_input(BenchmarkId::new("Q", n), &n, |bch, _| {
            bch.iter(|| black_box(&a).compose(black_box(&b)))
        });
    }
    g.finish();

    let mut g = c.benchmark_group("reversion");
    // Coefficients of the reversion of the ramp grow fast over ℚ.
    for n in [8, 16, 24] {
        let f = ramp(&q, n);
        g.bench_with_input(BenchmarkId::new("Q", n), &n, |bch, _| {
            bch.iter(|| black_box(&f).reversion())
        });
    }
    g.finish();
}

fn square_zero(c: &mut Criterion) {
    let mut g = c.benchmark_group("square_zero_universal_even");
    for len in [6, 8, 10] {
        let u = universal_even_series(8, len).unwrap();
        let xi = mstar_even(&u, 0, len).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(len), &len, |bch, _| {
            bch.iter(|| check_square_zero(black_box(&xi)))
        });
    }
    g.finish();
}

fn dvr(c: &mut Criterion) {
    let mut g = c.benchmark_group("canonicalize_dvr");
    for (k, n) in [(6, 10), (6, 21), (10, 33)] {
        let u = dvr_input(k, n);
        g.bench_with_input(BenchmarkId::new(format!("K{k}"), n), &n, |bch, _| {
            bch.iter(|| canonicalize_dvr(black_box(&u)))
        });
    }
    g.finish();
}

criterion_group!(benches, series, square_zero, dvr);
criterion_main!(benches);
