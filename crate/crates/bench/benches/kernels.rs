use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use gwp_core::cwt::{forward_cwt, log_spaced_scales, scale_range_for_grid, uniform_angles};
use gwp_core::special::bessel_k;
use gwp_core::verify::{round_trip_image, smallest_scale};
use gwp_core::PacketParams;
use num_complex::Complex64;

fn bessel(c: &mut Criterion) {
    let mut g = c.benchmark_group("bessel_k");
    for (name, z) in [
        ("small", Complex64::new(0.3, 0.2)),
        ("mid", Complex64::new(4.0, -3.0)),
        ("large", Complex64::new(60.0, 25.0)),
    ] {
        g.bench_function(name, |b| {
            b.iter(|| bessel_k(black_box(0.5), black_box(z)).unwrap())
        });
    }
    g.bench_function("order_2.5", |b| {
        b.iter(|| bessel_k(black_box(2.5), black_box(Complex64::new(3.0, 1.0))).unwrap())
    });
    g.finish();
}

fn packet(c: &mut Criterion) {
    let pp = PacketParams::new(0.5, 0.5, 0.25, vec![1.0], 1.0).unwrap();
    c.bench_function("evaluate_2d", |b| {
        b.iter(|| pp.evaluate(black_box(&[0.7, -0.4]), black_box(0.3)))
    });
}

fn transform(c: &mut Criterion) {
    let pp = PacketParams::new(32.0, 0.5, 1.0, vec![0.5], 1.0).unwrap();
    let f = round_trip_image().unwrap();
    let (_, hi) = scale_range_for_grid(&pp, &f.grid).unwrap();
    let scales = log_spaced_scales(smallest_scale(&pp, &f.grid), hi, 8);
    let angles = uniform_angles(8);
    let mut g = c.benchmark_group("forward_cwt");
    g.sample_size(10);
    g.bench_function("256x256_8x8", |b| {
        b.iter(|| forward_cwt(&f, &scales, &angles, &pp, 0.0).unwrap())
    });
    g.finish();
}

criterion_group!(benches, bessel, packet, transform);
criterion_main!(benches);
