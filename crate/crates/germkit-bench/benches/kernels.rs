use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use germkit_core::*;
use num_complex::Complex64;

fn moebius() -> MapSpec {
    moebius_germ(Complex64::new(0.5, 0.0), Complex64::ONE)
}

fn bench_koenigs(c: &mut Criterion) {
    let f = moebius();
    let budget = EvalBudget::default();
    let grid = PolarGrid::log_spaced(1e-5, 0.1, 24, 32).unwrap();

    c.bench_function("koenigs_pointwise", |b| {
        let z = Complex64::new(0.07, 0.03);
        b.iter(|| koenigs_psi_at(black_box(&f), black_box(z), &budget).unwrap())
    });
    c.bench_function("koenigs_grid_24x32", |b| {
        b.iter(|| koenigs_forward(black_box(&f), &grid, &budget).unwrap())
    });
}

fn bench_boettcher(c: &mut Criterion) {
    let g = MapSpec::moebius_power(2, Complex64::ONE).unwrap();
    let budget = EvalBudget::default();
    let grid = PolarGrid::log_spaced(1e-5, 0.1, 16, 32).unwrap();

    c.bench_function("boettcher_product_pointwise", |b| {
        let z = Complex64::new(0.06, 0.02);
        b.iter(|| boettcher_psi_at(black_box(&g), 2, black_box(z), &budget).unwrap())
    });
    c.bench_function("boettcher_grid_16x32", |b| {
        b.iter(|| boettcher_coordinate(black_box(&g), &grid, &budget).unwrap())
    });
    c.bench_function("covering_lift_h", |b| {
        let w = Complex64::new(0.4, 0.3);
        b.iter(|| covering_lift_h(black_box(&g), 2, black_box(w), &budget).unwrap())
    });
}

fn bench_dilatation(c: &mut Criterion) {
    let m = MapSpec::perturbed(
        MapSpec::linear(Complex64::new(0.5, 0.0)),
        Complex64::new(0.1, 0.0),
        1.0,
    )
    .unwrap();
    let grid = PolarGrid::log_spaced(1e-4, 0.5, 40, 32).unwrap();

    c.bench_function("beltrami_field_40x32", |b| {
        b.iter(|| beltrami_field(black_box(&m), &grid, 1e-5).unwrap())
    });
    c.bench_function("omega_curve_40x32", |b| {
        let field = beltrami_field(&m, &grid, 1e-5).unwrap();
        b.iter(|| omega_curve(black_box(&field)).unwrap())
    });
}

fn bench_motion(c: &mut Criterion) {
    let f = moebius();
    let budget = EvalBudget::default();
    let cs: Vec<Complex64> = (1..=4).map(|i| Complex64::new(0.1 * i as f64, 0.0)).collect();
    let ms = build_motion_koenig(&f, 0.01, 0.1, 32, &cs, &budget).unwrap();

    c.bench_function("extend_motion_radial_8_rings", |b| {
        b.iter(|| extend_motion_radial(black_box(&ms), 8).unwrap())
    });
}

criterion_group!(benches, bench_koenigs, bench_boettcher, bench_dilatation, bench_motion);
criterion_main!(benches);
