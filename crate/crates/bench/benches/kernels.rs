use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use frontlab::cell::principal_eigen;
use frontlab::fronts::shooting_speed;
use frontlab::presets::{base_profile, periodic_diffusion};
use frontlab_bench::{medium, stepping};

fn step(c: &mut Criterion) {
    let m = medium();
    let (mut ev, mut state) = stepping(&m, 4096);
    c.bench_function("step_1d_4096", |b| {
        b.iter(|| ev.step(black_box(&mut state)).unwrap())
    });
}

fn eigen(c: &mut Criterion) {
    let m = periodic_diffusion().unwrap();
    c.bench_function("principal_eigen", |b| {
        b.iter(|| principal_eigen(black_box(&m.coeffs), 1.0, 1).unwrap())
    });
}

fn shooting(c: &mut Criterion) {
    let f = base_profile();
    c.bench_function("shooting_speed", |b| {
        b.iter(|| shooting_speed(black_box(&f), 1e-8).unwrap())
    });
}

criterion_group!(benches, step, eigen, shooting);
criterion_main!(benches);
