use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nlslab_core::nls::{Gaussian, LabStepper, Model};
use nlslab_core::spectral::{fft_forward, fft_inverse};
use nlslab_core::transport::w1_sliced;
use nlslab_core::{Density, Grid};

fn pools() -> Vec<(String, rayon::ThreadPool)> {
    let mut out = vec![(
        "1-thread".to_string(),
        rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap(),
    )];
    let n = rayon::current_num_threads();
    if n > 1 {
        out.push((format!("{n}-threads"), rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap()));
    }
    out
}

fn fft(c: &mut Criterion) {
    let mut group = c.benchmark_group("fft2d");
    for n in [256usize, 512] {
        let grid = Grid::new(2, n, 16.0).unwrap();
        let mut data = Gaussian::unit().sample(grid).values;
        for (label, pool) in pools() {
            group.bench_with_input(BenchmarkId::new(label, n), &n, |b, _| {
                pool.install(|| {
                    b.iter(|| {
                        fft_forward(&grid, &mut data);
                        fft_inverse(&grid, &mut data);
                    })
                })
            });
        }
    }
    group.finish();
}

fn strang(c: &mut Criterion) {
    let mut group = c.benchmark_group("strang_step");
    for (dim, n) in [(1usize, 4096usize), (2, 256)] {
        let grid = Grid::new(dim, n, 16.0).unwrap();
        let stepper = LabStepper::new(grid, Model::Log, 1e-3, 1e-300);
        let mut u = Gaussian::unit().sample(grid);
        for (label, pool) in pools() {
            group.bench_with_input(BenchmarkId::new(label, format!("{dim}d-{n}")), &n, |b, _| {
                pool.install(|| b.iter(|| stepper.step(&mut u).unwrap()))
            });
        }
    }
    group.finish();
}

fn sliced(c: &mut Criterion) {
    let mut group = c.benchmark_group("w1_sliced");
    group.sample_size(20);
    let grid = Grid::new(2, 128, 8.0).unwrap();
    let p = Density::from_fn(grid, |x| (-(x[0] * x[0] + x[1] * x[1])).exp()).unwrap().normalized().unwrap();
    let q = Density::from_fn(grid, |x| (-((x[0] - 1.0).powi(2) + 2.0 * x[1] * x[1])).exp())
        .unwrap()
        .normalized()
        .unwrap();
    for (label, pool) in pools() {
        group.bench_function(BenchmarkId::new(label, 64), |b| {
            pool.install(|| b.iter(|| w1_sliced(&p, &q, 64, 7).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, fft, strang, sliced);
criterion_main!(benches);
