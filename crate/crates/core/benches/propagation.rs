use std::hint::black_box;

use cartoon_scatter::cartoon::{sample_cartoon, CartoonSpec, DomainB, SmoothPart};
use cartoon_scatter::frames::{make_wavelet_bank, normalize_bank, WaveletMother};
use cartoon_scatter::harness::{run_experiment, ExperimentConfig};
use cartoon_scatter::network::{extract_features, Module, ModuleSequence, Nonlinearity};
use cartoon_scatter::{Execution, Grid};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn wavelet_sequence(grid: &Grid, depth: usize) -> ModuleSequence {
    let bank = make_wavelet_bank(grid, 3, WaveletMother::Morlet).unwrap();
    let bank = normalize_bank(&bank, 1.0).bank;
    let modules = (0..=depth)
        .map(|_| Module::new(bank.clone(), Nonlinearity::Modulus, 1).unwrap())
        .collect();
    ModuleSequence::new(modules, depth).unwrap()
}

fn extraction(c: &mut Criterion) {
    let mut group = c.benchmark_group("extract_features");
    group.sample_size(10);
    for n in [64usize, 128] {
        let grid = Grid::square(n, 8.0 / n as f64).unwrap();
        let spec = CartoonSpec::new(
            SmoothPart::gaussian(0.5, &[0.2, 0.0], 0.5),
            SmoothPart::Constant { value: 1.0 },
            DomainB::disc(&[0.0, 0.0], 1.0),
        );
        let f = sample_cartoon(&spec, &grid).unwrap();
        let seq = wavelet_sequence(&grid, 2);
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &f, |b, f| {
                b.iter(|| extract_features(&seq, black_box(f), exec).unwrap())
            });
        }
    }
    group.finish();
}

fn ladder(c: &mut Criterion) {
    let mut group = c.benchmark_group("smooth_ladder");
    group.sample_size(10);
    let cfg = ExperimentConfig::default_smooth();
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| run_experiment(black_box(&cfg), exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, extraction, ladder);
criterion_main!(benches);
