use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use quintlab_bench::{field, many_body};
use quintlab_core::combinatorics::{mark_expansion, min_unclogged, CollapseMap, Sign, SignedExpansion};
use quintlab_core::fft;
use quintlab_core::nls::{NlsConfig, StrangStepper};
use std::hint::black_box;

fn transforms(c: &mut Criterion) {
    let mut group = c.benchmark_group("fft3");
    for n in [16, 32, 64] {
        let f = field(3, n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            let mut v = f.values().to_vec();
            b.iter(|| {
                fft::forward(&mut v, n, 3);
                fft::inverse(&mut v, n, 3);
            })
        });
    }
    group.finish();
}

fn strang(c: &mut Criterion) {
    let mut group = c.benchmark_group("strang_step3");
    for n in [16, 32] {
        let f = field(3, n);
        let stepper = StrangStepper::new(NlsConfig::new(f.grid(), 1.0, 1e-3, false).unwrap());
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            let mut v = f.values().to_vec();
            b.iter(|| stepper.step_in_place(black_box(&mut v)))
        });
    }
    group.finish();
}

fn hamiltonian(c: &mut Criterion) {
    let mut group = c.benchmark_group("hamiltonian_apply");
    for (n, np) in [(16, 3), (8, 5)] {
        let (system, psi) = many_body(n, np);
        group.bench_function(format!("n{n}_N{np}"), |b| {
            let mut out = vec![Default::default(); psi.amplitudes.len()];
            b.iter(|| system.apply_raw(black_box(&psi.amplitudes), &mut out))
        });
    }
    group.finish();
}

fn marking(c: &mut Criterion) {
    let k = 7;
    let expansions: Vec<SignedExpansion> = (0..64u128)
        .map(|i| {
            let signs = (0..k).map(|j| if (i >> j) & 1 == 1 { Sign::Minus } else { Sign::Plus }).collect();
            SignedExpansion::new(CollapseMap::nth(k, i * 2000), signs).unwrap()
        })
        .collect();
    c.bench_function("mark_expansion_k7", |b| {
        b.iter(|| expansions.iter().map(|e| mark_expansion(black_box(e)).nodes.len()).sum::<usize>())
    });
    c.bench_function("min_unclogged_k5", |b| b.iter(|| min_unclogged(black_box(5)).unwrap()));
}

criterion_group!(benches, transforms, strang, hamiltonian, marking);
criterion_main!(benches);
