use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use prodnorm_core::games::{acceptance_probability, chsh_spec, magic_square_quantum_strategy, magic_square_spec, map_lb};
use prodnorm_core::linalg::{random_matrix, svd};
use prodnorm_core::norms::{product_norm_lb, trace_norm};
use prodnorm_core::sop::{diamond_lb, sop_product_norm_lb, transpose_sop};
use prodnorm_core::{Bipartition, SeesawOptions};

fn linalg(c: &mut Criterion) {
    let a = random_matrix(64, 64, 1);
    c.bench_function("svd 64x64", |b| b.iter(|| svd(black_box(&a)).unwrap()));
    c.bench_function("trace norm 64x64", |b| b.iter(|| trace_norm(black_box(&a)).unwrap()));
}

fn product_norms(c: &mut Criterion) {
    let opts = SeesawOptions { restarts: 4, ..SeesawOptions::default() };
    let mut g = c.benchmark_group("product norm lb");
    g.sample_size(20);
    for (d1, d2) in [(2, 2), (3, 3), (4, 4)] {
        let p = Bipartition::new(d1, d2).unwrap();
        let a = random_matrix(p.dim(), p.dim(), 7);
        g.bench_function(format!("{d1}x{d2}"), |b| b.iter(|| product_norm_lb(black_box(&a), p, &opts).unwrap()));
    }
    g.finish();
}

fn superoperators(c: &mut Criterion) {
    let opts = SeesawOptions { restarts: 4, ..SeesawOptions::default() };
    let t = transpose_sop(4, Bipartition::new(2, 2).unwrap()).unwrap();
    let mut g = c.benchmark_group("transpose on C^4");
    g.sample_size(10);
    g.bench_function("product norm", |b| b.iter(|| sop_product_norm_lb(black_box(&t), &opts).unwrap()));
    g.bench_function("diamond", |b| b.iter(|| diamond_lb(black_box(&t), &opts).unwrap()));
    g.finish();
}

fn games(c: &mut Criterion) {
    let opts = SeesawOptions { restarts: 4, ..SeesawOptions::default() };
    let chsh = chsh_spec();
    let ms = magic_square_spec().unwrap();
    let fixture = magic_square_quantum_strategy();
    let mut g = c.benchmark_group("games");
    g.sample_size(10);
    g.bench_function("chsh map lb dP=2", |b| b.iter(|| map_lb(black_box(&chsh), 2, 2, &opts).unwrap()));
    g.bench_function("magic square fixture", |b| {
        b.iter(|| acceptance_probability(black_box(&ms), black_box(&fixture)).unwrap())
    });
    g.finish();
}

criterion_group!(benches, linalg, product_norms, superoperators, games);
criterion_main!(benches);
