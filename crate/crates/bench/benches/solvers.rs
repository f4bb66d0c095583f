use criterion::{black_box, criterion_group, criterion_main, Criterion};

use ctlab_core::generate::{gen_attribute_instance, GenParams};
use ctlab_core::solver::{psi_a_exact, psi_d_exact};
use ctlab_core::tree::canonical_tree;
use ctlab_core::typelab::hasse_diagram;
use ctlab_core::zoo::{build_pi, pool_expressions, witness_problem, TruncationParams, WitnessKind};

fn bench_exact_solvers(c: &mut Criterion) {
    let params = GenParams::default();
    let instances: Vec<_> = (0..8u64)
        .map(|seed| gen_attribute_instance(seed, &params))
        .collect();
    c.bench_function("psi_d_exact/random", |b| {
        b.iter(|| {
            for (u, z, pool, psi) in &instances {
                black_box(psi_d_exact(u, z, pool, psi).unwrap().0);
            }
        })
    });
    c.bench_function("psi_a_exact/random", |b| {
        b.iter(|| {
            for (u, z, pool, psi) in &instances {
                black_box(psi_a_exact(u, z, pool, psi).unwrap().0);
            }
        })
    });
}

fn bench_threshold_search(c: &mut Criterion) {
    let t = 8;
    let trunc = TruncationParams::new(t, 0, t as i64 + 1).unwrap();
    let (u, psi) = build_pi(3, &trunc).unwrap();
    let z = witness_problem(&u, WitnessKind::Zbin3 { q: t }, None).unwrap();
    let exprs = pool_expressions(&u, &z.input_vars);
    let pool = ctlab_core::solver::AttributePool::build(&u, &z.input_vars, &exprs, &psi).unwrap();
    c.bench_function("psi_d_exact/thresholds_t8", |b| {
        b.iter(|| black_box(psi_d_exact(&u, &z, &pool, &psi).unwrap().0))
    });
}

fn bench_canonical_tree(c: &mut Criterion) {
    let params = GenParams {
        max_functions: 2,
        ..GenParams::default()
    };
    let mut rng = ctlab_core::generate::rng(7);
    let u = ctlab_core::generate::gen_structure(&mut rng, &params);
    let z = ctlab_core::generate::gen_problem(&mut rng, &u, &params);
    c.bench_function("canonical_tree", |b| {
        b.iter(|| black_box(canonical_tree(&z).unwrap()))
    });
}

fn bench_hasse(c: &mut Criterion) {
    c.bench_function("hasse_diagram", |b| b.iter(|| black_box(hasse_diagram())));
}

criterion_group!(
    benches,
    bench_exact_solvers,
    bench_threshold_search,
    bench_canonical_tree,
    bench_hasse
);
criterion_main!(benches);
