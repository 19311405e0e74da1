use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use bellactiv_core::bell::QState;
use bellactiv_core::extend::{certify_extension, random_extendible_state, tensor_extension, Side};
use bellactiv_core::qmat::{ginibre, herm_eig, partial_trace, random_density, tensor};
use bellactiv_core::seesaw::povm::update_povms;
use bellactiv_core::seesaw::{
    measurements_only_search, multi_restart_search, Scenario, SearchConfig,
};
use bellactiv_core::{CMat, DimsSpec};

fn hermitian(d: usize, rng: &mut ChaCha8Rng) -> CMat {
    ginibre(d, d, rng).hermitian_part()
}

fn linalg(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let h16 = hermitian(16, &mut rng);
    let h64 = hermitian(64, &mut rng);
    c.bench_function("herm_eig 16", |b| b.iter(|| herm_eig(&h16).unwrap()));
    c.bench_function("herm_eig 64", |b| b.iter(|| herm_eig(&h64).unwrap()));

    let a = ginibre(16, 16, &mut rng);
    let bm = ginibre(16, 16, &mut rng);
    c.bench_function("tensor 16x16", |b| b.iter(|| tensor(&a, &bm)));

    let big = ginibre(256, 256, &mut rng);
    let dims = [4usize, 4, 4, 4];
    c.bench_function("partial_trace 256 -> 16", |b| {
        b.iter(|| partial_trace(&big, &dims, &[0, 2]).unwrap())
    });

    let m64 = ginibre(64, 64, &mut rng);
    c.bench_function("matmul 64", |b| b.iter(|| m64.matmul(&m64)));
}

fn extension(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let dims = DimsSpec::bipartite(2, 2);
    let (_, w) = random_extendible_state(&dims, Side::B, &mut rng).unwrap();
    c.bench_function("certify_extension d=2", |b| b.iter(|| certify_extension(&w)));
    c.bench_function("tensor_extension d=2 x2", |b| {
        b.iter(|| tensor_extension(&w, &w).unwrap())
    });
}

fn seesaw(c: &mut Criterion) {
    let mut group = c.benchmark_group("seesaw");
    group.sample_size(10);

    let mut config = SearchConfig::new(Scenario::ChshAsymmetric, 2);
    config.restarts = 1;
    config.max_cycles = 5;
    group.bench_function("chsh-asym d=2, 5 cycles", |b| {
        b.iter(|| multi_restart_search(&config).unwrap())
    });

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rho = QState::new(random_density(4, 2, &mut rng), DimsSpec::bipartite(2, 2)).unwrap();
    group.bench_function("measurements-only restart", |b| {
        b.iter(|| measurements_only_search(&rho, 1, 7).unwrap())
    });

    let rewards: Vec<CMat> = (0..3).map(|_| hermitian(4, &mut rng)).collect();
    group.bench_function("povm update d=4 k=3", |b| {
        b.iter(|| update_povms(&rewards, None).unwrap())
    });
    group.finish();
}

criterion_group!(benches, linalg, extension, seesaw);
criterion_main!(benches);
