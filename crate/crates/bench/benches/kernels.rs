use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use dmwf_core::danse::{DanseState, FusedRule, UpdateOrder};
use dmwf_core::dmwf::{solve_oracle, DmwfOptions, Solver};
use dmwf_core::numerics::{c64, gevd, hermitian_solve, CMatrix, CVector, HermitianMatrix};
use dmwf_core::scenario::{generate_scenario, oracle_scms, Scenario};
use dmwf_core::wola::Wola;
use dmwf_core::{ScenarioMode, ScenarioParams, ScmTracker};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_spd(n: usize, seed: u64) -> HermitianMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = CMatrix::from_fn(n, 2 * n, |_, _| c64(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    HermitianMatrix::from_matrix(&a * a.adjoint()).unwrap()
}

fn network(mode: ScenarioMode) -> Scenario {
    generate_scenario(&ScenarioParams::uniform(6, 5, 2, 2, mode, 0)).unwrap()
}

fn linear_algebra(c: &mut Criterion) {
    let a = random_spd(30, 1);
    let b = random_spd(30, 2);
    let rhs = CMatrix::identity(30, 1);
    c.bench_function("hermitian_solve_30", |bch| bch.iter(|| hermitian_solve(black_box(&a), black_box(&rhs)).unwrap()));
    c.bench_function("gevd_30", |bch| bch.iter(|| gevd(black_box(&a), black_box(&b)).unwrap()));
}

fn estimators(c: &mut Criterion) {
    let s = network(ScenarioMode::Pos);
    let layout = s.layout();
    let scms = oracle_scms(&s);
    c.bench_function("dmwf_solve_oracle_k6", |bch| {
        bch.iter(|| solve_oracle(&s.obs, black_box(&scms), &layout, 1, DmwfOptions::default()).unwrap())
    });
    let fods = network(ScenarioMode::Fods);
    let fods_scms = oracle_scms(&fods);
    let fods_layout = fods.layout();
    c.bench_function("danse_iteration_k6", |bch| {
        bch.iter_batched(
            || DanseState::new(&fods.obs, &fods_layout, 1, FusedRule::Qd, UpdateOrder::Sequential).unwrap(),
            |mut st| st.iterate(&fods_scms, Solver::Mwf).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn streaming(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let y = CVector::from_fn(30, |_, _| c64(rng.random::<f64>(), rng.random::<f64>()));
    let mut tr = ScmTracker::new(30, 0.967).unwrap();
    let mut vad = false;
    c.bench_function("scm_update_30", |bch| {
        bch.iter(|| {
            vad = !vad;
            tr.update(black_box(&y), vad).unwrap()
        })
    });
    let wola = Wola::new(Default::default()).unwrap();
    let x: Vec<f64> = (0..16_000).map(|_| rng.random::<f64>() - 0.5).collect();
    c.bench_function("wola_round_trip_1s", |bch| {
        bch.iter(|| wola.synthesize(&wola.analyze(black_box(&x)).unwrap()).unwrap())
    });
}

criterion_group!(benches, linear_algebra, estimators, streaming);
criterion_main!(benches);
