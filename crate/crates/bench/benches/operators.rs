use criterion::{criterion_group, criterion_main, Criterion};
use rfactor_core::sl2core::{self, RhatOrder, Sl2Params};
use rfactor_core::sl3core::{self, Sl3Op, Sl3Params};
use rfactor_core::verify::oracle;
use rfactor_core::Rat;
use std::hint::black_box;

fn sl2(c: &mut Criterion) {
    let pair = sl2core::pair_basis(8).unwrap();
    let p1 = Sl2Params::new(Rat::new(1, 3), Rat::new(1, 5));
    let p2 = Sl2Params::new(Rat::new(2, 7), Rat::zero());
    c.bench_function("sl2 rhat cap 8", |b| {
        b.iter(|| sl2core::sl2_rhat(black_box(&p1), &p2, &pair, RhatOrder::First, None).unwrap())
    });
    c.bench_function("sl2 rhat relation cap 8", |b| {
        b.iter(|| sl2core::sl2_rhat_residual(black_box(&p1), &p2, &pair, RhatOrder::First, None).unwrap())
    });
}

fn sl3(c: &mut Criterion) {
    let pair = sl3core::pair_basis(3).unwrap();
    let p1 = Sl3Params::new(Rat::new(1, 3), Rat::new(-2, 5), Rat::new(3, 7));
    let p2 = Sl3Params::new(Rat::new(2, 9), Rat::new(5, 4), Rat::new(-1, 6));
    let (us, vs) = (p1.us(), p2.us());
    c.bench_function("sl3 R3 cap 3", |b| {
        let args = sl3core::elementary_args(Sl3Op::R3, &us, &vs);
        b.iter(|| sl3core::sl3_rop(Sl3Op::R3, black_box(&args), &pair, None).unwrap())
    });
    c.bench_function("sl3 rhat cap 3", |b| {
        b.iter(|| sl3core::sl3_rhat(black_box(&p1), &p2, &pair, RhatOrder::First, None).unwrap())
    });
}

fn oracle_solve(c: &mut Criterion) {
    let basis = oracle::sl3_oracle_basis(3).unwrap();
    let charges = oracle::sl3_charges(&basis).unwrap();
    let us = [Rat::new(1, 3), Rat::new(-2, 5), Rat::new(3, 7)];
    let vs = [Rat::new(2, 9), Rat::new(5, 4), Rat::new(-1, 6)];
    let cons = oracle::sl3_first_order_constraints(Sl3Op::R2, &us, &vs, &basis).unwrap();
    let mut g = c.benchmark_group("oracle");
    g.sample_size(10);
    g.bench_function("sl3 R2 height 3", |b| {
        b.iter(|| oracle::unique_solution(black_box(&cons), &charges, 3).unwrap())
    });
    g.finish();
}

criterion_group!(benches, sl2, sl3, oracle_solve);
criterion_main!(benches);
