//! Operator identities at random guarded rational points.

use proptest::prelude::*;
use rfactor_core::linop::equal_on;
use rfactor_core::sl2core::{self, RhatOrder, Sl2Factor, Sl2Params};
use rfactor_core::sl3core::{self, Sl3Op, Sl3Params};
use rfactor_core::verify::oracle;
use rfactor_core::verify::{degeneracy_guard, lwv_normalize};
use rfactor_core::{Rat, SparseOp};

fn rat() -> impl Strategy<Value = Rat> {
    (-40i64..=40, 1i64..=12).prop_map(|(p, q)| Rat::new(p, q))
}

fn sl2_pairs(us: &[Rat; 2], vs: &[Rat; 2]) -> Vec<(Rat, Rat)> {
    let ([u1, u2], [v1, v2]) = (us, vs);
    vec![
        (u1 - v2, v1 - v2),
        (u1 - v2, u1 - u2),
        (u1 - u2, v1 - u2),
        (v1 - v2, v1 - u2),
    ]
}

fn sl3_generic(p1: &Sl3Params, p2: &Sl3Params, top: u32) -> bool {
    let (us, vs) = (p1.us(), p2.us());
    let mut ops: Vec<(Sl3Op, [Rat; 4])> = [Sl3Op::R1, Sl3Op::R2, Sl3Op::R3]
        .into_iter()
        .map(|op| (op, sl3core::elementary_args(op, &us, &vs)))
        .collect();
    ops.extend(sl3core::rhat_factors(p1, p2, RhatOrder::First));
    ops.extend(sl3core::rhat_factors(p1, p2, RhatOrder::Second));
    let w = Rat::from_int(top as i64);
    let pairs: Vec<(Rat, Rat)> = ops
        .iter()
        .flat_map(|(op, args)| sl3core::factor_pairs(*op, args))
        .flat_map(|(_, a, b, laurent)| {
            let extra = laurent.then(|| (b.clone(), &a - &w));
            std::iter::once((a, b)).chain(extra)
        })
        .collect();
    degeneracy_guard(&pairs, top).is_ok()
}

fn normalized(op: &SparseOp) -> SparseOp {
    lwv_normalize(op).expect("lowest weight fixed").0
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn sl2_casimir_is_ell_times_ell_minus_one(ell in rat()) {
        let b = sl2core::site_basis("z", 6).unwrap();
        let c = sl2core::sl2_casimir(&sl2core::sl2_generators(&ell, &b, "z").unwrap()).unwrap();
        let want = SparseOp::scalar(&b, &(&ell * &(&ell - Rat::one())));
        prop_assert!(equal_on(&c, &want, 5).unwrap().is_zero());
    }

    #[test]
    fn sl2_elementary_and_rhat_relations(l1 in rat(), l2 in rat(), u in rat(), v in rat()) {
        let (p1, p2) = (Sl2Params::new(l1, u), Sl2Params::new(l2, v));
        let (us, vs) = ([p1.u1(), p1.u2()], [p2.u1(), p2.u2()]);
        prop_assume!(degeneracy_guard(&sl2_pairs(&us, &vs), 10).is_ok());
        let pair = sl2core::pair_basis(5).unwrap();
        for f in [Sl2Factor::R1, Sl2Factor::R2] {
            prop_assert!(sl2core::sl2_elementary_residual(f, &us, &vs, &pair, None).unwrap().is_zero());
        }
        for o in [RhatOrder::First, RhatOrder::Second] {
            prop_assert!(sl2core::sl2_rhat_residual(&p1, &p2, &pair, o, None).unwrap().is_zero());
        }
        prop_assert!(sl2core::sl2_orders_agree(&p1, &p2, &pair, None).unwrap().is_zero());
    }

    #[test]
    fn yang_r_satisfies_ybe(u in rat(), v in rat()) {
        for d in [2, 3] {
            prop_assert!(sl2core::yang_ybe_residual(&u, &v, d).unwrap().first_nonzero().is_none());
        }
    }

    #[test]
    fn sl2_oracle_matches_closed_forms(l1 in rat(), l2 in rat(), u in rat(), v in rat()) {
        let (p1, p2) = (Sl2Params::new(l1, u), Sl2Params::new(l2, v));
        let (us, vs) = ([p1.u1(), p1.u2()], [p2.u1(), p2.u2()]);
        prop_assume!(degeneracy_guard(&sl2_pairs(&us, &vs), 12).is_ok());
        let b = oracle::sl2_oracle_basis(6).unwrap();
        let charges = oracle::sl2_charges(&b).unwrap();
        for f in [Sl2Factor::R1, Sl2Factor::R2] {
            let cons = oracle::sl2_first_order_constraints(f, &us, &vs, &b).unwrap();
            let (x, stats) = oracle::unique_solution(&cons, &charges, 6).unwrap();
            prop_assert_eq!(stats.free, 1);
            let closed = sl2core::sl2_elementary(f, &us, &vs, &b, None).unwrap();
            prop_assert!(equal_on(&normalized(&x), &normalized(&closed), 6).unwrap().is_zero());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, ..ProptestConfig::default() })]

    #[test]
    fn sl3_elementary_relations(
        m1 in rat(), n1 in rat(), m2 in rat(), n2 in rat(), u in rat(), v in rat()
    ) {
        let (p1, p2) = (Sl3Params::new(m1, n1, u), Sl3Params::new(m2, n2, v));
        prop_assume!(sl3_generic(&p1, &p2, 6));
        let pair = sl3core::pair_basis(3).unwrap();
        for op in [Sl3Op::R1, Sl3Op::R2, Sl3Op::R3] {
            prop_assert!(sl3core::elementary_residual(op, &p1.us(), &p2.us(), &pair, None).unwrap().is_zero());
        }
        prop_assert!(sl3core::rmatrix_residual(&p1, &p2, &pair, None).unwrap().is_zero());
    }

    #[test]
    fn sl3_reduced_oracle_matches_closed_form(
        m1 in rat(), n1 in rat(), m2 in rat(), n2 in rat(), u in rat(), v in rat()
    ) {
        let (p1, p2) = (Sl3Params::new(m1, n1, u), Sl3Params::new(m2, n2, v));
        prop_assume!(sl3_generic(&p1, &p2, 8));
        let b = sl3core::site_basis("", 4).unwrap();
        let (us, v3) = (p1.us(), p2.u3());
        let cons = oracle::reduced_r3_constraints(&us, &v3, &b).unwrap();
        let (x, stats) = oracle::unique_solution(&cons, &oracle::reduced_charges(&b).unwrap(), 4).unwrap();
        prop_assert_eq!(stats.free, 1);
        let closed = sl3core::reduced_r3(&us, &v3, &b, None).unwrap();
        prop_assert!(equal_on(&normalized(&x), &normalized(&closed), 4).unwrap().is_zero());
    }

    #[test]
    fn sl3_casimirs_do_not_depend_on_cap(m in rat(), n in rat()) {
        let mut seen = Vec::new();
        for cap in [3, 4] {
            let b = sl3core::site_basis("", cap).unwrap();
            let g = sl3core::sl3_generators(&m, &n, &b, "").unwrap();
            let (c2, c3) = sl3core::sl3_casimirs(&g).unwrap();
            let w = cap as i32 - 2;
            seen.push((
                sl3core::scalar_on_window(&c2, w).unwrap().expect("C2 scalar"),
                sl3core::scalar_on_window(&c3, w).unwrap().expect("C3 scalar"),
            ));
        }
        prop_assert_eq!(&seen[0], &seen[1]);
    }
}

#[test]
fn sl2_rhat_worked_point() {
    let p1 = Sl2Params::new(Rat::new(1, 3), Rat::new(1, 5));
    let p2 = Sl2Params::new(Rat::new(2, 7), Rat::zero());
    let pair = sl2core::pair_basis(8).unwrap();
    for o in [RhatOrder::First, RhatOrder::Second] {
        assert!(sl2core::sl2_rhat_residual(&p1, &p2, &pair, o, None).unwrap().is_zero());
    }
}

#[test]
fn spectral_worked_point() {
    let (one, half) = (Rat::one(), Rat::new(1, 2));
    let pair = sl2core::pair_basis(7).unwrap();
    let rep = sl2core::sl2_spectral_check(&one, &one, &half, 6, &pair).unwrap();
    assert_eq!(rep.mismatch, None);
    assert_eq!(rep.rhos[0], Rat::one());
    assert_eq!(rep.rhos[1], Rat::new(-5, 3));
    for n in 0..=7 {
        assert_eq!(
            rep.rhos[n],
            sl2core::spectral_closed_form(&one, &one, &half, n as u32).unwrap()
        );
    }
}

#[test]
fn sl3_first_operator_worked_point() {
    let q = |s: &str| s.parse::<Rat>().unwrap();
    let p1 = Sl3Params::new(q("1/2"), q("1/3"), q("0"));
    let p2 = Sl3Params::new(q("1/5"), q("1/7"), q("2/3"));
    let pair = sl3core::pair_basis(4).unwrap();
    let z = sl3core::elementary_residual(Sl3Op::R1, &p1.us(), &p2.us(), &pair, None).unwrap();
    assert!(z.is_zero(), "{:?}", z.witness);
}
