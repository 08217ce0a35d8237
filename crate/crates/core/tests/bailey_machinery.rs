//! Bailey matrices, conjugated move matrices, pair-preserving moves and the
//! full move schedule.

use doublepole::bailey::{
    alpha_closed_form, apply_move_f, apply_move_fw, apply_move_s, apply_move_u, bailey_l,
    bailey_l_inverse, beta_agreement_orders, check_pair, conjugate_check, pipeline, seed_b3,
    tilde_matrix, BaileyPair, MoveMatrix, Tilde,
};
use doublepole::nahm::{Parity, WMode};
use doublepole::series::{AuxSymbol, Ctx, QSeries};
use proptest::prelude::*;

const W_MODES: [WMode; 3] = [WMode::Zero, WMode::One, WMode::Formal];

#[test]
fn l_times_inverse_is_identity() {
    for g in 1..=2u32 {
        let ctx = Ctx::new(g, 30, AuxSymbol::None);
        for e in 1..=2u64 {
            for n in [0usize, 1, 5, 15] {
                let l = bailey_l(e, n, ctx);
                let li = bailey_l_inverse(e, n, ctx).unwrap();
                let id = MoveMatrix::identity(n, ctx);
                assert_eq!(
                    l.mul(&li).unwrap().first_mismatch(&id).unwrap(),
                    None,
                    "g={g} e={e} n={n}"
                );
                assert_eq!(
                    li.mul(&l).unwrap().first_mismatch(&id).unwrap(),
                    None,
                    "g={g} e={e} n={n}"
                );
            }
        }
    }
}

#[test]
fn inverse_needs_nonzero_base() {
    assert!(bailey_l_inverse(0, 3, Ctx::plain(10)).is_err());
}

#[test]
fn conjugated_moves_match_closed_forms() {
    let ctx = Ctx::plain(30);
    for which in Tilde::ALL {
        for e in 1..=2 {
            let report = conjugate_check(which, e, 12, ctx).unwrap();
            assert!(
                report.passed(),
                "{} e={e}: {:?}",
                which.name(),
                report.first_mismatch
            );
        }
    }
}

fn assert_pair(p: &BaileyPair, ctx: Ctx, label: &str) {
    let report = check_pair(p, ctx).unwrap();
    assert!(report.passed(), "{label}: {:?}", report.first_failure);
}

fn moves(p: &BaileyPair, ctx: Ctx) {
    assert_pair(p, ctx, "input");
    assert_pair(&apply_move_f(p, ctx).unwrap(), ctx, "F");
    assert_pair(&apply_move_u(p, ctx).unwrap(), ctx, "U");
    assert_pair(&apply_move_s(p, ctx).unwrap(), ctx, "S");
    for w in W_MODES {
        let wctx = w.ctx(ctx.order);
        assert_pair(
            &apply_move_fw(p, w, wctx).unwrap(),
            wctx,
            &format!("Fw w={w}"),
        );
    }
}

#[test]
fn moves_preserve_the_seed_pair() {
    let ctx = Ctx::plain(30);
    moves(&seed_b3(8, ctx), ctx);
}

#[test]
fn move_u_and_s_are_conjugated_shifts() {
    let ctx = Ctx::plain(30);
    let p = seed_b3(9, ctx);
    for (which, moved) in [
        (Tilde::U, apply_move_u(&p, ctx).unwrap()),
        (Tilde::S, apply_move_s(&p, ctx).unwrap()),
    ] {
        let tilde = tilde_matrix(which, 1, p.n_max(), ctx).unwrap();
        let expected = tilde.apply(&p.alpha).unwrap();
        for (n, a) in moved.alpha.iter().enumerate() {
            assert_eq!(
                a.first_mismatch(&expected[n]).unwrap(),
                None,
                "{} n={n}",
                which.name()
            );
        }
    }
}

fn random_pair(rows: Vec<Vec<i64>>, ctx: Ctx) -> BaileyPair {
    let alpha = rows.iter().map(|c| QSeries::from_ints(ctx, c)).collect();
    BaileyPair::from_alpha(1, alpha, ctx).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn moves_preserve_random_pairs(rows in prop::collection::vec(prop::collection::vec(-3i64..=3, 0..6), 6)) {
        let ctx = Ctx::plain(20);
        moves(&random_pair(rows, ctx), ctx);
    }
}

#[test]
fn pipeline_alpha_has_closed_form() {
    for parity in [Parity::Even, Parity::Odd] {
        let k_min = if parity == Parity::Even { 1 } else { 2 };
        for k in k_min..=3 {
            for i in 0..=k {
                for w in W_MODES {
                    let ctx = w.ctx(25);
                    let pair = pipeline(k, i, parity, w, 8, ctx).unwrap();
                    assert_pair(&pair, ctx, &format!("{parity:?} k={k} i={i} w={w}"));
                    for (n, a) in pair.alpha.iter().enumerate() {
                        let closed = alpha_closed_form(k, i, parity, n as u64, w, ctx).unwrap();
                        assert_eq!(
                            a.first_mismatch(&closed).unwrap(),
                            None,
                            "{parity:?} k={k} i={i} w={w} n={n}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn beta_converges_to_the_double_pole_sum() {
    let order = 25;
    for parity in [Parity::Even, Parity::Odd] {
        let k_min = if parity == Parity::Even { 1 } else { 2 };
        for k in k_min..=3 {
            for i in 0..=k {
                for w in W_MODES {
                    let got = beta_agreement_orders(k, i, parity, w, 8, w.ctx(order)).unwrap();
                    for (n, &a) in got.iter().enumerate() {
                        assert!(
                            a >= order.min(n + 1),
                            "{parity:?} k={k} i={i} w={w} n={n}: {a}"
                        );
                    }
                    assert!(
                        got.windows(2).all(|p| p[0] <= p[1]),
                        "{parity:?} k={k} i={i} w={w}: {got:?}"
                    );
                }
            }
        }
    }
}
