//! Euler, q-binomial, Heine, Jackson, the triple product, Rogers' false theta
//! function and Andrews' lemmas, each checked as an identity between
//! independently built truncated series.

use doublepole::series::{
    andrews_zeta_rhs, false_theta_psi, jacobi_triple_product, poch_finite, poch_infinite,
    poch_infinite_inverse, poch_q_finite, sgn_star, zeta_coefficient, AndrewsLemma, AuxSymbol, Ctx,
    MonomialSpec, QSeries,
};

fn q(e: u64) -> MonomialSpec {
    MonomialSpec::q_power(e)
}

fn mono(c: i64, e: u64) -> MonomialSpec {
    MonomialSpec::new(c, e, 0)
}

/// `sum_{n < order} term(n)`; the terms used here all carry `q^n` or more.
fn series_sum(ctx: Ctx, term: impl Fn(u64) -> QSeries) -> QSeries {
    let mut out = QSeries::zero(ctx);
    for n in 0..ctx.order as u64 {
        out = out.try_add(&term(n)).unwrap();
    }
    out
}

fn inv(s: QSeries) -> QSeries {
    s.invert_unit().unwrap()
}

fn pow(z: &MonomialSpec, n: u64, ctx: Ctx) -> QSeries {
    z.pow(n).to_series(ctx).unwrap()
}

#[test]
fn euler_first() {
    let plain = Ctx::plain(30);
    let formal = Ctx::new(1, 30, AuxSymbol::W);
    for (z, ctx) in [
        (q(1), plain),
        (q(2), plain),
        (mono(-1, 1), plain),
        (MonomialSpec::new(1, 1, 1), formal),
    ] {
        let lhs = series_sum(ctx, |n| {
            pow(&z, n, ctx)
                .try_mul(&inv(poch_q_finite(n, ctx)))
                .unwrap()
        });
        let rhs = poch_infinite_inverse(&z, ctx).unwrap();
        assert_eq!(lhs.first_mismatch(&rhs).unwrap(), None, "z = {z:?}");
    }
}

#[test]
fn euler_second() {
    let plain = Ctx::plain(30);
    let formal = Ctx::new(1, 30, AuxSymbol::W);
    for (z, ctx) in [
        (q(1), plain),
        (q(2), plain),
        (mono(-1, 1), plain),
        (MonomialSpec::new(1, 1, 1), formal),
    ] {
        let lhs = series_sum(ctx, |n| {
            let sign = if n % 2 == 0 { 1 } else { -1 };
            pow(&z, n, ctx)
                .shift((n * n.saturating_sub(1) / 2) as usize)
                .scale_i64(sign)
                .try_mul(&inv(poch_q_finite(n, ctx)))
                .unwrap()
        });
        let rhs = poch_infinite(&z, ctx).unwrap();
        assert_eq!(lhs.first_mismatch(&rhs).unwrap(), None, "z = {z:?}");
    }
}

#[test]
fn q_binomial_theorem() {
    let ctx = Ctx::plain(30);
    let formal = Ctx::new(1, 30, AuxSymbol::W);
    let samples = [
        (q(1), q(1), ctx),
        (mono(-1, 2), q(1), ctx),
        (q(3), q(2), ctx),
        (mono(2, 0), q(1), ctx),
        (MonomialSpec::new(1, 0, 1), q(1), formal),
        (mono(-1, 0), q(2), ctx),
    ];
    for (a, z, ctx) in samples {
        let lhs = series_sum(ctx, |n| {
            poch_finite(&a, n, ctx)
                .unwrap()
                .try_mul(&pow(&z, n, ctx))
                .unwrap()
                .try_mul(&inv(poch_q_finite(n, ctx)))
                .unwrap()
        });
        let rhs = poch_infinite(&a.mul(&z), ctx)
            .unwrap()
            .try_mul(&poch_infinite_inverse(&z, ctx).unwrap())
            .unwrap();
        assert_eq!(
            lhs.first_mismatch(&rhs).unwrap(),
            None,
            "a = {a:?}, z = {z:?}"
        );
    }
}

fn poch(z: &MonomialSpec, n: u64, ctx: Ctx) -> QSeries {
    poch_finite(z, n, ctx).unwrap()
}

fn poch_inf(z: &MonomialSpec, ctx: Ctx) -> QSeries {
    poch_infinite(z, ctx).unwrap()
}

/// `(a, b, c, t)` with `c = q^gamma`, `gamma >= 1`, chosen so that every
/// ratio below stays a monomial with nonnegative q-power.
fn heine_samples() -> Vec<(MonomialSpec, MonomialSpec, MonomialSpec, MonomialSpec)> {
    vec![
        (q(1), q(1), q(2), q(1)),
        (mono(-1, 1), q(1), q(2), q(1)),
        (q(2), mono(-1, 1), q(3), q(1)),
        (q(1), q(2), q(3), q(2)),
        (mono(-1, 0), q(1), q(1), q(1)),
        (q(1), mono(-1, 2), q(2), q(1)),
        (mono(3, 1), q(1), q(2), q(2)),
    ]
}

#[test]
fn heine_first_transformation() {
    let ctx = Ctx::plain(25);
    for (a, b, c, t) in heine_samples() {
        let lhs = series_sum(ctx, |n| {
            poch(&a, n, ctx)
                .try_mul(&poch(&b, n, ctx))
                .unwrap()
                .try_mul(&pow(&t, n, ctx))
                .unwrap()
                .try_div(&poch_q_finite(n, ctx).try_mul(&poch(&c, n, ctx)).unwrap())
                .unwrap()
        });
        let c_over_b = c.div(&b).expect("monomial ratio");
        let at = a.mul(&t);
        let sum = series_sum(ctx, |n| {
            poch(&c_over_b, n, ctx)
                .try_mul(&poch(&t, n, ctx))
                .unwrap()
                .try_mul(&pow(&b, n, ctx))
                .unwrap()
                .try_div(&poch_q_finite(n, ctx).try_mul(&poch(&at, n, ctx)).unwrap())
                .unwrap()
        });
        let rhs = poch_inf(&b, ctx)
            .try_mul(&poch_inf(&at, ctx))
            .unwrap()
            .try_div(&poch_inf(&c, ctx).try_mul(&poch_inf(&t, ctx)).unwrap())
            .unwrap()
            .try_mul(&sum)
            .unwrap();
        assert_eq!(
            lhs.first_mismatch(&rhs).unwrap(),
            None,
            "a={a:?} b={b:?} c={c:?} t={t:?}"
        );
    }
}

#[test]
fn heine_third_transformation() {
    let ctx = Ctx::plain(25);
    let samples = [
        (q(1), q(1), q(2), q(1)),
        (q(1), q(2), q(3), q(1)),
        (mono(-1, 1), q(1), q(2), q(2)),
        (q(2), q(2), q(2), q(1)),
        (mono(-1, 1), mono(-1, 1), q(1), q(1)),
        (q(1), q(1), q(1), q(2)),
    ];
    for (a, b, c, z) in samples {
        let lhs = series_sum(ctx, |n| {
            poch(&a, n, ctx)
                .try_mul(&poch(&b, n, ctx))
                .unwrap()
                .try_mul(&pow(&z, n, ctx))
                .unwrap()
                .try_div(&poch(&c, n, ctx).try_mul(&poch_q_finite(n, ctx)).unwrap())
                .unwrap()
        });
        let abz_c = a.mul(&b).mul(&z).div(&c).expect("monomial ratio");
        let (c_a, c_b) = (c.div(&a).unwrap(), c.div(&b).unwrap());
        let sum = series_sum(ctx, |n| {
            poch(&c_a, n, ctx)
                .try_mul(&poch(&c_b, n, ctx))
                .unwrap()
                .try_mul(&pow(&abz_c, n, ctx))
                .unwrap()
                .try_div(&poch(&c, n, ctx).try_mul(&poch_q_finite(n, ctx)).unwrap())
                .unwrap()
        });
        let rhs = poch_inf(&abz_c, ctx)
            .try_div(&poch_inf(&z, ctx))
            .unwrap()
            .try_mul(&sum)
            .unwrap();
        assert_eq!(
            lhs.first_mismatch(&rhs).unwrap(),
            None,
            "a={a:?} b={b:?} c={c:?} z={z:?}"
        );
    }
}

#[test]
fn jackson_summation() {
    let ctx = Ctx::plain(25);
    for (a, b, c, z) in heine_samples() {
        let lhs = series_sum(ctx, |n| {
            poch(&a, n, ctx)
                .try_mul(&poch(&b, n, ctx))
                .unwrap()
                .try_mul(&pow(&z, n, ctx))
                .unwrap()
                .try_div(&poch_q_finite(n, ctx).try_mul(&poch(&c, n, ctx)).unwrap())
                .unwrap()
        });
        let az = a.mul(&z);
        let c_over_b = c.div(&b).unwrap();
        let minus_bz = b.mul(&z).neg();
        let sum = series_sum(ctx, |k| {
            poch(&a, k, ctx)
                .try_mul(&poch(&c_over_b, k, ctx))
                .unwrap()
                .try_mul(&pow(&minus_bz, k, ctx).shift((k * k.saturating_sub(1) / 2) as usize))
                .unwrap()
                .try_div(
                    &poch_q_finite(k, ctx)
                        .try_mul(&poch(&c, k, ctx))
                        .unwrap()
                        .try_mul(&poch(&az, k, ctx))
                        .unwrap(),
                )
                .unwrap()
        });
        let rhs = poch_inf(&az, ctx)
            .try_div(&poch_inf(&z, ctx))
            .unwrap()
            .try_mul(&sum)
            .unwrap();
        assert_eq!(
            lhs.first_mismatch(&rhs).unwrap(),
            None,
            "a={a:?} b={b:?} c={c:?} z={z:?}"
        );
    }
}

#[test]
fn triple_product_samples() {
    let ctx = Ctx::plain(30);
    let (sum, product) = jacobi_triple_product(&q(1), &q(1), ctx).unwrap();
    assert_eq!(sum.first_mismatch(&product).unwrap(), None);
    let mut squares = vec![0i64; 30];
    squares[0] = 1;
    for n in 1..6usize {
        if n * n < 30 {
            squares[n * n] = 2;
        }
    }
    assert_eq!(sum.to_i64_vec(), squares);

    for (a, b) in [
        (q(2), q(3)),
        (mono(-1, 1), mono(-1, 2)),
        (mono(-1, 3), mono(-1, 4)),
        (q(1), q(4)),
        (mono(-1, 2), mono(-1, 2)),
    ] {
        let (s, p) = jacobi_triple_product(&a, &b, ctx).unwrap();
        assert_eq!(s.first_mismatch(&p).unwrap(), None, "a={a:?} b={b:?}");
        assert!(s.coeff(0).is_one());
    }
}

#[test]
fn false_theta_samples() {
    let ctx = Ctx::plain(30);
    assert!(false_theta_psi(&q(1), &q(1), ctx)
        .unwrap()
        .first_mismatch(&QSeries::one(ctx))
        .unwrap()
        .is_none());

    // sum sgn*(n) q^{(3n^2+n)/2} as a direct bilateral sum
    let mut direct = vec![0i64; 30];
    for n in -10i64..=10 {
        let e = (3 * n * n + n) / 2;
        if (0..30).contains(&e) {
            direct[e as usize] += sgn_star(n);
        }
    }
    assert_eq!(
        false_theta_psi(&q(2), &q(1), ctx).unwrap().to_i64_vec(),
        direct
    );
    assert_eq!(&direct[..6], &[1, -1, 1, 0, 0, -1]);
}

#[test]
fn pochhammer_reindexing() {
    // (a)_{A-B} = (-1)^B a^{-B} q^{-AB + B(B+1)/2} (a)_A / (a^{-1} q^{1-A})_B with a = q^e.
    // Each factor 1 - q^{i+1-A-e} of the last Pochhammer equals -q^{-m}(1 - q^m)
    // with m = A + e - 1 - i > 0, so the claim reduces to
    // (a)_{A-B} prod_i (1 - q^{m_i}) = (a)_A after the q-powers cancel.
    let ctx = Ctx::plain(80);
    for e in 1..=2u64 {
        for big_a in 0..=10u64 {
            for big_b in 0..=big_a {
                let ms: Vec<i64> = (0..big_b as i64)
                    .map(|i| big_a as i64 + e as i64 - 1 - i)
                    .collect();
                let power = -(e as i64) * big_b as i64 - (big_a * big_b) as i64
                    + (big_b * (big_b + 1) / 2) as i64
                    + ms.iter().sum::<i64>();
                assert_eq!(power, 0, "A={big_a} B={big_b} e={e}");
                let mut lhs = poch(&q(e), big_a - big_b, ctx);
                for &m in &ms {
                    lhs.mul_one_minus(&q(m as u64)).unwrap();
                }
                assert_eq!(lhs, poch(&q(e), big_a, ctx), "A={big_a} B={big_b} e={e}");
            }
        }
    }
}

#[test]
fn andrews_lemmas_coefficientwise() {
    for lemma in [AndrewsLemma::Half, AndrewsLemma::Full] {
        let order = 15 * lemma.grain() as usize;
        let product = lemma.product_side(order).unwrap();
        for j in -8i64..=8 {
            let lhs = zeta_coefficient(&product, j).unwrap();
            let rhs = andrews_zeta_rhs(lemma, j, order).unwrap();
            assert_eq!(lhs.first_mismatch(&rhs).unwrap(), None, "{lemma:?} j={j}");
        }
    }
}

#[test]
fn andrews_half_lemma_is_zeta_symmetric() {
    let product = AndrewsLemma::Half.product_side(30).unwrap();
    for j in 1..=8 {
        assert_eq!(
            zeta_coefficient(&product, j).unwrap(),
            zeta_coefficient(&product, -j).unwrap()
        );
    }
}
