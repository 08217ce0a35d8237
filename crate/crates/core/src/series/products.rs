//! Pochhammer symbols, theta and false theta series, and the auxiliary
//! specializations used throughout the crate.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;

use super::{AuxPoly, AuxSymbol, Ctx, MonomialSpec, QSeries, SeriesError};

/// `(z; q)_n = prod_{i<n} (1 - z q^i)`.
pub fn poch_finite(z: &MonomialSpec, n: u64, ctx: Ctx) -> Result<QSeries, SeriesError> {
    let mut out = QSeries::one(ctx);
    let step = ctx.q(1);
    for i in 0..n {
        let q_exp = z.q_exp + i * step;
        if q_exp as usize >= ctx.order {
            break;
        }
        out.mul_one_minus(&MonomialSpec { q_exp, ..z.clone() })?;
    }
    Ok(out)
}

/// `(q; q)_n`.
pub fn poch_q_finite(n: u64, ctx: Ctx) -> QSeries {
    poch_finite(&MonomialSpec::q_power(ctx.q(1)), n, ctx).expect("plain monomial")
}

/// `prod_{i>=0} (1 - z step^i)`, truncated. `step` must carry a positive q-power.
pub fn poch_infinite_step(
    z: &MonomialSpec,
    step: &MonomialSpec,
    ctx: Ctx,
) -> Result<QSeries, SeriesError> {
    if step.q_exp == 0 {
        return Err(SeriesError::DivergentProduct);
    }
    let mut out = QSeries::one(ctx);
    let mut factor = z.clone();
    while (factor.q_exp as usize) < ctx.order {
        out.mul_one_minus(&factor)?;
        factor = factor.mul(step);
    }
    Ok(out)
}

/// `(z; q)_inf`, truncated once `z q^i` vanishes modulo the order.
pub fn poch_infinite(z: &MonomialSpec, ctx: Ctx) -> Result<QSeries, SeriesError> {
    if z.q_exp == 0 && z.aux_exp == 0 {
        return Err(SeriesError::DivergentProduct);
    }
    poch_infinite_step(z, &MonomialSpec::q_power(ctx.q(1)), ctx)
}

/// `1 / (z; q)_inf`; every factor must be a unit, so `z` needs a positive q-power.
pub fn poch_infinite_inverse(z: &MonomialSpec, ctx: Ctx) -> Result<QSeries, SeriesError> {
    if z.q_exp == 0 {
        return Err(if z.aux_exp == 0 {
            SeriesError::DivergentProduct
        } else {
            SeriesError::NotAUnit
        });
    }
    let mut out = QSeries::one(ctx);
    let mut factor = z.clone();
    while (factor.q_exp as usize) < ctx.order {
        out.div_one_minus(&factor)?;
        factor.q_exp += ctx.q(1);
    }
    Ok(out)
}

/// `(q; q)_inf`.
pub fn poch_q_infinite(ctx: Ctx) -> QSeries {
    poch_infinite(&MonomialSpec::q_power(ctx.q(1)), ctx).expect("plain monomial")
}

/// `w^n (-w^{-1} q; q)_n = prod_{i=1}^{n} (q^i + w)` for a concrete or formal `w`.
///
/// Pass `MonomialSpec::new(1, 0, 1)` for a formal `w` (context aux must be `w`),
/// `MonomialSpec::new(0, 0, 0)` for `w = 0`, `MonomialSpec::new(1, 0, 0)` for
/// `w = 1` and `MonomialSpec::new(1, 1, 0)` at grain 2 for `w = q^(1/2)`.
pub fn w_shifted_poch(n: u64, w: &MonomialSpec, ctx: Ctx) -> Result<QSeries, SeriesError> {
    let mut out = QSeries::one(ctx);
    for i in 1..=n {
        let lifted = out.shift(ctx.q(i) as usize);
        let w_part = if w.coeff.is_zero() {
            None
        } else {
            Some(out.mul_monomial(w)?)
        };
        out = match w_part {
            Some(p) => lifted.try_add(&p)?,
            None => lifted,
        };
    }
    Ok(out)
}

fn triangular(n: i64) -> u64 {
    (n * (n + 1) / 2) as u64
}

fn theta_window_exponent(a: &MonomialSpec, b: &MonomialSpec, n: i64) -> u64 {
    a.q_exp * triangular(n) + b.q_exp * triangular(n - 1)
}

/// Both sides of the Jacobi triple product:
/// `sum_{n in Z} a^{n(n+1)/2} b^{n(n-1)/2}` and `(-a; ab)_inf (-b; ab)_inf (ab; ab)_inf`.
pub fn jacobi_triple_product(
    a: &MonomialSpec,
    b: &MonomialSpec,
    ctx: Ctx,
) -> Result<(QSeries, QSeries), SeriesError> {
    if a.q_exp + b.q_exp == 0 {
        return Err(SeriesError::DivergentSum);
    }
    let order = ctx.order as u64;
    let mut terms = Vec::new();
    // the exponent is nondecreasing as |n| grows in either direction
    let mut n = 0i64;
    while theta_window_exponent(a, b, n) < order {
        terms.push(n);
        n += 1;
    }
    let mut n = -1i64;
    while theta_window_exponent(a, b, n) < order {
        terms.push(n);
        n -= 1;
    }
    let mut sum = QSeries::zero(ctx);
    for n in terms {
        let m = a.pow(triangular(n)).mul(&b.pow(triangular(n - 1)));
        sum = sum.try_add(&m.to_series(ctx)?)?;
    }
    let ab = a.mul(b);
    let product = poch_infinite_step(&a.neg(), &ab, ctx)?
        .try_mul(&poch_infinite_step(&b.neg(), &ab, ctx)?)?
        .try_mul(&poch_infinite_step(&ab, &ab, ctx)?)?;
    Ok((sum, product))
}

/// `+1` for `n >= 0`, `-1` for `n < 0`.
pub fn sgn_star(n: i64) -> i64 {
    if n >= 0 {
        1
    } else {
        -1
    }
}

/// Rogers' false theta function `sum_{n>=0} a^{n(n+1)/2} b^{n(n-1)/2} (1 - b^{2n+1})`,
/// equivalently `sum_{n in Z} sgn*(n) a^{n(n+1)/2} b^{n(n-1)/2}`.
pub fn false_theta_psi(
    a: &MonomialSpec,
    b: &MonomialSpec,
    ctx: Ctx,
) -> Result<QSeries, SeriesError> {
    if a.q_exp + b.q_exp == 0 {
        return Err(SeriesError::DivergentSum);
    }
    let order = ctx.order as u64;
    let mut sum = QSeries::zero(ctx);
    let mut n = 0i64;
    while theta_window_exponent(a, b, n) < order {
        let head = a.pow(triangular(n));
        let plus = head.mul(&b.pow(triangular(n - 1)));
        let minus = head.mul(&b.pow(triangular(n + 1))).neg();
        sum = sum
            .try_add(&plus.to_series(ctx)?)?
            .try_add(&minus.to_series(ctx)?)?;
        n += 1;
    }
    Ok(sum)
}

/// Values an auxiliary symbol can be specialized to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuxValue {
    Zero,
    One,
    /// `q^(1/2)`; the series must already live on grain 2.
    HalfQ,
    /// `aux -> q * aux`.
    QShift,
}

/// Substitutes a value for the auxiliary symbol `w` or `x`.
pub fn aux_specialize(s: &QSeries, value: AuxValue) -> Result<QSeries, SeriesError> {
    if !matches!(s.aux(), AuxSymbol::W | AuxSymbol::X) {
        return Err(SeriesError::BadSpecialization(s.aux()));
    }
    let ctx = s.ctx();
    match value {
        AuxValue::Zero => QSeries::from_terms(
            ctx.with_aux(AuxSymbol::None),
            s.coeffs()
                .iter()
                .enumerate()
                .map(|(e, c)| (e, AuxPoly::constant(c.coeff(0), AuxSymbol::None))),
        ),
        AuxValue::One => QSeries::from_terms(
            ctx.with_aux(AuxSymbol::None),
            s.coeffs()
                .iter()
                .enumerate()
                .map(|(e, c)| (e, AuxPoly::constant(c.eval_at_one(), AuxSymbol::None))),
        ),
        AuxValue::HalfQ => {
            if ctx.grain != 2 {
                return Err(SeriesError::GrainError(
                    "w -> q^(1/2) requires grain 2".into(),
                ));
            }
            let terms = s.coeffs().iter().enumerate().flat_map(|(e, c)| {
                c.terms()
                    .map(move |(d, k)| {
                        (
                            e + d as usize,
                            AuxPoly::constant(k.clone(), AuxSymbol::None),
                        )
                    })
                    .collect::<Vec<_>>()
            });
            QSeries::from_terms(ctx.with_aux(AuxSymbol::None), terms)
        }
        AuxValue::QShift => {
            let step = ctx.grain as usize;
            let sym = ctx.aux;
            let terms = s.coeffs().iter().enumerate().flat_map(|(e, c)| {
                c.terms()
                    .map(move |(d, k)| {
                        let term = AuxPoly::monomial(k.clone(), d, sym)
                            .expect("exponent from same symbol");
                        (e + d as usize * step, term)
                    })
                    .collect::<Vec<_>>()
            });
            QSeries::from_terms(ctx, terms)
        }
    }
}

/// The plain q-series multiplying `zeta^j`.
pub fn zeta_coefficient(s: &QSeries, j: i64) -> Result<QSeries, SeriesError> {
    if s.aux() != AuxSymbol::Zeta {
        return Err(SeriesError::BadSpecialization(s.aux()));
    }
    let ctx = s.ctx().with_aux(AuxSymbol::None);
    QSeries::from_terms(
        ctx,
        s.coeffs()
            .iter()
            .enumerate()
            .map(|(e, c)| (e, AuxPoly::constant(c.coeff(j), AuxSymbol::None))),
    )
}

/// The two bilateral expansions of `1/((q^h zeta)_inf (q^h zeta^{-1})_inf)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AndrewsLemma {
    /// `h = 1/2`, computed on grain 2.
    Half,
    /// `h = 1`, grain 1.
    Full,
}

impl AndrewsLemma {
    pub fn grain(self) -> u32 {
        match self {
            AndrewsLemma::Half => 2,
            AndrewsLemma::Full => 1,
        }
    }

    /// The product side with a formal `zeta`.
    pub fn product_side(self, order: usize) -> Result<QSeries, SeriesError> {
        let ctx = Ctx::new(self.grain(), order, AuxSymbol::Zeta);
        let h = 1;
        let left = poch_infinite_inverse(&MonomialSpec::new(1, h, 1), ctx)?;
        let right = poch_infinite_inverse(&MonomialSpec::new(1, h, -1), ctx)?;
        left.try_mul(&right)
    }
}

/// `sum_{m >= n} (-1)^{m+n} q^{e(m,n)}` collected on the scaled grid, where the
/// terms with negative exponents must cancel in pairs `m <-> -1-m`.
fn andrews_inner_sum(lemma: AndrewsLemma, n: i64, order: usize) -> BTreeMap<i64, BigInt> {
    let exponent = |m: i64| -> i64 {
        match lemma {
            AndrewsLemma::Half => m * m + m - n * n,
            AndrewsLemma::Full => (m * m + m - n * n + n) / 2,
        }
    };
    let mut acc: BTreeMap<i64, BigInt> = BTreeMap::new();
    let mut m = n;
    while m < 0 || exponent(m) < order as i64 {
        let sign = if (m + n).rem_euclid(2) == 0 { 1 } else { -1 };
        *acc.entry(exponent(m)).or_insert_with(BigInt::zero) += sign;
        m += 1;
    }
    acc.retain(|_, c| !c.is_zero());
    assert!(
        acc.keys().all(|&e| e >= 0),
        "negative exponents failed to cancel in Andrews expansion (n = {n})"
    );
    acc
}

/// Coefficient of `zeta^j` on the bilateral-sum side of the Andrews expansions,
/// including the `1/(q)_inf^2` prefactor.
pub fn andrews_zeta_rhs(lemma: AndrewsLemma, j: i64, order: usize) -> Result<QSeries, SeriesError> {
    let ctx = Ctx::new(lemma.grain(), order, AuxSymbol::None);
    let mut inner = andrews_inner_sum(lemma, j, order);
    if lemma == AndrewsLemma::Full {
        // zeta^n (1 - zeta^{-1}): zeta^j collects S(j) - S(j + 1)
        for (e, c) in andrews_inner_sum(lemma, j + 1, order) {
            *inner.entry(e).or_insert_with(BigInt::zero) -= c;
        }
    }
    let terms = inner
        .into_iter()
        .filter(|(e, _)| (*e as usize) < order)
        .map(|(e, c)| (e as usize, AuxPoly::constant(c, AuxSymbol::None)));
    let sum = QSeries::from_terms(ctx, terms)?;
    let qinf = poch_q_infinite(ctx);
    sum.try_div(&qinf.try_mul(&qinf)?)
}
