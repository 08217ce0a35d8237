//! Double-pole Nahm sums `D_{t,s}(w, q)`, their exponent-vector
//! generalization, and the single-pole rewrites used on the Bailey side.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::series::{
    poch_finite, poch_infinite, poch_q_infinite, w_shifted_poch, AuxSymbol, Ctx, MonomialSpec,
    QSeries, SeriesError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NahmError {
    #[error("invalid parameters: {0}")]
    InvalidSpec(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// How the variable `w` enters a computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WMode {
    Zero,
    One,
    /// `w = q^(1/2)`; forces grain 2.
    Half,
    Formal,
}

impl WMode {
    pub const ALL: [WMode; 4] = [WMode::Zero, WMode::One, WMode::Half, WMode::Formal];

    /// Smallest grain on which this value of `w` can be represented.
    pub fn grain(self) -> u32 {
        match self {
            WMode::Half => 2,
            _ => 1,
        }
    }

    pub fn aux(self) -> AuxSymbol {
        match self {
            WMode::Formal => AuxSymbol::W,
            _ => AuxSymbol::None,
        }
    }

    /// Working context for this mode at the given scaled order.
    pub fn ctx(self, order: usize) -> Ctx {
        Ctx::new(self.grain(), order, self.aux())
    }

    /// `w` as a monomial on the grid of `ctx`.
    pub fn value(self, ctx: Ctx) -> Result<MonomialSpec, NahmError> {
        self.check_ctx(ctx)?;
        Ok(match self {
            WMode::Zero => MonomialSpec::new(0, 0, 0),
            WMode::One => MonomialSpec::new(1, 0, 0),
            WMode::Half => MonomialSpec::new(1, 1, 0),
            WMode::Formal => MonomialSpec::new(1, 0, 1),
        })
    }

    pub fn check_ctx(self, ctx: Ctx) -> Result<(), NahmError> {
        if self == WMode::Half && ctx.grain != 2 {
            return Err(SeriesError::GrainError("w = q^(1/2) needs grain 2".into()).into());
        }
        if self == WMode::Formal && ctx.aux != AuxSymbol::W {
            return Err(NahmError::InvalidSpec(
                "formal w needs a context with auxiliary symbol w".into(),
            ));
        }
        Ok(())
    }

    pub fn name(self) -> &'static str {
        match self {
            WMode::Zero => "0",
            WMode::One => "1",
            WMode::Half => "q^(1/2)",
            WMode::Formal => "w",
        }
    }
}

impl fmt::Display for WMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WMode {
    type Err = NahmError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "0" | "zero" => Ok(WMode::Zero),
            "1" | "one" => Ok(WMode::One),
            "half" | "q^(1/2)" | "q^1/2" | "sqrtq" => Ok(WMode::Half),
            "w" | "formal" => Ok(WMode::Formal),
            other => Err(NahmError::InvalidSpec(format!("unknown w mode '{other}'"))),
        }
    }
}

/// `(-w; q)_n`.
pub fn neg_w_poch(w: WMode, n: u64, ctx: Ctx) -> Result<QSeries, NahmError> {
    let z = w.value(ctx)?.neg();
    Ok(poch_finite(&z, n, ctx)?)
}

/// `(-wq; q)_n`.
pub fn neg_wq_poch(w: WMode, n: u64, ctx: Ctx) -> Result<QSeries, NahmError> {
    let z = w.value(ctx)?.neg().mul(&MonomialSpec::q_power(ctx.q(1)));
    Ok(poch_finite(&z, n, ctx)?)
}

/// `(-wq; q)_inf`.
pub fn neg_wq_poch_infinite(w: WMode, ctx: Ctx) -> Result<QSeries, NahmError> {
    if w == WMode::Zero {
        return Ok(QSeries::one(ctx));
    }
    let z = w.value(ctx)?.neg().mul(&MonomialSpec::q_power(ctx.q(1)));
    Ok(poch_infinite(&z, ctx)?)
}

/// `w^n (-w^{-1} q; q)_n = prod_{i=1}^{n} (q^i + w)`.
pub fn w_poch(w: WMode, n: u64, ctx: Ctx) -> Result<QSeries, NahmError> {
    Ok(w_shifted_poch(n, &w.value(ctx)?, ctx)?)
}

/// Parameters of one double-pole sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NahmSpec {
    pub t: usize,
    pub s: usize,
    pub w: WMode,
    /// Replaces the linear part `n_1 + ... + 2 n_s + ... + n_t` when present.
    pub exponents: Option<Vec<u64>>,
}

impl NahmSpec {
    pub fn new(t: usize, s: usize, w: WMode) -> Self {
        NahmSpec {
            t,
            s,
            w,
            exponents: None,
        }
    }

    /// A generalized sum with linear exponents `a_1, ..., a_t`.
    pub fn with_exponents(exponents: Vec<u64>, w: WMode) -> Self {
        NahmSpec {
            t: exponents.len(),
            s: exponents.len() + 1,
            w,
            exponents: Some(exponents),
        }
    }

    pub fn validate(&self) -> Result<(), NahmError> {
        if self.t == 0 {
            return Err(NahmError::InvalidSpec("t must be at least 1".into()));
        }
        if let Some(a) = &self.exponents {
            if a.len() != self.t || a.contains(&0) {
                return Err(NahmError::InvalidSpec(format!(
                    "exponent vector must have {} entries, all >= 1",
                    self.t
                )));
            }
        } else if !(1..=self.t + 1).contains(&self.s) {
            return Err(NahmError::InvalidSpec(format!(
                "s = {} outside 1..={}",
                self.s,
                self.t + 1
            )));
        }
        Ok(())
    }

    /// Linear coefficients `c_1..c_t` of the exponent.
    pub fn linear(&self) -> Vec<u64> {
        match &self.exponents {
            Some(a) => a.clone(),
            None => (1..=self.t)
                .map(|j| if j == self.s { 2 } else { 1 })
                .collect(),
        }
    }
}

/// `1/(q)_n^2` for `n = 0..=max`.
pub(crate) fn inverse_poch_squares(max: usize, ctx: Ctx) -> Vec<QSeries> {
    let plain = ctx.with_aux(AuxSymbol::None);
    let mut out = Vec::with_capacity(max + 1);
    let mut cur = QSeries::one(plain);
    out.push(cur.clone());
    for n in 1..=max as u64 {
        let m = MonomialSpec::q_power(plain.q(n));
        cur.div_one_minus(&m).expect("plain unit factor");
        cur.div_one_minus(&m).expect("plain unit factor");
        out.push(cur.clone());
    }
    out
}

/// `1/(q)_n` for `n = 0..=max`.
pub(crate) fn inverse_pochs(max: usize, ctx: Ctx) -> Vec<QSeries> {
    let plain = ctx.with_aux(AuxSymbol::None);
    let mut out = Vec::with_capacity(max + 1);
    let mut cur = QSeries::one(plain);
    out.push(cur.clone());
    for n in 1..=max as u64 {
        cur.div_one_minus(&MonomialSpec::q_power(plain.q(n)))
            .expect("plain unit factor");
        out.push(cur.clone());
    }
    out
}

/// Number of summation values `n` with `n * step < order` (scaled units).
fn window(step: u64, order: usize) -> usize {
    (order as u64).div_ceil(step.max(1)) as usize
}

/// Deliberate corruption of the chain kernel, used by the self-test to
/// confirm that the oracle comparison detects a broken evaluator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub(crate) enum Kernel {
    #[default]
    Exact,
    /// Skips the `n_1 = 1` term of the outer sum.
    DropOuterTerm,
}

/// Backward chain contraction: `sum (-w)_{n_1} q^{n_1 n_2 + ... + sum c_j n_j} / prod (q)_{n_j}^2`.
pub(crate) fn chain_sum(
    linear: &[u64],
    w: WMode,
    ctx: Ctx,
    kernel: Kernel,
) -> Result<QSeries, NahmError> {
    let g = ctx.grain as u64;
    let order = ctx.order;
    let plain = ctx.with_aux(AuxSymbol::None);
    let n_max = window(g, order);
    let inv = inverse_poch_squares(n_max, plain);

    // h[n] = contribution of n_{j+1}, ..., n_t given n_j = n
    let t = linear.len();
    let mut h: Vec<QSeries> = vec![QSeries::one(plain); n_max + 1];
    for j in (1..t).rev() {
        let c = linear[j];
        let gsum: Vec<QSeries> = h.iter().zip(&inv).map(|(a, b)| a * b).collect();
        let mut next = Vec::with_capacity(n_max + 1);
        for n in 0..=n_max as u64 {
            let mut acc = QSeries::zero(plain);
            for (m, gm) in gsum.iter().enumerate() {
                let e = ((n + c) * m as u64 * g) as usize;
                if e >= order {
                    break;
                }
                acc.add_shifted(gm, e)?;
            }
            next.push(acc);
        }
        h = next;
    }

    let c1 = linear[0];
    let mut out = QSeries::zero(ctx);
    let neg_w = w.value(ctx)?.neg();
    let mut w_poch = QSeries::one(ctx);
    for n in 0..=n_max as u64 {
        let e = (c1 * n * g) as usize;
        if e >= order {
            break;
        }
        let body = (&h[n as usize] * &inv[n as usize]).shift(e);
        let dropped = kernel == Kernel::DropOuterTerm && n == 1;
        if w == WMode::Zero {
            if !dropped {
                out.add_shifted(&body, 0)?;
            }
        } else {
            if !dropped {
                out.add_shifted(&w_poch.try_mul(&body)?, 0)?;
            }
            w_poch.mul_one_minus(&neg_w.mul(&MonomialSpec::q_power(n * g)))?;
        }
    }
    Ok(out)
}

fn check_ctx(w: WMode, ctx: Ctx) -> Result<Ctx, NahmError> {
    if ctx.order == 0 {
        return Err(NahmError::InvalidSpec("order must be at least 1".into()));
    }
    let ctx = ctx.with_aux(w.aux());
    w.check_ctx(ctx)?;
    Ok(ctx)
}

/// `D_{t,s}(w, q)` (or the exponent-vector generalization) to the order of `ctx`.
/// The auxiliary symbol of `ctx` is replaced by the one required by `spec.w`.
pub fn d_series(spec: &NahmSpec, ctx: Ctx) -> Result<QSeries, NahmError> {
    spec.validate()?;
    let ctx = check_ctx(spec.w, ctx)?;
    chain_sum(&spec.linear(), spec.w, ctx, Kernel::Exact)
}

/// Whether `D_{t,s}(0,q) = D_{t,t+1-s}(0,q)` to the order of `ctx`.
pub fn d_series_symmetry_check(t: usize, s: usize, ctx: Ctx) -> Result<bool, NahmError> {
    if t == 0 || !(1..=t).contains(&s) {
        return Err(NahmError::InvalidSpec(format!(
            "symmetry needs 1 <= s <= t, got t = {t}, s = {s}"
        )));
    }
    let a = d_series(&NahmSpec::new(t, s, WMode::Zero), ctx)?;
    let b = d_series(&NahmSpec::new(t, t + 1 - s, WMode::Zero), ctx)?;
    Ok(a == b)
}

fn triangular(n: u64) -> u64 {
    n * (n + 1) / 2
}

/// Largest `m` with `g * m(m+1)/2 < order`, plus one.
fn triangular_window(g: u64, order: usize) -> usize {
    let mut m = 0u64;
    while g * triangular(m) < order as u64 {
        m += 1;
    }
    m as usize
}

/// The single-pole multisum over `m_1, ..., m_{t-1}` equal to `D_{t,s}(w,q)` for
/// `2 <= s <= t+1`.
pub fn multisum_rhs(t: usize, s: usize, w: WMode, ctx: Ctx) -> Result<QSeries, NahmError> {
    if t < 2 || !(1..=t + 1).contains(&s) {
        return Err(NahmError::InvalidSpec(format!(
            "need t >= 2 and 1 <= s <= t+1, got t = {t}, s = {s}"
        )));
    }
    if s == 1 {
        return Err(NahmError::Unsupported(
            "the single-pole rewrite is only available for s >= 2".into(),
        ));
    }
    let ctx = check_ctx(w, ctx)?;
    let g = ctx.grain as u64;
    let order = ctx.order;
    let plain = ctx.with_aux(AuxSymbol::None);
    let width = triangular_window(g, order);
    let inv = inverse_pochs(width + 1, plain);
    let vars = t - 1;
    // position carrying the (1 - q^{m+1}) factor and the shifted denominator
    let marked = if s <= t { Some(s - 1) } else { None };

    let weight = |j: usize, m: u64| -> QSeries {
        let mut x = QSeries::monomial(plain, BigInt::from(1), g * triangular(m), 0)
            .expect("plain monomial");
        if j >= 2 && m % 2 == 1 {
            x = x.neg();
        }
        if marked == Some(j) {
            x.mul_one_minus(&MonomialSpec::q_power(g * (m + 1)))
                .expect("plain factor");
        }
        x
    };

    let mut h: Vec<QSeries> = (0..width as u64).map(|m| weight(vars, m)).collect();
    for j in (1..vars).rev() {
        let delta = usize::from(marked == Some(j));
        let mut next = Vec::with_capacity(width);
        for m in 0..width {
            let mut acc = QSeries::zero(plain);
            for (mp, hm) in h.iter().enumerate().take((m + delta + 1).min(width)) {
                acc = acc.try_add(&hm.try_mul(&inv[m + delta - mp])?)?;
            }
            next.push(acc.try_mul(&weight(j, m as u64))?);
        }
        h = next;
    }

    let mut sum = QSeries::zero(ctx);
    for (m, hm) in h.iter().enumerate() {
        let term = hm.try_mul(&inv[m])?;
        sum = sum.try_add(&w_poch(w, m as u64, ctx)?.try_mul(&term)?)?;
    }
    let qinf = poch_q_infinite(plain);
    Ok(sum.try_div(&qinf.pow(t as u32))?)
}

/// `(1/(q)_inf) sum_n (-1)^n q^{(n^2+n)/2} (-w q^{a+n})_inf / ((q)_n (q^{a+n})_inf)`,
/// equal to `D_{1,3-a}(w,q)`.
pub fn single_var_rhs(a: u64, w: WMode, ctx: Ctx) -> Result<QSeries, NahmError> {
    if !(1..=2).contains(&a) {
        return Err(NahmError::InvalidSpec(format!("a must be 1 or 2, got {a}")));
    }
    let ctx = check_ctx(w, ctx)?;
    let g = ctx.grain as u64;
    let plain = ctx.with_aux(AuxSymbol::None);
    let width = triangular_window(g, ctx.order);
    let inv = inverse_pochs(width, plain);
    let wv = w.value(ctx)?;
    let mut sum = QSeries::zero(ctx);
    for n in 0..width as u64 {
        let shift = g * (a + n);
        let num = if w == WMode::Zero {
            QSeries::one(ctx)
        } else {
            poch_infinite(&wv.neg().mul(&MonomialSpec::q_power(shift)), ctx)?
        };
        let den = poch_infinite(&MonomialSpec::q_power(shift), plain)?;
        let mut term = num
            .try_div(&den)?
            .try_mul(&inv[n as usize])?
            .shift((g * triangular(n)) as usize);
        if n % 2 == 1 {
            term = term.neg();
        }
        sum = sum.try_add(&term)?;
    }
    Ok(sum.try_div(&poch_q_infinite(plain))?)
}

/// Parity of the number of summation variables: `t = 2k` or `t = 2k - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn t(self, k: usize) -> usize {
        match self {
            Parity::Even => 2 * k,
            Parity::Odd => 2 * k - 1,
        }
    }

    /// `s` of the double-pole sum matched with index `i`.
    pub fn s(self, k: usize, i: usize) -> usize {
        match self {
            Parity::Even => k + i + 1,
            Parity::Odd => k + i,
        }
    }

    pub fn check(self, k: usize, i: usize) -> Result<(), NahmError> {
        let min_k = match self {
            Parity::Even => 1,
            Parity::Odd => 2,
        };
        if k < min_k || i > k {
            return Err(NahmError::InvalidSpec(format!(
                "{self:?} parity needs k >= {min_k} and 0 <= i <= k, got k = {k}, i = {i}"
            )));
        }
        Ok(())
    }
}

/// The alternating string `q^{ir} - 2q^{(i+1)r} + ... - q^{(2k-i+2)r+(k-i+1)}` as
/// `(coefficient, multiplier of r, constant)` triples; for `i = k` it reads
/// `q^{kr} - q^{(k+2)r+1}`.
pub fn bracket_terms(k: usize, i: usize) -> Vec<(i64, u64, u64)> {
    let d = k - i;
    let mut out = Vec::with_capacity(2 * d + 2);
    for j in 0..=d {
        let c = if j == 0 {
            1
        } else if j % 2 == 0 {
            2
        } else {
            -2
        };
        out.push((c, (i + j) as u64, 0));
    }
    for j in 0..=d {
        let c = if j == d {
            -1
        } else if (d + j + 1).is_multiple_of(2) {
            2
        } else {
            -2
        };
        out.push((c, (k + 2 + j) as u64, (1 + j) as u64));
    }
    out
}

/// The bracket evaluated at `r`, on the grid of `ctx` (plain series).
pub fn bracket(k: usize, i: usize, r: u64, ctx: Ctx) -> QSeries {
    let plain = ctx.with_aux(AuxSymbol::None);
    let g = ctx.grain as u64;
    let mut out = QSeries::zero(plain);
    for (c, mult, off) in bracket_terms(k, i) {
        let m = QSeries::monomial(plain, BigInt::from(c), g * (mult * r + off), 0)
            .expect("plain monomial");
        out = out.try_add(&m).expect("same context");
    }
    out
}

/// The single-sum side of the fermionic forms: `(1/(q)_inf^2) sum_r (prefactor) * bracket(r)`.
pub fn fermionic_side(
    k: usize,
    i: usize,
    parity: Parity,
    w: WMode,
    ctx: Ctx,
) -> Result<QSeries, NahmError> {
    parity.check(k, i)?;
    let ctx = check_ctx(w, ctx)?;
    let g = ctx.grain as u64;
    let plain = ctx.with_aux(AuxSymbol::None);
    let (k64, i64_) = (k as u64, i as u64);
    let base = |r: u64| -> u64 {
        match parity {
            Parity::Even => (k64 + 1) * r * r,
            Parity::Odd => ((2 * k64 + 1) * r * r - r) / 2,
        }
    };
    let mut sum = QSeries::zero(ctx);
    let mut r = 0u64;
    while (g * (base(r) + i64_ * r)) < ctx.order as u64 {
        let negative = match parity {
            Parity::Even => (r + k64 - i64_) % 2 == 1,
            Parity::Odd => (k64 - i64_) % 2 == 1,
        };
        let mut term = bracket(k, i, r, ctx).shift((g * base(r)) as usize);
        if negative {
            term = term.neg();
        }
        if w != WMode::Zero {
            term = w_poch(w, r, ctx)?
                .try_mul(&term)?
                .try_div(&neg_wq_poch(w, r, ctx)?)?;
        } else {
            // w^r (-q/w)_r -> q^{r(r+1)/2}
            term = term.shift((g * triangular(r)) as usize);
        }
        sum = sum.try_add(&term)?;
        r += 1;
    }
    let qinf = poch_q_infinite(plain);
    Ok(sum.try_div(&qinf.try_mul(&qinf)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_coefficients_of_d12() {
        let d = d_series(&NahmSpec::new(1, 2, WMode::Zero), Ctx::plain(5)).unwrap();
        assert_eq!(d.to_i64_vec(), vec![1, 1, 3, 6, 12]);
    }

    #[test]
    fn order_one_is_one() {
        for w in [WMode::Zero, WMode::One, WMode::Formal] {
            let d = d_series(&NahmSpec::new(3, 2, w), w.ctx(1)).unwrap();
            assert!(d.coeff(0).is_one());
        }
    }

    #[test]
    fn invalid_specs() {
        assert!(d_series(&NahmSpec::new(0, 1, WMode::Zero), Ctx::plain(4)).is_err());
        assert!(d_series(&NahmSpec::new(2, 4, WMode::Zero), Ctx::plain(4)).is_err());
        assert!(d_series(
            &NahmSpec::with_exponents(vec![1, 0], WMode::Zero),
            Ctx::plain(4)
        )
        .is_err());
        assert!(d_series(&NahmSpec::new(2, 1, WMode::Half), Ctx::plain(4)).is_err());
        assert!(d_series_symmetry_check(2, 3, Ctx::plain(4)).is_err());
        assert!(matches!(
            multisum_rhs(3, 1, WMode::Zero, Ctx::plain(4)),
            Err(NahmError::Unsupported(_))
        ));
    }

    #[test]
    fn symmetry_small() {
        assert!(d_series_symmetry_check(2, 1, Ctx::plain(20)).unwrap());
        assert!(d_series_symmetry_check(3, 1, Ctx::plain(20)).unwrap());
    }

    #[test]
    fn bracket_shapes() {
        assert_eq!(bracket_terms(2, 2), vec![(1, 2, 0), (-1, 4, 1)]);
        // k - i = 1: q^{ir} - 2 q^{(i+1)r} + 2 q^{(k+2)r+1} - q^{(k+3)r+2}
        assert_eq!(
            bracket_terms(1, 0),
            vec![(1, 0, 0), (-2, 1, 0), (2, 3, 1), (-1, 4, 2)]
        );
    }

    #[test]
    fn bracket_at_zero_alternates() {
        // (-1)^{k-i} bracket(0) / (1 - q) = 1 - q + q^2 - ... + (-1)^{k-i} q^{k-i}
        let ctx = Ctx::plain(10);
        for (k, i) in [(1, 0), (2, 0), (3, 1), (3, 3)] {
            let d = k - i;
            let mut b = bracket(k, i, 0, ctx).scale_i64(if d % 2 == 0 { 1 } else { -1 });
            b.div_one_minus(&MonomialSpec::q_power(1)).unwrap();
            for (e, &c) in b.to_i64_vec().iter().enumerate() {
                let want = if e <= d {
                    if e % 2 == 0 {
                        1
                    } else {
                        -1
                    }
                } else {
                    0
                };
                assert_eq!(c, want, "k={k} i={i} e={e}");
            }
        }
    }

    #[test]
    fn wmode_parsing() {
        assert_eq!("0".parse::<WMode>().unwrap(), WMode::Zero);
        assert_eq!("half".parse::<WMode>().unwrap(), WMode::Half);
        assert_eq!("w".parse::<WMode>().unwrap(), WMode::Formal);
        assert!("2".parse::<WMode>().is_err());
    }

    #[test]
    fn fault_kernel_differs() {
        let ctx = Ctx::plain(12);
        let good = chain_sum(&[1, 2], WMode::Zero, ctx, Kernel::Exact).unwrap();
        let bad = chain_sum(&[1, 2], WMode::Zero, ctx, Kernel::DropOuterTerm).unwrap();
        assert_ne!(good, bad);
    }
}
