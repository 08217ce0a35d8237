//! Truncated power series in `q^(1/grain)` with [`AuxPoly`] coefficients.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{AuxPoly, AuxSymbol, SeriesError};

/// Shape shared by every series built for one computation: exponent grain,
/// exclusive truncation order (in grain units) and auxiliary symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Ctx {
    pub grain: u32,
    pub order: usize,
    pub aux: AuxSymbol,
}

impl Ctx {
    pub fn new(grain: u32, order: usize, aux: AuxSymbol) -> Self {
        assert!(
            grain == 1 || grain == 2,
            "grain must be 1 or 2, got {grain}"
        );
        Ctx { grain, order, aux }
    }

    /// Integer powers of `q`, no auxiliary symbol.
    pub fn plain(order: usize) -> Self {
        Ctx::new(1, order, AuxSymbol::None)
    }

    pub fn with_aux(self, aux: AuxSymbol) -> Self {
        Ctx { aux, ..self }
    }

    pub fn with_order(self, order: usize) -> Self {
        Ctx { order, ..self }
    }

    /// Scaled exponent of `q^n` for integer `n`.
    pub fn q(&self, n: u64) -> u64 {
        n * self.grain as u64
    }
}

/// A monomial `coeff * q^(q_exp/grain) * aux^aux_exp`; the grain and the
/// auxiliary symbol come from the surrounding [`Ctx`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialSpec {
    pub coeff: BigInt,
    pub q_exp: u64,
    pub aux_exp: i64,
}

impl MonomialSpec {
    pub fn new(coeff: impl Into<BigInt>, q_exp: u64, aux_exp: i64) -> Self {
        MonomialSpec {
            coeff: coeff.into(),
            q_exp,
            aux_exp,
        }
    }

    /// `q^(q_exp/grain)`.
    pub fn q_power(q_exp: u64) -> Self {
        Self::new(1, q_exp, 0)
    }

    pub fn neg(&self) -> Self {
        MonomialSpec {
            coeff: -&self.coeff,
            ..self.clone()
        }
    }

    pub fn mul(&self, other: &MonomialSpec) -> Self {
        MonomialSpec {
            coeff: &self.coeff * &other.coeff,
            q_exp: self.q_exp + other.q_exp,
            aux_exp: self.aux_exp + other.aux_exp,
        }
    }

    /// Exact quotient; `None` when the coefficient does not divide or the
    /// q-exponent would become negative.
    pub fn div(&self, other: &MonomialSpec) -> Option<Self> {
        if other.coeff.is_zero()
            || !(&self.coeff % &other.coeff).is_zero()
            || other.q_exp > self.q_exp
        {
            return None;
        }
        Some(MonomialSpec {
            coeff: &self.coeff / &other.coeff,
            q_exp: self.q_exp - other.q_exp,
            aux_exp: self.aux_exp - other.aux_exp,
        })
    }

    pub fn pow(&self, n: u64) -> Self {
        MonomialSpec {
            coeff: num_traits::pow(self.coeff.clone(), n as usize),
            q_exp: self.q_exp * n,
            aux_exp: self.aux_exp * n as i64,
        }
    }

    /// True when the monomial is literally the constant 1.
    pub fn is_unit_one(&self) -> bool {
        self.q_exp == 0 && self.aux_exp == 0 && self.coeff.is_one()
    }

    pub fn to_series(&self, ctx: Ctx) -> Result<QSeries, SeriesError> {
        QSeries::monomial(ctx, self.coeff.clone(), self.q_exp, self.aux_exp)
    }
}

/// First coefficient at which two series differ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    /// Scaled exponent (units of `q^(1/grain)`).
    pub exponent: usize,
    pub grain: u32,
    pub lhs: AuxPoly,
    pub rhs: AuxPoly,
}

/// Truncated series `sum_{e < order} c_e q^(e/grain)`.
///
/// Coefficients are stored densely; `coeffs.len() == order` always.
#[derive(Clone, Debug)]
pub struct QSeries {
    grain: u32,
    order: usize,
    aux: AuxSymbol,
    coeffs: Vec<AuxPoly>,
}

impl QSeries {
    pub fn zero(ctx: Ctx) -> Self {
        QSeries {
            grain: ctx.grain,
            order: ctx.order,
            aux: ctx.aux,
            coeffs: vec![AuxPoly::zero(ctx.aux); ctx.order],
        }
    }

    pub fn one(ctx: Ctx) -> Self {
        Self::constant(ctx, BigInt::one())
    }

    pub fn constant(ctx: Ctx, c: BigInt) -> Self {
        let mut s = Self::zero(ctx);
        if ctx.order > 0 {
            s.coeffs[0] = AuxPoly::constant(c, ctx.aux);
        }
        s
    }

    /// `c * q^(q_exp/grain) * aux^aux_exp`.
    pub fn monomial(ctx: Ctx, c: BigInt, q_exp: u64, aux_exp: i64) -> Result<Self, SeriesError> {
        let coeff = AuxPoly::monomial(c, aux_exp, ctx.aux)?;
        let mut s = Self::zero(ctx);
        if (q_exp as usize) < ctx.order {
            s.coeffs[q_exp as usize] = coeff;
        }
        Ok(s)
    }

    /// Integer coefficients `c_0, c_1, ...` on the grain grid.
    pub fn from_ints(ctx: Ctx, coeffs: &[i64]) -> Self {
        let mut s = Self::zero(ctx);
        for (e, &c) in coeffs.iter().enumerate().take(ctx.order) {
            s.coeffs[e] = AuxPoly::constant(BigInt::from(c), ctx.aux);
        }
        s
    }

    /// Builds a series from explicit `(scaled exponent, coefficient)` pairs;
    /// terms at or beyond the order are dropped.
    pub fn from_terms<I>(ctx: Ctx, terms: I) -> Result<Self, SeriesError>
    where
        I: IntoIterator<Item = (usize, AuxPoly)>,
    {
        let mut s = Self::zero(ctx);
        for (e, c) in terms {
            ctx.aux.join(c.symbol())?;
            if e < ctx.order {
                s.coeffs[e].add_assign(&c.with_symbol(ctx.aux));
            }
        }
        Ok(s)
    }

    pub fn ctx(&self) -> Ctx {
        Ctx {
            grain: self.grain,
            order: self.order,
            aux: self.aux,
        }
    }

    pub fn grain(&self) -> u32 {
        self.grain
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn aux(&self) -> AuxSymbol {
        self.aux
    }

    pub fn coeff(&self, e: usize) -> &AuxPoly {
        &self.coeffs[e]
    }

    pub fn coeffs(&self) -> &[AuxPoly] {
        &self.coeffs
    }

    /// Coefficient of `q^(e/grain)` as an integer; panics if it is not constant.
    pub fn int_coeff(&self, e: usize) -> BigInt {
        self.coeffs[e].constant_value()
    }

    /// All coefficients as `i64`; panics on auxiliary terms or overflow.
    pub fn to_i64_vec(&self) -> Vec<i64> {
        use num_traits::ToPrimitive;
        self.coeffs
            .iter()
            .map(|c| {
                c.constant_value()
                    .to_i64()
                    .expect("coefficient exceeds i64")
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(AuxPoly::is_zero)
    }

    /// Lowest scaled exponent with a nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn truncate(&self, order: usize) -> QSeries {
        let order = order.min(self.order);
        QSeries {
            grain: self.grain,
            order,
            aux: self.aux,
            coeffs: self.coeffs[..order].to_vec(),
        }
    }

    /// Re-tags the auxiliary symbol (used to lift a plain series into a
    /// symbol-carrying context).
    pub fn with_aux(mut self, aux: AuxSymbol) -> Result<QSeries, SeriesError> {
        let joined = self.aux.join(aux)?;
        self.aux = joined;
        for c in &mut self.coeffs {
            *c = std::mem::replace(c, AuxPoly::zero(joined)).with_symbol(joined);
        }
        Ok(self)
    }

    fn compat(&self, other: &QSeries) -> Result<(usize, AuxSymbol), SeriesError> {
        if self.grain != other.grain {
            return Err(SeriesError::GrainMismatch(self.grain, other.grain));
        }
        let aux = self.aux.join(other.aux)?;
        Ok((self.order.min(other.order), aux))
    }

    fn empty_like(&self, order: usize, aux: AuxSymbol) -> QSeries {
        QSeries {
            grain: self.grain,
            order,
            aux,
            coeffs: vec![AuxPoly::zero(aux); order],
        }
    }

    pub fn try_add(&self, other: &QSeries) -> Result<QSeries, SeriesError> {
        let (order, aux) = self.compat(other)?;
        let mut out = self.truncate(order);
        out.aux = aux;
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            a.add_assign(b);
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &QSeries) -> Result<QSeries, SeriesError> {
        let (order, aux) = self.compat(other)?;
        let mut out = self.truncate(order);
        out.aux = aux;
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            a.sub_assign(b);
        }
        Ok(out)
    }

    /// Cauchy product truncated at the smaller order.
    pub fn try_mul(&self, other: &QSeries) -> Result<QSeries, SeriesError> {
        let (order, aux) = self.compat(other)?;
        let mut out = self.empty_like(order, aux);
        let lhs: Vec<usize> = (0..order).filter(|&e| !self.coeffs[e].is_zero()).collect();
        let rhs: Vec<usize> = (0..order).filter(|&e| !other.coeffs[e].is_zero()).collect();
        for &i in &lhs {
            for &j in &rhs {
                if i + j >= order {
                    break;
                }
                out.coeffs[i + j].add_mul(&self.coeffs[i], &other.coeffs[j]);
            }
        }
        Ok(out)
    }

    pub fn neg(&self) -> QSeries {
        QSeries {
            coeffs: self.coeffs.iter().map(AuxPoly::neg).collect(),
            ..self.clone()
        }
    }

    pub fn scale(&self, k: &BigInt) -> QSeries {
        QSeries {
            coeffs: self.coeffs.iter().map(|c| c.scale(k)).collect(),
            ..self.clone()
        }
    }

    pub fn scale_i64(&self, k: i64) -> QSeries {
        self.scale(&BigInt::from(k))
    }

    /// Multiplies by `q^(e/grain)`.
    pub fn shift(&self, e: usize) -> QSeries {
        let mut out = self.empty_like(self.order, self.aux);
        for i in 0..self.order.saturating_sub(e) {
            out.coeffs[i + e] = self.coeffs[i].clone();
        }
        out
    }

    /// In place `self += q^(e/grain) * other`; the known range contracts to
    /// `min(order, other.order + e)`.
    pub fn add_shifted(&mut self, other: &QSeries, e: usize) -> Result<(), SeriesError> {
        let (_, aux) = self.compat(other)?;
        self.retag(aux);
        let end = self.order.min(other.order.saturating_add(e));
        self.coeffs.truncate(end);
        self.order = end;
        for i in e..end {
            let c = &other.coeffs[i - e];
            if !c.is_zero() {
                self.coeffs[i].add_assign(c);
            }
        }
        Ok(())
    }

    /// In place `self -= q^(e/grain) * other`.
    pub fn sub_shifted(&mut self, other: &QSeries, e: usize) -> Result<(), SeriesError> {
        let (_, aux) = self.compat(other)?;
        self.retag(aux);
        let end = self.order.min(other.order.saturating_add(e));
        self.coeffs.truncate(end);
        self.order = end;
        for i in e..end {
            let c = &other.coeffs[i - e];
            if !c.is_zero() {
                self.coeffs[i].sub_assign(c);
            }
        }
        Ok(())
    }

    fn retag(&mut self, aux: AuxSymbol) {
        if self.aux != aux {
            self.aux = aux;
            for c in &mut self.coeffs {
                *c = std::mem::replace(c, AuxPoly::zero(aux)).with_symbol(aux);
            }
        }
    }

    /// Multiplies by the monomial `m` (auxiliary exponent taken in this
    /// series' symbol).
    pub fn mul_monomial(&self, m: &MonomialSpec) -> Result<QSeries, SeriesError> {
        self.aux.check_exponent(m.aux_exp)?;
        let mut out = self.empty_like(self.order, self.aux);
        let shift = m.q_exp as usize;
        for i in 0..self.order.saturating_sub(shift) {
            if !self.coeffs[i].is_zero() {
                out.coeffs[i + shift] = self.coeffs[i].shift(m.aux_exp).scale(&m.coeff);
            }
        }
        Ok(out)
    }

    /// In place `self *= (1 - m)`.
    pub fn mul_one_minus(&mut self, m: &MonomialSpec) -> Result<(), SeriesError> {
        let aux = self.aux;
        aux.check_exponent(m.aux_exp)?;
        let shift = m.q_exp as usize;
        if shift == 0 {
            let factor = AuxPoly::from_terms([(0, BigInt::one()), (m.aux_exp, -&m.coeff)], aux)?;
            for c in &mut self.coeffs {
                if !c.is_zero() {
                    *c = c.mul(&factor);
                }
            }
            return Ok(());
        }
        let neg = -&m.coeff;
        for e in (shift..self.order).rev() {
            let src = &self.coeffs[e - shift];
            if src.is_zero() {
                continue;
            }
            let add = src.shift(m.aux_exp).scale(&neg);
            self.coeffs[e].add_assign(&add);
        }
        Ok(())
    }

    /// In place `self /= (1 - m)`; requires `m` to carry a positive q-power.
    pub fn div_one_minus(&mut self, m: &MonomialSpec) -> Result<(), SeriesError> {
        self.aux.check_exponent(m.aux_exp)?;
        if m.q_exp == 0 {
            return Err(SeriesError::NotAUnit);
        }
        let shift = m.q_exp as usize;
        for e in shift..self.order {
            let src = &self.coeffs[e - shift];
            if src.is_zero() {
                continue;
            }
            let add = src.shift(m.aux_exp).scale(&m.coeff);
            self.coeffs[e].add_assign(&add);
        }
        Ok(())
    }

    /// Multiplicative inverse of a series whose constant term is exactly 1.
    pub fn invert_unit(&self) -> Result<QSeries, SeriesError> {
        if self.order == 0 {
            return Ok(self.clone());
        }
        if !self.coeffs[0].is_one() {
            return Err(SeriesError::NotAUnit);
        }
        let support: Vec<usize> = (1..self.order)
            .filter(|&e| !self.coeffs[e].is_zero())
            .collect();
        let mut out = self.empty_like(self.order, self.aux);
        out.coeffs[0] = AuxPoly::one(self.aux);
        for e in 1..self.order {
            let mut acc = AuxPoly::zero(self.aux);
            for &i in &support {
                if i > e {
                    break;
                }
                acc.add_mul(&self.coeffs[i], &out.coeffs[e - i]);
            }
            out.coeffs[e] = acc.neg();
        }
        Ok(out)
    }

    /// `self / other` for a unit `other`.
    pub fn try_div(&self, other: &QSeries) -> Result<QSeries, SeriesError> {
        self.try_mul(&other.invert_unit()?)
    }

    pub fn pow(&self, n: u32) -> QSeries {
        let mut acc = QSeries::one(self.ctx());
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Substitutes `q -> q^m` (same grain); the known range grows to `m * order`.
    pub fn dilate(&self, m: usize) -> QSeries {
        assert!(m >= 1);
        let order = self.order * m;
        let mut out = self.empty_like(order, self.aux);
        for (e, c) in self.coeffs.iter().enumerate() {
            out.coeffs[e * m] = c.clone();
        }
        out
    }

    /// Re-expresses the same series on a finer grain (`new_grain` a multiple
    /// of the current one).
    pub fn refine(&self, new_grain: u32) -> Result<QSeries, SeriesError> {
        if !new_grain.is_multiple_of(self.grain) || !(new_grain == 1 || new_grain == 2) {
            return Err(SeriesError::GrainError(format!(
                "cannot refine grain {} to {new_grain}",
                self.grain
            )));
        }
        let mut out = self.dilate((new_grain / self.grain) as usize);
        out.grain = new_grain;
        Ok(out)
    }

    /// Reinterprets the scaled exponent grid at another grain, i.e. the
    /// substitution `q^(1/old) -> q^(1/new)`. With `new = 1` from grain 2 this
    /// is `q -> q^2` read as an ordinary integer-exponent series.
    pub fn relabel_grain(&self, new_grain: u32) -> QSeries {
        QSeries {
            grain: new_grain,
            ..self.clone()
        }
    }

    /// Drops auxiliary terms of degree above `cap` (a ring map modulo `aux^(cap+1)`
    /// for nonnegative-degree symbols).
    pub fn truncate_aux_degree(&self, cap: i64) -> QSeries {
        QSeries {
            coeffs: self.coeffs.iter().map(|c| c.truncate_degree(cap)).collect(),
            ..self.clone()
        }
    }

    /// First differing coefficient on the common range, if any.
    pub fn first_mismatch(&self, other: &QSeries) -> Result<Option<Mismatch>, SeriesError> {
        let (order, _) = self.compat(other)?;
        for e in 0..order {
            if self.coeffs[e] != other.coeffs[e] {
                return Ok(Some(Mismatch {
                    exponent: e,
                    grain: self.grain,
                    lhs: self.coeffs[e].clone(),
                    rhs: other.coeffs[e].clone(),
                }));
            }
        }
        Ok(None)
    }

    /// Number of leading coefficients on which the two series agree.
    pub fn agreement_order(&self, other: &QSeries) -> Result<usize, SeriesError> {
        let (order, _) = self.compat(other)?;
        Ok(self.first_mismatch(other)?.map_or(order, |m| m.exponent))
    }
}

impl PartialEq for QSeries {
    fn eq(&self, other: &Self) -> bool {
        matches!(self.first_mismatch(other), Ok(None))
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $impl_fn:ident) => {
        impl $trait<&QSeries> for &QSeries {
            type Output = QSeries;
            fn $method(self, rhs: &QSeries) -> QSeries {
                self.$impl_fn(rhs)
                    .unwrap_or_else(|e| panic!("series {}: {e}", stringify!($method)))
            }
        }
        impl $trait<QSeries> for QSeries {
            type Output = QSeries;
            fn $method(self, rhs: QSeries) -> QSeries {
                (&self).$method(&rhs)
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl Neg for &QSeries {
    type Output = QSeries;
    fn neg(self) -> QSeries {
        QSeries::neg(self)
    }
}

impl fmt::Display for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for (e, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if wrote {
                f.write_str(" + ")?;
            }
            wrote = true;
            let q = if self.grain == 1 {
                format!("q^{e}")
            } else {
                format!("q^({e}/{})", self.grain)
            };
            if e == 0 {
                write!(f, "({c})")?;
            } else {
                write!(f, "({c})*{q}")?;
            }
        }
        if !wrote {
            f.write_str("0")?;
        }
        write!(f, " + O(q^({}/{}))", self.order, self.grain)
    }
}
