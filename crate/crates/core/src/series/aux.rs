//! Laurent polynomials in a single tagged auxiliary symbol.
//!
//! Every coefficient of a [`QSeries`](super::QSeries) is an [`AuxPoly`]: an
//! exact big-integer polynomial in one of the formal symbols `w`, `x` or
//! `zeta` (or a plain integer when the tag is [`AuxSymbol::None`]). Only
//! `zeta` admits negative exponents.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::SeriesError;

/// The formal symbol carried by the coefficients of a series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AuxSymbol {
    None,
    W,
    X,
    Zeta,
}

impl AuxSymbol {
    /// The common tag of two operands, treating `None` as a wildcard.
    pub fn join(self, other: AuxSymbol) -> Result<AuxSymbol, SeriesError> {
        match (self, other) {
            (a, b) if a == b => Ok(a),
            (AuxSymbol::None, b) => Ok(b),
            (a, AuxSymbol::None) => Ok(a),
            (a, b) => Err(SeriesError::AuxConflict(a, b)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AuxSymbol::None => "1",
            AuxSymbol::W => "w",
            AuxSymbol::X => "x",
            AuxSymbol::Zeta => "zeta",
        }
    }

    pub(crate) fn check_exponent(self, d: i64) -> Result<(), SeriesError> {
        let ok = match self {
            AuxSymbol::None => d == 0,
            AuxSymbol::W | AuxSymbol::X => d >= 0,
            AuxSymbol::Zeta => true,
        };
        if ok {
            Ok(())
        } else {
            Err(SeriesError::AuxExponent {
                symbol: self,
                exponent: d,
            })
        }
    }
}

impl fmt::Display for AuxSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AuxSymbol::None => "none",
            AuxSymbol::W => "w",
            AuxSymbol::X => "x",
            AuxSymbol::Zeta => "zeta",
        })
    }
}

/// Dense Laurent polynomial `sum_d c_d * sym^d` with `c_d` stored from
/// exponent `low` upwards. The zero polynomial has no stored terms, and the
/// first and last stored coefficients are always nonzero.
#[derive(Clone, Debug)]
pub struct AuxPoly {
    symbol: AuxSymbol,
    low: i64,
    coeffs: Vec<BigInt>,
}

impl AuxPoly {
    pub fn zero(symbol: AuxSymbol) -> Self {
        AuxPoly {
            symbol,
            low: 0,
            coeffs: Vec::new(),
        }
    }

    pub fn one(symbol: AuxSymbol) -> Self {
        Self::constant(BigInt::one(), symbol)
    }

    pub fn constant(c: BigInt, symbol: AuxSymbol) -> Self {
        if c.is_zero() {
            Self::zero(symbol)
        } else {
            AuxPoly {
                symbol,
                low: 0,
                coeffs: vec![c],
            }
        }
    }

    /// `c * sym^d`; fails when `d` is not admissible for `symbol`.
    pub fn monomial(c: BigInt, d: i64, symbol: AuxSymbol) -> Result<Self, SeriesError> {
        symbol.check_exponent(d)?;
        if c.is_zero() {
            return Ok(Self::zero(symbol));
        }
        Ok(AuxPoly {
            symbol,
            low: d,
            coeffs: vec![c],
        })
    }

    /// Builds a polynomial from `(exponent, coefficient)` terms; repeated
    /// exponents are summed.
    pub fn from_terms<I>(terms: I, symbol: AuxSymbol) -> Result<Self, SeriesError>
    where
        I: IntoIterator<Item = (i64, BigInt)>,
    {
        let mut p = Self::zero(symbol);
        for (d, c) in terms {
            p.add_assign(&Self::monomial(c, d, symbol)?);
        }
        Ok(p)
    }

    pub fn symbol(&self) -> AuxSymbol {
        self.symbol
    }

    pub(crate) fn with_symbol(mut self, symbol: AuxSymbol) -> Self {
        self.symbol = symbol;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.low == 0 && self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    /// True when the only possible term has exponent 0.
    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty() || (self.low == 0 && self.coeffs.len() == 1)
    }

    /// Lowest and highest exponent with a nonzero coefficient.
    pub fn degree_range(&self) -> Option<(i64, i64)> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some((self.low, self.low + self.coeffs.len() as i64 - 1))
        }
    }

    pub fn coeff(&self, d: i64) -> BigInt {
        let idx = d - self.low;
        if idx < 0 || idx >= self.coeffs.len() as i64 {
            BigInt::zero()
        } else {
            self.coeffs[idx as usize].clone()
        }
    }

    /// The value of a constant polynomial. Panics if a nonzero exponent is present.
    pub fn constant_value(&self) -> BigInt {
        assert!(
            self.is_constant(),
            "aux polynomial {self} is not a constant"
        );
        self.coeff(0)
    }

    /// Nonzero terms in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &BigInt)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (self.low + i as i64, c))
    }

    fn normalize(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.low += lead as i64;
        }
        if self.coeffs.is_empty() {
            self.low = 0;
        }
    }

    /// Grows storage so that exponents `lo..=hi` are addressable.
    fn reserve_range(&mut self, lo: i64, hi: i64) {
        if self.coeffs.is_empty() {
            self.low = lo;
            self.coeffs = vec![BigInt::zero(); (hi - lo + 1) as usize];
            return;
        }
        if lo < self.low {
            let extra = (self.low - lo) as usize;
            let mut grown = vec![BigInt::zero(); extra];
            grown.append(&mut self.coeffs);
            self.coeffs = grown;
            self.low = lo;
        }
        let top = self.low + self.coeffs.len() as i64 - 1;
        if hi > top {
            self.coeffs
                .resize(self.coeffs.len() + (hi - top) as usize, BigInt::zero());
        }
    }

    pub fn add_assign(&mut self, other: &AuxPoly) {
        self.add_scaled(other, 1);
    }

    pub fn sub_assign(&mut self, other: &AuxPoly) {
        self.add_scaled(other, -1);
    }

    /// `self += sign * other` for `sign` in {1, -1}.
    fn add_scaled(&mut self, other: &AuxPoly, sign: i8) {
        let Some((lo, hi)) = other.degree_range() else {
            return;
        };
        if self.symbol == AuxSymbol::None {
            self.symbol = other.symbol;
        }
        let (slo, shi) = self.degree_range().unwrap_or((lo, hi));
        self.reserve_range(lo.min(slo), hi.max(shi));
        let off = (lo - self.low) as usize;
        for (i, c) in other.coeffs.iter().enumerate() {
            if sign > 0 {
                self.coeffs[off + i] += c;
            } else {
                self.coeffs[off + i] -= c;
            }
        }
        self.normalize();
    }

    /// `self += a * b`.
    pub fn add_mul(&mut self, a: &AuxPoly, b: &AuxPoly) {
        let (Some((alo, ahi)), Some((blo, bhi))) = (a.degree_range(), b.degree_range()) else {
            return;
        };
        if self.symbol == AuxSymbol::None {
            self.symbol = if a.symbol == AuxSymbol::None {
                b.symbol
            } else {
                a.symbol
            };
        }
        if a.coeffs.len() == 1
            && b.coeffs.len() == 1
            && self.coeffs.len() == 1
            && self.low == alo + blo
        {
            self.coeffs[0] += &a.coeffs[0] * &b.coeffs[0];
            self.normalize();
            return;
        }
        let (lo, hi) = (alo + blo, ahi + bhi);
        let (slo, shi) = self.degree_range().unwrap_or((lo, hi));
        self.reserve_range(lo.min(slo), hi.max(shi));
        let off = (lo - self.low) as usize;
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if !y.is_zero() {
                    self.coeffs[off + i + j] += x * y;
                }
            }
        }
        self.normalize();
    }

    pub fn mul(&self, other: &AuxPoly) -> AuxPoly {
        let symbol = if self.symbol == AuxSymbol::None {
            other.symbol
        } else {
            self.symbol
        };
        let mut out = AuxPoly::zero(symbol);
        out.add_mul(self, other);
        out
    }

    pub fn neg(&self) -> AuxPoly {
        AuxPoly {
            symbol: self.symbol,
            low: self.low,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn scale(&self, k: &BigInt) -> AuxPoly {
        if k.is_zero() {
            return AuxPoly::zero(self.symbol);
        }
        AuxPoly {
            symbol: self.symbol,
            low: self.low,
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    /// Multiplies by `sym^d`.
    pub fn shift(&self, d: i64) -> AuxPoly {
        if self.is_zero() {
            return self.clone();
        }
        AuxPoly {
            symbol: self.symbol,
            low: self.low + d,
            coeffs: self.coeffs.clone(),
        }
    }

    /// Drops every term with exponent above `cap`.
    pub fn truncate_degree(&self, cap: i64) -> AuxPoly {
        let mut out = self.clone();
        if let Some((lo, hi)) = out.degree_range() {
            if hi > cap {
                if lo > cap {
                    return AuxPoly::zero(self.symbol);
                }
                out.coeffs.truncate((cap - lo + 1) as usize);
                out.normalize();
            }
        }
        out
    }

    /// Sum of all coefficients (the value at `sym = 1`).
    pub fn eval_at_one(&self) -> BigInt {
        self.coeffs.iter().sum()
    }
}

impl PartialEq for AuxPoly {
    fn eq(&self, other: &Self) -> bool {
        let tags_ok = self.symbol == other.symbol || self.is_constant() && other.is_constant();
        tags_ok && self.low == other.low && self.coeffs == other.coeffs
    }
}

impl Eq for AuxPoly {}

impl fmt::Display for AuxPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (d, c) in self.terms().collect::<Vec<_>>().into_iter().rev() {
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            first = false;
            let sym = self.symbol.name();
            match d {
                0 => write!(f, "{mag}")?,
                _ => {
                    if !mag.is_one() {
                        write!(f, "{mag}*")?;
                    }
                    if d == 1 {
                        write!(f, "{sym}")?;
                    } else {
                        write!(f, "{sym}^{d}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(terms: &[(i64, i64)]) -> AuxPoly {
        AuxPoly::from_terms(
            terms.iter().map(|&(d, c)| (d, BigInt::from(c))),
            AuxSymbol::W,
        )
        .unwrap()
    }

    #[test]
    fn cancellation_normalizes_to_zero() {
        let mut p = w(&[(0, 1), (2, 3)]);
        p.sub_assign(&w(&[(0, 1), (2, 3)]));
        assert!(p.is_zero());
        assert_eq!(p.degree_range(), None);
    }

    #[test]
    fn product_of_binomials() {
        // (1 + w)(1 - w) = 1 - w^2
        let p = w(&[(0, 1), (1, 1)]).mul(&w(&[(0, 1), (1, -1)]));
        assert_eq!(p, w(&[(0, 1), (2, -1)]));
        assert_eq!(p.to_string(), "-w^2 + 1");
    }

    #[test]
    fn negative_exponents_only_for_zeta() {
        assert!(AuxPoly::monomial(BigInt::one(), -1, AuxSymbol::W).is_err());
        assert!(AuxPoly::monomial(BigInt::one(), 2, AuxSymbol::None).is_err());
        let z = AuxPoly::monomial(BigInt::one(), -3, AuxSymbol::Zeta).unwrap();
        assert_eq!(z.degree_range(), Some((-3, -3)));
    }

    #[test]
    fn join_rules() {
        assert_eq!(AuxSymbol::None.join(AuxSymbol::W).unwrap(), AuxSymbol::W);
        assert_eq!(AuxSymbol::X.join(AuxSymbol::X).unwrap(), AuxSymbol::X);
        assert!(AuxSymbol::W.join(AuxSymbol::X).is_err());
    }

    #[test]
    fn truncate_and_evaluate() {
        let p = w(&[(0, 2), (1, -1), (5, 7)]);
        assert_eq!(p.truncate_degree(3), w(&[(0, 2), (1, -1)]));
        assert_eq!(p.eval_at_one(), BigInt::from(8));
    }
}
