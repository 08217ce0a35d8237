//! Bailey pairs relative to `a = q^e` on finite index windows: the Bailey
//! matrix and its inverse, the conjugated move matrices, the forward moves,
//! and the move schedule that produces the pairs behind the fermionic forms.

use num_bigint::BigInt;
use thiserror::Error;

use crate::nahm::{
    bracket, neg_wq_poch, neg_wq_poch_infinite, w_poch, NahmError, NahmSpec, Parity, WMode,
};
use crate::series::{
    poch_finite, poch_q_finite, AuxSymbol, Ctx, Mismatch, MonomialSpec, QSeries, SeriesError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BaileyError {
    #[error("the inverse Bailey matrix has a pole at a = 1 (base exponent 0)")]
    BasePole,
    #[error("move requires base exponent {expected}, pair has {found}")]
    WrongBase { expected: u64, found: u64 },
    #[error("index window exhausted")]
    WindowExhausted,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Nahm(#[from] NahmError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// `sum c q^x` for `(c, x)` terms with integer exponents `x >= 0`.
fn poly(ctx: Ctx, terms: &[(i64, i64)]) -> QSeries {
    let plain = ctx.with_aux(AuxSymbol::None);
    let mut out = QSeries::zero(plain);
    for &(c, x) in terms {
        assert!(x >= 0, "negative exponent {x} in matrix entry");
        let m = QSeries::monomial(plain, BigInt::from(c), plain.q(x as u64), 0)
            .expect("plain monomial");
        out = out.try_add(&m).expect("same context");
    }
    out
}

/// `num / prod (1 - q^m)` over `dens`, each `m >= 1`.
fn over(mut num: QSeries, dens: &[i64]) -> QSeries {
    let ctx = num.ctx();
    for &m in dens {
        assert!(m >= 1, "non-unit denominator 1 - q^{m}");
        num.div_one_minus(&MonomialSpec::q_power(ctx.q(m as u64)))
            .expect("unit factor");
    }
    num
}

fn signed(x: QSeries, negative: bool) -> QSeries {
    if negative {
        x.neg()
    } else {
        x
    }
}

fn tri(n: i64) -> i64 {
    n * (n + 1) / 2
}

/// A square window `0..=n_max` of a row-finite infinite matrix.
#[derive(Clone, Debug)]
pub struct MoveMatrix {
    entries: Vec<Vec<QSeries>>,
}

impl MoveMatrix {
    pub fn from_fn(
        n_max: usize,
        ctx: Ctx,
        mut f: impl FnMut(usize, usize) -> Option<QSeries>,
    ) -> Self {
        let plain = ctx.with_aux(AuxSymbol::None);
        let entries = (0..=n_max)
            .map(|r| {
                (0..=n_max)
                    .map(|c| f(r, c).unwrap_or_else(|| QSeries::zero(plain)))
                    .collect()
            })
            .collect();
        MoveMatrix { entries }
    }

    pub fn identity(n_max: usize, ctx: Ctx) -> Self {
        Self::from_fn(n_max, ctx, |r, c| {
            (r == c).then(|| QSeries::one(ctx.with_aux(AuxSymbol::None)))
        })
    }

    pub fn n_max(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn get(&self, r: usize, c: usize) -> &QSeries {
        &self.entries[r][c]
    }

    /// Number of structurally nonzero entries in row `r`.
    pub fn row_support(&self, r: usize) -> usize {
        self.entries[r].iter().filter(|x| !x.is_zero()).count()
    }

    /// The leading `(n+1) x (n+1)` block.
    pub fn restrict(&self, n: usize) -> MoveMatrix {
        MoveMatrix {
            entries: self.entries[..=n]
                .iter()
                .map(|row| row[..=n].to_vec())
                .collect(),
        }
    }

    /// Window product; exact wherever the inner index never leaves the window.
    pub fn mul(&self, other: &MoveMatrix) -> Result<MoveMatrix, SeriesError> {
        let n = self.n_max().min(other.n_max());
        let mut entries = Vec::with_capacity(n + 1);
        for r in 0..=n {
            let mut row = Vec::with_capacity(n + 1);
            for c in 0..=n {
                let mut acc = QSeries::zero(self.entries[r][c].ctx());
                for j in 0..=n {
                    let (a, b) = (&self.entries[r][j], &other.entries[j][c]);
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc.try_add(&a.try_mul(b)?)?;
                    }
                }
                row.push(acc);
            }
            entries.push(row);
        }
        Ok(MoveMatrix { entries })
    }

    /// `M v` for a vector as long as the window.
    pub fn apply(&self, v: &[QSeries]) -> Result<Vec<QSeries>, SeriesError> {
        let n = self.n_max().min(v.len().saturating_sub(1));
        (0..=n)
            .map(|r| {
                let mut acc = QSeries::zero(v[0].ctx());
                for (j, x) in v.iter().enumerate().take(n + 1) {
                    let a = &self.entries[r][j];
                    if !a.is_zero() {
                        acc = acc.try_add(&a.try_mul(x)?)?;
                    }
                }
                Ok(acc)
            })
            .collect()
    }

    /// First entry (row-major) at which the two windows differ.
    pub fn first_mismatch(
        &self,
        other: &MoveMatrix,
    ) -> Result<Option<(usize, usize, Mismatch)>, SeriesError> {
        let n = self.n_max().min(other.n_max());
        for r in 0..=n {
            for c in 0..=n {
                if let Some(m) = self.entries[r][c].first_mismatch(&other.entries[r][c])? {
                    return Ok(Some((r, c, m)));
                }
            }
        }
        Ok(None)
    }
}

/// `[L(a)]_{r,c} = 1/((q)_{r-c} (aq)_{r+c})` with `a = q^e`.
pub fn bailey_l(e: u64, n_max: usize, ctx: Ctx) -> MoveMatrix {
    let plain = ctx.with_aux(AuxSymbol::None);
    MoveMatrix::from_fn(n_max, plain, |r, c| {
        (r >= c).then(|| {
            let mut x = QSeries::one(plain);
            for j in 1..=(r - c) as u64 {
                x.div_one_minus(&MonomialSpec::q_power(plain.q(j)))
                    .expect("unit");
            }
            for j in 1..=(r + c) as u64 {
                x.div_one_minus(&MonomialSpec::q_power(plain.q(e + j)))
                    .expect("unit");
            }
            x
        })
    })
}

/// `[L(a)^{-1}]_{r,c} = (-1)^{r-c} q^{C(r-c,2)} (a)_{r+c} (1 - a q^{2r}) / ((q)_{r-c} (1 - a))`.
pub fn bailey_l_inverse(e: u64, n_max: usize, ctx: Ctx) -> Result<MoveMatrix, BaileyError> {
    if e == 0 {
        return Err(BaileyError::BasePole);
    }
    let plain = ctx.with_aux(AuxSymbol::None);
    Ok(MoveMatrix::from_fn(n_max, plain, |r, c| {
        (r >= c).then(|| {
            let d = (r - c) as i64;
            let (r, c) = (r as u64, c as u64);
            // (a)_{r+c} / (1 - a) = (aq)_{r+c-1}
            let mut x = if r + c == 0 {
                QSeries::one(plain)
            } else {
                let a_poch = poch_finite(&MonomialSpec::q_power(plain.q(e + 1)), r + c - 1, plain)
                    .expect("plain");
                let mut t = a_poch;
                t.mul_one_minus(&MonomialSpec::q_power(plain.q(e + 2 * r)))
                    .expect("plain");
                t
            };
            for j in 1..=d as u64 {
                x.div_one_minus(&MonomialSpec::q_power(plain.q(j)))
                    .expect("unit");
            }
            signed(
                x.shift(plain.q((d * (d - 1) / 2) as u64) as usize),
                d % 2 == 1,
            )
        })
    }))
}

/// Which conjugated matrix `L(a)^{-1} M L(a)` to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Tilde {
    /// Up-shift `[U]_{r,r+1} = 1`.
    U,
    /// `Diag(q^n)`.
    D,
    /// `U (I - D)^2`.
    S,
    /// `U (I - D)`.
    U1,
}

impl Tilde {
    pub const ALL: [Tilde; 4] = [Tilde::U, Tilde::D, Tilde::S, Tilde::U1];

    pub fn name(self) -> &'static str {
        match self {
            Tilde::U => "U",
            Tilde::D => "D",
            Tilde::S => "S",
            Tilde::U1 => "U1",
        }
    }
}

/// The untransformed matrix `M` acting on `beta`.
pub fn move_matrix(which: Tilde, n_max: usize, ctx: Ctx) -> MoveMatrix {
    MoveMatrix::from_fn(n_max, ctx, |r, c| {
        let r64 = r as i64;
        match which {
            Tilde::U => (c == r + 1).then(|| poly(ctx, &[(1, 0)])),
            Tilde::D => (c == r).then(|| poly(ctx, &[(1, r64)])),
            Tilde::U1 => (c == r + 1).then(|| poly(ctx, &[(1, 0), (-1, r64 + 1)])),
            Tilde::S => (c == r + 1).then(|| poly(ctx, &[(1, 0), (-2, r64 + 1), (1, 2 * r64 + 2)])),
        }
    })
}

/// Closed-form entries of the conjugated matrices with `a = q^e`, `e >= 1`.
pub fn tilde_matrix(
    which: Tilde,
    e: u64,
    n_max: usize,
    ctx: Ctx,
) -> Result<MoveMatrix, BaileyError> {
    if e == 0 {
        return Err(BaileyError::BasePole);
    }
    let a = e as i64;
    Ok(MoveMatrix::from_fn(n_max, ctx, |r, c| {
        let (n, c) = (r as i64, c as i64);
        match which {
            Tilde::U => {
                if c == 0 && n == 0 {
                    Some(over(poly(ctx, &[(1, 0)]), &[1, a + 1]))
                } else if c == 0 && n == 1 {
                    Some(over(
                        poly(ctx, &[(-1, a + 1), (-1, 1), (1, a + 3), (1, a + 2)]),
                        &[1, 2, a + 1],
                    ))
                } else if c == 0 && n >= 2 {
                    let mut x = poly(ctx, &[(1, 0), (-1, a + 2 * n)]);
                    for j in 1..=n - 2 {
                        x.mul_one_minus(&MonomialSpec::q_power(ctx.q((a + j) as u64)))
                            .expect("plain");
                    }
                    let dens: Vec<i64> = (1..=n + 1).collect();
                    Some(signed(
                        over(x, &dens).shift(ctx.q(tri(n) as u64) as usize),
                        n % 2 == 1,
                    ))
                } else if c == n + 1 {
                    Some(over(poly(ctx, &[(1, 0)]), &[a + 2 * n + 1, a + 2 * n + 2]))
                } else if c == n && n >= 1 {
                    let num = poly(ctx, &[(-1, a + 2 * n - 1), (-1, a + 2 * n)]);
                    Some(over(num, &[a + 2 * n - 1, a + 2 * n + 1]))
                } else if c == n - 1 && n >= 2 {
                    Some(over(
                        poly(ctx, &[(1, 2 * a + 4 * n - 3)]),
                        &[a + 2 * n - 2, a + 2 * n - 1],
                    ))
                } else {
                    None
                }
            }
            Tilde::D => {
                if c == n {
                    Some(poly(ctx, &[(1, n)]))
                } else if n > c {
                    let x = a * (n - c - 1) + n * n - n - c * c;
                    Some(poly(ctx, &[(1, x + a + 2 * n), (-1, x)]))
                } else {
                    None
                }
            }
            Tilde::U1 => {
                if c == n - 1 {
                    let num = poly(ctx, &[(1, 2 * a + 4 * n - 3), (-1, a + 3 * n - 2)]);
                    Some(over(num, &[a + 2 * n - 2, a + 2 * n - 1]))
                } else if c == n && n == 0 {
                    Some(over(poly(ctx, &[(1, 0)]), &[a + 1]))
                } else if c == n {
                    let num = poly(
                        ctx,
                        &[(1, a + 3 * n), (-1, a + 2 * n), (-1, a + 2 * n - 1), (1, n)],
                    );
                    Some(over(num, &[a + 2 * n - 1, a + 2 * n + 1]))
                } else if c == n + 1 {
                    Some(over(
                        poly(ctx, &[(1, 0), (-1, n + 1)]),
                        &[a + 2 * n + 1, a + 2 * n + 2],
                    ))
                } else {
                    None
                }
            }
            Tilde::S => {
                if c == n - 1 {
                    let num = poly(
                        ctx,
                        &[(1, 2 * n - 1), (-2, a + 3 * n - 2), (1, 2 * a + 4 * n - 3)],
                    );
                    Some(over(num, &[a + 2 * n - 2, a + 2 * n - 1]))
                } else if c == n && n == 0 {
                    Some(over(poly(ctx, &[(1, 0), (-1, 1)]), &[a + 1]))
                } else if c == n {
                    let num = poly(
                        ctx,
                        &[
                            (2, a + 3 * n),
                            (-1, a + 2 * n),
                            (-1, 2 * n + 1),
                            (-1, a + 2 * n - 1),
                            (-1, 2 * n),
                            (2, n),
                        ],
                    );
                    Some(over(num, &[a + 2 * n - 1, a + 2 * n + 1]))
                } else if c == n + 1 {
                    let num = poly(ctx, &[(1, 0), (-2, n + 1), (1, 2 * n + 2)]);
                    Some(over(num, &[a + 2 * n + 1, a + 2 * n + 2]))
                } else {
                    None
                }
            }
        }
    }))
}

/// `L(a)^{-1} M L(a)` on the window `0..=n_max`. `M` must have at most one
/// superdiagonal, so a window one larger makes every inner sum complete.
pub fn conjugate(m: &MoveMatrix, e: u64, ctx: Ctx) -> Result<MoveMatrix, BaileyError> {
    let n = m.n_max();
    if n == 0 {
        return Err(BaileyError::WindowExhausted);
    }
    let l = bailey_l(e, n, ctx);
    let li = bailey_l_inverse(e, n, ctx)?;
    Ok(li.mul(&m.mul(&l)?)?.restrict(n - 1))
}

/// Outcome of comparing two matrices or checking a pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowReport {
    /// `(row, column, mismatch)` of the first disagreement; `None` means equal.
    pub first_mismatch: Option<(usize, usize, Mismatch)>,
}

impl WindowReport {
    pub fn passed(&self) -> bool {
        self.first_mismatch.is_none()
    }
}

/// Compares `L(a)^{-1} M L(a)` against the closed-form [`tilde_matrix`].
pub fn conjugate_check(
    which: Tilde,
    e: u64,
    n_max: usize,
    ctx: Ctx,
) -> Result<WindowReport, BaileyError> {
    let conj = conjugate(&move_matrix(which, n_max + 1, ctx), e, ctx)?;
    let closed = tilde_matrix(which, e, n_max, ctx)?;
    Ok(WindowReport {
        first_mismatch: conj.first_mismatch(&closed)?,
    })
}

/// A finite prefix `(alpha_n, beta_n)`, `n = 0..=n_max`, relative to `a = q^e`.
#[derive(Clone, Debug)]
pub struct BaileyPair {
    pub base_exp: u64,
    pub alpha: Vec<QSeries>,
    pub beta: Vec<QSeries>,
}

impl BaileyPair {
    pub fn n_max(&self) -> usize {
        self.alpha.len() - 1
    }

    /// The pair with `beta = L(a) alpha`.
    pub fn from_alpha(base_exp: u64, alpha: Vec<QSeries>, ctx: Ctx) -> Result<Self, BaileyError> {
        let l = bailey_l(base_exp, alpha.len() - 1, ctx);
        let beta = l.apply(&alpha)?;
        Ok(BaileyPair {
            base_exp,
            alpha,
            beta,
        })
    }

    fn require_base(&self, e: u64) -> Result<(), BaileyError> {
        if self.base_exp == e {
            Ok(())
        } else {
            Err(BaileyError::WrongBase {
                expected: e,
                found: self.base_exp,
            })
        }
    }
}

/// Slater's pair B(3) relative to `a = q`.
pub fn seed_b3(n_max: usize, ctx: Ctx) -> BaileyPair {
    let plain = ctx.with_aux(AuxSymbol::None);
    let mut alpha = Vec::with_capacity(n_max + 1);
    let mut beta = Vec::with_capacity(n_max + 1);
    let mut b = QSeries::one(plain);
    for n in 0..=n_max as i64 {
        if n > 0 {
            b.div_one_minus(&MonomialSpec::q_power(plain.q(n as u64)))
                .expect("unit");
        }
        beta.push(b.clone());
        // (1 - q^{2n+1}) / (1 - q) = 1 + q + ... + q^{2n}
        let geo: Vec<(i64, i64)> = (0..=2 * n).map(|j| (1, j)).collect();
        let a = poly(plain, &geo).shift(plain.q(((3 * n * n + n) / 2) as u64) as usize);
        alpha.push(signed(a, n % 2 == 1));
    }
    BaileyPair {
        base_exp: 1,
        alpha,
        beta,
    }
}

/// Outcome of [`check_pair`]: the first index `n` whose defining relation fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairReport {
    pub first_failure: Option<(usize, Mismatch)>,
}

impl PairReport {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
    }
}

/// Checks `beta_n = sum_r alpha_r / ((q)_{n-r} (aq)_{n+r})` for every `n` in the window.
pub fn check_pair(p: &BaileyPair, ctx: Ctx) -> Result<PairReport, BaileyError> {
    let l = bailey_l(p.base_exp, p.n_max(), ctx);
    let lhs = l.apply(&p.alpha)?;
    for (n, (want, got)) in lhs.iter().zip(&p.beta).enumerate() {
        if let Some(m) = got.first_mismatch(want)? {
            return Ok(PairReport {
                first_failure: Some((n, m)),
            });
        }
    }
    Ok(PairReport {
        first_failure: None,
    })
}

fn q_poch(n: u64, ctx: Ctx) -> QSeries {
    poch_q_finite(n, ctx.with_aux(AuxSymbol::None))
}

/// Move F relative to `a = q`.
pub fn apply_move_f(p: &BaileyPair, ctx: Ctx) -> Result<BaileyPair, BaileyError> {
    p.require_base(1)?;
    let g = ctx.grain as u64;
    let alpha = p
        .alpha
        .iter()
        .enumerate()
        .map(|(n, a)| signed(a.shift((g * tri(n as i64) as u64) as usize), n % 2 == 1))
        .collect();
    let n_max = p.n_max();
    let mut beta = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let mut acc = QSeries::zero(p.beta[0].ctx());
        for r in 0..=n {
            // (q)_r / (q)_{n-r}, then the common 1/(q)_n
            let w = q_poch(r as u64, ctx).try_div(&q_poch((n - r) as u64, ctx))?;
            let w = signed(w.shift((g * tri(r as i64) as u64) as usize), r % 2 == 1);
            acc = acc.try_add(&w.try_mul(&p.beta[r])?)?;
        }
        beta.push(acc.try_div(&q_poch(n as u64, ctx))?);
    }
    Ok(BaileyPair {
        base_exp: 1,
        alpha,
        beta,
    })
}

/// Move Fw relative to `a = q`; the context must carry the auxiliary symbol required by `w`.
pub fn apply_move_fw(p: &BaileyPair, w: WMode, ctx: Ctx) -> Result<BaileyPair, BaileyError> {
    p.require_base(1)?;
    let ctx = ctx.with_aux(w.aux());
    w.check_ctx(ctx)?;
    let g = ctx.grain as u64;
    let n_max = p.n_max();
    let wp: Vec<QSeries> = (0..=n_max as u64)
        .map(|n| w_poch(w, n, ctx))
        .collect::<Result<_, _>>()?;
    let den: Vec<QSeries> = (0..=n_max as u64)
        .map(|n| neg_wq_poch(w, n, ctx))
        .collect::<Result<_, _>>()?;
    let mut alpha = Vec::with_capacity(n_max + 1);
    let mut beta = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let f = wp[n].shift((g * tri(n as i64) as u64) as usize);
        alpha.push(f.try_mul(&p.alpha[n])?.try_div(&den[n])?);
        let mut acc = QSeries::zero(ctx);
        for r in 0..=n {
            let w = wp[r].shift((g * tri(r as i64) as u64) as usize);
            let w = w.try_div(&q_poch((n - r) as u64, ctx))?;
            acc = acc.try_add(&w.try_mul(&p.beta[r])?)?;
        }
        beta.push(acc.try_div(&den[n])?);
    }
    Ok(BaileyPair {
        base_exp: 1,
        alpha,
        beta,
    })
}

/// The coefficients `f, g, h, k` of move U at index `n`.
pub fn move_u_coefficients(n: usize, ctx: Ctx) -> [QSeries; 4] {
    let n = n as i64;
    let zero = QSeries::zero(ctx.with_aux(AuxSymbol::None));
    let f = match n {
        0 => over(poly(ctx, &[(1, 0)]), &[1, 2]),
        1 => over(poly(ctx, &[(-1, 1)]), &[1, 1]),
        _ => signed(
            over(
                poly(ctx, &[(1, tri(n)), (-1, tri(n) + 2 * n + 1)]),
                &[1, n, n + 1],
            ),
            n % 2 == 1,
        ),
    };
    let g = if n <= 1 {
        zero.clone()
    } else {
        over(poly(ctx, &[(1, 4 * n - 1)]), &[2 * n, 2 * n - 1])
    };
    let h = if n == 0 {
        zero
    } else {
        over(
            poly(ctx, &[(-1, 2 * n), (-1, 2 * n + 1)]),
            &[2 * n, 2 * n + 2],
        )
    };
    let k = over(poly(ctx, &[(1, 0)]), &[2 * n + 2, 2 * n + 3]);
    [f, g, h, k]
}

/// Move U relative to `a = q`; the window shrinks by one.
pub fn apply_move_u(p: &BaileyPair, ctx: Ctx) -> Result<BaileyPair, BaileyError> {
    p.require_base(1)?;
    if p.n_max() == 0 {
        return Err(BaileyError::WindowExhausted);
    }
    let n_new = p.n_max() - 1;
    let mut alpha = Vec::with_capacity(n_new + 1);
    for n in 0..=n_new {
        let [f, g, h, k] = move_u_coefficients(n, ctx);
        let mut acc = f.try_mul(&p.alpha[0])?;
        if n >= 1 {
            acc = acc.try_add(&g.try_mul(&p.alpha[n - 1])?)?;
        }
        acc = acc.try_add(&h.try_mul(&p.alpha[n])?)?;
        acc = acc.try_add(&k.try_mul(&p.alpha[n + 1])?)?;
        alpha.push(acc);
    }
    Ok(BaileyPair {
        base_exp: 1,
        alpha,
        beta: p.beta[1..].to_vec(),
    })
}

/// `1/(1 + q^m)` as a unit series.
fn inv_one_plus(m: i64, ctx: Ctx) -> QSeries {
    poly(ctx, &[(1, 0), (1, m)]).invert_unit().expect("unit")
}

/// Move S relative to `a = q`; the window shrinks by one.
pub fn apply_move_s(p: &BaileyPair, ctx: Ctx) -> Result<BaileyPair, BaileyError> {
    p.require_base(1)?;
    if p.n_max() == 0 {
        return Err(BaileyError::WindowExhausted);
    }
    let n_new = p.n_max() - 1;
    let mut alpha = Vec::with_capacity(n_new + 1);
    let c0 = inv_one_plus(1, ctx);
    let c1 = over(poly(ctx, &[(1, 0), (-1, 1)]), &[3]).try_mul(&c0)?;
    alpha.push(
        c0.try_mul(&p.alpha[0])?
            .try_add(&c1.try_mul(&p.alpha[1])?)?,
    );
    for n in 1..=n_new as i64 {
        let u = n as usize;
        let lo = over(poly(ctx, &[(1, 2 * n - 1), (-1, 3 * n - 1)]), &[2 * n - 1])
            .try_mul(&inv_one_plus(n, ctx))?;
        let mid = poly(ctx, &[(2, n)])
            .try_mul(&inv_one_plus(n, ctx))?
            .try_mul(&inv_one_plus(n + 1, ctx))?;
        let hi = over(poly(ctx, &[(1, 0), (-1, n + 1)]), &[2 * n + 3])
            .try_mul(&inv_one_plus(n + 1, ctx))?;
        let acc = lo
            .try_mul(&p.alpha[u - 1])?
            .try_add(&mid.try_mul(&p.alpha[u])?)?
            .try_add(&hi.try_mul(&p.alpha[u + 1])?)?;
        alpha.push(acc);
    }
    let beta = (0..=n_new as i64)
        .map(|n| poly(ctx, &[(1, 0), (-2, n + 1), (1, 2 * n + 2)]).try_mul(&p.beta[n as usize + 1]))
        .collect::<Result<_, _>>()?;
    Ok(BaileyPair {
        base_exp: 1,
        alpha,
        beta,
    })
}

/// The move taking a pair relative to `a = 1` with `alpha_0 = beta_0 = 0` to a
/// pair relative to `a = q`; the window shrinks by one.
pub fn apply_move_lo(p: &BaileyPair, ctx: Ctx) -> Result<BaileyPair, BaileyError> {
    p.require_base(0)?;
    if !p.alpha[0].is_zero() || !p.beta[0].is_zero() {
        return Err(BaileyError::Precondition(
            "alpha_0 and beta_0 must vanish".into(),
        ));
    }
    if p.n_max() == 0 {
        return Err(BaileyError::WindowExhausted);
    }
    let n_new = p.n_max() - 1;
    let mut alpha = Vec::with_capacity(n_new + 1);
    for n in 0..=n_new as i64 {
        let u = n as usize;
        let mut acc = over(p.alpha[u + 1].clone(), &[2 * n + 2]);
        if n > 0 {
            let lower = over(p.alpha[u].shift(ctx.q(2 * n as u64) as usize), &[2 * n]);
            acc = acc.try_sub(&lower)?;
        }
        alpha.push(over(acc, &[1]));
    }
    Ok(BaileyPair {
        base_exp: 1,
        alpha,
        beta: p.beta[1..].to_vec(),
    })
}

/// Runs the move schedule for `t = 2k` (even) or `t = 2k - 1` (odd) starting from B(3).
/// The returned pair covers `0..=n_max`.
pub fn pipeline(
    k: usize,
    i: usize,
    parity: Parity,
    w: WMode,
    n_max: usize,
    ctx: Ctx,
) -> Result<BaileyPair, BaileyError> {
    parity.check(k, i)?;
    let t = parity.t(k);
    let ctx = ctx.with_aux(w.aux());
    w.check_ctx(ctx)?;
    let plain = ctx.with_aux(AuxSymbol::None);
    let mut p = if i == k {
        let mut p = seed_b3(n_max, plain);
        for _ in 0..t - 2 {
            p = apply_move_f(&p, plain)?;
        }
        p
    } else {
        let lambda = k - i - 1;
        let mu = t - 2 - lambda;
        let mut p = seed_b3(n_max + 1, plain);
        for _ in 0..lambda {
            p = apply_move_f(&p, plain)?;
        }
        p = apply_move_s(&p, plain)?;
        for _ in 0..mu {
            p = apply_move_f(&p, plain)?;
        }
        p
    };
    p = apply_move_fw(&p, w, ctx)?;
    Ok(p)
}

/// The closed form of `alpha_n` produced by [`pipeline`].
pub fn alpha_closed_form(
    k: usize,
    i: usize,
    parity: Parity,
    n: u64,
    w: WMode,
    ctx: Ctx,
) -> Result<QSeries, BaileyError> {
    parity.check(k, i)?;
    let ctx = ctx.with_aux(w.aux());
    w.check_ctx(ctx)?;
    let t = parity.t(k) as u64;
    let g = ctx.grain as u64;
    // (mu - lambda - 2i) is 0 for even t and -1 for odd t
    let exp2 = match parity {
        Parity::Even => (t + 2) * n * n,
        Parity::Odd => (t + 2) * n * n - n,
    };
    let negative = ((t + 1) * n + (k - i) as u64) % 2 == 1;
    let mut x = bracket(k, i, n, ctx).shift((g * exp2 / 2) as usize);
    x.div_one_minus(&MonomialSpec::q_power(g))?;
    let x = signed(x, negative);
    Ok(w_poch(w, n, ctx)?
        .try_mul(&x)?
        .try_div(&neg_wq_poch(w, n, ctx)?)?)
}

/// For each `n` in the pipeline window, the number of leading coefficients on
/// which `beta_n` agrees with its limit `(q)_inf^{t-1} D / (-wq)_inf`.
pub fn beta_agreement_orders(
    k: usize,
    i: usize,
    parity: Parity,
    w: WMode,
    n_max: usize,
    ctx: Ctx,
) -> Result<Vec<usize>, BaileyError> {
    let ctx = ctx.with_aux(w.aux());
    let pair = pipeline(k, i, parity, w, n_max, ctx)?;
    let t = parity.t(k);
    let d = crate::nahm::d_series(&NahmSpec::new(t, parity.s(k, i), w), ctx)?;
    let qinf = crate::series::poch_q_infinite(ctx.with_aux(AuxSymbol::None));
    let limit = d
        .try_mul(&qinf.pow((t - 1) as u32))?
        .try_div(&neg_wq_poch_infinite(w, ctx)?)?;
    pair.beta
        .iter()
        .map(|b| Ok(b.agreement_order(&limit)?))
        .collect()
}
