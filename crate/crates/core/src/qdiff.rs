//! The series `theta_{k,i}(x,q)` and `phi_{k,i}(x,q)` and the q-difference
//! systems `theta(x) = A(x,q) theta(qx)`, `phi(x) = B(x,q) phi(qx)`.

use num_bigint::BigInt;
use thiserror::Error;

use crate::series::{aux_specialize, AuxSymbol, AuxValue, Ctx, Mismatch, QSeries, SeriesError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QDiffError {
    #[error("need k >= 1 and 0 <= i <= k, got k = {k}, i = {i}")]
    Range { k: usize, i: usize },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SystemKind {
    Theta,
    Phi,
}

/// `sum x^{N_1+...+N_k} q^{N_1^2+...+N_k^2 + N_{k-i+1}+...+N_k} / prod (q)_{n_j}`
/// with `N_t = n_t + ... + n_k`; for [`SystemKind::Phi`] the last Pochhammer is squared.
fn chain(kind: SystemKind, k: usize, i: usize, ctx: Ctx) -> Result<QSeries, QDiffError> {
    if k == 0 || i > k {
        return Err(QDiffError::Range { k, i });
    }
    let ctx = ctx.with_aux(AuxSymbol::X);
    let plain = ctx.with_aux(AuxSymbol::None);
    let g = ctx.grain as u64;
    let mut width = 0usize;
    while g * (width * width) as u64 <= ctx.order as u64 {
        width += 1;
    }
    let inv = crate::nahm::inverse_pochs(width, plain);
    let linear = |j: usize| u64::from(j + i > k);
    // x^N q^{N^2 + eps N}
    let weight = |j: usize, n: usize| -> QSeries {
        let n64 = n as u64;
        QSeries::monomial(
            ctx,
            BigInt::from(1),
            g * (n64 * n64 + linear(j) * n64),
            n as i64,
        )
        .expect("x monomial")
    };
    let mut h: Vec<QSeries> = (0..width)
        .map(|n| {
            let mut x = weight(k, n).try_mul(&inv[n])?;
            if kind == SystemKind::Phi {
                x = x.try_mul(&inv[n])?;
            }
            Ok(x)
        })
        .collect::<Result<_, SeriesError>>()?;
    for j in (1..k).rev() {
        let mut next = Vec::with_capacity(width);
        for n in 0..width {
            let mut acc = QSeries::zero(ctx);
            for (np, hn) in h.iter().enumerate().take(n + 1) {
                acc = acc.try_add(&hn.try_mul(&inv[n - np])?)?;
            }
            next.push(acc.try_mul(&weight(j, n))?);
        }
        h = next;
    }
    let mut out = QSeries::zero(ctx);
    for x in &h {
        out = out.try_add(x)?;
    }
    Ok(out)
}

/// `theta_{k,i}(x, q)`.
pub fn theta_series(k: usize, i: usize, ctx: Ctx) -> Result<QSeries, QDiffError> {
    chain(SystemKind::Theta, k, i, ctx)
}

/// `phi_{k,i}(x, q)`.
pub fn phi_series(k: usize, i: usize, ctx: Ctx) -> Result<QSeries, QDiffError> {
    chain(SystemKind::Phi, k, i, ctx)
}

/// A `(k+1) x (k+1)` system with polynomial entries in `x` and `q`.
#[derive(Clone, Debug)]
pub struct DifferenceSystem {
    pub kind: SystemKind,
    pub k: usize,
    pub matrix: Vec<Vec<QSeries>>,
}

/// `c x^d q^d`.
fn xq_power(c: i64, d: usize, ctx: Ctx) -> QSeries {
    QSeries::monomial(ctx, BigInt::from(c), ctx.q(d as u64), d as i64).expect("x monomial")
}

impl DifferenceSystem {
    pub fn new(kind: SystemKind, k: usize, ctx: Ctx) -> Result<Self, QDiffError> {
        if k == 0 {
            return Err(QDiffError::Range { k, i: 0 });
        }
        let ctx = ctx.with_aux(AuxSymbol::X);
        let matrix = (0..=k)
            .map(|r| {
                (0..=k)
                    .map(|c| match kind {
                        // staircase of (xq)^c
                        SystemKind::Theta if c <= k - r => xq_power(1, c, ctx),
                        SystemKind::Theta => QSeries::zero(ctx),
                        SystemKind::Phi if c == 0 => {
                            QSeries::constant(ctx, BigInt::from(k + 1 - r))
                        }
                        SystemKind::Phi if c + r <= k => {
                            // -(k+1-r-c)(1 - xq)(xq)^{c-1}
                            let m = (k + 1 - r - c) as i64;
                            xq_power(-m, c - 1, ctx)
                                .try_add(&xq_power(m, c, ctx))
                                .expect("same context")
                        }
                        SystemKind::Phi => QSeries::zero(ctx),
                    })
                    .collect()
            })
            .collect();
        Ok(DifferenceSystem { kind, k, matrix })
    }

    /// The solution vector `(f_{k,0}, ..., f_{k,k})`.
    pub fn vector(&self, ctx: Ctx) -> Result<Vec<QSeries>, QDiffError> {
        (0..=self.k)
            .map(|i| chain(self.kind, self.k, i, ctx))
            .collect()
    }
}

/// First row of the system that fails, with the mismatching coefficient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemReport {
    pub first_mismatch: Option<(usize, Mismatch)>,
}

impl SystemReport {
    pub fn passed(&self) -> bool {
        self.first_mismatch.is_none()
    }
}

/// Checks `f(x) = M(x,q) f(qx)` componentwise to the order of `ctx`, modulo `x^{cap+1}`.
pub fn verify_system(
    kind: SystemKind,
    k: usize,
    ctx: Ctx,
    cap: i64,
) -> Result<SystemReport, QDiffError> {
    let system = DifferenceSystem::new(kind, k, ctx)?;
    let v: Vec<QSeries> = system
        .vector(ctx)?
        .iter()
        .map(|s| s.truncate_aux_degree(cap))
        .collect();
    let shifted: Vec<QSeries> = v
        .iter()
        .map(|s| aux_specialize(s, AuxValue::QShift))
        .collect::<Result<_, _>>()?;
    for (r, row) in system.matrix.iter().enumerate() {
        let mut rhs = QSeries::zero(v[r].ctx());
        for (m, s) in row.iter().zip(&shifted) {
            if !m.is_zero() {
                rhs = rhs.try_add(&m.try_mul(s)?.truncate_aux_degree(cap))?;
            }
        }
        if let Some(mm) = v[r].first_mismatch(&rhs)? {
            return Ok(SystemReport {
                first_mismatch: Some((r, mm)),
            });
        }
    }
    Ok(SystemReport {
        first_mismatch: None,
    })
}
