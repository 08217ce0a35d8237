//! Exact truncated q-series arithmetic and the classical building blocks:
//! Pochhammer symbols, the Jacobi triple product, Rogers' false theta
//! function and auxiliary-symbol specializations.

mod aux;
mod products;
mod qseries;

pub use aux::{AuxPoly, AuxSymbol};
pub use products::{
    andrews_zeta_rhs, aux_specialize, false_theta_psi, jacobi_triple_product, poch_finite,
    poch_infinite, poch_infinite_inverse, poch_infinite_step, poch_q_finite, poch_q_infinite,
    sgn_star, w_shifted_poch, zeta_coefficient, AndrewsLemma, AuxValue,
};
pub use qseries::{Ctx, Mismatch, MonomialSpec, QSeries};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("grain mismatch: {0} vs {1}")]
    GrainMismatch(u32, u32),
    #[error("auxiliary symbol conflict: {0} vs {1}")]
    AuxConflict(AuxSymbol, AuxSymbol),
    #[error("exponent {exponent} not allowed for auxiliary symbol {symbol}")]
    AuxExponent { symbol: AuxSymbol, exponent: i64 },
    #[error("series is not a unit (constant term must be exactly 1)")]
    NotAUnit,
    #[error("infinite product (1 - z q^i) diverges: z has no positive q-power or auxiliary part")]
    DivergentProduct,
    #[error("bilateral sum diverges: total q-exponent must be positive")]
    DivergentSum,
    #[error("grain error: {0}")]
    GrainError(String),
    #[error("cannot specialize a series with auxiliary symbol {0}")]
    BadSpecialization(AuxSymbol),
}
