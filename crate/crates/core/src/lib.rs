//! Fractal shear flows `u = lim u_m` with prescribed Hölder exponent, and the
//! mixing and dissipation experiments built on them.
//!
//! * [`flow`]: construction of the piecewise-linear approximants `u_m`, grid
//!   classification, stream functions.
//! * [`oscint`]: exact oscillatory integrals `∫ e^{i t u_m} φ`.
//! * [`mixing`]: inviscid evolution of shear modes and `H^{-1}` mixing norms.
//! * [`viscous`]: split-step simulation of `∂_t f + i k u f = ν ∂_yy f`.
//! * [`pseudospec`]: windowed affine deficit `ω_1(δ)` of the stream function.
//! * [`xlab`]: power-law fits, experiment configs and result bundles.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod flow;
pub mod numeric;
pub mod mixing;
pub mod oscint;
pub mod pseudospec;
mod par;
pub mod viscous;
pub mod xlab;

pub use error::{Error, Result};
pub use flow::{build, FlowParams, PiecewiseLinearFlow};
