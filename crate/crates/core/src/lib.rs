//! Exact q-series and certified-precision analytics for reciprocals of
//! Eisenstein series.
//!
//! The crate computes the Fourier coefficients beta_k(n) of 1/E_k exactly
//! in big-rational arithmetic, evaluates the series at points inside the
//! unit disc with certified error bounds, locates the zeros of E_k on the
//! boundary arc of the fundamental domain, and verifies the asymptotic
//! laws, two-term sandwich bounds, and sign statistics that those zeros
//! control.
//!
//! - [`qseries`]: Bernoulli numbers, divisor sums, dense rational power series
//! - [`eisenstein`]: E_k q-expansions and the small-weight identities
//! - [`bigfloat`]: certified arbitrary-precision real/complex arithmetic
//! - [`analytic`]: series evaluation with certified truncation error
//! - [`zeros`]: arc zeros of E_k and the largest-imaginary-part zero
//! - [`bounds`]: two-term recurrences sandwiching beta_k(n) for k ≡ 2 (mod 4)
//! - [`asymptotics`]: ratio limits, residual sequences, sign statistics
//! - [`tables`]: golden-value reproduction of the reference tables

pub mod analytic;
pub mod asymptotics;
pub mod bigfloat;
pub mod bounds;
pub mod eisenstein;
pub mod error;
pub mod format;
pub mod qseries;
pub mod tables;
pub mod zeros;

pub use error::{Error, Result};
