//! Darboux–Halphen system in several guises.
//!
//! The crate evaluates the system and its classical theta-function solution,
//! and cross-verifies it against Ramanujan's Eisenstein relations, the
//! Gauss–Manin connection of the Legendre-type elliptic family, self-dual
//! Bianchi IX metrics and the Chazy reduction of three-dimensional WDVV.
//!
//! Two numeric backends are used side by side: double-precision complex
//! arithmetic for evaluations and ODE integration, and exact truncated
//! q-series with arbitrary-precision rational coefficients
//! ([`qseries::PiGradedQSeries`]) for coefficient-level identities.

pub mod bianchi;
pub mod checks;
pub mod dh;
pub mod error;
pub mod frobenius;
pub mod gauss_manin;
pub mod ode;
pub mod qseries;
pub mod ramanujan;
pub mod scalar;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use num_rational::BigRational;

/// Library version embedded in verification reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
