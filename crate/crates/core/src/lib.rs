//! Numerical verification of a Sobolev–Morrey interpolation inequality and of
//! the bump-train counterexample showing its exponent range is sharp.
//!
//! * [`paramlab`] validates `(d, p, q, q1)` and carries the exponent algebra.
//! * [`bumptrain`] builds the one-dimensional bump trains and their norms.
//! * [`maxops`] holds grid fields, maximal operators and the inequality checks.
//! * [`cex`] assembles the counterexample family and fits its scaling laws.

pub mod bumptrain;
pub mod cex;
pub mod error;
pub mod export;
pub mod fit;
pub mod maxops;
pub mod paramlab;
pub mod quad;

pub use error::{Error, Result};
