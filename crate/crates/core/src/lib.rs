//! Relative-state calculus for quantum reference systems, and the
//! two-particle spin-measurement scenarios built on it.
//!
//! - [`linalg`]: labeled tensor spaces, partial traces, Hermitian spectra.
//! - [`calculus`]: states relative to a reference system, candidate internal
//!   states, and joint probabilities over disjoint subsystems.
//! - [`bell`]: the entangled pair, local measurement dynamics, correlation
//!   tables, the ancilla extension and CHSH evaluation.

// Index loops mirror the subscripted formulas.
#![allow(clippy::needless_range_loop)]

pub mod bell;
pub mod calculus;
pub mod error;
pub mod linalg;

pub use error::{Error, Result};
