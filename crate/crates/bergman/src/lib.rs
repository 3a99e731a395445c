//! Symbolic-numeric toolkit for near-diagonal Bergman kernel expansions.
//!
//! The crate computes the coefficient functions of the semiclassical Bergman
//! kernel expansion for real-analytic (and Gevrey-class) Kähler potentials
//! given as power-series jets, validates them against exact-kernel oracles,
//! and certifies the factorial growth of the coefficient derivatives through
//! an exact majorant recursion.

pub mod asymptotics;
pub mod bbs;
pub mod error;
pub mod gevrey;
pub mod growth;
pub mod jet;
pub mod oracle;
pub mod potential;
pub mod quad;
pub mod scalar;

pub use error::{Error, Result};
