//! Numerical laboratory for the measurement process in local quantum theory.

pub mod amplifier;
pub mod epr;
pub mod error;
pub mod linalg;
pub mod localnet;
pub mod measurement;
pub mod quantum;
pub mod random;
pub mod spacetime;

pub use error::{Error, Result};
