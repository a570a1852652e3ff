//! Dense complex linear algebra over composite Hilbert spaces.
//!
//! Every matrix and vector carries its tensor-factor dimensions so that
//! embeddings, partial traces and local applications can address factors by
//! index. Storage is dense and row-major; the size of any single object is
//! bounded by a process-wide capacity (see [`set_max_entries`]).

mod eig;
mod matrix;
mod state;
mod tensor;

use std::sync::atomic::{AtomicUsize, Ordering};

pub use num_complex::Complex64 as C64;

pub use eig::{
    complete_unitary, eig_hermitian, expm_i_hermitian, log_unitary, singular_values,
    HermitianEigen,
};
pub use matrix::OperatorMatrix;
pub use state::{orthonormality_defect, StateVector, NORM_TOL};
pub use tensor::{
    apply_local, kron, kron_all, partial_trace, permute_factors, reduced_density, FactorLayout,
};
pub(crate) use tensor::cross_reduced;

use crate::error::{Error, Result};

/// Default limit on the number of complex entries in one matrix or vector.
pub const DEFAULT_MAX_ENTRIES: usize = 1 << 20;

static MAX_ENTRIES: AtomicUsize = AtomicUsize::new(DEFAULT_MAX_ENTRIES);

/// Current capacity limit (entries per dense object).
pub fn max_entries() -> usize {
    MAX_ENTRIES.load(Ordering::Relaxed)
}

/// Sets the capacity limit; returns the previous value.
pub fn set_max_entries(limit: usize) -> usize {
    MAX_ENTRIES.swap(limit.max(1), Ordering::Relaxed)
}

pub(crate) fn check_capacity(what: &str, required: u128) -> Result<()> {
    let limit = max_entries();
    if required > limit as u128 {
        return Err(Error::Capacity {
            what: what.to_string(),
            required,
            limit,
        });
    }
    Ok(())
}

/// Product of factor dimensions, with overflow reported as a capacity error.
pub(crate) fn product_dim(what: &str, factor_dims: &[usize]) -> Result<usize> {
    let mut acc: u128 = 1;
    for &d in factor_dims {
        if d == 0 {
            return Err(Error::arg(format!("{what}: factor dimension 0")));
        }
        acc = acc.saturating_mul(d as u128);
        if acc > u64::MAX as u128 {
            break;
        }
    }
    if acc > usize::MAX as u128 {
        return Err(Error::Capacity {
            what: what.to_string(),
            required: acc,
            limit: max_entries(),
        });
    }
    Ok(acc as usize)
}

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
