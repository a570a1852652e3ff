use serde::{Deserialize, Serialize};

use super::{check_capacity, product_dim, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Tolerance on the norm of vectors flagged as normalized.
pub const NORM_TOL: f64 = 1e-12;

/// Dense vector over a composite space.
///
/// Normalized vectors have unit Euclidean norm within [`NORM_TOL`];
/// intermediates that are not normalized carry `normalized == false`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawState")]
pub struct StateVector {
    factor_dims: Vec<usize>,
    amplitudes: Vec<C64>,
    normalized: bool,
}

#[derive(Deserialize)]
struct RawState {
    factor_dims: Vec<usize>,
    amplitudes: Vec<C64>,
    #[serde(default = "yes")]
    normalized: bool,
}

fn yes() -> bool {
    true
}

impl TryFrom<RawState> for StateVector {
    type Error = Error;

    fn try_from(raw: RawState) -> Result<Self> {
        if raw.normalized {
            StateVector::new(raw.factor_dims, raw.amplitudes)
        } else {
            StateVector::unnormalized(raw.factor_dims, raw.amplitudes)
        }
    }
}

impl StateVector {
    /// A normalized vector; rejects amplitudes whose norm is not 1 within [`NORM_TOL`].
    pub fn new(factor_dims: Vec<usize>, amplitudes: Vec<C64>) -> Result<Self> {
        let v = Self::unnormalized(factor_dims, amplitudes)?;
        let norm = v.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::arg(format!("state vector has norm {norm}, expected 1")));
        }
        Ok(Self {
            normalized: true,
            ..v
        })
    }

    pub fn unnormalized(factor_dims: Vec<usize>, amplitudes: Vec<C64>) -> Result<Self> {
        if factor_dims.is_empty() {
            return Err(Error::arg("state vector needs at least one factor"));
        }
        let dim = product_dim("state vector", &factor_dims)?;
        check_capacity("state vector", dim as u128)?;
        if amplitudes.len() != dim {
            return Err(Error::arg(format!(
                "state of dim {dim} given {} amplitudes",
                amplitudes.len()
            )));
        }
        Ok(Self {
            factor_dims,
            amplitudes,
            normalized: false,
        })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized_from(factor_dims: Vec<usize>, amplitudes: Vec<C64>) -> Result<Self> {
        Self::unnormalized(factor_dims, amplitudes)?.normalize()
    }

    pub fn from_real(factor_dims: Vec<usize>, amplitudes: &[f64]) -> Result<Self> {
        Self::new(
            factor_dims,
            amplitudes.iter().map(|&x| C64::new(x, 0.0)).collect(),
        )
    }

    /// Canonical basis vector `|index⟩`.
    pub fn basis(factor_dims: Vec<usize>, index: usize) -> Result<Self> {
        let dim = product_dim("state vector", &factor_dims)?;
        check_capacity("state vector", dim as u128)?;
        if index >= dim {
            return Err(Error::arg(format!("basis index {index} out of range for dim {dim}")));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Self::new(factor_dims, amps)
    }

    /// Basis vector addressed by one digit per factor, e.g. `[1, 0, 1]` for `|101⟩`.
    pub fn basis_digits(factor_dims: Vec<usize>, digits: &[usize]) -> Result<Self> {
        if digits.len() != factor_dims.len() {
            return Err(Error::arg("one digit per factor required"));
        }
        let mut index = 0;
        for (&d, &dim) in digits.iter().zip(&factor_dims) {
            if d >= dim {
                return Err(Error::arg(format!("digit {d} out of range for factor of dim {dim}")));
            }
            index = index * dim + d;
        }
        Self::basis(factor_dims, index)
    }

    pub fn zeros(factor_dims: Vec<usize>) -> Result<Self> {
        let dim = product_dim("state vector", &factor_dims)?;
        Self::unnormalized(factor_dims, vec![ZERO; dim])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    #[inline]
    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    #[inline]
    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    #[inline]
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::arg("cannot normalize a zero or non-finite vector"));
        }
        let amplitudes = self.amplitudes.iter().map(|z| z / norm).collect();
        Ok(Self {
            factor_dims: self.factor_dims,
            amplitudes,
            normalized: true,
        })
    }

    /// Marks the vector normalized if its norm is within [`NORM_TOL`] of 1.
    pub fn assert_normalized(self) -> Result<Self> {
        Self::new(self.factor_dims, self.amplitudes)
    }

    /// `⟨self, other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> C64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn try_inner(&self, other: &Self) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::arg(format!(
                "inner product of dims {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(self.inner(other))
    }

    /// Tensor product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        let mut factor_dims = self.factor_dims.clone();
        factor_dims.extend_from_slice(&other.factor_dims);
        check_capacity(
            "state vector",
            self.dim() as u128 * other.dim() as u128,
        )?;
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amps.push(a * b);
            }
        }
        Ok(Self {
            factor_dims,
            amplitudes: amps,
            normalized: self.normalized && other.normalized,
        })
    }

    /// `v^{⊗n}`.
    pub fn kron_power(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::arg("tensor power needs n ≥ 1"));
        }
        let total = (self.dim() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        check_capacity("state vector", total)?;
        let mut out = self.clone();
        for _ in 1..n {
            out = out.kron(self)?;
        }
        Ok(out)
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            factor_dims: self.factor_dims.clone(),
            amplitudes: self.amplitudes.iter().map(|z| z * s).collect(),
            normalized: self.normalized && (s.norm() - 1.0).abs() <= NORM_TOL,
        }
    }

    /// `self + other`, unnormalized.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a - b)
    }

    fn combine(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::arg("adding vectors of different dimension"));
        }
        Self::unnormalized(
            self.factor_dims.clone(),
            self.amplitudes
                .iter()
                .zip(&other.amplitudes)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn with_factor_dims(mut self, factor_dims: Vec<usize>) -> Result<Self> {
        let dim = product_dim("state vector", &factor_dims)?;
        if dim != self.dim() {
            return Err(Error::arg("factor dims do not match vector dimension"));
        }
        self.factor_dims = factor_dims;
        Ok(self)
    }
}

/// `max_{j,k} |⟨v_j, v_k⟩ − δ_{jk}|`; infinite if dimensions disagree.
pub fn orthonormality_defect(vs: &[StateVector]) -> f64 {
    let mut worst = 0.0f64;
    for (j, a) in vs.iter().enumerate() {
        for (k, b) in vs.iter().enumerate().skip(j) {
            if a.dim() != b.dim() {
                return f64::INFINITY;
            }
            let target = if j == k { ONE } else { ZERO };
            worst = worst.max((a.inner(b) - target).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_is_checked() {
        assert!(StateVector::from_real(vec![2], &[1.0, 1.0]).is_err());
        let v = StateVector::normalized_from(vec![2], vec![ONE, ONE]).unwrap();
        assert!(v.is_normalized());
        assert!((v.norm() - 1.0).abs() < 1e-15);
        assert!(StateVector::zeros(vec![2]).unwrap().normalize().is_err());
    }

    #[test]
    fn basis_digits_address_factors() {
        let v = StateVector::basis_digits(vec![2, 2, 2], &[1, 0, 1]).unwrap();
        assert_eq!(v.amplitudes()[5], ONE);
        assert!(StateVector::basis_digits(vec![2, 2], &[2, 0]).is_err());
    }

    #[test]
    fn kron_power_layout() {
        let plus = StateVector::normalized_from(vec![2], vec![ONE, ONE]).unwrap();
        let p3 = plus.kron_power(3).unwrap();
        assert_eq!(p3.factor_dims(), &[2, 2, 2]);
        assert!(p3.amplitudes().iter().all(|z| (z.re - 8f64.sqrt().recip()).abs() < 1e-15));
        assert!(p3.is_normalized());
    }
}
