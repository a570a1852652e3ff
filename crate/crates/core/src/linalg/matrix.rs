use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::{check_capacity, product_dim, StateVector, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Dense square operator on a composite space, stored row-major.
///
/// `factor_dims` records the tensor structure; its product is always `dim`.
/// Complex entries serialize as `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOperator")]
pub struct OperatorMatrix {
    dim: usize,
    factor_dims: Vec<usize>,
    entries: Vec<C64>,
}

#[derive(Deserialize)]
struct RawOperator {
    factor_dims: Vec<usize>,
    entries: Vec<C64>,
}

impl TryFrom<RawOperator> for OperatorMatrix {
    type Error = Error;

    fn try_from(raw: RawOperator) -> Result<Self> {
        OperatorMatrix::new(raw.factor_dims, raw.entries)
    }
}

impl OperatorMatrix {
    pub fn new(factor_dims: Vec<usize>, entries: Vec<C64>) -> Result<Self> {
        if factor_dims.is_empty() {
            return Err(Error::arg("operator needs at least one factor"));
        }
        let dim = product_dim("operator", &factor_dims)?;
        check_capacity("operator", (dim as u128) * (dim as u128))?;
        if entries.len() != dim * dim {
            return Err(Error::arg(format!(
                "operator of dim {dim} needs {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Ok(Self {
            dim,
            factor_dims,
            entries,
        })
    }

    /// Builds a single-factor operator from rows.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::arg("rows do not form a square matrix"));
        }
        Self::new(vec![dim.max(1)], rows.iter().flatten().copied().collect())
    }

    /// Single-factor operator from real row-major entries.
    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        Self::new(vec![dim], entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_fn(factor_dims: Vec<usize>, mut f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        let dim = product_dim("operator", &factor_dims)?;
        check_capacity("operator", (dim as u128) * (dim as u128))?;
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(f(i, j));
            }
        }
        Self::new(factor_dims, entries)
    }

    pub fn zeros(factor_dims: Vec<usize>) -> Result<Self> {
        Self::from_fn(factor_dims, |_, _| ZERO)
    }

    pub fn identity(factor_dims: Vec<usize>) -> Result<Self> {
        Self::from_fn(factor_dims, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn diagonal(factor_dims: Vec<usize>, diag: &[C64]) -> Result<Self> {
        let m = Self::from_fn(factor_dims, |i, j| if i == j { diag[i] } else { ZERO });
        if let Ok(ref m) = m {
            if diag.len() != m.dim {
                return Err(Error::arg("diagonal length does not match dimension"));
            }
        }
        m
    }

    /// Rank-one operator `|ket⟩⟨bra|`.
    pub fn outer(ket: &StateVector, bra: &StateVector) -> Result<Self> {
        if ket.dim() != bra.dim() {
            return Err(Error::arg("outer product of vectors with different dimensions"));
        }
        let (k, b) = (ket.amplitudes(), bra.amplitudes());
        Self::from_fn(ket.factor_dims().to_vec(), |i, j| k[i] * b[j].conj())
    }

    /// Projection onto a (normalized) vector.
    pub fn projector(v: &StateVector) -> Result<Self> {
        Self::outer(v, v)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    #[inline]
    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.entries[i * self.dim + j] = v;
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    /// Column `j` as an unnormalized vector over the same factors.
    pub fn column(&self, j: usize) -> StateVector {
        let amps = (0..self.dim).map(|i| self.get(i, j)).collect();
        StateVector::unnormalized(self.factor_dims.clone(), amps)
            .expect("column of a valid operator")
    }

    /// Same entries, different tensor bookkeeping.
    pub fn with_factor_dims(mut self, factor_dims: Vec<usize>) -> Result<Self> {
        let dim = product_dim("operator", &factor_dims)?;
        if dim != self.dim {
            return Err(Error::arg(format!(
                "factor dims {factor_dims:?} do not multiply to {}",
                self.dim
            )));
        }
        self.factor_dims = factor_dims;
        Ok(self)
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut entries = vec![ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[j * n + i] = self.entries[i * n + j].conj();
            }
        }
        Self {
            dim: n,
            factor_dims: self.factor_dims.clone(),
            entries,
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Largest entry modulus, `‖·‖_max`.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `‖self − self†‖_max`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub(crate) fn require_hermitian(&self, what: &str, tol: f64) -> Result<()> {
        let defect = self.hermiticity_defect();
        if defect > tol {
            return Err(Error::arg(format!(
                "{what} is not Hermitian (‖h − h†‖_max = {defect:e})"
            )));
        }
        Ok(())
    }

    /// `‖U†U − I‖_max`.
    pub fn unitarity_defect(&self) -> f64 {
        let g = self.adjoint().matmul(self).expect("square");
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let target = if i == j { ONE } else { ZERO };
                worst = worst.max((g.get(i, j) - target).norm());
            }
        }
        worst
    }

    /// `(self + self†)/2`.
    pub fn hermitian_part(&self) -> Self {
        let adj = self.adjoint();
        self.zip_with(&adj, |a, b| (a + b) * 0.5)
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::arg(format!(
                "matrix product of dims {} and {}",
                self.dim, rhs.dim
            )));
        }
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            let row = &mut out[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.entries[i * n + k];
                // Embedded local operators are mostly zeros.
                if a == ZERO {
                    continue;
                }
                let rrow = &rhs.entries[k * n..(k + 1) * n];
                for (o, &b) in row.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        Ok(Self {
            dim: n,
            factor_dims: self.factor_dims.clone(),
            entries: out,
        })
    }

    /// `[self, rhs] = self·rhs − rhs·self`.
    pub fn commutator(&self, rhs: &Self) -> Result<Self> {
        Ok(&self.matmul(rhs)? - &rhs.matmul(self)?)
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        if v.dim() != self.dim {
            return Err(Error::arg(format!(
                "operator of dim {} applied to vector of dim {}",
                self.dim,
                v.dim()
            )));
        }
        let n = self.dim;
        let amps = v.amplitudes();
        let out = (0..n)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(amps)
                    .map(|(a, b)| a * b)
                    .sum::<C64>()
            })
            .collect();
        StateVector::unnormalized(self.factor_dims.clone(), out)
    }

    /// `⟨v, self v⟩`.
    pub fn expectation(&self, v: &StateVector) -> Result<C64> {
        Ok(v.inner(&self.apply(v)?))
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            dim: self.dim,
            factor_dims: self.factor_dims.clone(),
            entries: self.entries.iter().map(|&z| f(z)).collect(),
        }
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        assert_eq!(
            self.dim, rhs.dim,
            "elementwise operation on operators of different dimension"
        );
        Self {
            dim: self.dim,
            factor_dims: self.factor_dims.clone(),
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Largest entrywise distance to `rhs`.
    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        assert_eq!(self.dim, rhs.dim, "comparing operators of different dimension");
        self.entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub(crate) fn to_nalgebra(&self) -> nalgebra::DMatrix<C64> {
        nalgebra::DMatrix::from_row_slice(self.dim, self.dim, &self.entries)
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: Self) -> OperatorMatrix {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: Self) -> OperatorMatrix {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn neg(self) -> OperatorMatrix {
        self.map(|z| -z)
    }
}

/// Matrix product; panics on dimension mismatch (use [`OperatorMatrix::matmul`] to get an error).
impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: Self) -> OperatorMatrix {
        self.matmul(rhs).expect("operator dimensions must agree")
    }
}
