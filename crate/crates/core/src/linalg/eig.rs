use std::f64::consts::PI;

use super::{OperatorMatrix, StateVector, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Input tolerance on `‖h − h†‖_max` for Hermitian routines.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Eigenpairs of a Hermitian operator, eigenvalues ascending.
///
/// Column `k` of `vectors` is the eigenvector for `values[k]`; each column is
/// phased so that its first largest-modulus component is real and positive.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: OperatorMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> StateVector {
        self.vectors.column(k)
    }

    /// `Σ_k f(λ_k) v_k v_k†`.
    pub fn reassemble(&self, f: impl Fn(f64) -> C64) -> OperatorMatrix {
        let n = self.values.len();
        let weights: Vec<C64> = self.values.iter().map(|&l| f(l)).collect();
        let v = &self.vectors;
        OperatorMatrix::from_fn(v.factor_dims().to_vec(), |i, j| {
            (0..n)
                .map(|k| v.get(i, k) * weights[k] * v.get(j, k).conj())
                .sum()
        })
        .expect("same shape as input")
    }

    /// Largest eigenvalue modulus (spectral norm of the source operator).
    pub fn spectral_radius(&self) -> f64 {
        self.values.iter().map(|l| l.abs()).fold(0.0, f64::max)
    }
}

/// Eigendecomposition of a Hermitian operator.
pub fn eig_hermitian(h: &OperatorMatrix) -> Result<HermitianEigen> {
    h.require_hermitian("eig_hermitian input", HERMITIAN_TOL)?;
    let n = h.dim();
    let eig = h.hermitian_part().to_nalgebra().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();

    let mut cols: Vec<Vec<C64>> = order
        .iter()
        .map(|&k| eig.eigenvectors.column(k).iter().copied().collect())
        .collect();
    for col in &mut cols {
        fix_phase(col);
    }
    let vectors = OperatorMatrix::from_fn(h.factor_dims().to_vec(), |i, j| cols[j][i])?;
    Ok(HermitianEigen { values, vectors })
}

fn fix_phase(col: &mut [C64]) {
    let max = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = col
        .iter()
        .find(|z| z.norm() >= max * (1.0 - 1e-9))
        .copied()
        .unwrap_or(ONE);
    let phase = pivot.conj() / pivot.norm();
    for z in col.iter_mut() {
        *z *= phase;
    }
}

/// `exp(i·t·h)` for Hermitian `h`, via eigendecomposition.
pub fn expm_i_hermitian(h: &OperatorMatrix, t: f64) -> Result<OperatorMatrix> {
    if t == 0.0 {
        h.require_hermitian("expm_i_hermitian input", HERMITIAN_TOL)?;
        return OperatorMatrix::identity(h.factor_dims().to_vec());
    }
    let eig = eig_hermitian(h)?;
    Ok(eig.reassemble(|l| C64::from_polar(1.0, l * t)))
}

/// Hermitian generator `g` with `exp(i g) == u` and eigenphases in `(−π, π]`.
///
/// The commuting Hermitian parts `(u + u†)/2` and `(u − u†)/2i` are
/// diagonalized jointly: first the cosine part, then the sine part inside each
/// cosine cluster.
pub fn log_unitary(u: &OperatorMatrix) -> Result<OperatorMatrix> {
    let defect = u.unitarity_defect();
    if defect > 1e-9 {
        return Err(Error::arg(format!("log_unitary input is not unitary (defect {defect:e})")));
    }
    let n = u.dim();
    let adj = u.adjoint();
    let cos_part = (u + &adj).scale_real(0.5);
    let sin_part = (u - &adj).scale(C64::new(0.0, -0.5));
    let ec = eig_hermitian(&cos_part)?;

    let mut gen = OperatorMatrix::zeros(u.factor_dims().to_vec())?;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && ec.values[end] - ec.values[end - 1] <= 1e-7 {
            end += 1;
        }
        let m = end - start;
        // Restrict the sine part to the cluster subspace.
        let q = |i: usize, c: usize| ec.vectors.get(i, start + c);
        let sq: Vec<C64> = (0..n * m)
            .map(|idx| {
                let (i, c) = (idx / m, idx % m);
                (0..n).map(|k| sin_part.get(i, k) * q(k, c)).sum()
            })
            .collect();
        let restricted = OperatorMatrix::from_fn(vec![m], |a, b| {
            (0..n).map(|i| q(i, a).conj() * sq[i * m + b]).sum()
        })?;
        let es = eig_hermitian(&restricted.hermitian_part())?;
        for k in 0..m {
            let v: Vec<C64> = (0..n)
                .map(|i| (0..m).map(|c| q(i, c) * es.vectors.get(c, k)).sum())
                .collect();
            let uv: Vec<C64> = (0..n)
                .map(|i| u.row(i).iter().zip(&v).map(|(a, b)| a * b).sum())
                .collect();
            let z: C64 = v.iter().zip(&uv).map(|(a, b)| a.conj() * b).sum();
            let mut theta = z.arg();
            if theta <= -PI + 1e-12 {
                theta = PI;
            }
            for i in 0..n {
                for j in 0..n {
                    let add = v[i] * v[j].conj() * theta;
                    gen.set(i, j, gen.get(i, j) + add);
                }
            }
        }
        start = end;
    }
    let gen = gen.hermitian_part();
    let back = expm_i_hermitian(&gen, 1.0)?;
    let err = back.max_abs_diff(u);
    if err > 1e-9 {
        return Err(Error::construction(format!(
            "unitary logarithm failed to reproduce its input (error {err:e})"
        )));
    }
    Ok(gen)
}

fn check_orthonormal(what: &str, vs: &[StateVector], dim: usize) -> Result<()> {
    for (a, va) in vs.iter().enumerate() {
        if va.dim() != dim {
            return Err(Error::arg(format!("{what}: vector {a} has dim {}, expected {dim}", va.dim())));
        }
        for (b, vb) in vs.iter().enumerate().skip(a) {
            let target = if a == b { ONE } else { ZERO };
            let err = (va.inner(vb) - target).norm();
            if err > 1e-10 {
                return Err(Error::arg(format!(
                    "{what}: vectors {a} and {b} are not orthonormal (error {err:e})"
                )));
            }
        }
    }
    Ok(())
}

/// Orthonormal completion of `vs` by Gram–Schmidt over the canonical basis, in index order.
fn complement(vs: &[StateVector], dim: usize) -> Vec<Vec<C64>> {
    let mut basis: Vec<Vec<C64>> = vs.iter().map(|v| v.amplitudes().to_vec()).collect();
    let mut added = Vec::new();
    for i in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut w = vec![ZERO; dim];
        w[i] = ONE;
        for _ in 0..2 {
            for b in &basis {
                let c: C64 = b.iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
                for (wk, bk) in w.iter_mut().zip(b) {
                    *wk -= c * bk;
                }
            }
        }
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for z in &mut w {
                *z /= norm;
            }
            basis.push(w.clone());
            added.push(w);
        }
    }
    added
}

/// Unitary mapping `inputs[k] ↦ outputs[k]`, completed deterministically on the complements.
pub fn complete_unitary(inputs: &[StateVector], outputs: &[StateVector]) -> Result<OperatorMatrix> {
    let first = inputs
        .first()
        .ok_or_else(|| Error::arg("complete_unitary needs at least one prescribed vector"))?;
    if inputs.len() != outputs.len() {
        return Err(Error::arg("complete_unitary: input and output counts differ"));
    }
    let dim = first.dim();
    check_orthonormal("complete_unitary inputs", inputs, dim)?;
    check_orthonormal("complete_unitary outputs", outputs, dim)?;
    let cin = complement(inputs, dim);
    let cout = complement(outputs, dim);
    if cin.len() != cout.len() || inputs.len() + cin.len() != dim {
        return Err(Error::construction("could not complete the prescribed isometry"));
    }
    let mut pairs: Vec<(&[C64], &[C64])> = inputs
        .iter()
        .zip(outputs)
        .map(|(i, o)| (i.amplitudes(), o.amplitudes()))
        .collect();
    pairs.extend(cin.iter().zip(&cout).map(|(i, o)| (i.as_slice(), o.as_slice())));
    OperatorMatrix::from_fn(first.factor_dims().to_vec(), |r, c| {
        pairs.iter().map(|(i, o)| o[r] * i[c].conj()).sum()
    })
}

/// Singular values in descending order.
pub fn singular_values(m: &OperatorMatrix) -> Vec<f64> {
    let mut sv: Vec<f64> = m
        .to_nalgebra()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}
