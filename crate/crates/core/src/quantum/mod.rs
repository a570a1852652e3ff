//! Quantum-mechanical vocabulary on top of [`crate::linalg`]: projective
//! observables, operator placement on composite spaces, and isometries.

pub mod gates;
mod isometry;
mod observable;

pub use isometry::{validate_family, validate_isometry, Isometry};
pub use observable::{spectral_decompose, ObservableResiduals, SpectralObservable};

use crate::error::{Error, Result};
use crate::linalg::{
    check_capacity, eig_hermitian, partial_trace, product_dim, FactorLayout, OperatorMatrix, C64,
    ZERO,
};

/// Places `op` on the `targets` factors of `composite`, identity elsewhere.
///
/// The factor order of `op` follows the order of `targets`, so
/// `embed(cnot, &[2, 0], ..)` uses factor 2 as control.
pub fn embed(op: &OperatorMatrix, targets: &[usize], composite: &[usize]) -> Result<OperatorMatrix> {
    let layout = FactorLayout::new(composite, targets)?;
    if op.dim() != layout.sub_dim() {
        return Err(Error::arg(format!(
            "operator of dim {} cannot act on factors {targets:?} of dim {}",
            op.dim(),
            layout.sub_dim()
        )));
    }
    let dim = product_dim("embedded operator", composite)?;
    check_capacity("embedded operator", dim as u128 * dim as u128)?;
    let mut entries = vec![ZERO; dim * dim];
    for &r in &layout.rest_offsets {
        for (i, &oi) in layout.sub_offsets.iter().enumerate() {
            let row = (oi + r) * dim + r;
            for (j, &oj) in layout.sub_offsets.iter().enumerate() {
                entries[row + oj] = op.get(i, j);
            }
        }
    }
    OperatorMatrix::new(composite.to_vec(), entries)
}

/// `‖op − (Tr_rest op / d_rest) ⊗ I_rest‖_max`: zero iff `op` acts only on `targets`.
pub fn support_defect(op: &OperatorMatrix, targets: &[usize]) -> Result<f64> {
    if targets.is_empty() {
        let scalar = op.trace() / op.dim() as f64;
        let id = OperatorMatrix::identity(op.factor_dims().to_vec())?;
        return Ok(op.max_abs_diff(&id.scale(scalar)));
    }
    let mut sorted = targets.to_vec();
    sorted.sort_unstable();
    let layout = FactorLayout::new(op.factor_dims(), &sorted)?;
    let reduced = partial_trace(op, &sorted)?.scale_real(1.0 / layout.rest_dim() as f64);
    let back = embed(&reduced, &sorted, op.factor_dims())?;
    Ok(op.max_abs_diff(&back))
}

/// Hermitian operator basis of `d × d` matrices, each of operator norm 1:
/// diagonal units `|j⟩⟨j|`, then for `j < k` the pairs `|j⟩⟨k| + |k⟩⟨j|` and
/// `−i|j⟩⟨k| + i|k⟩⟨j|`. For `d = 2` this is `{|0⟩⟨0|, σx, σy, |1⟩⟨1|}` up to order.
pub fn hermitian_basis(d: usize) -> Vec<OperatorMatrix> {
    let mut out = Vec::with_capacity(d * d);
    let unit = |entries: &[(usize, usize, C64)]| {
        let mut m = OperatorMatrix::zeros(vec![d]).expect("small basis element");
        for &(i, j, v) in entries {
            m.set(i, j, v);
        }
        m
    };
    for j in 0..d {
        out.push(unit(&[(j, j, C64::new(1.0, 0.0))]));
    }
    for j in 0..d {
        for k in j + 1..d {
            out.push(unit(&[(j, k, C64::new(1.0, 0.0)), (k, j, C64::new(1.0, 0.0))]));
            out.push(unit(&[(j, k, C64::new(0.0, -1.0)), (k, j, C64::new(0.0, 1.0))]));
        }
    }
    out
}

/// `tr(A_b Δ)` for every tensor product `A_b = ⊗_i B^{(i)}_{b_i}` of [`hermitian_basis`]
/// elements over the factors of `delta`, in row-major order of `(b_0, b_1, ...)`.
///
/// Costs `O(dim² · Σ d_i²)` instead of one full trace per basis element.
pub fn hermitian_product_basis_traces(delta: &OperatorMatrix) -> Result<Vec<C64>> {
    let dims = delta.factor_dims().to_vec();
    let m = dims.len();
    let dim = delta.dim();
    // Interleaved layout: axis i is the pair index p_i = r_i·d_i + c_i.
    let mut pstride = vec![1usize; m];
    for i in (0..m.saturating_sub(1)).rev() {
        pstride[i] = pstride[i + 1] * dims[i + 1] * dims[i + 1];
    }
    let all: Vec<usize> = (0..m).collect();
    let layout = FactorLayout::new(&dims, &all)?;
    debug_assert_eq!(layout.sub_dim(), dim);
    let digit_offsets = |scale_row: bool| -> Vec<usize> {
        let mut out = vec![0usize];
        for i in 0..m {
            let step = if scale_row { dims[i] * pstride[i] } else { pstride[i] };
            out = out
                .iter()
                .flat_map(|&base| (0..dims[i]).map(move |d| base + d * step))
                .collect();
        }
        out
    };
    let row_off = digit_offsets(true);
    let col_off = digit_offsets(false);
    let mut x = vec![ZERO; dim * dim];
    for r in 0..dim {
        for c in 0..dim {
            x[row_off[r] + col_off[c]] = delta.get(r, c);
        }
    }

    for i in 0..m {
        let d = dims[i];
        let d2 = d * d;
        let basis = hermitian_basis(d);
        // coeff[b][p] with p = r·d + c equals B_b[c, r].
        let coeff: Vec<C64> = basis
            .iter()
            .flat_map(|b| (0..d2).map(move |p| b.get(p % d, p / d)))
            .collect();
        let inner = pstride[i];
        let outer = x.len() / (d2 * inner);
        let mut next = vec![ZERO; x.len()];
        let mut buf = vec![ZERO; d2];
        for o in 0..outer {
            for s in 0..inner {
                let base = o * d2 * inner + s;
                for (p, slot) in buf.iter_mut().enumerate() {
                    *slot = x[base + p * inner];
                }
                for b in 0..d2 {
                    let row = &coeff[b * d2..(b + 1) * d2];
                    next[base + b * inner] = row.iter().zip(&buf).map(|(a, v)| a * v).sum();
                }
            }
        }
        x = next;
    }
    Ok(x)
}

/// Von Neumann entropy `−Σ p ln p` (natural log) of a density matrix.
pub fn von_neumann_entropy(rho: &OperatorMatrix) -> Result<f64> {
    let eig = eig_hermitian(rho)?;
    Ok(eig
        .values
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum())
}

#[cfg(test)]
mod tests {
    use super::gates::*;
    use super::*;
    use crate::linalg::{kron, kron_all, StateVector};

    #[test]
    fn embed_single_factor() {
        let e = embed(&pauli_z(), &[0], &[2, 2]).unwrap();
        let expected = kron(&pauli_z(), &identity(2)).unwrap();
        assert_eq!(e, expected);
    }

    #[test]
    fn embed_disjoint_supports_commute_exactly() {
        let a = embed(&pauli_x(), &[0], &[2, 2]).unwrap();
        let b = embed(&pauli_y(), &[1], &[2, 2]).unwrap();
        assert_eq!(a.commutator(&b).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn embed_cnot_on_outer_factors() {
        let e = embed(&cnot(), &[0, 2], &[2, 2, 2]).unwrap();
        let out = e
            .apply(&StateVector::basis_digits(vec![2, 2, 2], &[1, 0, 1]).unwrap())
            .unwrap();
        // Oracle: control digit 0 set, so target digit 2 flips; digit 1 untouched.
        let expected = StateVector::basis_digits(vec![2, 2, 2], &[1, 0, 0]).unwrap();
        assert_eq!(out.amplitudes(), expected.amplitudes());
    }

    #[test]
    fn embed_rejects_dimension_mismatch() {
        assert!(embed(&cnot(), &[0], &[2, 2]).is_err());
        assert!(embed(&pauli_x(), &[3], &[2, 2]).is_err());
    }

    #[test]
    fn support_defect_detects_leakage() {
        let composite = [2, 2, 2];
        let local = embed(&pauli_x(), &[1], &composite).unwrap();
        assert!(support_defect(&local, &[1]).unwrap() < 1e-15);
        assert!(support_defect(&local, &[0]).unwrap() > 0.5);
        let two = embed(&cnot(), &[0, 1], &composite).unwrap();
        assert!(support_defect(&two, &[0, 1]).unwrap() < 1e-15);
        assert!(support_defect(&two, &[1, 2]).unwrap() > 0.1);
    }

    #[test]
    fn hermitian_basis_is_orthogonal_with_unit_norm() {
        for d in 1..=4 {
            let basis = hermitian_basis(d);
            assert_eq!(basis.len(), d * d);
            for (a, ba) in basis.iter().enumerate() {
                assert_eq!(ba.hermiticity_defect(), 0.0);
                let e = eig_hermitian(ba).unwrap();
                assert!((e.spectral_radius() - 1.0).abs() < 1e-12);
                for bb in &basis[a + 1..] {
                    assert!(ba.matmul(bb).unwrap().trace().norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn product_basis_traces_match_brute_force() {
        let dims = vec![2, 3];
        let delta = OperatorMatrix::from_fn(dims.clone(), |i, j| {
            C64::new((i * 7 + j * 3) as f64 * 0.1, (i as f64 - j as f64) * 0.05)
        })
        .unwrap();
        let fast = hermitian_product_basis_traces(&delta).unwrap();
        let b0 = hermitian_basis(2);
        let b1 = hermitian_basis(3);
        let mut k = 0;
        for x in &b0 {
            for y in &b1 {
                let a = kron_all(&[x, y]).unwrap();
                let tr = a.matmul(&delta).unwrap().trace();
                assert!((tr - fast[k]).norm() < 1e-13, "element {k}");
                k += 1;
            }
        }
        assert_eq!(k, fast.len());
    }

    #[test]
    fn entropy_of_maximally_mixed_qubit() {
        let rho = identity(2).scale_real(0.5);
        assert!((von_neumann_entropy(&rho).unwrap() - 2f64.ln()).abs() < 1e-14);
    }
}
