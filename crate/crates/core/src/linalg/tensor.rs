use super::{check_capacity, OperatorMatrix, StateVector, C64, ZERO};
use crate::error::{Error, Result};

/// Index bookkeeping for a subset of tensor factors.
///
/// For a composite with `factor_dims` and an ordered list of `targets`, every
/// flat index splits uniquely as `sub_offsets[s] + rest_offsets[r]`, where `s`
/// enumerates target digits (row-major in the given target order) and `r`
/// enumerates the remaining factors in ascending order.
#[derive(Clone, Debug)]
pub struct FactorLayout {
    pub sub_dims: Vec<usize>,
    pub rest_dims: Vec<usize>,
    pub sub_offsets: Vec<usize>,
    pub rest_offsets: Vec<usize>,
}

impl FactorLayout {
    pub fn new(factor_dims: &[usize], targets: &[usize]) -> Result<Self> {
        let n = factor_dims.len();
        let mut seen = vec![false; n];
        for &t in targets {
            if t >= n {
                return Err(Error::arg(format!(
                    "factor index {t} out of range for {n} factors"
                )));
            }
            if seen[t] {
                return Err(Error::arg(format!("factor index {t} listed twice")));
            }
            seen[t] = true;
        }
        let mut strides = vec![1usize; n];
        for k in (0..n.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * factor_dims[k + 1];
        }
        let rest: Vec<usize> = (0..n).filter(|k| !seen[*k]).collect();
        let offsets = |idx: &[usize]| -> Vec<usize> {
            let mut out = vec![0usize];
            for &k in idx {
                let mut next = Vec::with_capacity(out.len() * factor_dims[k]);
                for &base in &out {
                    for d in 0..factor_dims[k] {
                        next.push(base + d * strides[k]);
                    }
                }
                out = next;
            }
            out
        };
        Ok(Self {
            sub_dims: targets.iter().map(|&k| factor_dims[k]).collect(),
            rest_dims: rest.iter().map(|&k| factor_dims[k]).collect(),
            sub_offsets: offsets(targets),
            rest_offsets: offsets(&rest),
        })
    }

    pub fn sub_dim(&self) -> usize {
        self.sub_offsets.len()
    }

    pub fn rest_dim(&self) -> usize {
        self.rest_offsets.len()
    }
}

/// Kronecker product; factor dims concatenate.
pub fn kron(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<OperatorMatrix> {
    let (da, db) = (a.dim(), b.dim());
    let dim = da as u128 * db as u128;
    check_capacity("kron", dim * dim)?;
    let n = da * db;
    let mut entries = vec![ZERO; n * n];
    for i1 in 0..da {
        for j1 in 0..da {
            let x = a.get(i1, j1);
            if x == ZERO {
                continue;
            }
            for i2 in 0..db {
                let row = (i1 * db + i2) * n + j1 * db;
                for j2 in 0..db {
                    entries[row + j2] = x * b.get(i2, j2);
                }
            }
        }
    }
    let mut factor_dims = a.factor_dims().to_vec();
    factor_dims.extend_from_slice(b.factor_dims());
    OperatorMatrix::new(factor_dims, entries)
}

/// Left-to-right Kronecker product of a nonempty list.
pub fn kron_all(ops: &[&OperatorMatrix]) -> Result<OperatorMatrix> {
    let (first, rest) = ops
        .split_first()
        .ok_or_else(|| Error::arg("kron_all of an empty list"))?;
    rest.iter().try_fold((*first).clone(), |acc, op| kron(&acc, op))
}

fn sorted_keep(n_factors: usize, keep: &[usize]) -> Result<Vec<usize>> {
    if keep.is_empty() {
        return Err(Error::arg("partial trace must keep at least one factor"));
    }
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if let Some(&bad) = keep.iter().find(|&&k| k >= n_factors) {
        return Err(Error::arg(format!(
            "factor index {bad} out of range for {n_factors} factors"
        )));
    }
    Ok(keep)
}

/// Traces out every factor not in `keep`; kept factors stay in ascending order.
pub fn partial_trace(rho: &OperatorMatrix, keep: &[usize]) -> Result<OperatorMatrix> {
    let keep = sorted_keep(rho.factor_dims().len(), keep)?;
    let layout = FactorLayout::new(rho.factor_dims(), &keep)?;
    let ds = layout.sub_dim();
    let mut out = vec![ZERO; ds * ds];
    for (i, &oi) in layout.sub_offsets.iter().enumerate() {
        for (j, &oj) in layout.sub_offsets.iter().enumerate() {
            out[i * ds + j] = layout
                .rest_offsets
                .iter()
                .map(|&r| rho.get(oi + r, oj + r))
                .sum();
        }
    }
    OperatorMatrix::new(layout.sub_dims, out)
}

/// Reduced density matrix of a pure state on the factors in `keep`.
pub fn reduced_density(psi: &StateVector, keep: &[usize]) -> Result<OperatorMatrix> {
    let keep = sorted_keep(psi.factor_dims().len(), keep)?;
    let layout = FactorLayout::new(psi.factor_dims(), &keep)?;
    cross_reduced(psi, psi, &layout)
}

/// `Tr_rest |ket⟩⟨bra|` for the factor split described by `layout`.
pub(crate) fn cross_reduced(
    ket: &StateVector,
    bra: &StateVector,
    layout: &FactorLayout,
) -> Result<OperatorMatrix> {
    let ds = layout.sub_dim();
    let (k, b) = (ket.amplitudes(), bra.amplitudes());
    let mut out = vec![ZERO; ds * ds];
    for (i, &oi) in layout.sub_offsets.iter().enumerate() {
        for (j, &oj) in layout.sub_offsets.iter().enumerate() {
            out[i * ds + j] = layout
                .rest_offsets
                .iter()
                .map(|&r| k[oi + r] * b[oj + r].conj())
                .sum();
        }
    }
    OperatorMatrix::new(layout.sub_dims.clone(), out)
}

/// Applies `op` (acting on the listed factors, in that order) to `psi`.
pub fn apply_local(op: &OperatorMatrix, targets: &[usize], psi: &StateVector) -> Result<StateVector> {
    let layout = FactorLayout::new(psi.factor_dims(), targets)?;
    if op.dim() != layout.sub_dim() {
        return Err(Error::arg(format!(
            "local operator of dim {} on factors {targets:?} of total dim {}",
            op.dim(),
            layout.sub_dim()
        )));
    }
    let amps = psi.amplitudes();
    let mut out = vec![ZERO; psi.dim()];
    let ds = layout.sub_dim();
    let mut local = vec![ZERO; ds];
    for &r in &layout.rest_offsets {
        for (s, &o) in layout.sub_offsets.iter().enumerate() {
            local[s] = amps[o + r];
        }
        for (i, &oi) in layout.sub_offsets.iter().enumerate() {
            out[oi + r] = op.row(i).iter().zip(&local).map(|(a, b)| a * b).sum::<C64>();
        }
    }
    StateVector::unnormalized(psi.factor_dims().to_vec(), out)
}

/// Reorders tensor factors: factor `k` of the result is factor `order[k]` of `psi`.
pub fn permute_factors(psi: &StateVector, order: &[usize]) -> Result<StateVector> {
    let n = psi.factor_dims().len();
    if order.len() != n {
        return Err(Error::arg("permutation must list every factor once"));
    }
    let layout = FactorLayout::new(psi.factor_dims(), order)?;
    let amps = psi.amplitudes();
    let out: Vec<C64> = layout.sub_offsets.iter().map(|&o| amps[o]).collect();
    let dims = layout.sub_dims;
    let v = StateVector::unnormalized(dims, out)?;
    if psi.is_normalized() {
        v.assert_normalized()
    } else {
        Ok(v)
    }
}
