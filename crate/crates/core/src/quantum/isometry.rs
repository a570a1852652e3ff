use crate::error::{Error, Result};
use crate::linalg::{OperatorMatrix, StateVector, ONE, ZERO};

use super::embed;

/// An isometry represented as a square matrix on one fixed composite space.
///
/// `domain` is the projection onto the subspace on which `W†W = I` is
/// required; `None` means the whole space. A map `Φ ↦ Φ ⊗ Ψ` into a larger
/// space is stored as `I ⊗ |Ψ⟩⟨0|` with domain `I ⊗ |0⟩⟨0|`, i.e. with a
/// reserved slot whose reference state is the first basis vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Isometry {
    matrix: OperatorMatrix,
    domain: Option<OperatorMatrix>,
    declared_support: Option<Vec<usize>>,
}

impl Isometry {
    pub fn new(matrix: OperatorMatrix, domain: Option<OperatorMatrix>) -> Result<Self> {
        if let Some(p) = &domain {
            if p.dim() != matrix.dim() {
                return Err(Error::arg("isometry domain projection has the wrong dimension"));
            }
            let defect = (p * p).max_abs_diff(p).max(p.hermiticity_defect());
            if defect > 1e-10 {
                return Err(Error::arg(format!("isometry domain is not a projection ({defect:e})")));
            }
        }
        Ok(Self {
            matrix,
            domain,
            declared_support: None,
        })
    }

    /// A unitary viewed as an isometry of the whole space.
    pub fn unitary(matrix: OperatorMatrix) -> Self {
        Self {
            matrix,
            domain: None,
            declared_support: None,
        }
    }

    /// `I ⊗ |target⟩⟨0|` on the `slot` factors of `composite`, domain `I ⊗ |0⟩⟨0|`.
    pub fn slot_injection(composite: &[usize], slot: &[usize], target: &StateVector) -> Result<Self> {
        let dims: Vec<usize> = slot
            .iter()
            .map(|&k| composite.get(k).copied().ok_or_else(|| Error::arg("slot factor out of range")))
            .collect::<Result<_>>()?;
        let reference = StateVector::basis(dims, 0)?;
        let target = target.clone().with_factor_dims(reference.factor_dims().to_vec())?;
        let local = OperatorMatrix::outer(&target, &reference)?;
        let local_domain = OperatorMatrix::projector(&reference)?;
        Self::new(
            embed(&local, slot, composite)?,
            Some(embed(&local_domain, slot, composite)?),
        )
    }

    pub fn with_support(mut self, factors: Vec<usize>) -> Self {
        self.declared_support = Some(factors);
        self
    }

    pub fn matrix(&self) -> &OperatorMatrix {
        &self.matrix
    }

    pub fn domain(&self) -> Option<&OperatorMatrix> {
        self.domain.as_ref()
    }

    pub fn declared_support(&self) -> Option<&[usize]> {
        self.declared_support.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Distance of `v` from the domain, `‖v − P v‖`.
    pub fn domain_defect(&self, v: &StateVector) -> Result<f64> {
        match &self.domain {
            None => Ok(0.0),
            Some(p) => Ok(v.sub(&p.apply(v)?)?.norm()),
        }
    }

    /// Same domain and support, new matrix (e.g. after Heisenberg evolution).
    pub fn with_matrix(&self, matrix: OperatorMatrix) -> Result<Self> {
        if matrix.dim() != self.matrix.dim() {
            return Err(Error::arg("replacement matrix has the wrong dimension"));
        }
        Ok(Self {
            matrix,
            domain: self.domain.clone(),
            declared_support: self.declared_support.clone(),
        })
    }

    pub fn with_domain(mut self, domain: Option<OperatorMatrix>) -> Self {
        self.domain = domain;
        self
    }
}

fn gram_defect(a: &Isometry, b: &Isometry, same: bool) -> f64 {
    let g = &a.matrix.adjoint() * &b.matrix;
    let n = g.dim();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if !same {
                ZERO
            } else {
                match &a.domain {
                    Some(p) => p.get(i, j),
                    None if i == j => ONE,
                    None => ZERO,
                }
            };
            worst = worst.max((g.get(i, j) - target).norm());
        }
    }
    worst
}

/// `‖W†W − P‖_max` with `P` the domain projection (identity if absent).
pub fn validate_isometry(w: &Isometry) -> f64 {
    gram_defect(w, w, true)
}

/// `max_{j,k} ‖W_j†W_k − δ_{jk} P_j‖_max` over a family.
pub fn validate_family(ws: &[Isometry]) -> Result<f64> {
    if let Some(first) = ws.first() {
        if ws.iter().any(|w| w.dim() != first.dim()) {
            return Err(Error::arg("isometry family members act on different spaces"));
        }
    }
    let mut worst = 0.0f64;
    for (j, wj) in ws.iter().enumerate() {
        for (k, wk) in ws.iter().enumerate() {
            worst = worst.max(gram_defect(wj, wk, j == k));
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::gates::*;

    #[test]
    fn unitaries_are_isometries() {
        assert_eq!(validate_isometry(&Isometry::unitary(identity(4))), 0.0);
        assert_eq!(validate_isometry(&Isometry::unitary(cnot())), 0.0);
    }

    #[test]
    fn injection_family_is_orthogonal() {
        let composite = [2, 2];
        let w0 = Isometry::slot_injection(&composite, &[1], &StateVector::basis(vec![2], 0).unwrap())
            .unwrap();
        let w1 = Isometry::slot_injection(&composite, &[1], &StateVector::basis(vec![2], 1).unwrap())
            .unwrap();
        assert_eq!(validate_isometry(&w0), 0.0);
        assert_eq!(validate_isometry(&w1), 0.0);
        assert_eq!(validate_family(&[w0, w1]).unwrap(), 0.0);
    }

    #[test]
    fn non_isometry_has_residual() {
        let half = Isometry::unitary(identity(2).scale_real(0.5));
        assert!((validate_isometry(&half) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn domain_must_be_projection() {
        assert!(Isometry::new(identity(2), Some(identity(2).scale_real(2.0))).is_err());
    }
}
