use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, OperatorMatrix, ONE, ZERO};

/// Tolerance for the projection-family invariants.
pub const PROJECTION_TOL: f64 = 1e-10;

/// A projective observable `A = Σ_j λ_j E_j` with distinct eigenvalues.
///
/// The order of `eigenvalues`/`projections` is the outcome labelling used by
/// measurement couplings: outcome `j` corresponds to `projections[j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralObservable {
    eigenvalues: Vec<f64>,
    projections: Vec<OperatorMatrix>,
}

/// Worst-case defects of the projection-family invariants.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ObservableResiduals {
    /// `max_j ‖E_j − E_j†‖_max`
    pub hermiticity: f64,
    /// `max_j ‖E_j² − E_j‖_max`
    pub idempotence: f64,
    /// `max_{j≠k} ‖E_j E_k‖_max`
    pub orthogonality: f64,
    /// `‖Σ_j E_j − I‖_max`
    pub completeness: f64,
}

impl ObservableResiduals {
    pub fn max(&self) -> f64 {
        self.hermiticity
            .max(self.idempotence)
            .max(self.orthogonality)
            .max(self.completeness)
    }
}

impl SpectralObservable {
    /// Validates and wraps an explicit spectral family.
    pub fn new(eigenvalues: Vec<f64>, projections: Vec<OperatorMatrix>) -> Result<Self> {
        if eigenvalues.is_empty() || eigenvalues.len() != projections.len() {
            return Err(Error::arg(
                "observable needs one projection per eigenvalue and at least one of each",
            ));
        }
        for (a, &la) in eigenvalues.iter().enumerate() {
            if !la.is_finite() {
                return Err(Error::arg("eigenvalues must be finite"));
            }
            if eigenvalues[a + 1..].contains(&la) {
                return Err(Error::arg(format!("eigenvalue {la} listed twice")));
            }
        }
        let dim = projections[0].dim();
        if projections.iter().any(|p| p.dim() != dim) {
            return Err(Error::arg("projections act on different spaces"));
        }
        let obs = Self {
            eigenvalues,
            projections,
        };
        let res = obs.residuals();
        if res.max() > PROJECTION_TOL {
            return Err(Error::arg(format!(
                "projections do not form an orthogonal resolution of the identity: {res:?}"
            )));
        }
        Ok(obs)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn projections(&self) -> &[OperatorMatrix] {
        &self.projections
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.projections[0].dim()
    }

    pub fn factor_dims(&self) -> &[usize] {
        self.projections[0].factor_dims()
    }

    /// `Σ_j λ_j E_j`.
    pub fn operator(&self) -> OperatorMatrix {
        let mut acc = OperatorMatrix::zeros(self.factor_dims().to_vec()).expect("same shape");
        for (&l, e) in self.eigenvalues.iter().zip(&self.projections) {
            acc = &acc + &e.scale_real(l);
        }
        acc
    }

    pub fn residuals(&self) -> ObservableResiduals {
        let mut r = ObservableResiduals::default();
        let mut sum = OperatorMatrix::zeros(self.factor_dims().to_vec()).expect("same shape");
        for (j, e) in self.projections.iter().enumerate() {
            r.hermiticity = r.hermiticity.max(e.hermiticity_defect());
            let sq = e * e;
            r.idempotence = r.idempotence.max(sq.max_abs_diff(e));
            for f in &self.projections[j + 1..] {
                r.orthogonality = r.orthogonality.max((e * f).max_abs());
            }
            sum = &sum + e;
        }
        let n = sum.dim();
        for i in 0..n {
            for k in 0..n {
                let target = if i == k { ONE } else { ZERO };
                r.completeness = r.completeness.max((sum.get(i, k) - target).norm());
            }
        }
        r
    }
}

/// Spectral family of a Hermitian operator.
///
/// Eigenvalues closer than `tol` (default `1e-9·‖a‖`) are merged into one
/// outcome; the result is ordered by ascending eigenvalue.
pub fn spectral_decompose(a: &OperatorMatrix, tol: Option<f64>) -> Result<SpectralObservable> {
    let eig = eig_hermitian(a)?;
    let tol = tol.unwrap_or(1e-9 * eig.spectral_radius());
    let n = a.dim();
    let mut eigenvalues = Vec::new();
    let mut projections = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && eig.values[end] - eig.values[end - 1] <= tol {
            end += 1;
        }
        let members = &eig.values[start..end];
        eigenvalues.push(members.iter().sum::<f64>() / members.len() as f64);
        let p = OperatorMatrix::from_fn(a.factor_dims().to_vec(), |i, j| {
            (start..end)
                .map(|k| eig.vectors.get(i, k) * eig.vectors.get(j, k).conj())
                .sum()
        })?;
        projections.push(p.hermitian_part());
        start = end;
    }
    SpectralObservable::new(eigenvalues, projections)
}
