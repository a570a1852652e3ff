//! Von Neumann measurement couplings between a system `S` and the microscopic
//! part of an apparatus.
//!
//! Composite layout: factor 0 is the system, factor 1 the apparatus. A
//! [`MeasurementModel`] is built from the prescribed action
//! `exp(iVT)(E_jΦ ⊗ Ψ_R) = E_jΦ ⊗ Ψ_j`: the coupling unitary is assembled as
//! `Σ_j E_j ⊗ U_j` with `U_j` a completion of `Ψ_R ↦ Ψ_j`, and the generator
//! `V` is its principal logarithm with `T = 1`.

use crate::error::{Error, Result};
use crate::linalg::{
    apply_local, complete_unitary, eig_hermitian, expm_i_hermitian, kron, log_unitary,
    orthonormality_defect, OperatorMatrix, StateVector, C64, NORM_TOL,
};
use crate::quantum::{embed, Isometry, SpectralObservable};

/// Tolerance for the coupling action and pointer orthonormality.
pub const COUPLING_TOL: f64 = 1e-9;
pub const POINTER_TOL: f64 = 1e-10;

/// Factor index of the system in the `S ⊗ μA` composite.
pub const SYSTEM: usize = 0;
/// Factor index of the microscopic apparatus.
pub const APPARATUS: usize = 1;

#[derive(Clone, Debug)]
pub struct MeasurementModel {
    system_obs: SpectralObservable,
    ready: StateVector,
    pointers: Vec<StateVector>,
    coupling_generator: OperatorMatrix,
    duration: f64,
}

fn flat(v: &StateVector) -> Result<StateVector> {
    v.clone().with_factor_dims(vec![v.dim()])
}

fn flat_op(op: &OperatorMatrix) -> Result<OperatorMatrix> {
    op.clone().with_factor_dims(vec![op.dim()])
}

/// Builds the coupling whose evolution over `T = 1` sends `E_jΦ ⊗ Ψ_R` to `E_jΦ ⊗ Ψ_j`.
pub fn build_coupling(
    obs: &SpectralObservable,
    ready: &StateVector,
    pointers: &[StateVector],
) -> Result<MeasurementModel> {
    if pointers.len() != obs.len() {
        return Err(Error::arg(format!(
            "{} pointer states for an observable with {} outcomes",
            pointers.len(),
            obs.len()
        )));
    }
    let ready = flat(ready)?;
    let pointers = pointers.iter().map(flat).collect::<Result<Vec<_>>>()?;
    validate_apparatus(&ready, &pointers)?;

    let (ds, da) = (obs.dim(), ready.dim());
    let mut coupling = OperatorMatrix::zeros(vec![ds, da])?;
    for (e, psi) in obs.projections().iter().zip(&pointers) {
        let u = complete_unitary(std::slice::from_ref(&ready), std::slice::from_ref(psi))?;
        coupling = &coupling + &kron(&flat_op(e)?, &u)?;
    }
    let generator = log_unitary(&coupling)?;
    MeasurementModel::from_generator(obs.clone(), ready, pointers, generator, 1.0)
}

fn validate_apparatus(ready: &StateVector, pointers: &[StateVector]) -> Result<()> {
    if (ready.norm() - 1.0).abs() > NORM_TOL {
        return Err(Error::arg("ready state is not normalized"));
    }
    if pointers.iter().any(|p| p.dim() != ready.dim()) {
        return Err(Error::arg("pointer states and ready state live in different spaces"));
    }
    let defect = orthonormality_defect(pointers);
    if defect > POINTER_TOL {
        return Err(Error::arg(format!(
            "pointer states are not orthonormal (defect {defect:e})"
        )));
    }
    Ok(())
}

impl MeasurementModel {
    /// Wraps an explicit generator, checking the prescribed action within [`COUPLING_TOL`].
    pub fn from_generator(
        system_obs: SpectralObservable,
        ready: StateVector,
        pointers: Vec<StateVector>,
        coupling_generator: OperatorMatrix,
        duration: f64,
    ) -> Result<Self> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::arg(format!("measurement duration must be positive, got {duration}")));
        }
        if pointers.len() != system_obs.len() {
            return Err(Error::arg("one pointer state per outcome required"));
        }
        let ready = flat(&ready)?;
        let pointers = pointers.iter().map(flat).collect::<Result<Vec<_>>>()?;
        validate_apparatus(&ready, &pointers)?;
        let composite = vec![system_obs.dim(), ready.dim()];
        let coupling_generator = coupling_generator
            .with_factor_dims(composite)
            .map_err(|_| Error::arg("coupling generator does not act on system ⊗ apparatus"))?;
        coupling_generator.require_hermitian("coupling generator", 1e-10)?;
        let model = Self {
            system_obs,
            ready,
            pointers,
            coupling_generator,
            duration,
        };
        let residual = model.action_residual()?;
        if residual > COUPLING_TOL {
            return Err(Error::construction(format!(
                "coupling does not realize the pointer action (residual {residual:e})"
            )));
        }
        Ok(model)
    }

    /// The same endpoint unitary reached over a different duration (`V ↦ V·T/T'`).
    pub fn rescaled(&self, duration: f64) -> Result<Self> {
        let generator = self.coupling_generator.scale_real(self.duration / duration);
        Self::from_generator(
            self.system_obs.clone(),
            self.ready.clone(),
            self.pointers.clone(),
            generator,
            duration,
        )
    }

    pub fn observable(&self) -> &SpectralObservable {
        &self.system_obs
    }

    pub fn ready(&self) -> &StateVector {
        &self.ready
    }

    pub fn pointers(&self) -> &[StateVector] {
        &self.pointers
    }

    pub fn generator(&self) -> &OperatorMatrix {
        &self.coupling_generator
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn system_dim(&self) -> usize {
        self.system_obs.dim()
    }

    pub fn apparatus_dim(&self) -> usize {
        self.ready.dim()
    }

    pub fn composite(&self) -> Vec<usize> {
        vec![self.system_dim(), self.apparatus_dim()]
    }

    /// `exp(iVT)`.
    pub fn coupling_unitary(&self) -> Result<OperatorMatrix> {
        expm_i_hermitian(&self.coupling_generator, self.duration)
    }

    /// `max_j ‖exp(iVT)(E_j ⊗ |Ψ_R⟩⟨Ψ_R|) − E_j ⊗ |Ψ_j⟩⟨Ψ_R|‖_max`, i.e. the prescribed
    /// action checked on every basis vector at once.
    pub fn action_residual(&self) -> Result<f64> {
        let u = self.coupling_unitary()?;
        let ready_proj = OperatorMatrix::projector(&self.ready)?;
        let mut worst = 0.0f64;
        for (e, psi) in self.system_obs.projections().iter().zip(&self.pointers) {
            let e = flat_op(e)?;
            let lhs = &u * &kron(&e, &ready_proj)?;
            let rhs = kron(&e, &OperatorMatrix::outer(psi, &self.ready)?)?;
            worst = worst.max(lhs.max_abs_diff(&rhs));
        }
        Ok(worst)
    }

    /// `W: Φ ↦ Φ ⊗ Ψ_R`, stored on the composite with the apparatus slot in `|0⟩`.
    pub fn ready_isometry(&self) -> Result<Isometry> {
        Isometry::slot_injection(&self.composite(), &[APPARATUS], &self.ready)
    }

    /// `W_j: Φ ↦ Φ ⊗ Ψ_j`, same slot convention as [`Self::ready_isometry`].
    pub fn pointer_isometries(&self) -> Result<Vec<Isometry>> {
        self.pointers
            .iter()
            .map(|p| Isometry::slot_injection(&self.composite(), &[APPARATUS], p))
            .collect()
    }

    /// `Σ_j W_j (E_j ⊗ I)` for the given family.
    pub fn intertwiner_target(&self, w_family: &[Isometry]) -> Result<OperatorMatrix> {
        if w_family.len() != self.system_obs.len() {
            return Err(Error::arg("one pointer isometry per outcome required"));
        }
        let composite = self.composite();
        let mut acc = OperatorMatrix::zeros(composite.clone())?;
        for (w, e) in w_family.iter().zip(self.system_obs.projections()) {
            let e = embed(&flat_op(e)?, &[SYSTEM], &composite)?;
            acc = &acc + &w.matrix().matmul(&e)?;
        }
        Ok(acc)
    }

    /// `Σ_j E_jΦ ⊗ Ψ_j`, the post-measurement vector predicted from the spectral data alone.
    pub fn predicted_outcome(&self, phi: &StateVector) -> Result<StateVector> {
        let phi = self.check_system_state(phi)?;
        let mut acc = StateVector::zeros(self.composite())?;
        for (e, psi) in self.system_obs.projections().iter().zip(&self.pointers) {
            let branch = flat_op(e)?.apply(&phi)?.kron(psi)?;
            acc = acc.add(&branch.with_factor_dims(self.composite())?)?;
        }
        Ok(acc)
    }

    fn check_system_state(&self, phi: &StateVector) -> Result<StateVector> {
        if phi.dim() != self.system_dim() {
            return Err(Error::arg(format!(
                "system state has dim {}, observable acts on dim {}",
                phi.dim(),
                self.system_dim()
            )));
        }
        if (phi.norm() - 1.0).abs() > NORM_TOL {
            return Err(Error::arg("system state is not normalized"));
        }
        flat(phi)
    }

    /// `Φ ⊗ Ψ_R` on the composite.
    pub fn prepared(&self, phi: &StateVector) -> Result<StateVector> {
        let phi = self.check_system_state(phi)?;
        phi.kron(&self.ready)?.with_factor_dims(self.composite())
    }
}

/// `Ψ' = exp(iVT)(Φ ⊗ Ψ_R)`.
pub fn apply_measurement(model: &MeasurementModel, phi: &StateVector) -> Result<StateVector> {
    let prepared = model.prepared(phi)?;
    model.coupling_unitary()?.apply(&prepared)?.assert_normalized()
}

/// `(Ψ', (B ⊗ I)Ψ')` for a Hermitian system observable `B`.
pub fn reduced_expectation(psi_prime: &StateVector, b: &OperatorMatrix) -> Result<f64> {
    b.require_hermitian("system observable", 1e-10)?;
    if psi_prime.factor_dims().len() != 2 || psi_prime.factor_dims()[SYSTEM] != b.dim() {
        return Err(Error::arg(format!(
            "state with factors {:?} is not system(dim {}) ⊗ apparatus",
            psi_prime.factor_dims(),
            b.dim()
        )));
    }
    let b = flat_op(b)?;
    Ok(psi_prime.inner(&apply_local(&b, &[SYSTEM], psi_prime)?).re)
}

/// `Σ_j (E_jΦ, B E_jΦ)`: the expectation of `B` in the mixture selected by the observable.
pub fn mixture_expectation(obs: &SpectralObservable, phi: &StateVector, b: &OperatorMatrix) -> Result<f64> {
    b.require_hermitian("system observable", 1e-10)?;
    let phi = flat(phi)?;
    let b = flat_op(b)?;
    let mut acc = 0.0;
    for e in obs.projections() {
        let ephi = flat_op(e)?.apply(&phi)?;
        acc += ephi.inner(&b.apply(&ephi)?).re;
    }
    Ok(acc)
}

/// Parts of the total Hamiltonian `H_S ⊗ I + I ⊗ H_μA + V (+ I ⊗ V' + I ⊗ I ⊗ H_MA)`.
#[derive(Clone, Debug)]
pub struct HamiltonianSpec {
    pub h_sys: OperatorMatrix,
    pub h_micro: OperatorMatrix,
    pub h_macro: Option<OperatorMatrix>,
    pub v: OperatorMatrix,
    pub v_prime: Option<OperatorMatrix>,
}

impl HamiltonianSpec {
    pub fn new(h_sys: OperatorMatrix, h_micro: OperatorMatrix, v: OperatorMatrix) -> Result<Self> {
        let h_sys = flat_op(&h_sys)?;
        let h_micro = flat_op(&h_micro)?;
        h_sys.require_hermitian("H_S", 1e-10)?;
        h_micro.require_hermitian("H_μA", 1e-10)?;
        v.require_hermitian("V", 1e-10)?;
        let v = v
            .with_factor_dims(vec![h_sys.dim(), h_micro.dim()])
            .map_err(|_| Error::arg("V does not act on system ⊗ apparatus"))?;
        Ok(Self {
            h_sys,
            h_micro,
            h_macro: None,
            v,
            v_prime: None,
        })
    }

    /// Coupling of `model` with vanishing free parts.
    pub fn for_model(model: &MeasurementModel) -> Result<Self> {
        Self::new(
            OperatorMatrix::zeros(vec![model.system_dim()])?,
            OperatorMatrix::zeros(vec![model.apparatus_dim()])?,
            model.generator().clone(),
        )
    }

    pub fn with_free(mut self, h_sys: OperatorMatrix, h_micro: OperatorMatrix) -> Result<Self> {
        if h_sys.dim() != self.h_sys.dim() || h_micro.dim() != self.h_micro.dim() {
            return Err(Error::arg("free Hamiltonians have the wrong dimensions"));
        }
        h_sys.require_hermitian("H_S", 1e-10)?;
        h_micro.require_hermitian("H_μA", 1e-10)?;
        self.h_sys = flat_op(&h_sys)?;
        self.h_micro = flat_op(&h_micro)?;
        Ok(self)
    }

    /// Adds the macroscopic part: `H_MA` on the amplifier, `V'` on apparatus ⊗ amplifier.
    pub fn with_macro(mut self, h_macro: OperatorMatrix, v_prime: OperatorMatrix) -> Result<Self> {
        h_macro.require_hermitian("H_MA", 1e-10)?;
        v_prime.require_hermitian("V'", 1e-10)?;
        if v_prime.dim() != self.h_micro.dim() * h_macro.dim() {
            return Err(Error::arg("V' must act on apparatus ⊗ amplifier"));
        }
        self.h_macro = Some(h_macro);
        self.v_prime = Some(v_prime);
        Ok(self)
    }

    pub fn system_dim(&self) -> usize {
        self.h_sys.dim()
    }

    pub fn apparatus_dim(&self) -> usize {
        self.h_micro.dim()
    }

    /// Generator on `S ⊗ μA`: `V`, plus the free parts unless `neglect_free`.
    pub fn micro_hamiltonian(&self, neglect_free: bool) -> Result<OperatorMatrix> {
        let composite = vec![self.system_dim(), self.apparatus_dim()];
        if neglect_free {
            return Ok(self.v.clone());
        }
        let hs = embed(&self.h_sys, &[SYSTEM], &composite)?;
        let ha = embed(&self.h_micro, &[APPARATUS], &composite)?;
        Ok(&(&hs + &ha) + &self.v)
    }

    /// Whether both free parts vanish identically.
    pub fn free_parts_zero(&self) -> bool {
        self.h_sys.max_abs() == 0.0 && self.h_micro.max_abs() == 0.0
    }
}

/// `α_t(W) = e^{iHt} W e^{−iH_S t}` with `H` on `S ⊗ μA`; with `neglect_free`
/// both free parts are dropped, leaving `e^{iVt} W`.
///
/// The domain of the result is `e^{iH_S t} P e^{−iH_S t}` for the domain `P` of `W`.
pub fn heisenberg_evolve(spec: &HamiltonianSpec, w: &Isometry, t: f64, neglect_free: bool) -> Result<Isometry> {
    let composite = vec![spec.system_dim(), spec.apparatus_dim()];
    let w_mat = w
        .matrix()
        .clone()
        .with_factor_dims(composite.clone())
        .map_err(|_| Error::arg("isometry does not act on system ⊗ apparatus"))?;
    let forward = expm_i_hermitian(&spec.micro_hamiltonian(neglect_free)?, t)?;
    if neglect_free {
        return w.with_matrix(&forward * &w_mat);
    }
    let hs = embed(&spec.h_sys, &[SYSTEM], &composite)?;
    let back = expm_i_hermitian(&hs, -t)?;
    let evolved = &(&forward * &w_mat) * &back;
    let domain = match w.domain() {
        None => None,
        Some(p) => {
            let p = p.clone().with_factor_dims(composite.clone())?;
            Some(&(&back.adjoint() * &p) * &back)
        }
    };
    Ok(w.with_matrix(evolved)?.with_domain(domain))
}

/// `‖α_T(W) − Σ_j W_j E_j‖_max` at the model's duration.
pub fn heisenberg_intertwiner(
    spec: &HamiltonianSpec,
    model: &MeasurementModel,
    w: &Isometry,
    w_family: &[Isometry],
    neglect_free: bool,
) -> Result<f64> {
    if spec.system_dim() != model.system_dim() || spec.apparatus_dim() != model.apparatus_dim() {
        return Err(Error::arg("Hamiltonian and measurement model act on different spaces"));
    }
    let evolved = heisenberg_evolve(spec, w, model.duration(), neglect_free)?;
    let target = model.intertwiner_target(w_family)?;
    Ok(evolved.matrix().max_abs_diff(&target))
}

/// One point of a finite-duration sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FidelityPoint {
    pub t: f64,
    /// `|⟨Ψ', ψ(t)⟩|²` against the ideal post-measurement vector `Ψ' = Σ_j E_jΦ ⊗ Ψ_j`.
    pub fidelity: f64,
    /// `Σ_j ‖(E_j ⊗ |Ψ_j⟩⟨Ψ_j|) ψ(t)‖²`: probability that the pointer already shows the right outcome.
    pub registration: f64,
}

/// Evolves `Φ ⊗ Ψ_R` under the full `S ⊗ μA` Hamiltonian and scores each grid time.
pub fn finite_t_fidelity(
    spec: &HamiltonianSpec,
    model: &MeasurementModel,
    phi: &StateVector,
    t_grid: &[f64],
) -> Result<Vec<FidelityPoint>> {
    let duration = model.duration();
    if let Some(&bad) = t_grid
        .iter()
        .find(|&&t| !(t >= 0.0 && t <= duration * (1.0 + 1e-12)))
    {
        return Err(Error::arg(format!("time {bad} outside [0, {duration}]")));
    }
    let psi0 = model.prepared(phi)?;
    let target = model.predicted_outcome(phi)?;
    let eig = eig_hermitian(&spec.micro_hamiltonian(false)?)?;
    let vecs = &eig.vectors;
    let n = psi0.dim();
    let coeffs: Vec<C64> = (0..n)
        .map(|k| (0..n).map(|i| vecs.get(i, k).conj() * psi0.amplitudes()[i]).sum())
        .collect();
    let registrars = model
        .observable()
        .projections()
        .iter()
        .zip(model.pointers())
        .map(|(e, p)| kron(&flat_op(e)?, &OperatorMatrix::projector(p)?))
        .collect::<Result<Vec<_>>>()?;

    t_grid
        .iter()
        .map(|&t| {
            let amps: Vec<C64> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|k| vecs.get(i, k) * C64::from_polar(1.0, eig.values[k] * t) * coeffs[k])
                        .sum()
                })
                .collect();
            let psi_t = StateVector::unnormalized(model.composite(), amps)?;
            let fidelity = target.inner(&psi_t).norm_sqr();
            let registration = registrars
                .iter()
                .map(|r| r.apply(&psi_t).map(|v| v.norm().powi(2)))
                .sum::<Result<f64>>()?;
            Ok(FidelityPoint {
                t,
                fidelity,
                registration,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::gates::*;
    use crate::quantum::{validate_family, validate_isometry};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn z_observable() -> SpectralObservable {
        SpectralObservable::new(vec![1.0, -1.0], vec![basis_projector(2, 0), basis_projector(2, 1)])
            .unwrap()
    }

    fn cnot_model() -> MeasurementModel {
        let e0 = StateVector::basis(vec![2], 0).unwrap();
        let e1 = StateVector::basis(vec![2], 1).unwrap();
        build_coupling(&z_observable(), &e0, &[e0.clone(), e1]).unwrap()
    }

    fn plus() -> StateVector {
        StateVector::from_real(vec![2], &[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap()
    }

    #[test]
    fn cnot_coupling_realizes_cnot() {
        let u = cnot_model().coupling_unitary().unwrap();
        // Oracle: all four basis vectors.
        for (input, output) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
            let out = u.apply(&StateVector::basis(vec![2, 2], input).unwrap()).unwrap();
            let expected = StateVector::basis(vec![2, 2], output).unwrap();
            assert!(out.max_abs_diff(&expected) < 1e-12, "|{input}⟩");
        }
    }

    #[test]
    fn degenerate_pointers_rejected() {
        let e0 = StateVector::basis(vec![2], 0).unwrap();
        let err = build_coupling(&z_observable(), &e0, &[e0.clone(), e0.clone()]).unwrap_err();
        assert!(matches!(err, Error::Argument(_)));
        assert!(build_coupling(&z_observable(), &e0, std::slice::from_ref(&e0)).is_err());
    }

    #[test]
    fn eigenstate_yields_product() {
        let m = cnot_model();
        let out = apply_measurement(&m, &StateVector::basis(vec![2], 0).unwrap()).unwrap();
        assert!(out.max_abs_diff(&StateVector::basis(vec![2, 2], 0).unwrap()) < 1e-12);
    }

    #[test]
    fn superposition_becomes_bell_pair() {
        let out = apply_measurement(&cnot_model(), &plus()).unwrap();
        let bell = StateVector::from_real(vec![2, 2], &[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]).unwrap();
        assert!(out.max_abs_diff(&bell) < 1e-12);
        assert!((out.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coherence_is_lost_for_sigma_x() {
        let m = cnot_model();
        let before = pauli_x().expectation(&plus()).unwrap().re;
        assert!((before - 1.0).abs() < 1e-15);
        let after = reduced_expectation(&apply_measurement(&m, &plus()).unwrap(), &pauli_x()).unwrap();
        assert!(after.abs() < 1e-12);
        let z = reduced_expectation(&apply_measurement(&m, &plus()).unwrap(), &pauli_z()).unwrap();
        assert!(z.abs() < 1e-12);
        let one = reduced_expectation(&apply_measurement(&m, &plus()).unwrap(), &identity(2)).unwrap();
        assert!((one - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reduced_expectation_rejects_non_hermitian() {
        let out = apply_measurement(&cnot_model(), &plus()).unwrap();
        let n = OperatorMatrix::from_real(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(reduced_expectation(&out, &n).is_err());
    }

    #[test]
    fn intertwiner_exact_without_free_evolution() {
        let m = cnot_model();
        let spec = HamiltonianSpec::for_model(&m).unwrap();
        let w = m.ready_isometry().unwrap();
        let ws = m.pointer_isometries().unwrap();
        assert_eq!(validate_isometry(&w), 0.0);
        assert!(validate_family(&ws).unwrap() <= 1e-10);
        let r = heisenberg_intertwiner(&spec, &m, &w, &ws, true).unwrap();
        assert!(r <= 1e-10, "{r}");
    }

    #[test]
    fn intertwiner_perturbation_is_bounded_and_monotone() {
        let m = cnot_model();
        let w = m.ready_isometry().unwrap();
        let ws = m.pointer_isometries().unwrap();
        let mut last = -1.0;
        for eps in [0.0, 0.01, 0.1] {
            let spec = HamiltonianSpec::for_model(&m)
                .unwrap()
                .with_free(pauli_x().scale_real(eps), OperatorMatrix::zeros(vec![2]).unwrap())
                .unwrap();
            let r = heisenberg_intertwiner(&spec, &m, &w, &ws, false).unwrap();
            assert!(r <= 2.0 * eps * m.duration() + 1e-9, "eps {eps}: {r}");
            assert!(r > last);
            last = r;
        }
    }

    #[test]
    fn no_evolution_leaves_w_unchanged() {
        let m = cnot_model();
        let spec = HamiltonianSpec::for_model(&m)
            .unwrap()
            .with_free(pauli_x().scale_real(0.7), pauli_z().scale_real(-0.3))
            .unwrap();
        let w = m.ready_isometry().unwrap();
        let a = heisenberg_evolve(&spec, &w, 0.0, false).unwrap();
        assert_eq!(a.matrix().max_abs_diff(w.matrix()), 0.0);
    }

    #[test]
    fn trivial_observable_needs_no_coupling() {
        let e0 = StateVector::basis(vec![2], 0).unwrap();
        let obs = SpectralObservable::new(vec![1.0], vec![identity(2)]).unwrap();
        let m = build_coupling(&obs, &e0, std::slice::from_ref(&e0)).unwrap();
        assert!(m.generator().max_abs() < 1e-15);
        let spec = HamiltonianSpec::for_model(&m)
            .unwrap()
            .with_free(pauli_y(), pauli_x())
            .unwrap();
        let r = heisenberg_intertwiner(
            &spec,
            &m,
            &m.ready_isometry().unwrap(),
            &m.pointer_isometries().unwrap(),
            true,
        )
        .unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn fidelity_endpoints_and_midpoint() {
        let m = cnot_model();
        let spec = HamiltonianSpec::for_model(&m).unwrap();
        let pts = finite_t_fidelity(&spec, &m, &plus(), &[0.0, 0.5, 1.0]).unwrap();
        // t = 0: |⟨Ψ', Φ⊗Ψ_R⟩|² = |1/2|².
        assert!((pts[0].fidelity - 0.25).abs() < 1e-12);
        assert!((pts[0].registration - 0.5).abs() < 1e-12);
        // Flipped branch evolves as |0⟩ ↦ (|+⟩ + e^{iπt}|−⟩)/√2; at t = 1/2 its
        // overlap with |1⟩ is (1 − i)/2, so the total overlap is (3 − i)/4.
        assert!((pts[1].fidelity - 0.625).abs() < 1e-12, "{}", pts[1].fidelity);
        // Pointer registration: 1/2 + 1/2·sin²(π/4) = 3/4.
        assert!((pts[1].registration - 0.75).abs() < 1e-12);
        assert!(pts[2].fidelity >= 1.0 - 1e-9);
        assert!(finite_t_fidelity(&spec, &m, &plus(), &[1.5]).is_err());
        assert!(finite_t_fidelity(&spec, &m, &plus(), &[-0.1]).is_err());
    }

    #[test]
    fn already_pointing_state_has_unit_fidelity_at_start() {
        let m = cnot_model();
        let spec = HamiltonianSpec::for_model(&m).unwrap();
        let pts = finite_t_fidelity(&spec, &m, &StateVector::basis(vec![2], 0).unwrap(), &[0.0]).unwrap();
        assert!((pts[0].fidelity - 1.0).abs() < 1e-12);
    }
}
