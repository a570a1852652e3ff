//! The macroscopic part of the apparatus: `N` particles that copy the pointer
//! outcome into a product state `a_j^{⊗N}`.
//!
//! Composite layout for the full chain is `S ⊗ μA ⊗ site_1 ⊗ … ⊗ site_N`.
//! Cross-branch interference between `a_1^{⊗N}` and `a_2^{⊗N}` scales as
//! `r^N` with `r = ⟨a_1, a_2⟩`; observables touching only `k` amplifier sites
//! see at most `2|a||b||r|^{N−k}` of it.

use crate::error::{Error, Result};
use crate::linalg::{
    cross_reduced, expm_i_hermitian, orthonormality_defect, singular_values, FactorLayout,
    OperatorMatrix, StateVector, C64, NORM_TOL,
};
use crate::measurement::{HamiltonianSpec, APPARATUS, SYSTEM};
use crate::quantum::gates::pauli_y;
use crate::quantum::{embed, hermitian_product_basis_traces};

/// Largest `N` for which dense pointer states are built by the sweep helpers.
pub const DENSE_MAX_SITES: usize = 10;

#[derive(Clone, Debug)]
pub struct Amplifier {
    n_particles: usize,
    site_dim: usize,
    branch_states: Vec<StateVector>,
    readout_overlap: C64,
}

impl Amplifier {
    /// Amplifier with one single-site state per outcome; needs at least two
    /// outcomes and pairwise overlaps of modulus strictly below 1.
    pub fn new(n_particles: usize, branch_states: Vec<StateVector>) -> Result<Self> {
        if n_particles == 0 {
            return Err(Error::arg("amplifier needs at least one particle"));
        }
        if branch_states.len() < 2 {
            return Err(Error::arg("amplifier needs at least two branch states"));
        }
        let site_dim = branch_states[0].dim();
        let mut states = Vec::with_capacity(branch_states.len());
        for a in branch_states {
            if a.dim() != site_dim {
                return Err(Error::arg("branch states live in different spaces"));
            }
            if (a.norm() - 1.0).abs() > NORM_TOL {
                return Err(Error::arg("branch state is not normalized"));
            }
            states.push(a.with_factor_dims(vec![site_dim])?);
        }
        for (i, a) in states.iter().enumerate() {
            for b in &states[i + 1..] {
                if a.inner(b).norm() >= 1.0 - NORM_TOL {
                    return Err(Error::arg("branch states are not distinguishable (|r| = 1)"));
                }
            }
        }
        let readout_overlap = states[0].inner(&states[1]);
        Ok(Self {
            n_particles,
            site_dim,
            branch_states: states,
            readout_overlap,
        })
    }

    /// Qubit amplifier with `a_1 = |0⟩`, `a_2 = r|0⟩ + √(1 − r²)|1⟩`, so `⟨a_1, a_2⟩ = r`.
    pub fn with_overlap(n_particles: usize, r: f64) -> Result<Self> {
        if r.is_nan() || r.abs() >= 1.0 {
            return Err(Error::arg(format!("readout overlap must satisfy |r| < 1, got {r}")));
        }
        let a1 = StateVector::basis(vec![2], 0)?;
        let a2 = StateVector::from_real(vec![2], &[r, (1.0 - r * r).sqrt()])?;
        Self::new(n_particles, vec![a1, a2])
    }

    /// Qubit amplifier whose second branch is `|0⟩` rotated by `θ`, matching
    /// [`reference_coupling`] with the same angle.
    pub fn with_rotation(n_particles: usize, theta: f64) -> Result<Self> {
        let a1 = StateVector::basis(vec![2], 0)?;
        let a2 = StateVector::from_real(vec![2], &[theta.cos(), theta.sin()])?;
        Self::new(n_particles, vec![a1, a2])
    }

    /// Same branch states, different particle number.
    pub fn with_particles(&self, n_particles: usize) -> Result<Self> {
        Self::new(n_particles, self.branch_states.clone())
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn site_dim(&self) -> usize {
        self.site_dim
    }

    pub fn branch_states(&self) -> &[StateVector] {
        &self.branch_states
    }

    pub fn readout_overlap(&self) -> C64 {
        self.readout_overlap
    }

    pub fn n_outcomes(&self) -> usize {
        self.branch_states.len()
    }

    /// Factor dims of the amplifier alone.
    pub fn site_dims(&self) -> Vec<usize> {
        vec![self.site_dim; self.n_particles]
    }

    /// `r^N` without building any state.
    pub fn pointer_overlap(&self) -> C64 {
        self.readout_overlap.powu(self.n_particles as u32)
    }
}

/// `a_j^{⊗N}`, with one factor per site.
pub fn pointer_state(amp: &Amplifier, outcome: usize) -> Result<StateVector> {
    let a = amp.branch_states.get(outcome).ok_or_else(|| {
        Error::arg(format!(
            "outcome {outcome} out of range for {} branches",
            amp.n_outcomes()
        ))
    })?;
    a.kron_power(amp.n_particles)
}

/// `⟨a_1^{⊗N}, a_2^{⊗N}⟩` from the dense pointer states.
pub fn pointer_overlap_dense(amp: &Amplifier) -> Result<C64> {
    Ok(pointer_state(amp, 0)?.inner(&pointer_state(amp, 1)?))
}

fn check_weights(weights: (C64, C64)) -> Result<(f64, f64)> {
    let (a, b) = (weights.0.norm(), weights.1.norm());
    if (a * a + b * b - 1.0).abs() > 1e-12 {
        return Err(Error::arg(format!(
            "weights must satisfy |a|² + |b|² = 1, got {}",
            a * a + b * b
        )));
    }
    Ok((a, b))
}

/// `2|a||b||r|^N`, the largest cross-branch term any norm-one operator can pick up.
pub fn interference_magnitude(amp: &Amplifier, weights: (C64, C64)) -> Result<f64> {
    let (a, b) = check_weights(weights)?;
    Ok(2.0 * a * b * amp.readout_overlap.norm().powi(amp.n_particles as i32))
}

/// [`interference_magnitude`] evaluated from the dense pointer overlap.
pub fn interference_magnitude_dense(amp: &Amplifier, weights: (C64, C64)) -> Result<f64> {
    let (a, b) = check_weights(weights)?;
    Ok(2.0 * a * b * pointer_overlap_dense(amp)?.norm())
}

/// Factor dims `[d_S, d_μA, site, …, site]` of the full chain.
pub fn chain_dims(spec: &HamiltonianSpec, amp: &Amplifier) -> Vec<usize> {
    let mut dims = vec![spec.system_dim(), spec.apparatus_dim()];
    dims.extend(amp.site_dims());
    dims
}

/// `H = H_S ⊗ I ⊗ I + I ⊗ H_μA ⊗ I + V ⊗ I + I ⊗ V' + I ⊗ I ⊗ H_MA`.
pub fn assemble_total_hamiltonian(spec: &HamiltonianSpec, amp: &Amplifier) -> Result<OperatorMatrix> {
    let dims = chain_dims(spec, amp);
    let amp_factors: Vec<usize> = (2..dims.len()).collect();
    let amp_dim: usize = amp.site_dims().iter().product();
    let mut h = embed(&spec.micro_hamiltonian(false)?, &[SYSTEM, APPARATUS], &dims)?;
    if let Some(hm) = &spec.h_macro {
        if hm.dim() != amp_dim {
            return Err(Error::arg(format!(
                "H_MA has dim {}, amplifier has dim {amp_dim}",
                hm.dim()
            )));
        }
        let hm = hm.clone().with_factor_dims(amp.site_dims())?;
        h = &h + &embed(&hm, &amp_factors, &dims)?;
    }
    if let Some(vp) = &spec.v_prime {
        if vp.dim() != spec.apparatus_dim() * amp_dim {
            return Err(Error::arg("V' does not act on apparatus ⊗ amplifier"));
        }
        let mut targets = vec![APPARATUS];
        targets.extend(&amp_factors);
        let vp = vp.clone().with_factor_dims(dims[1..].to_vec())?;
        h = &h + &embed(&vp, &targets, &dims)?;
    }
    Ok(h)
}

/// `exp(iHt)ψ` for the assembled chain Hamiltonian.
pub fn evolve_amplification(
    spec: &HamiltonianSpec,
    amp: &Amplifier,
    psi: &StateVector,
    t: f64,
) -> Result<StateVector> {
    let dims = chain_dims(spec, amp);
    if psi.dim() != dims.iter().product::<usize>() {
        return Err(Error::arg(format!(
            "state of dim {} does not live on the chain {dims:?}",
            psi.dim()
        )));
    }
    let psi = psi.clone().with_factor_dims(dims)?;
    if t == 0.0 {
        return Ok(psi);
    }
    let h = assemble_total_hamiltonian(spec, amp)?;
    let out = expm_i_hermitian(&h, t)?.apply(&psi)?;
    if psi.is_normalized() {
        out.assert_normalized()
    } else {
        Ok(out)
    }
}

/// Reference `V' = |Ψ⟩⟨Ψ| ⊗ Σ_sites (−θ σ_y)_site` on `μA ⊗ (qubit)^N`:
/// over unit time it rotates every site by `θ` when the apparatus shows `pointer`.
pub fn reference_coupling(pointer: &StateVector, n_sites: usize, theta: f64) -> Result<OperatorMatrix> {
    if n_sites == 0 {
        return Err(Error::arg("reference coupling needs at least one site"));
    }
    let da = pointer.dim();
    let mut dims = vec![da];
    dims.extend(std::iter::repeat_n(2, n_sites));
    let p = OperatorMatrix::projector(&pointer.clone().with_factor_dims(vec![da])?)?;
    let rot = pauli_y().scale_real(-theta);
    let mut acc = OperatorMatrix::zeros(dims.clone())?;
    for site in 0..n_sites {
        let mut part = embed(&p, &[0], &dims)?;
        part = part.matmul(&embed(&rot, &[site + 1], &dims)?)?;
        acc = &acc + &part;
    }
    Ok(acc)
}

/// `‖Tr_MA |b_1⟩⟨b_2|‖_1 / (‖b_1‖‖b_2‖)` with `b_j = (I ⊗ |Ψ_j⟩⟨Ψ_j| ⊗ I)ψ`:
/// the overlap of the amplifier parts of two pointer branches.
pub fn branch_overlap(psi: &StateVector, pointers: (&StateVector, &StateVector)) -> Result<f64> {
    if psi.factor_dims().len() < 3 {
        return Err(Error::arg("branch overlap needs system, apparatus and amplifier factors"));
    }
    let da = psi.factor_dims()[APPARATUS];
    let branch = |p: &StateVector| -> Result<StateVector> {
        let proj = OperatorMatrix::projector(&p.clone().with_factor_dims(vec![da])?)?;
        crate::linalg::apply_local(&proj, &[APPARATUS], psi)
    };
    let (b1, b2) = (branch(pointers.0)?, branch(pointers.1)?);
    let (n1, n2) = (b1.norm(), b2.norm());
    if n1 == 0.0 || n2 == 0.0 {
        return Err(Error::pre("a pointer branch is empty"));
    }
    let layout = FactorLayout::new(psi.factor_dims(), &[SYSTEM, APPARATUS])?;
    let cross = cross_reduced(&b1, &b2, &layout)?;
    Ok(singular_values(&cross).iter().sum::<f64>() / (n1 * n2))
}

/// Test algebra: system ⊗ apparatus plus the first `k_support` amplifier sites.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RestrictedAlgebraSpec {
    pub k_support: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixtureLawReport {
    /// `max_A |ρ(A) − |a|²φ(A) − |b|²ψ(A)|` over the product Hermitian basis of the algebra.
    pub deviation: f64,
    /// `2|a||b||r|^{N−k}`.
    pub bound: f64,
}

/// Branch vectors `ξ = ξ_loc ⊗ a_1^{⊗N}`, `η = η_loc ⊗ a_2^{⊗N}`.
pub fn branch_vectors(
    xi_local: &StateVector,
    eta_local: &StateVector,
    amp: &Amplifier,
) -> Result<(StateVector, StateVector)> {
    if xi_local.dim() != eta_local.dim() || xi_local.factor_dims() != eta_local.factor_dims() {
        return Err(Error::arg("branch vectors must share their local factors"));
    }
    let defect = orthonormality_defect(&[xi_local.clone(), eta_local.clone()]);
    if defect > 1e-12 {
        return Err(Error::pre(format!(
            "local branch vectors must be orthonormal (defect {defect:e})"
        )));
    }
    Ok((
        xi_local.kron(&pointer_state(amp, 0)?)?,
        eta_local.kron(&pointer_state(amp, 1)?)?,
    ))
}

/// Factors kept by the restricted algebra for a chain with `n_local` local factors.
fn restricted_factors(n_local: usize, alg: RestrictedAlgebraSpec) -> Vec<usize> {
    (0..n_local + alg.k_support).collect()
}

/// `Δ = Tr_rest(a b̄ |ξ⟩⟨η|) + h.c.`, so that `ρ(A) − |a|²φ(A) − |b|²ψ(A) = tr(AΔ)`
/// for every `A` in the restricted algebra.
pub fn interference_operator(
    xi: &StateVector,
    eta: &StateVector,
    weights: (C64, C64),
    keep: &[usize],
) -> Result<OperatorMatrix> {
    let layout = FactorLayout::new(xi.factor_dims(), keep)?;
    let cross = cross_reduced(xi, eta, &layout)?.scale(weights.0 * weights.1.conj());
    Ok(&cross + &cross.adjoint())
}

/// Largest visible interference between two amplified branches on the algebra
/// `alg`, and the analytic bound for it.
pub fn mixture_law_check(
    xi_local: &StateVector,
    eta_local: &StateVector,
    weights: (C64, C64),
    alg: RestrictedAlgebraSpec,
    amp: &Amplifier,
) -> Result<MixtureLawReport> {
    if alg.k_support > amp.n_particles() {
        return Err(Error::arg(format!(
            "restricted algebra with k = {} exceeds N = {}",
            alg.k_support,
            amp.n_particles()
        )));
    }
    let (a, b) = check_weights(weights)?;
    let (xi, eta) = branch_vectors(xi_local, eta_local, amp)?;
    let keep = restricted_factors(xi_local.factor_dims().len(), alg);
    let delta = interference_operator(&xi, &eta, weights, &keep)?;
    let deviation = hermitian_product_basis_traces(&delta)?
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let exponent = (amp.n_particles() - alg.k_support) as i32;
    Ok(MixtureLawReport {
        deviation,
        bound: 2.0 * a * b * amp.readout_overlap().norm().powi(exponent),
    })
}
