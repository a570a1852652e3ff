//! A net of local algebras on a finite spin chain.
//!
//! Site `s` of the chain is tensor factor `s`. The algebra of a region is
//! generated by operators acting on its sites only, so spacelike regions (which
//! never share a site) commute by construction; [`locality_check`] guards that.

use crate::error::{Error, Result};
use crate::linalg::{
    check_capacity, orthonormality_defect, permute_factors, product_dim,
    singular_values, FactorLayout, OperatorMatrix, StateVector, NORM_TOL,
};
use crate::measurement::{
    build_coupling, heisenberg_evolve, HamiltonianSpec, MeasurementModel,
};
use crate::quantum::{
    embed, hermitian_basis, support_defect, validate_family, Isometry, SpectralObservable,
};
use crate::spacetime::{region_spacelike, spacelike_margin, Region};

/// Support leakage above this is a construction failure.
pub const SUPPORT_TOL: f64 = 1e-12;
/// Minimum `|Δx| − |Δt|` for regions treated as well separated.
pub const WELL_SPACELIKE_MARGIN: i64 = 2;

#[derive(Clone, Debug)]
pub struct LatticeNet {
    n_sites: usize,
    site_dim: usize,
    assignment: Vec<(Region, Vec<OperatorMatrix>)>,
}

impl LatticeNet {
    pub fn new(n_sites: usize, site_dim: usize) -> Result<Self> {
        if n_sites == 0 || site_dim == 0 {
            return Err(Error::arg("lattice needs at least one site of positive dimension"));
        }
        let dim = product_dim("lattice", &vec![site_dim; n_sites])?;
        check_capacity("lattice operator", dim as u128 * dim as u128)?;
        Ok(Self {
            n_sites,
            site_dim,
            assignment: Vec::new(),
        })
    }

    pub fn qubits(n_sites: usize) -> Result<Self> {
        Self::new(n_sites, 2)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn site_dim(&self) -> usize {
        self.site_dim
    }

    pub fn dims(&self) -> Vec<usize> {
        vec![self.site_dim; self.n_sites]
    }

    pub fn dim(&self) -> usize {
        self.site_dim.pow(self.n_sites as u32)
    }

    /// Chain factor indices of the region's sites, ascending.
    pub fn factors(&self, region: &Region) -> Result<Vec<usize>> {
        region
            .sites()
            .map(|s| {
                usize::try_from(s)
                    .ok()
                    .filter(|&k| k < self.n_sites)
                    .ok_or_else(|| {
                        Error::arg(format!("site {s} outside the chain 0..{}", self.n_sites))
                    })
            })
            .collect()
    }

    /// `op` on the region's sites (factor order ascending) placed on the chain.
    pub fn embed_local(&self, op: &OperatorMatrix, region: &Region) -> Result<OperatorMatrix> {
        let factors = self.factors(region)?;
        let op = op
            .clone()
            .with_factor_dims(vec![self.site_dim; factors.len()])
            .map_err(|_| {
                Error::arg(format!(
                    "operator of dim {} does not act on {} sites",
                    op.dim(),
                    factors.len()
                ))
            })?;
        embed(&op, &factors, &self.dims())
    }

    /// Hermitian basis of every site of the region, each placed on the chain.
    pub fn local_generators(&self, region: &Region) -> Result<Vec<OperatorMatrix>> {
        let dims = self.dims();
        let mut out = Vec::new();
        for k in self.factors(region)? {
            for b in hermitian_basis(self.site_dim) {
                out.push(embed(&b, &[k], &dims)?);
            }
        }
        Ok(out)
    }

    /// Declares generators for a region; each must act only on its sites.
    pub fn assign(&mut self, region: Region, generators: Vec<OperatorMatrix>) -> Result<()> {
        let factors = self.factors(&region)?;
        for g in &generators {
            if g.dim() != self.dim() {
                return Err(Error::arg("generators must be given on the whole chain"));
            }
            let g = g.clone().with_factor_dims(self.dims())?;
            let leak = support_defect(&g, &factors)?;
            if leak > SUPPORT_TOL {
                return Err(Error::arg(format!(
                    "generator leaks outside sites {factors:?} ({leak:e})"
                )));
            }
        }
        self.assignment.retain(|(r, _)| r != &region);
        self.assignment.push((region, generators));
        Ok(())
    }

    /// Assigned generators of the region, or the full local basis if none were assigned.
    pub fn generators(&self, region: &Region) -> Result<Vec<OperatorMatrix>> {
        match self.assignment.iter().find(|(r, _)| r == region) {
            Some((_, g)) => Ok(g.clone()),
            None => self.local_generators(region),
        }
    }

    /// `|Ψ⟩` on `sites` (ascending) and `|0⟩` on every other site.
    pub fn place_state(&self, local: &StateVector, sites: &[usize]) -> Result<StateVector> {
        let n_local = sites.len();
        if local.dim() != product_dim("local state", &vec![self.site_dim; n_local])? {
            return Err(Error::arg("local state does not match the listed sites"));
        }
        let local = local.clone().with_factor_dims(vec![self.site_dim; n_local])?;
        let others: Vec<usize> = (0..self.n_sites).filter(|k| !sites.contains(k)).collect();
        let full = if others.is_empty() {
            local
        } else {
            local.kron(&StateVector::basis(vec![self.site_dim; others.len()], 0)?)?
        };
        let mut position = vec![usize::MAX; self.n_sites];
        for (p, &k) in sites.iter().chain(&others).enumerate() {
            if k >= self.n_sites || position[k] != usize::MAX {
                return Err(Error::arg("site list must be distinct sites of the chain"));
            }
            position[k] = p;
        }
        permute_factors(&full, &position)
    }
}

/// `max ‖[a, b]‖_max` over generator pairs of two spacelike regions.
pub fn locality_check(net: &LatticeNet, r1: &Region, r2: &Region) -> Result<f64> {
    if !region_spacelike(r1, r2) {
        return Err(Error::pre("locality is only asserted for spacelike regions"));
    }
    let (g1, g2) = (net.generators(r1)?, net.generators(r2)?);
    let mut worst = 0.0f64;
    for a in &g1 {
        for b in &g2 {
            worst = worst.max(a.commutator(b)?.max_abs());
        }
    }
    Ok(worst)
}

/// `max` support leakage of `small`'s generators out of `large`'s sites.
pub fn isotony_check(net: &LatticeNet, small: &Region, large: &Region) -> Result<f64> {
    if !small.site_set().is_subset(large.site_set()) {
        return Err(Error::pre("isotony compares a region with one containing its sites"));
    }
    let factors = net.factors(large)?;
    let mut worst = 0.0f64;
    for g in net.generators(small)? {
        worst = worst.max(support_defect(&g.with_factor_dims(net.dims())?, &factors)?);
    }
    Ok(worst)
}

/// A measurement whose coupling, isometries and observable all live on the
/// sites of one region.
#[derive(Clone, Debug)]
pub struct LocalizedMeasurement {
    pub region: Region,
    pub w_ready: Isometry,
    pub w_outcomes: Vec<Isometry>,
    /// `α_T(W)` for the coupling alone.
    pub w_evolved: Isometry,
    pub observable: SpectralObservable,
    pub system_sites: Vec<usize>,
    pub apparatus_sites: Vec<usize>,
    pub model: MeasurementModel,
}

impl LocalizedMeasurement {
    /// Chain state with `rest` on every site outside the apparatus and `|0⟩`
    /// on the apparatus sites, i.e. inside the domain of `W`.
    pub fn prepare(&self, net: &LatticeNet, rest: &StateVector) -> Result<StateVector> {
        let sites: Vec<usize> = (0..net.n_sites())
            .filter(|k| !self.apparatus_sites.contains(k))
            .collect();
        net.place_state(rest, &sites)
    }
}

/// Number of sites of dim `d` needed for dimension `dim`.
fn sites_for(dim: usize, d: usize) -> Result<usize> {
    let mut acc = 1usize;
    for n in 0..=usize::BITS as usize {
        if acc == dim {
            return Ok(n);
        }
        acc = match acc.checked_mul(d) {
            Some(v) if v <= dim => v,
            _ => break,
        };
    }
    Err(Error::arg(format!("dim {dim} is not a power of the site dim {d}")))
}

/// [`localize_measurement_with`] with duration `T = 1` and no free evolution.
pub fn localize_measurement(
    net: &LatticeNet,
    region: &Region,
    observable: &SpectralObservable,
    ready: &StateVector,
    pointers: &[StateVector],
) -> Result<LocalizedMeasurement> {
    localize_measurement_with(net, region, observable, ready, pointers, 1.0)
}

/// Places the system on the first sites of `region` and the apparatus on the
/// next ones, builds the coupling over `duration` steps, and embeds everything.
pub fn localize_measurement_with(
    net: &LatticeNet,
    region: &Region,
    observable: &SpectralObservable,
    ready: &StateVector,
    pointers: &[StateVector],
    duration: f64,
) -> Result<LocalizedMeasurement> {
    let factors = net.factors(region)?;
    if (region.duration() as f64) < duration {
        return Err(Error::pre(format!(
            "region time window {} is shorter than the measurement duration {duration}",
            region.duration()
        )));
    }
    let m = sites_for(observable.dim(), net.site_dim())?;
    let p = sites_for(ready.dim(), net.site_dim())?;
    if m == 0 || p == 0 {
        return Err(Error::arg("system and apparatus need at least one site each"));
    }
    if m + p > factors.len() {
        return Err(Error::construction(format!(
            "region has {} sites, system and apparatus need {}",
            factors.len(),
            m + p
        )));
    }
    let system_sites = factors[..m].to_vec();
    let apparatus_sites = factors[m..m + p].to_vec();
    let targets: Vec<usize> = factors[..m + p].to_vec();

    let model = build_coupling(observable, ready, pointers)?.rescaled(duration)?;
    let spec = HamiltonianSpec::for_model(&model)?;
    let local_w = model.ready_isometry()?;
    let local_ws = model.pointer_isometries()?;
    let evolved = heisenberg_evolve(&spec, &local_w, duration, true)?;

    let dims = net.dims();
    let local_dims = vec![net.site_dim(); m + p];
    let place = |op: &OperatorMatrix| -> Result<OperatorMatrix> {
        let placed = embed(&op.clone().with_factor_dims(local_dims.clone())?, &targets, &dims)?;
        let leak = support_defect(&placed, &factors)?;
        if leak > SUPPORT_TOL {
            return Err(Error::construction(format!(
                "embedded operator leaks outside the region ({leak:e})"
            )));
        }
        Ok(placed)
    };
    let place_iso = |w: &Isometry| -> Result<Isometry> {
        let domain = w.domain().map(&place).transpose()?;
        Ok(Isometry::new(place(w.matrix())?, domain)?.with_support(targets.clone()))
    };
    let w_ready = place_iso(&local_w)?;
    let w_outcomes = local_ws.iter().map(place_iso).collect::<Result<Vec<_>>>()?;
    let w_evolved = place_iso(&evolved)?;
    let defect = validate_family(&w_outcomes)?;
    if defect > 1e-10 {
        return Err(Error::construction(format!(
            "localized pointer isometries are not orthogonal ({defect:e})"
        )));
    }

    let sys_region_dims = vec![net.site_dim(); m];
    let projections = observable
        .projections()
        .iter()
        .map(|e| embed(&e.clone().with_factor_dims(sys_region_dims.clone())?, &system_sites, &dims))
        .collect::<Result<Vec<_>>>()?;
    let observable = SpectralObservable::new(observable.eigenvalues().to_vec(), projections)?;

    Ok(LocalizedMeasurement {
        region: region.clone(),
        w_ready,
        w_outcomes,
        w_evolved,
        observable,
        system_sites,
        apparatus_sites,
        model,
    })
}

/// `B` on the whole chain, given either there or on the sites of `b_region`.
fn chain_operator(net: &LatticeNet, b: &OperatorMatrix, b_region: &Region) -> Result<OperatorMatrix> {
    let factors = net.factors(b_region)?;
    if b.dim() == net.dim() && factors.len() < net.n_sites() {
        let b = b.clone().with_factor_dims(net.dims())?;
        let leak = support_defect(&b, &factors)?;
        if leak > SUPPORT_TOL {
            return Err(Error::arg(format!("B leaks outside its region ({leak:e})")));
        }
        return Ok(b);
    }
    net.embed_local(b, b_region)
}

/// `|(WΦ, B WΦ) − (Φ, BΦ)|` for an isometry `W` of the chain, evaluated as
/// `(Φ, (W†BW − B)Φ)`.
pub fn no_signaling_delta(
    net: &LatticeNet,
    w: &Isometry,
    b: &OperatorMatrix,
    b_region: &Region,
    phi: &StateVector,
) -> Result<f64> {
    b.require_hermitian("B", 1e-10)?;
    let b = chain_operator(net, b, b_region)?;
    let phi = phi.clone().with_factor_dims(net.dims())?;
    if (phi.norm() - 1.0).abs() > NORM_TOL {
        return Err(Error::arg("Φ is not normalized"));
    }
    let outside = w.domain_defect(&phi)?;
    if outside > 1e-10 {
        return Err(Error::pre(format!("Φ is not in the domain of W ({outside:e})")));
    }
    let w = w.matrix().clone().with_factor_dims(net.dims())?;
    let moved = w.adjoint().matmul(&b)?.matmul(&w)?;
    Ok((&moved - &b).expectation(&phi)?.norm())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoSignaling {
    /// Shift of `⟨B⟩` under `W`.
    pub delta_w: f64,
    /// Shift of `⟨B⟩` under `α_T(W)`.
    pub delta_evolved: f64,
}

impl NoSignaling {
    pub fn max(&self) -> f64 {
        self.delta_w.max(self.delta_evolved)
    }
}

/// No-signaling shifts for `B` on a region spacelike to the measurement.
pub fn no_signaling_check(
    net: &LatticeNet,
    m: &LocalizedMeasurement,
    b: &OperatorMatrix,
    b_region: &Region,
    phi: &StateVector,
) -> Result<NoSignaling> {
    if !region_spacelike(&m.region, b_region) {
        return Err(Error::pre("B must be localized spacelike to the measurement region"));
    }
    Ok(NoSignaling {
        delta_w: no_signaling_delta(net, &m.w_ready, b, b_region, phi)?,
        delta_evolved: no_signaling_delta(net, &m.w_evolved, b, b_region, phi)?,
    })
}

fn require_projection(p: &OperatorMatrix, what: &str) -> Result<()> {
    let defect = p.hermiticity_defect().max((p * p).max_abs_diff(p));
    if defect > 1e-10 {
        return Err(Error::arg(format!("{what} is not a projection ({defect:e})")));
    }
    Ok(())
}

/// First canonical basis vector with a nonvanishing image under `p`, projected
/// and scaled to squared norm 1/2.
fn range_vector(p: &OperatorMatrix) -> Option<StateVector> {
    (0..p.dim()).find_map(|i| {
        let v = p.column(i);
        let n = v.norm();
        (n > 1e-8).then(|| v.scale((0.5f64.sqrt() / n).into()))
    })
}

/// `(Ψ + Φ)` normalized with `Ψ ∈ range(EF)`, `Φ ∈ range((I−E)(I−F))`, each of squared norm 1/2.
///
/// `e` and `f` are projections on the sites of their regions.
pub fn borchers_entangle(
    net: &LatticeNet,
    e: &OperatorMatrix,
    e_region: &Region,
    f: &OperatorMatrix,
    f_region: &Region,
) -> Result<StateVector> {
    if !region_spacelike(e_region, f_region) {
        return Err(Error::pre("E and F must be localized in spacelike regions"));
    }
    require_projection(e, "E")?;
    require_projection(f, "F")?;
    if e.max_abs() < 1e-12 || f.max_abs() < 1e-12 {
        return Err(Error::pre("E and F must be nonzero"));
    }
    let e = net.embed_local(e, e_region)?;
    let f = net.embed_local(f, f_region)?;
    let id = OperatorMatrix::identity(net.dims())?;
    let ef = e.matmul(&f)?;
    let not_ef = (&id - &e).matmul(&(&id - &f))?;
    let psi = range_vector(&ef).ok_or_else(|| Error::construction("EF has trivial range"))?;
    let phi = range_vector(&not_ef).ok_or_else(|| Error::construction("(I−E)(I−F) has trivial range"))?;
    psi.add(&phi)?.normalize()
}

/// `(Ψ_1 ⊗ Φ_1 + Ψ_2 ⊗ Φ_2)/√2` with the pairs on two well separated regions
/// and `|0⟩` elsewhere.
pub fn split_entangle(
    net: &LatticeNet,
    r1: &Region,
    psi_pair: (&StateVector, &StateVector),
    r2: &Region,
    phi_pair: (&StateVector, &StateVector),
) -> Result<StateVector> {
    for (name, pair) in [("Ψ", psi_pair), ("Φ", phi_pair)] {
        let defect = orthonormality_defect(&[pair.0.clone(), pair.1.clone()]);
        if defect > 1e-12 {
            return Err(Error::arg(format!("{name} pair is not orthonormal ({defect:e})")));
        }
    }
    let margin = spacelike_margin(r1, r2);
    if margin < WELL_SPACELIKE_MARGIN {
        return Err(Error::pre(format!(
            "regions must be spacelike with margin ≥ {WELL_SPACELIKE_MARGIN}, got {margin}"
        )));
    }
    let (f1, f2) = (net.factors(r1)?, net.factors(r2)?);
    let d = net.site_dim();
    let flat = |v: &StateVector, n: usize| v.clone().with_factor_dims(vec![d; n]);
    let term = |a: &StateVector, b: &StateVector| -> Result<StateVector> {
        flat(a, f1.len())?.kron(&flat(b, f2.len())?)
    };
    let local = term(psi_pair.0, phi_pair.0)?
        .add(&term(psi_pair.1, phi_pair.1)?)?
        .normalize()?;
    let sites: Vec<usize> = f1.iter().chain(&f2).copied().collect();
    net.place_state(&local, &sites)
}

/// Singular values of `ψ` across the cut `factors | rest`, descending.
pub fn schmidt_coefficients(psi: &StateVector, factors: &[usize]) -> Result<Vec<f64>> {
    let layout = FactorLayout::new(psi.factor_dims(), factors)?;
    let (ra, rb) = (layout.sub_dim(), layout.rest_dim());
    let amps = psi.amplitudes();
    let n = ra.max(rb);
    // Pad to square; extra zero rows or columns do not change the nonzero singular values.
    let m = OperatorMatrix::from_fn(vec![n], |i, j| {
        if i < ra && j < rb {
            amps[layout.sub_offsets[i] + layout.rest_offsets[j]]
        } else {
            crate::linalg::C64::new(0.0, 0.0)
        }
    })?;
    let mut s = singular_values(&m);
    s.truncate(ra.min(rb));
    Ok(s)
}
