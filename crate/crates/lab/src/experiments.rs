//! The six experiments. Each returns an [`ExperimentRecord`] whose rows depend
//! only on the config and seed.

use lqm_core::amplifier::{interference_magnitude, interference_magnitude_dense, Amplifier, DENSE_MAX_SITES};
use lqm_core::epr::{
    chsh_value, correlation_available, joint_correlation, local_marginal, sample_run, correlation_standard_error,
    singlet, Availability, EprSetup, Party, RemoteAction,
};
use lqm_core::linalg::{reduced_density, OperatorMatrix, StateVector, C64};
use lqm_core::localnet::{
    borchers_entangle, locality_check, localize_measurement, no_signaling_check, schmidt_coefficients,
    split_entangle, LatticeNet,
};
use lqm_core::measurement::{
    apply_measurement, build_coupling, finite_t_fidelity, heisenberg_intertwiner, mixture_expectation,
    reduced_expectation, HamiltonianSpec, MeasurementModel,
};
use lqm_core::quantum::gates::basis_projector;
use lqm_core::quantum::{von_neumann_entropy, SpectralObservable};
use lqm_core::random::{random_hermitian, random_state};
use lqm_core::spacetime::Event;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::LabError;
use crate::record::{Cell, ExperimentRecord};

type Result<T> = std::result::Result<T, LabError>;

/// Independent generator for sample `index`: stream `index` of the seeded ChaCha8.
fn sample_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentRecord> {
    let start = std::time::Instant::now();
    let mut record = match cfg.experiment {
        Experiment::Measure => measure(cfg)?,
        Experiment::Decohere => decohere(cfg)?,
        Experiment::Nosignal => nosignal(cfg)?,
        Experiment::Epr => epr(cfg)?,
        Experiment::Entangle => entangle(cfg)?,
        Experiment::Limits => limits(cfg)?,
    };
    record.wall_time = start.elapsed().as_secs_f64();
    record.check_finite()?;
    Ok(record)
}

/// Diagonal observable whose outcome `j` owns the basis vectors `i ≡ j (mod k)`,
/// with eigenvalues spread over `[−1, 1]` (`σ_z` for a qubit).
pub fn diagonal_observable(dim: usize, n_outcomes: usize) -> lqm_core::Result<SpectralObservable> {
    let eigenvalues = (0..n_outcomes)
        .map(|j| {
            if n_outcomes == 1 {
                1.0
            } else {
                1.0 - 2.0 * j as f64 / (n_outcomes - 1) as f64
            }
        })
        .collect();
    let projections = (0..n_outcomes)
        .map(|j| {
            let diag: Vec<C64> = (0..dim)
                .map(|i| if i % n_outcomes == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
                .collect();
            OperatorMatrix::diagonal(vec![dim], &diag)
        })
        .collect::<lqm_core::Result<Vec<_>>>()?;
    SpectralObservable::new(eigenvalues, projections)
}

/// `|0⟩⟨1| + |1⟩⟨0|` on a `dim`-level system: `σ_x` for a qubit, norm 1 for any dim.
pub fn flip(dim: usize) -> lqm_core::Result<OperatorMatrix> {
    OperatorMatrix::from_fn(vec![dim], |i, j| {
        if (i, j) == (0, 1) || (i, j) == (1, 0) {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Pointer model with ready state `|0⟩` and pointers `|j⟩` on a `k`-level apparatus.
pub fn pointer_model(obs: &SpectralObservable) -> lqm_core::Result<MeasurementModel> {
    let k = obs.len();
    let ready = StateVector::basis(vec![k], 0)?;
    let pointers = (0..k)
        .map(|j| StateVector::basis(vec![k], j))
        .collect::<lqm_core::Result<Vec<_>>>()?;
    build_coupling(obs, &ready, &pointers)
}

#[derive(Serialize)]
struct IntertwinerPoint {
    epsilon: f64,
    residual: f64,
    bound: f64,
}

fn measure(cfg: &ExperimentConfig) -> Result<ExperimentRecord> {
    let c = &cfg.file.measure;
    let seed = cfg.seed.expect("validated");
    let d = c.system_dim;
    let obs = diagonal_observable(d, c.n_outcomes)?;
    let model = pointer_model(&obs)?;

    let errors: Vec<f64> = (0..c.n_samples)
        .into_par_iter()
        .map(|i| -> lqm_core::Result<f64> {
            let mut rng = sample_rng(seed, i);
            let phi = random_state(&mut rng, &[d])?;
            let b = random_hermitian(&mut rng, &[d])?;
            let lhs = reduced_expectation(&apply_measurement(&model, &phi)?, &b)?;
            Ok((lhs - mixture_expectation(&obs, &phi, &b)?).abs())
        })
        .collect::<lqm_core::Result<_>>()?;
    let mixture_max_error = errors.iter().copied().fold(0.0, f64::max);

    let x = flip(d)?;
    let uniform = StateVector::normalized_from(vec![d], vec![C64::new(1.0, 0.0); d])?;
    let after = apply_measurement(&model, &uniform)?;
    let coherence_before = x.expectation(&uniform)?.re;
    let coherence_after = reduced_expectation(&after, &x)?;

    let w = model.ready_isometry()?;
    let ws = model.pointer_isometries()?;
    let zero_a = OperatorMatrix::zeros(vec![model.apparatus_dim()])?;
    let mut intertwiner = Vec::new();
    for &eps in &c.epsilon_grid {
        let spec = HamiltonianSpec::for_model(&model)?.with_free(x.scale_real(eps), zero_a.clone())?;
        intertwiner.push(IntertwinerPoint {
            epsilon: eps,
            residual: heisenberg_intertwiner(&spec, &model, &w, &ws, false)?,
            bound: 2.0 * eps.abs() * model.duration(),
        });
    }
    let spec = HamiltonianSpec::for_model(&model)?;
    let neglect_free_residual = heisenberg_intertwiner(&spec, &model, &w, &ws, true)?;

    let times: Vec<f64> = c.t_grid.iter().map(|f| f * model.duration()).collect();
    let sweep = finite_t_fidelity(&spec, &model, &uniform, &times)?;

    let mut rec = ExperimentRecord::new("measure", cfg.params(), &["t", "fidelity", "registration"]);
    for p in &sweep {
        rec.push_row(vec![p.t.into(), p.fidelity.into(), p.registration.into()]);
    }
    rec.metric("mixture_max_error", mixture_max_error);
    rec.metric("n_samples", c.n_samples);
    rec.metric("action_residual", model.action_residual()?);
    rec.metric("coherence_before", coherence_before);
    rec.metric("coherence_after", coherence_after);
    rec.metric("intertwiner_residual_without_free", neglect_free_residual);
    rec.metric("intertwiner", intertwiner);
    Ok(rec)
}

fn decohere(cfg: &ExperimentConfig) -> Result<ExperimentRecord> {
    let c = &cfg.file.decohere;
    let weights = (C64::new(c.weights[0], 0.0), C64::new(c.weights[1], 0.0));
    let mut rec = ExperimentRecord::new(
        "decohere",
        cfg.params(),
        &["n", "interference", "interference_dense", "ratio"],
    );
    let mut previous: Option<f64> = None;
    let mut max_ratio_error = 0.0f64;
    let mut max_dense_diff = 0.0f64;
    for n in c.n_min..=c.n_max {
        let amp = Amplifier::with_overlap(n, c.r)?;
        let m = interference_magnitude(&amp, weights)?;
        let dense = if n <= DENSE_MAX_SITES {
            let v = interference_magnitude_dense(&amp, weights)?;
            max_dense_diff = max_dense_diff.max((v - m).abs());
            Some(v)
        } else {
            None
        };
        let ratio = previous.filter(|&p| p > 0.0).map(|p| m / p);
        if let Some(q) = ratio {
            max_ratio_error = max_ratio_error.max((q - c.r.abs()).abs());
        }
        rec.push_row(vec![n.into(), m.into(), dense.into(), ratio.into()]);
        previous = Some(m);
    }
    rec.metric("max_ratio_error", max_ratio_error);
    rec.metric("max_dense_symbolic_diff", max_dense_diff);
    Ok(rec)
}

fn qubit(j: usize) -> lqm_core::Result<StateVector> {
    StateVector::basis(vec![2], j)
}

fn sigma_z_observable() -> lqm_core::Result<SpectralObservable> {
    SpectralObservable::new(vec![1.0, -1.0], vec![basis_projector(2, 0), basis_projector(2, 1)])
}

fn nosignal(cfg: &ExperimentConfig) -> Result<ExperimentRecord> {
    let c = &cfg.file.nosignal;
    let seed = cfg.seed.expect("validated");
    let net = LatticeNet::qubits(c.n_sites)?;
    let m = localize_measurement(
        &net,
        &c.measurement_region,
        &sigma_z_observable()?,
        &qubit(0)?,
        &[qubit(0)?, qubit(1)?],
    )?;
    let b_sites = net.factors(&c.observable_region)?.len();
    let rest_sites = c.n_sites - m.apparatus_sites.len();
    let deltas = (0..c.n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i);
            let rest = random_state(&mut rng, &vec![2; rest_sites])?;
            let phi = m.prepare(&net, &rest)?;
            let b = random_hermitian(&mut rng, &vec![2; b_sites])?;
            no_signaling_check(&net, &m, &b, &c.observable_region, &phi)
        })
        .collect::<lqm_core::Result<Vec<_>>>()?;
    let locality = locality_check(&net, &c.measurement_region, &c.observable_region)?;

    let mut rec = ExperimentRecord::new("nosignal", cfg.params(), &["sample", "delta_w", "delta_evolved"]);
    let mut max_delta = 0.0f64;
    for (i, d) in deltas.iter().enumerate() {
        max_delta = max_delta.max(d.max());
        rec.push_row(vec![i.into(), d.delta_w.into(), d.delta_evolved.into()]);
    }
    rec.metric("max_delta", max_delta);
    rec.metric("locality_commutator", locality);
    Ok(rec)
}

fn epr(cfg: &ExperimentConfig) -> Result<ExperimentRecord> {
    let c = &cfg.file.epr;
    let seed = cfg.seed.expect("validated");
    let setup = EprSetup::new(c.source, c.alice, c.bob, singlet(), c.alice_setting, c.bob_setting)
        .map_err(|e| LabError::Config(format!("epr: {e}")))?;
    let run = sample_run(&setup, c.n_trials, seed)?;
    let analytic = joint_correlation(&setup)?;
    let [a, a2, b, b2] = c.chsh_angles;
    let chsh = chsh_value(&setup, (a, a2, b, b2))?;

    let free = local_marginal(&setup, Party::Alice, RemoteAction::None)?;
    let mut marginal_shift = 0.0f64;
    for k in 0..16 {
        let remote = RemoteAction::Measure(k as f64 * std::f64::consts::PI / 8.0);
        for party in [Party::Alice, Party::Bob] {
            let base = local_marginal(&setup, party, RemoteAction::None)?;
            let shifted = local_marginal(&setup, party, remote)?;
            marginal_shift = marginal_shift.max((base[0] - shifted[0]).abs()).max((base[1] - shifted[1]).abs());
        }
    }
    let timeline: Vec<serde_json::Value> = (c.observer_times[0]..=c.observer_times[1])
        .map(|t| {
            let mut v = serde_json::to_value(correlation_available(&setup, Event::new(c.observer_x, t)))
                .expect("availability serializes");
            v["t"] = t.into();
            v
        })
        .collect();

    let mut rec = ExperimentRecord::new(
        "epr",
        cfg.params(),
        &["trial", "alice_setting", "bob_setting", "alice_outcome", "bob_outcome"],
    );
    let alice = run.alice.sample_outcomes.as_deref().unwrap_or_default();
    let bob = run.bob.sample_outcomes.as_deref().unwrap_or_default();
    for (i, (x, y)) in alice.iter().zip(bob).enumerate() {
        rec.push_row(vec![
            i.into(),
            c.alice_setting.into(),
            c.bob_setting.into(),
            Cell::Int(*x as i64),
            Cell::Int(*y as i64),
        ]);
    }
    rec.metric("correlation_analytic", analytic);
    rec.metric("correlation_empirical", run.empirical_correlation);
    rec.metric("correlation_standard_error", correlation_standard_error(analytic, c.n_trials));
    rec.metric("chsh", chsh);
    rec.metric("alice_marginal", free);
    rec.metric("max_marginal_shift", marginal_shift);
    rec.metric("availability", timeline);
    Ok(rec)
}

/// `|0…0⟩` and `|1…1⟩` on `n` qubits.
fn extreme_pair(n: usize) -> lqm_core::Result<(StateVector, StateVector)> {
    let dims = vec![2; n];
    let last = (1usize << n) - 1;
    Ok((StateVector::basis(dims.clone(), 0)?, StateVector::basis(dims, last)?))
}

fn entangle(cfg: &ExperimentConfig) -> Result<ExperimentRecord> {
    let c = &cfg.file.entangle;
    let net = LatticeNet::qubits(c.n_sites)?;
    let (fa, fb) = (net.factors(&c.region_a)?, net.factors(&c.region_b)?);
    let (pa, pb) = (extreme_pair(fa.len())?, extreme_pair(fb.len())?);
    let e_local = OperatorMatrix::projector(&pa.0)?;
    let f_local = OperatorMatrix::projector(&pb.0)?;
    let e = net.embed_local(&e_local, &c.region_a)?;
    let f = net.embed_local(&f_local, &c.region_b)?;
    let locality = locality_check(&net, &c.region_a, &c.region_b)?;

    let borchers = borchers_entangle(&net, &e_local, &c.region_a, &f_local, &c.region_b)?;
    let split = split_entangle(&net, &c.region_a, (&pa.0, &pa.1), &c.region_b, (&pb.0, &pb.1))?;

    let mut rec = ExperimentRecord::new(
        "entangle",
        cfg.params(),
        &["construction", "ef", "e", "f", "covariance", "entropy", "schmidt_1", "schmidt_2", "locality"],
    );
    for (name, psi) in [("borchers", &borchers), ("split", &split)] {
        let ef = e.matmul(&f)?.expectation(psi)?.re;
        let pe = e.expectation(psi)?.re;
        let pf = f.expectation(psi)?.re;
        let entropy = von_neumann_entropy(&reduced_density(psi, &fa)?)?;
        let s = schmidt_coefficients(psi, &fa)?;
        rec.push_row(vec![
            name.into(),
            ef.into(),
            pe.into(),
            pf.into(),
            (ef - pe * pf).into(),
            entropy.into(),
            s.first().copied().into(),
            s.get(1).copied().into(),
            locality.into(),
        ]);
    }
    rec.metric("locality_commutator", locality);
    Ok(rec)
}

fn limits(cfg: &ExperimentConfig) -> Result<ExperimentRecord> {
    let c = &cfg.file.limits;
    let mut rec = ExperimentRecord::new("limits", cfg.params(), &["limit", "parameter", "value", "bound"]);

    let base = pointer_model(&diagonal_observable(2, 2)?)?;
    for &t in &c.t_grid {
        let model = base.rescaled(t)?;
        let spec = HamiltonianSpec::for_model(&model)?
            .with_free(flip(2)?.scale_real(c.epsilon), OperatorMatrix::zeros(vec![2])?)?;
        let residual = heisenberg_intertwiner(
            &spec,
            &model,
            &model.ready_isometry()?,
            &model.pointer_isometries()?,
            false,
        )?;
        rec.push_row(vec!["short_time".into(), t.into(), residual.into(), (2.0 * c.epsilon.abs() * t).into()]);
    }

    let half = std::f64::consts::FRAC_1_SQRT_2;
    let even = (C64::new(half, 0.0), C64::new(half, 0.0));
    for &n in &c.n_grid {
        let m = interference_magnitude(&Amplifier::with_overlap(n, c.r)?, even)?;
        rec.push_row(vec!["large_n".into(), n.into(), m.into(), c.r.abs().powi(n as i32).into()]);
    }

    for &d in &c.distance_grid {
        let setup = EprSetup::symmetric(d, singlet(), 0.0, 0.0)?;
        let alice = setup.alice_event();
        let delay = match correlation_available(&setup, alice) {
            Availability::Available => 0,
            Availability::Unavailable { earliest_time } => earliest_time - alice.t,
        };
        let separation = setup.bob_event().x - alice.x;
        rec.push_row(vec!["large_distance".into(), d.into(), delay.into(), separation.into()]);
    }
    Ok(rec)
}
