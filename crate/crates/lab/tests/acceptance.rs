//! Acceptance checks. Runs without the libtest harness so every criterion
//! prints its own PASS/FAIL line; exits nonzero if any fails.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, LN_2, PI, SQRT_2};
use std::time::{Duration, Instant};

use lqm_core::amplifier::{interference_magnitude, interference_magnitude_dense, mixture_law_check, Amplifier, RestrictedAlgebraSpec};
use lqm_core::epr::{
    chsh_value, correlation_available, joint_correlation, local_marginal, singlet, Availability, EprSetup, Party,
    RemoteAction,
};
use lqm_core::linalg::{reduced_density, OperatorMatrix, StateVector, C64};
use lqm_core::localnet::{borchers_entangle, locality_check, schmidt_coefficients, split_entangle, LatticeNet};
use lqm_core::measurement::{
    apply_measurement, heisenberg_intertwiner, mixture_expectation, reduced_expectation, HamiltonianSpec,
};
use lqm_core::quantum::gates::pauli_x;
use lqm_core::quantum::von_neumann_entropy;
use lqm_core::random::{random_hermitian, random_observable, random_state};
use lqm_core::spacetime::{Event, Region};
use lqm_lab::config::ConfigFile;
use lqm_lab::experiments::pointer_model;
use lqm_lab::{run, Experiment, ExperimentConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn within(what: &str, value: f64, tol: f64) -> Result<(), String> {
    if value <= tol {
        Ok(())
    } else {
        Err(format!("{what} = {value:e} exceeds {tol:e}"))
    }
}

fn fail(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn config(experiment: Experiment, file: ConfigFile) -> ExperimentConfig {
    let out = std::env::temp_dir().join("lqm-acceptance-unused");
    ExperimentConfig::from_file(file, experiment, Some(20_241_015), Some(out)).expect("valid config")
}

fn mixture_identity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let d = 2 + i % 7;
        let k = rng.random_range(1..=d);
        let obs = random_observable(&mut rng, d, k).map_err(fail)?;
        let model = pointer_model(&obs).map_err(fail)?;
        let phi = random_state(&mut rng, &[d]).map_err(fail)?;
        let b = random_hermitian(&mut rng, &[d]).map_err(fail)?;
        let lhs = reduced_expectation(&apply_measurement(&model, &phi).map_err(fail)?, &b).map_err(fail)?;
        let rhs = mixture_expectation(&obs, &phi, &b).map_err(fail)?;
        worst = worst.max((lhs - rhs).abs());
    }
    within("max |LHS − RHS|", worst, 1e-12)?;
    Ok(format!("1000 samples, dims 2..8, max |LHS − RHS| = {worst:.2e}"))
}

fn intertwiner() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut exact = 0.0f64;
    for d in 2..=8 {
        for k in 1..=d {
            let obs = random_observable(&mut rng, d, k).map_err(fail)?;
            let model = pointer_model(&obs).map_err(fail)?;
            let spec = HamiltonianSpec::for_model(&model).map_err(fail)?;
            let r = heisenberg_intertwiner(
                &spec,
                &model,
                &model.ready_isometry().map_err(fail)?,
                &model.pointer_isometries().map_err(fail)?,
                true,
            )
            .map_err(fail)?;
            exact = exact.max(r);
        }
    }
    within("residual without free evolution", exact, 1e-10)?;

    let obs = random_observable(&mut rng, 2, 2).map_err(fail)?;
    let base = pointer_model(&obs).map_err(fail)?;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut points = 0;
    for &eps in &[0.01, 0.05, 0.1, 0.2, 0.5, 1.0] {
        for &t in &[0.05, 0.1, 0.2, 0.5, 1.0] {
            if eps * t > 0.1 + 1e-15 {
                continue;
            }
            let model = base.rescaled(t).map_err(fail)?;
            let spec = HamiltonianSpec::for_model(&model)
                .and_then(|s| s.with_free(pauli_x().scale_real(eps), OperatorMatrix::zeros(vec![2])?))
                .map_err(fail)?;
            let r = heisenberg_intertwiner(
                &spec,
                &model,
                &model.ready_isometry().map_err(fail)?,
                &model.pointer_isometries().map_err(fail)?,
                false,
            )
            .map_err(fail)?;
            let excess = r - 2.0 * eps * t;
            if excess > 1e-9 {
                return Err(format!("ε = {eps}, T = {t}: residual {r:e} exceeds 2εT + 1e-9"));
            }
            worst_excess = worst_excess.max(excess);
            points += 1;
        }
    }
    Ok(format!(
        "exact residual ≤ {exact:.2e}; {points} (ε, T) points with εT ≤ 0.1, max(residual − 2εT) = {worst_excess:.2e}"
    ))
}

fn decoherence_scaling() -> Check {
    let even = (c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2));
    let mut ratio_err = 0.0f64;
    let mut power_err = 0.0f64;
    let mut dense_err = 0.0f64;
    for &r in &[0.3, 0.5, 0.9, -0.5] {
        let mut prev: Option<f64> = None;
        for n in 1..=50 {
            let amp = Amplifier::with_overlap(n, r).map_err(fail)?;
            let m = interference_magnitude(&amp, even).map_err(fail)?;
            let expected = f64::abs(r).powi(n as i32);
            power_err = power_err.max((m / expected - 1.0).abs());
            if let Some(p) = prev {
                ratio_err = ratio_err.max((m / p - f64::abs(r)).abs());
            }
            prev = Some(m);
            if n <= 10 {
                let dense = interference_magnitude_dense(&amp, even).map_err(fail)?;
                dense_err = dense_err.max((dense - m).abs());
            }
        }
    }
    within("ratio error", ratio_err, 1e-12)?;
    within("relative error against |r|^N", power_err, 1e-12)?;
    within("dense/symbolic difference", dense_err, 1e-12)?;
    Ok(format!(
        "N ∈ [1,50], |r| ∈ {{0.3, 0.5, 0.9}}: ratio error {ratio_err:.2e}, |r|^N rel. error {power_err:.2e}, dense diff {dense_err:.2e}"
    ))
}

fn no_signaling() -> Check {
    let rec = run(&config(Experiment::Nosignal, ConfigFile::default())).map_err(fail)?;
    let max = rec.metrics["max_delta"].as_f64().ok_or("max_delta missing")?;
    let locality = rec.metrics["locality_commutator"].as_f64().ok_or("locality missing")?;
    within("max delta", max, 1e-12)?;
    if locality != 0.0 {
        return Err(format!("spacelike commutator {locality:e} is not 0"));
    }
    Ok(format!("{} samples on 8 sites, max delta over W and α_T(W) = {max:.2e}", rec.rows.len()))
}

fn mixture_law() -> Check {
    let dims = vec![2, 2];
    let xi = StateVector::from_real(dims.clone(), &[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]).map_err(fail)?;
    let eta = StateVector::new(dims, vec![c(0.0), c(FRAC_1_SQRT_2), C64::new(0.0, FRAC_1_SQRT_2), c(0.0)])
        .map_err(fail)?;
    let mut cases = 0;
    let mut worst_excess = f64::NEG_INFINITY;
    for weights in [(c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)), (c(0.6), C64::new(0.0, 0.8))] {
        for &r in &[0.0, 0.3, 0.5, 0.9] {
            for n in 1..=8 {
                let amp = Amplifier::with_overlap(n, r).map_err(fail)?;
                for k in 0..=n {
                    let rep = mixture_law_check(&xi, &eta, weights, RestrictedAlgebraSpec { k_support: k }, &amp)
                        .map_err(fail)?;
                    if rep.deviation > rep.bound + 1e-10 {
                        return Err(format!("N = {n}, k = {k}, r = {r}: {} > {}", rep.deviation, rep.bound));
                    }
                    // With r = 0 the branches are orthogonal on every unread site.
                    if r == 0.0 && k < n && rep.deviation != 0.0 {
                        return Err(format!("N = {n}, k = {k}, r = 0: deviation {:e} is not 0", rep.deviation));
                    }
                    worst_excess = worst_excess.max(rep.deviation - rep.bound);
                    cases += 1;
                }
            }
        }
    }
    Ok(format!("{cases} cases, max(deviation − bound) = {worst_excess:.2e}, exact 0 at r = 0 for k < N"))
}

fn entangled_states() -> Check {
    let net = LatticeNet::qubits(6).map_err(fail)?;
    let ra = Region::new([0], 0, 0).map_err(fail)?;
    let rb = Region::new([5], 0, 0).map_err(fail)?;
    let p0 = OperatorMatrix::projector(&StateVector::basis(vec![2], 0).map_err(fail)?).map_err(fail)?;
    let psi = borchers_entangle(&net, &p0, &ra, &p0, &rb).map_err(fail)?;
    let e = net.embed_local(&p0, &ra).map_err(fail)?;
    let f = net.embed_local(&p0, &rb).map_err(fail)?;
    let ef = e.matmul(&f).map_err(fail)?.expectation(&psi).map_err(fail)?.re;
    let cov = ef - e.expectation(&psi).map_err(fail)?.re * f.expectation(&psi).map_err(fail)?.re;
    let entropy = von_neumann_entropy(&reduced_density(&psi, &[0]).map_err(fail)?).map_err(fail)?;
    within("|⟨EF⟩ − 1/2|", (ef - 0.5).abs(), 1e-12)?;
    within("|covariance − 1/4|", (cov - 0.25).abs(), 1e-12)?;
    within("|entropy − ln 2|", (entropy - LN_2).abs(), 1e-10)?;

    let zero = StateVector::basis(vec![2], 0).map_err(fail)?;
    let one = StateVector::basis(vec![2], 1).map_err(fail)?;
    let plus = StateVector::from_real(vec![2], &[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).map_err(fail)?;
    let minus = StateVector::from_real(vec![2], &[FRAC_1_SQRT_2, -FRAC_1_SQRT_2]).map_err(fail)?;
    let split = split_entangle(&net, &ra, (&zero, &one), &rb, (&plus, &minus)).map_err(fail)?;
    let s = schmidt_coefficients(&split, &[0]).map_err(fail)?;
    let schmidt_err = (s[0] - FRAC_1_SQRT_2).abs().max((s[1] - FRAC_1_SQRT_2).abs());
    within("Schmidt coefficient error", schmidt_err, 1e-12)?;
    if s[2..].iter().any(|&x| x > 1e-12) {
        return Err(format!("split state has Schmidt rank above 2: {s:?}"));
    }
    let locality = locality_check(&net, &ra, &rb).map_err(fail)?;
    if locality != 0.0 {
        return Err(format!("locality commutator {locality:e} is not exactly 0"));
    }
    Ok(format!(
        "⟨EF⟩ − 1/2 = {:.1e}, cov − 1/4 = {:.1e}, S − ln 2 = {:.1e}, Schmidt error {schmidt_err:.1e}, locality 0",
        ef - 0.5,
        cov - 0.25,
        entropy - LN_2
    ))
}

/// First `t ≥ t0` at which `(x, t)` lies in the future light cone of both events,
/// by scanning every time step.
fn brute_force_availability(x: i64, t0: i64, events: [Event; 2]) -> i64 {
    (t0..)
        .find(|&t| events.iter().all(|e| t - e.t >= (x - e.x).abs()))
        .expect("cones eventually overlap")
}

fn epr_suite() -> Check {
    let mut corr_err = 0.0f64;
    let mut marginal_err = 0.0f64;
    let grid: Vec<f64> = (0..24).map(|k| k as f64 * PI / 12.0).collect();
    let base = EprSetup::symmetric(20, singlet(), 0.0, 0.0).map_err(fail)?;
    for &a in &grid {
        for &b in &grid {
            let setup = base.with_settings(a, b);
            corr_err = corr_err.max((joint_correlation(&setup).map_err(fail)? + (a - b).cos()).abs());
            for party in [Party::Alice, Party::Bob] {
                let free = local_marginal(&setup, party, RemoteAction::None).map_err(fail)?;
                let remote = local_marginal(&setup, party, RemoteAction::Measure(b)).map_err(fail)?;
                marginal_err = marginal_err.max((free[0] - remote[0]).abs()).max((free[1] - remote[1]).abs());
            }
        }
    }
    within("|E(a,b) + cos(a − b)|", corr_err, 1e-12)?;
    within("marginal shift", marginal_err, 1e-12)?;
    let s = chsh_value(&base, (0.0, FRAC_PI_2, FRAC_PI_4, 3.0 * FRAC_PI_4)).map_err(fail)?;
    within("||S| − 2√2|", (s.abs() - 2.0 * SQRT_2).abs(), 1e-9)?;

    let rec = run(&config(Experiment::Epr, ConfigFile::default())).map_err(fail)?;
    let analytic = rec.metrics["correlation_analytic"].as_f64().ok_or("missing E")?;
    let empirical = rec.metrics["correlation_empirical"].as_f64().ok_or("missing E")?;
    let sigma = rec.metrics["correlation_standard_error"].as_f64().ok_or("missing σ")?;
    if (empirical - analytic).abs() > 3.0 * sigma {
        return Err(format!("empirical E {empirical} is more than 3σ from {analytic}"));
    }

    let mut flips = 0;
    for d in [2, 5, 10, 31] {
        let setup = EprSetup::symmetric(d, singlet(), 0.0, 0.0).map_err(fail)?;
        let events = [setup.alice_event(), setup.bob_event()];
        for x in -d - 3..=d + 3 {
            let t0 = events[0].t.min(events[1].t) - 2;
            let oracle = brute_force_availability(x, t0, events);
            for t in t0..oracle + 3 {
                let got = correlation_available(&setup, Event::new(x, t));
                let ok = match got {
                    Availability::Available => t >= oracle,
                    Availability::Unavailable { earliest_time } => t < oracle && earliest_time == oracle,
                };
                if !ok {
                    return Err(format!("d = {d}, observer ({x}, {t}): {got:?}, oracle flip at {oracle}"));
                }
            }
            flips += 1;
        }
    }
    Ok(format!(
        "E error {corr_err:.1e}, S = {s:.12}, marginal shift {marginal_err:.1e}, \
         MC |ΔE| = {:.2}σ at n = 10⁵, {flips} availability flips match",
        (empirical - analytic).abs() / sigma
    ))
}

fn determinism() -> Check {
    let all = [
        Experiment::Measure,
        Experiment::Decohere,
        Experiment::Nosignal,
        Experiment::Epr,
        Experiment::Entangle,
        Experiment::Limits,
    ];
    let pool = |n| rayon::ThreadPoolBuilder::new().num_threads(n).build().expect("thread pool");
    let (one, many) = (pool(1), pool(4));
    for exp in all {
        let mut file = ConfigFile::default();
        file.nosignal.n_samples = 200;
        let cfg = config(exp, file);
        let a = one.install(|| run(&cfg)).map_err(fail)?.csv_bytes().map_err(fail)?;
        let b = many.install(|| run(&cfg)).map_err(fail)?.csv_bytes().map_err(fail)?;
        let c = many.install(|| run(&cfg)).map_err(fail)?.csv_bytes().map_err(fail)?;
        if a != b || b != c {
            return Err(format!("{} output differs between runs", exp.name()));
        }
    }
    Ok("all six experiments byte-identical across reruns and 1 vs 4 threads".into())
}

fn main() {
    type Criterion = (&'static str, fn() -> Check, Option<Duration>);
    let criteria: [Criterion; 8] = [
        ("mixture identity", mixture_identity, Some(Duration::from_secs(5))),
        ("intertwiner", intertwiner, Some(Duration::from_secs(5))),
        ("decoherence scaling", decoherence_scaling, Some(Duration::from_secs(10))),
        ("no-signaling", no_signaling, Some(Duration::from_secs(30))),
        ("mixture-law bound", mixture_law, Some(Duration::from_secs(60))),
        ("entangled constructions", entangled_states, Some(Duration::from_secs(5))),
        ("EPR suite", epr_suite, Some(Duration::from_secs(60))),
        ("determinism", determinism, None),
    ];
    let mut failures = 0;
    for (i, (name, check, budget)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = match (outcome, budget) {
            (Ok(_), Some(b)) if elapsed > b => Err(format!("took {elapsed:.2?}, budget {b:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({elapsed:.2?}) {detail}", i + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {} {name}: FAIL ({elapsed:.2?}) {why}", i + 1);
            }
        }
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
