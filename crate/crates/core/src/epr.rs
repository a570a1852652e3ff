//! EPR pairs measured by two spacelike separated analyzers, with the joint
//! statistics gated by what an observer can causally know.
//!
//! Outcomes are `±1` for the analyzer `σ(θ) = cos θ σ_z + sin θ σ_x`; the
//! first qubit of the pair goes to Alice, the second to Bob.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{apply_local, kron, reduced_density, OperatorMatrix, StateVector, NORM_TOL};
use crate::quantum::gates::{analyzer, identity};
use crate::spacetime::{earliest_contact, future_shadow, spacelike, Event, Region, Worldline};

/// Trials drawn from one random stream; blocks are sampled in parallel.
pub const SAMPLE_BLOCK: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    fn factor(self) -> usize {
        match self {
            Party::Alice => 0,
            Party::Bob => 1,
        }
    }

    fn other(self) -> Party {
        match self {
            Party::Alice => Party::Bob,
            Party::Bob => Party::Alice,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RemoteAction {
    None,
    /// Non-selective measurement at the given analyzer angle.
    Measure(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct EprSetup {
    source_event: Event,
    alice_event: Event,
    bob_event: Event,
    pair_state: StateVector,
    pub alice_setting: f64,
    pub bob_setting: f64,
}

/// `(|01⟩ − |10⟩)/√2`.
pub fn singlet() -> StateVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    StateVector::from_real(vec![2, 2], &[0.0, h, -h, 0.0]).expect("singlet is normalized")
}

impl EprSetup {
    /// Both detections must lie in the future shadow of the source and be
    /// spacelike to each other.
    pub fn new(
        source_event: Event,
        alice_event: Event,
        bob_event: Event,
        pair_state: StateVector,
        alice_setting: f64,
        bob_setting: f64,
    ) -> Result<Self> {
        if pair_state.dim() != 4 {
            return Err(Error::arg("pair state must be a two-qubit state"));
        }
        if (pair_state.norm() - 1.0).abs() > NORM_TOL {
            return Err(Error::arg("pair state is not normalized"));
        }
        let source = future_shadow(&Region::event(source_event));
        for (name, e) in [("Alice", alice_event), ("Bob", bob_event)] {
            if !source.contains(e) {
                return Err(Error::arg(format!(
                    "{name}'s detection {e} is outside the future shadow of the source {source_event}"
                )));
            }
        }
        if !spacelike(alice_event, bob_event) {
            return Err(Error::arg(format!(
                "detections {alice_event} and {bob_event} are not spacelike separated"
            )));
        }
        Ok(Self {
            source_event,
            alice_event,
            bob_event,
            pair_state: pair_state.with_factor_dims(vec![2, 2])?,
            alice_setting,
            bob_setting,
        })
    }

    /// Source at the origin, detections at `x = ∓distance/2` after `distance/2` steps.
    pub fn symmetric(distance: i64, pair_state: StateVector, alice_setting: f64, bob_setting: f64) -> Result<Self> {
        if distance < 2 {
            return Err(Error::arg("symmetric setup needs a distance of at least 2"));
        }
        let half = distance / 2;
        Self::new(
            Event::new(0, 0),
            Event::new(-half, half),
            Event::new(distance - half, distance - half),
            pair_state,
            alice_setting,
            bob_setting,
        )
    }

    pub fn with_settings(&self, alice_setting: f64, bob_setting: f64) -> Self {
        Self {
            alice_setting,
            bob_setting,
            ..self.clone()
        }
    }

    pub fn source_event(&self) -> Event {
        self.source_event
    }

    pub fn alice_event(&self) -> Event {
        self.alice_event
    }

    pub fn bob_event(&self) -> Event {
        self.bob_event
    }

    pub fn pair_state(&self) -> &StateVector {
        &self.pair_state
    }

    fn setting(&self, party: Party) -> f64 {
        match party {
            Party::Alice => self.alice_setting,
            Party::Bob => self.bob_setting,
        }
    }

    fn event(&self, party: Party) -> Event {
        match party {
            Party::Alice => self.alice_event,
            Party::Bob => self.bob_event,
        }
    }
}

/// `(I ± σ(θ))/2` for outcome `+1` (index 0) and `−1` (index 1).
fn outcome_projectors(theta: f64) -> [OperatorMatrix; 2] {
    let s = analyzer(theta);
    let id = identity(2);
    [(&id + &s).scale_real(0.5), (&id - &s).scale_real(0.5)]
}

/// Outcome probabilities `(p(+1), p(−1))` of one party, computed from its
/// reduced density matrix after the remote action.
pub fn local_marginal(setup: &EprSetup, party: Party, remote: RemoteAction) -> Result<[f64; 2]> {
    let psi = &setup.pair_state;
    let own = party.factor();
    let rho = match remote {
        RemoteAction::None => reduced_density(psi, &[own])?,
        RemoteAction::Measure(angle) => {
            let mut acc = OperatorMatrix::zeros(vec![2])?;
            for p in outcome_projectors(angle) {
                let branch = apply_local(&p, &[party.other().factor()], psi)?;
                acc = &acc + &reduced_density(&branch, &[own])?;
            }
            acc
        }
    };
    let [plus, minus] = outcome_projectors(setup.setting(party));
    Ok([
        plus.matmul(&rho)?.trace().re,
        minus.matmul(&rho)?.trace().re,
    ])
}

/// `p(x, y)` for Alice's outcome `x` and Bob's `y`, indices `0 ↔ +1`, `1 ↔ −1`.
pub fn joint_distribution(setup: &EprSetup) -> Result<[[f64; 2]; 2]> {
    let pa = outcome_projectors(setup.alice_setting);
    let pb = outcome_projectors(setup.bob_setting);
    let mut out = [[0.0; 2]; 2];
    for (x, a) in pa.iter().enumerate() {
        for (y, b) in pb.iter().enumerate() {
            out[x][y] = kron(a, b)?.expectation(&setup.pair_state)?.re;
        }
    }
    Ok(out)
}

/// `E(a, b) = ⟨σ(a) ⊗ σ(b)⟩`.
pub fn joint_correlation(setup: &EprSetup) -> Result<f64> {
    let op = kron(&analyzer(setup.alice_setting), &analyzer(setup.bob_setting))?;
    Ok(op.expectation(&setup.pair_state)?.re)
}

/// `S = E(a,b) − E(a,b′) + E(a′,b) + E(a′,b′)` for angles `(a, a′, b, b′)`.
pub fn chsh_value(setup: &EprSetup, angles: (f64, f64, f64, f64)) -> Result<f64> {
    let (a, a2, b, b2) = angles;
    let e = |x, y| joint_correlation(&setup.with_settings(x, y));
    Ok(e(a, b)? - e(a, b2)? + e(a2, b)? + e(a2, b2)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Availability {
    Available,
    /// Earliest time at which a static observer at the same site could compare both records.
    Unavailable { earliest_time: i64 },
}

impl Availability {
    pub fn is_available(&self) -> bool {
        matches!(self, Availability::Available)
    }
}

/// Whether both detection records lie in the observer's past, i.e. the observer
/// is in the future shadow of both detection events.
pub fn correlation_available(setup: &EprSetup, observer: Event) -> Availability {
    let alice = Region::event(setup.alice_event);
    let bob = Region::event(setup.bob_event);
    if future_shadow(&alice).contains(observer) && future_shadow(&bob).contains(observer) {
        return Availability::Available;
    }
    let horizon = [&alice, &bob]
        .iter()
        .map(|r| future_shadow(r).entry_time(observer.x))
        .max()
        .expect("two regions")
        .max(observer.t);
    let line = Worldline::span(observer.x, observer.t, horizon).expect("nonempty span");
    let earliest = [&alice, &bob]
        .iter()
        .map(|r| earliest_contact(&line, r).expect("horizon reaches both shadows"))
        .max()
        .expect("two regions");
    Availability::Unavailable {
        earliest_time: earliest,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasurementRecord {
    pub event: Event,
    pub setting: f64,
    /// `(p(+1), p(−1))`.
    pub outcome_distribution: [f64; 2],
    pub sample_outcomes: Option<Vec<i8>>,
}

impl MeasurementRecord {
    pub fn empirical_mean(&self) -> Option<f64> {
        let s = self.sample_outcomes.as_ref()?;
        Some(s.iter().map(|&o| o as f64).sum::<f64>() / s.len() as f64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleRun {
    pub alice: MeasurementRecord,
    pub bob: MeasurementRecord,
    pub empirical_correlation: f64,
}

impl SampleRun {
    pub fn n_trials(&self) -> usize {
        self.alice.sample_outcomes.as_ref().map_or(0, Vec::len)
    }
}

fn sample_block(dist: &[[f64; 2]; 2], seed: u64, block: usize, len: usize) -> Vec<(i8, i8)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block as u64);
    let cumulative = [
        dist[0][0],
        dist[0][0] + dist[0][1],
        dist[0][0] + dist[0][1] + dist[1][0],
    ];
    (0..len)
        .map(|_| {
            let u: f64 = rng.random();
            match cumulative.iter().position(|&c| u < c).unwrap_or(3) {
                0 => (1, 1),
                1 => (1, -1),
                2 => (-1, 1),
                _ => (-1, -1),
            }
        })
        .collect()
}

/// Seeded Born-rule sampling of `n_trials` joint outcomes.
///
/// Trials are cut into blocks of [`SAMPLE_BLOCK`]; block `k` uses stream `k`
/// of a ChaCha8 generator seeded with `seed`, so the output does not depend on
/// the number of threads.
pub fn sample_run(setup: &EprSetup, n_trials: usize, seed: u64) -> Result<SampleRun> {
    if n_trials == 0 {
        return Err(Error::arg("sample run needs at least one trial"));
    }
    let dist = joint_distribution(setup)?;
    let n_blocks = n_trials.div_ceil(SAMPLE_BLOCK);
    let blocks: Vec<Vec<(i8, i8)>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let len = SAMPLE_BLOCK.min(n_trials - b * SAMPLE_BLOCK);
            sample_block(&dist, seed, b, len)
        })
        .collect();
    let (alice, bob): (Vec<i8>, Vec<i8>) = blocks.into_iter().flatten().unzip();
    let product: i64 = alice.iter().zip(&bob).map(|(&x, &y)| (x * y) as i64).sum();
    let record = |party: Party, outcomes: Vec<i8>| -> Result<MeasurementRecord> {
        Ok(MeasurementRecord {
            event: setup.event(party),
            setting: setup.setting(party),
            outcome_distribution: local_marginal(setup, party, RemoteAction::None)?,
            sample_outcomes: Some(outcomes),
        })
    };
    Ok(SampleRun {
        alice: record(Party::Alice, alice)?,
        bob: record(Party::Bob, bob)?,
        empirical_correlation: product as f64 / n_trials as f64,
    })
}

/// Standard error of the empirical correlation, `√((1 − E²)/n)`.
pub fn correlation_standard_error(e: f64, n_trials: usize) -> f64 {
    ((1.0 - e * e).max(0.0) / n_trials as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

    fn setup(a: f64, b: f64) -> EprSetup {
        EprSetup::symmetric(20, singlet(), a, b).unwrap()
    }

    #[test]
    fn singlet_correlations() {
        assert!((joint_correlation(&setup(0.3, 0.3)).unwrap() + 1.0).abs() < 1e-12);
        assert!(joint_correlation(&setup(0.0, FRAC_PI_2)).unwrap().abs() < 1e-12);
        let e = joint_correlation(&setup(FRAC_PI_4, 0.0)).unwrap();
        assert!((e + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-10);
    }

    #[test]
    fn chsh_extremes() {
        let s = chsh_value(&setup(0.0, 0.0), (0.0, FRAC_PI_2, FRAC_PI_4, 3.0 * FRAC_PI_4)).unwrap();
        assert!((s.abs() - 2.0 * SQRT_2).abs() < 1e-9);
        let s = chsh_value(&setup(0.0, 0.0), (0.4, 0.4, 0.4, 0.4)).unwrap();
        assert!((s + 2.0).abs() < 1e-12);
    }

    #[test]
    fn marginals() {
        let s = setup(0.7, -0.2);
        let free = local_marginal(&s, Party::Alice, RemoteAction::None).unwrap();
        assert!((free[0] - 0.5).abs() < 1e-12 && (free[1] - 0.5).abs() < 1e-12);
        let measured = local_marginal(&s, Party::Alice, RemoteAction::Measure(std::f64::consts::PI / 7.0)).unwrap();
        assert!((free[0] - measured[0]).abs() <= 1e-12);
        let product = EprSetup::symmetric(20, StateVector::basis(vec![2, 2], 0).unwrap(), 0.0, 1.0).unwrap();
        assert_eq!(local_marginal(&product, Party::Alice, RemoteAction::None).unwrap(), [1.0, 0.0]);
    }

    #[test]
    fn setup_invariants() {
        let s = singlet();
        let o = Event::new(0, 0);
        assert!(EprSetup::new(o, Event::new(-5, 5), Event::new(5, 5), s.clone(), 0.0, 0.0).is_ok());
        assert!(EprSetup::new(o, Event::new(-5, 4), Event::new(5, 5), s.clone(), 0.0, 0.0).is_err());
        assert!(EprSetup::new(o, Event::new(3, 5), Event::new(3, 5), s.clone(), 0.0, 0.0).is_err());
        assert!(EprSetup::new(o, Event::new(0, 5), Event::new(0, 9), s, 0.0, 0.0).is_err());
    }

    #[test]
    fn availability_gate() {
        let s = EprSetup::new(
            Event::new(0, 0),
            Event::new(0, 0),
            Event::new(10, 10),
            singlet(),
            0.0,
            0.0,
        )
        .unwrap_err();
        assert!(matches!(s, Error::Argument(_)));
        let s = EprSetup::new(Event::new(0, 0), Event::new(-5, 5), Event::new(5, 5), singlet(), 0.0, 0.0).unwrap();
        // Alice at her own detection: Bob's record needs 10 more steps.
        assert_eq!(
            correlation_available(&s, s.alice_event()),
            Availability::Unavailable { earliest_time: 15 }
        );
        assert_eq!(correlation_available(&s, Event::new(0, 10)), Availability::Available);
        assert_eq!(
            correlation_available(&s, Event::new(0, 9)),
            Availability::Unavailable { earliest_time: 10 }
        );
    }

    #[test]
    fn sampling_is_seeded() {
        let s = setup(0.0, 0.0);
        let a = sample_run(&s, 10_000, 42).unwrap();
        let b = sample_run(&s, 10_000, 42).unwrap();
        assert_eq!(a, b);
        assert!((a.empirical_correlation + 1.0).abs() < 0.02);
        let one = sample_run(&setup(0.3, 1.1), 1, 7).unwrap();
        assert!(one.empirical_correlation == 1.0 || one.empirical_correlation == -1.0);
        assert!(sample_run(&s, 0, 1).is_err());
    }
}
