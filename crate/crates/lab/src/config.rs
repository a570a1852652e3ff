//! Experiment configuration files.
//!
//! A config is a TOML document with three top-level keys and one table per
//! experiment:
//!
//! ```toml
//! experiment = "decohere"   # optional; must match the subcommand if present
//! seed = 7                  # required by measure, nosignal, epr
//! output_dir = "out/dec"    # overridable with --out
//!
//! [decohere]
//! n_min = 1
//! n_max = 20
//! r = 0.5
//! ```
//!
//! Every table field has a default, so an empty table (or none at all) runs
//! the reference configuration. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use lqm_core::spacetime::{Event, Region};
use serde::{Deserialize, Serialize};

use crate::error::LabError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Measure,
    Decohere,
    Nosignal,
    Epr,
    Entangle,
    Limits,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Measure => "measure",
            Experiment::Decohere => "decohere",
            Experiment::Nosignal => "nosignal",
            Experiment::Epr => "epr",
            Experiment::Entangle => "entangle",
            Experiment::Limits => "limits",
        }
    }

    pub fn uses_sampling(self) -> bool {
        matches!(self, Experiment::Measure | Experiment::Nosignal | Experiment::Epr)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment: Option<Experiment>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub measure: MeasureConfig,
    #[serde(default)]
    pub decohere: DecohereConfig,
    #[serde(default)]
    pub nosignal: NosignalConfig,
    #[serde(default)]
    pub epr: EprConfig,
    #[serde(default)]
    pub entangle: EntangleConfig,
    #[serde(default)]
    pub limits: LimitsConfig,
}

/// Pointer coupling of a `system_dim`-level system to an apparatus with one
/// pointer state per outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasureConfig {
    pub system_dim: usize,
    pub n_outcomes: usize,
    /// Fractions of the coupling duration at which the finite-time sweep is scored.
    pub t_grid: Vec<f64>,
    /// Strengths of the free system Hamiltonian `ε σ_x` (qubit) used for the intertwiner residual.
    pub epsilon_grid: Vec<f64>,
    /// Random `(Φ, B)` pairs for the mixture identity.
    pub n_samples: usize,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        Self {
            system_dim: 2,
            n_outcomes: 2,
            t_grid: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            epsilon_grid: vec![0.0, 0.01, 0.05, 0.1],
            n_samples: 1000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecohereConfig {
    pub n_min: usize,
    pub n_max: usize,
    /// Single-site overlap `r = ⟨a_1, a_2⟩`.
    pub r: f64,
    /// Branch weights `(a, b)`, real, with `a² + b² = 1`.
    pub weights: [f64; 2],
}

impl Default for DecohereConfig {
    fn default() -> Self {
        Self {
            n_min: 1,
            n_max: 20,
            r: 0.5,
            weights: [std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NosignalConfig {
    pub n_sites: usize,
    /// Region holding system and apparatus of the measurement.
    pub measurement_region: Region,
    /// Region of the distant observable `B`.
    pub observable_region: Region,
    pub n_samples: usize,
}

impl Default for NosignalConfig {
    fn default() -> Self {
        Self {
            n_sites: 8,
            measurement_region: Region::new([0, 1], 0, 1).expect("valid region"),
            observable_region: Region::new([5, 6], 0, 1).expect("valid region"),
            n_samples: 1000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EprConfig {
    pub source: Event,
    pub alice: Event,
    pub bob: Event,
    pub alice_setting: f64,
    pub bob_setting: f64,
    /// `(a, a′, b, b′)` for the CHSH value.
    pub chsh_angles: [f64; 4],
    pub n_trials: usize,
    /// Observer site; availability is reported for every step in `observer_times`.
    pub observer_x: i64,
    pub observer_times: [i64; 2],
}

impl Default for EprConfig {
    fn default() -> Self {
        use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
        Self {
            source: Event::new(0, 0),
            alice: Event::new(-10, 10),
            bob: Event::new(10, 10),
            alice_setting: 0.0,
            bob_setting: FRAC_PI_4,
            chsh_angles: [0.0, FRAC_PI_2, FRAC_PI_4, 3.0 * FRAC_PI_4],
            n_trials: 100_000,
            observer_x: -10,
            observer_times: [10, 40],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EntangleConfig {
    pub n_sites: usize,
    pub region_a: Region,
    pub region_b: Region,
}

impl Default for EntangleConfig {
    fn default() -> Self {
        Self {
            n_sites: 6,
            region_a: Region::new([0], 0, 0).expect("valid region"),
            region_b: Region::new([5], 0, 0).expect("valid region"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitsConfig {
    /// Coupling durations for the short-time limit, with `H_S = ε σ_x` held fixed.
    pub t_grid: Vec<f64>,
    pub epsilon: f64,
    /// Particle numbers for the large-amplifier limit.
    pub n_grid: Vec<usize>,
    pub r: f64,
    /// Distances between the two wings for the large-separation limit.
    pub distance_grid: Vec<i64>,
}

impl Default for LimitsConfig {
    fn default() -> Self {
        Self {
            t_grid: vec![1.0, 0.5, 0.25, 0.125, 0.0625],
            epsilon: 0.1,
            n_grid: vec![1, 2, 4, 8, 16, 32],
            r: 0.5,
            distance_grid: vec![2, 10, 100, 1000],
        }
    }
}

/// A validated configuration for one experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: Option<u64>,
    pub output_dir: PathBuf,
    pub file: ConfigFile,
}

fn bad(field: &str, msg: impl std::fmt::Display) -> LabError {
    LabError::Config(format!("{field}: {msg}"))
}

fn nonempty<T>(field: &str, v: &[T]) -> Result<(), LabError> {
    if v.is_empty() {
        return Err(bad(field, "grid must not be empty"));
    }
    Ok(())
}

fn finite(field: &str, v: f64) -> Result<(), LabError> {
    if !v.is_finite() {
        return Err(bad(field, format!("must be finite, got {v}")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn load(
        path: &Path,
        experiment: Experiment,
        seed: Option<u64>,
        out: Option<PathBuf>,
    ) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text, experiment, seed, out)
    }

    pub fn from_toml(
        text: &str,
        experiment: Experiment,
        seed: Option<u64>,
        out: Option<PathBuf>,
    ) -> Result<Self, LabError> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        Self::from_file(file, experiment, seed, out)
    }

    pub fn from_file(
        file: ConfigFile,
        experiment: Experiment,
        seed: Option<u64>,
        out: Option<PathBuf>,
    ) -> Result<Self, LabError> {
        if let Some(declared) = file.experiment {
            if declared != experiment {
                return Err(bad(
                    "experiment",
                    format!("config declares '{}', command is '{}'", declared.name(), experiment.name()),
                ));
            }
        }
        let seed = seed.or(file.seed);
        if experiment.uses_sampling() && seed.is_none() {
            return Err(bad("seed", format!("required by the '{}' experiment", experiment.name())));
        }
        let output_dir = out
            .or_else(|| file.output_dir.clone())
            .ok_or_else(|| bad("output_dir", "missing (set it in the config or pass --out)"))?;
        let cfg = Self {
            experiment,
            seed,
            output_dir,
            file,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), LabError> {
        match self.experiment {
            Experiment::Measure => {
                let c = &self.file.measure;
                if c.system_dim < 2 {
                    return Err(bad("measure.system_dim", "must be at least 2"));
                }
                if c.n_outcomes < 1 || c.n_outcomes > c.system_dim {
                    return Err(bad("measure.n_outcomes", "must lie in 1..=system_dim"));
                }
                nonempty("measure.t_grid", &c.t_grid)?;
                for &t in &c.t_grid {
                    finite("measure.t_grid", t)?;
                    if !(0.0..=1.0).contains(&t) {
                        return Err(bad("measure.t_grid", format!("fraction {t} outside [0, 1]")));
                    }
                }
                nonempty("measure.epsilon_grid", &c.epsilon_grid)?;
                for &e in &c.epsilon_grid {
                    finite("measure.epsilon_grid", e)?;
                }
                if c.n_samples == 0 {
                    return Err(bad("measure.n_samples", "must be positive"));
                }
            }
            Experiment::Decohere => {
                let c = &self.file.decohere;
                if c.n_min == 0 || c.n_max < c.n_min {
                    return Err(bad("decohere.n_max", "grid n_min..=n_max must be nonempty with n_min ≥ 1"));
                }
                finite("decohere.r", c.r)?;
                if c.r.abs() >= 1.0 {
                    return Err(bad("decohere.r", "must satisfy |r| < 1"));
                }
                let [a, b] = c.weights;
                if ((a * a + b * b) - 1.0).abs() > 1e-12 {
                    return Err(bad("decohere.weights", "must satisfy a² + b² = 1"));
                }
            }
            Experiment::Nosignal => {
                let c = &self.file.nosignal;
                if c.n_sites < 2 {
                    return Err(bad("nosignal.n_sites", "must be at least 2"));
                }
                if c.n_samples == 0 {
                    return Err(bad("nosignal.n_samples", "must be positive"));
                }
            }
            Experiment::Epr => {
                let c = &self.file.epr;
                if c.n_trials == 0 {
                    return Err(bad("epr.n_trials", "must be positive"));
                }
                if c.observer_times[1] < c.observer_times[0] {
                    return Err(bad("epr.observer_times", "grid must not be empty"));
                }
                for (f, v) in [("epr.alice_setting", c.alice_setting), ("epr.bob_setting", c.bob_setting)] {
                    finite(f, v)?;
                }
                for &a in &c.chsh_angles {
                    finite("epr.chsh_angles", a)?;
                }
            }
            Experiment::Entangle => {
                if self.file.entangle.n_sites < 2 {
                    return Err(bad("entangle.n_sites", "must be at least 2"));
                }
            }
            Experiment::Limits => {
                let c = &self.file.limits;
                nonempty("limits.t_grid", &c.t_grid)?;
                nonempty("limits.n_grid", &c.n_grid)?;
                nonempty("limits.distance_grid", &c.distance_grid)?;
                finite("limits.epsilon", c.epsilon)?;
                if c.t_grid.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
                    return Err(bad("limits.t_grid", "durations must be positive"));
                }
                if c.n_grid.contains(&0) {
                    return Err(bad("limits.n_grid", "particle numbers must be positive"));
                }
                if c.r.abs() >= 1.0 || !c.r.is_finite() {
                    return Err(bad("limits.r", "must satisfy |r| < 1"));
                }
                if c.distance_grid.iter().any(|&d| d < 2) {
                    return Err(bad("limits.distance_grid", "distances must be at least 2"));
                }
            }
        }
        Ok(())
    }

    /// Section of the config used by this experiment, as JSON.
    pub fn params(&self) -> serde_json::Value {
        let section = match self.experiment {
            Experiment::Measure => serde_json::to_value(&self.file.measure),
            Experiment::Decohere => serde_json::to_value(&self.file.decohere),
            Experiment::Nosignal => serde_json::to_value(&self.file.nosignal),
            Experiment::Epr => serde_json::to_value(&self.file.epr),
            Experiment::Entangle => serde_json::to_value(&self.file.entangle),
            Experiment::Limits => serde_json::to_value(&self.file.limits),
        }
        .expect("config sections serialize");
        let mut out = serde_json::Map::new();
        out.insert("experiment".into(), self.experiment.name().into());
        out.insert("seed".into(), self.seed.into());
        out.insert(self.experiment.name().into(), section);
        serde_json::Value::Object(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let cfg = ExperimentConfig::from_toml(
            "output_dir = \"x\"\n[decohere]\nn_max = 5\n",
            Experiment::Decohere,
            None,
            None,
        )
        .unwrap();
        assert_eq!(cfg.file.decohere.n_max, 5);
        assert_eq!(cfg.file.decohere.n_min, 1);
        assert_eq!(cfg.output_dir, PathBuf::from("x"));
    }

    #[test]
    fn errors_name_the_field() {
        let err = ExperimentConfig::from_toml(
            "output_dir = \"x\"\n[limits]\nn_grid = []\n",
            Experiment::Limits,
            None,
            None,
        )
        .unwrap_err();
        assert!(err.to_string().contains("limits.n_grid"), "{err}");
        let err = ExperimentConfig::from_toml("output_dir = \"x\"\n", Experiment::Epr, None, None).unwrap_err();
        assert!(err.to_string().contains("seed"));
        let err = ExperimentConfig::from_toml("output_dir = \"x\"\n[decohere]\nbogus = 1\n", Experiment::Decohere, None, None)
            .unwrap_err();
        assert!(err.to_string().contains("bogus"));
        let err = ExperimentConfig::from_toml(
            "experiment = \"epr\"\nseed = 1\noutput_dir = \"x\"\n",
            Experiment::Measure,
            None,
            None,
        )
        .unwrap_err();
        assert!(err.to_string().contains("experiment"));
    }

    #[test]
    fn regions_in_config() {
        let cfg = ExperimentConfig::from_toml(
            "seed = 3\noutput_dir = \"x\"\n[nosignal]\nmeasurement_region = { sites = [2, 3], t = [0, 4] }\n",
            Experiment::Nosignal,
            None,
            None,
        )
        .unwrap();
        let r = &cfg.file.nosignal.measurement_region;
        assert_eq!(r.sites().collect::<Vec<_>>(), vec![2, 3]);
        assert_eq!(r.t_max(), 4);
    }

    #[test]
    fn params_round_trip() {
        let cfg = ExperimentConfig::from_toml("seed = 3\noutput_dir = \"x\"\n", Experiment::Epr, None, None).unwrap();
        let p = cfg.params();
        let back: EprConfig = serde_json::from_value(p["epr"].clone()).unwrap();
        assert_eq!(back, cfg.file.epr);
    }
}
