//! Configurable experiments on top of `lqm-core`, each producing a
//! `results.csv` table and a `summary.json` with parameters and metrics.

pub mod config;
pub mod error;
pub mod experiments;
pub mod record;

pub use config::{Experiment, ExperimentConfig};
pub use error::LabError;
pub use experiments::run;
pub use record::{Cell, ExperimentRecord};

/// Runs the experiment and writes its output files.
pub fn execute(cfg: &ExperimentConfig) -> Result<ExperimentRecord, LabError> {
    let record = run(cfg)?;
    record.emit(&cfg.output_dir)?;
    Ok(record)
}
