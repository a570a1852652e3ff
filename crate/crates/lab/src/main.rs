use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lqm_lab::config::ConfigFile;
use lqm_lab::{execute, Experiment, ExperimentConfig, LabError};

/// Numerical experiments on local measurement models.
///
/// Each run writes `results.csv` and `summary.json` into the output directory.
/// Exit status: 0 on success, 2 for configuration errors, 3 when a dense
/// operator would exceed the capacity limit, 1 for any other failure.
#[derive(Parser)]
#[command(name = "lqm-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pointer coupling of a system to an apparatus: checks that the reduced
    /// post-measurement state equals the mixture over outcomes, that the
    /// Heisenberg-evolved ready isometry intertwines into the outcome family
    /// (with residual bounded by 2εT for a free system term of size ε), and
    /// sweeps the fidelity of the state at intermediate times.
    Measure(RunArgs),
    /// Amplifier chain: the interference term between two branches decays as
    /// |r|^N in the number N of particles read out.
    Decohere(RunArgs),
    /// Measurement localized on a lattice region: the expectation of any
    /// observable on a spacelike region is unchanged by the measurement.
    Nosignal(RunArgs),
    /// Singlet pair measured at two spacelike separated events: correlations,
    /// CHSH value, invariance of each local marginal under the remote setting,
    /// and when an observer can first compare both records.
    Epr(RunArgs),
    /// Entangled states across spacelike separated regions, built from a
    /// pair of local projections and from the split product construction.
    Entangle(RunArgs),
    /// Short-time, large-amplifier and large-distance limits in one table.
    Limits(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML config; defaults apply to every field left out.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for the sampling experiments, overriding `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
    /// Largest number of complex entries any dense operator may hold.
    #[arg(long)]
    max_entries: Option<usize>,
}

impl Command {
    fn split(self) -> (Experiment, RunArgs) {
        match self {
            Command::Measure(a) => (Experiment::Measure, a),
            Command::Decohere(a) => (Experiment::Decohere, a),
            Command::Nosignal(a) => (Experiment::Nosignal, a),
            Command::Epr(a) => (Experiment::Epr, a),
            Command::Entangle(a) => (Experiment::Entangle, a),
            Command::Limits(a) => (Experiment::Limits, a),
        }
    }
}

fn main_inner(cli: Cli) -> Result<(), LabError> {
    let (experiment, args) = cli.command.split();
    let cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path, experiment, args.seed, args.out.clone())?,
        None => ExperimentConfig::from_file(ConfigFile::default(), experiment, args.seed, args.out.clone())?,
    };
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(LabError::Config("--threads: must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| LabError::Config(format!("--threads: {e}")))?;
    }
    if let Some(limit) = args.max_entries {
        lqm_core::linalg::set_max_entries(limit);
    }
    let record = execute(&cfg)?;
    eprintln!(
        "{}: {} rows written to {} in {:.3}s",
        record.experiment,
        record.rows.len(),
        cfg.output_dir.display(),
        record.wall_time
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
