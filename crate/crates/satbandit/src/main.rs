//! `satbandit` CLI: simulate, scaling, lowerbound, estimators, selfcheck.
//!
//! Data goes to `--out` (or stdout); progress and logs go to stderr. Exit
//! codes: 0 success, 2 parameter error, 3 selfcheck failure.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use satbandit::config::{ExperimentConfig, ExperimentKind, RawConfig, RawGrid};
use satbandit::report::{
    estimator_report, format_estimator_report, format_lowerbound, lowerbound_report, scaling_report,
};
use satbandit::runner::{run_experiment, write_csv, RegretRecord};
use satbandit::selfcheck::run_selfcheck;
use satbandit::HarnessError;

#[derive(Parser)]
#[command(
    name = "satbandit",
    about = "Simulation harness for satisficing bandits in piecewise-stationary environments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run policies on instances and emit one CSV record per replication.
    Simulate(RunArgs),
    /// Simulate over a (T, L) grid and print the regret-scaling summary.
    Scaling(RunArgs),
    /// Compare every policy's Bayesian regret against the hard-family floor.
    Lowerbound(RunArgs),
    /// Monte-Carlo estimator error rates against their analytic caps.
    Estimators(RunArgs),
    /// Run the built-in invariant suite.
    Selfcheck,
}

#[derive(Args)]
struct RunArgs {
    /// TOML config file; command-line flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (decides every random stream).
    #[arg(long)]
    seed: Option<u64>,
    /// Output path for CSV/tables (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replications per grid point and policy.
    #[arg(long)]
    replications: Option<usize>,
    /// Comma-separated policy ids, e.g. "nonstat-sat,simple-sat,fixed:1".
    #[arg(long, value_delimiter = ',')]
    policies: Option<Vec<String>>,
    /// Instance family: swap-window, single-switch, or alternating.
    #[arg(long)]
    family: Option<String>,
    /// Explicit schedule file (alternative to --family).
    #[arg(long)]
    schedule: Option<PathBuf>,
    /// Grid spec "T=4096,16384;L=1,2;delta=0.3;S=0.5".
    #[arg(long)]
    grid: Option<String>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    threads: Option<usize>,
}

impl RunArgs {
    fn resolve(self, kind: ExperimentKind) -> Result<ExperimentConfig, HarnessError> {
        let base = match &self.config {
            Some(path) => RawConfig::load(path)?,
            None => RawConfig::default(),
        };
        let grid = match &self.grid {
            Some(spec) => {
                let g = satbandit::config::Grid::parse(spec)?;
                Some(RawGrid {
                    t: (!g.horizons.is_empty()).then_some(g.horizons),
                    l: (!g.segments.is_empty()).then_some(g.segments),
                    delta: (!g.deltas.is_empty()).then_some(g.deltas),
                    s: (!g.thresholds.is_empty()).then_some(g.thresholds),
                })
            }
            None => None,
        };
        let overrides = RawConfig {
            experiment: None,
            seed: self.seed,
            replications: self.replications,
            out: self.out,
            policies: self.policies,
            family: self.family,
            schedule: self.schedule,
            threads: self.threads,
            grid,
        };
        base.merge(overrides).resolve(kind)
    }
}

/// Writes `text` to the config's output path, or stdout when none is set.
fn emit(cfg: &ExperimentConfig, text: &str) -> Result<(), HarnessError> {
    match &cfg.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            w.write_all(text.as_bytes())?;
            w.flush()?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn records_to_csv(records: &[RegretRecord]) -> String {
    let mut buf = Vec::new();
    write_csv(records, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv is ascii")
}

fn run(kind: ExperimentKind, args: RunArgs) -> Result<(), HarnessError> {
    let cfg = args.resolve(kind)?;
    match kind {
        ExperimentKind::Simulate => {
            let records = run_experiment(&cfg)?;
            emit(&cfg, &records_to_csv(&records))?;
        }
        ExperimentKind::Scaling => {
            let records = run_experiment(&cfg)?;
            let report = scaling_report(&records);
            emit(&cfg, &records_to_csv(&records))?;
            // The summary table is data too: stdout when the CSV went to a
            // file, stderr otherwise so the CSV stream stays clean.
            if cfg.out.is_some() {
                print!("{report}");
            } else {
                eprint!("{report}");
            }
        }
        ExperimentKind::LowerBound => {
            let records = run_experiment(&cfg)?;
            let rows = lowerbound_report(&cfg, &records)?;
            emit(&cfg, &records_to_csv(&records))?;
            let table = format_lowerbound(&rows);
            if cfg.out.is_some() {
                print!("{table}");
            } else {
                eprint!("{table}");
            }
        }
        ExperimentKind::Estimators => {
            let report = estimator_report(&cfg)?;
            emit(&cfg, &format_estimator_report(&report))?;
        }
        ExperimentKind::SelfCheck => unreachable!("handled in main"),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();

    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Selfcheck => {
            return if run_selfcheck() {
                println!("selfcheck: all invariants hold");
                ExitCode::SUCCESS
            } else {
                println!("selfcheck: FAILED");
                ExitCode::from(3)
            };
        }
        Command::Simulate(a) => (ExperimentKind::Simulate, a),
        Command::Scaling(a) => (ExperimentKind::Scaling, a),
        Command::Lowerbound(a) => (ExperimentKind::LowerBound, a),
        Command::Estimators(a) => (ExperimentKind::Estimators, a),
    };

    match run(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_parameter_error() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
