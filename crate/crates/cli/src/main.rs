use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use quintlab_cli::config::{ExperimentConfig, ExperimentKind};
use quintlab_cli::{run_experiment, CliError, Invocation};
use quintlab_core::probes::LemmaId;

/// Numerical laboratory for the quintic NLS and its many-body derivation.
#[derive(Parser)]
#[command(name = "lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration; defaults are used for missing sections.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default `out/<subcommand>`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Split-step NLS evolution with conservation and energy-split diagnostics.
    NlsRun(Common),
    /// N-body propagation with energy moments and the stability check.
    ManybodyRun(Common),
    /// Trace distance between one-particle marginals and the NLS solution.
    Chaos(Common),
    /// BBGKY and GP hierarchy residuals under spacing refinement.
    Residuals(Common),
    /// High-frequency tails of k-particle marginals.
    Hufl(Common),
    /// Collapse-map counts and unclogged-coupling minima.
    Couplings {
        #[command(flatten)]
        common: Common,
        /// Depth of the expansion.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Empirical constants of one inequality.
    Probe {
        #[command(flatten)]
        common: Common,
        /// strichartz | bilinear | refined-sobolev | multilinear | approx-identity
        #[arg(long, value_parser = parse_lemma)]
        lemma: Option<LemmaId>,
    },
}

fn parse_lemma(s: &str) -> Result<LemmaId, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unknown lemma `{s}`"))
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("LAB_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| CliError::Validation(vec![format!("LAB_THREADS: not a thread count: {v}")]))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Validation(vec![format!("LAB_THREADS: {e}")]))?;
    }
    Ok(())
}

fn invocation(cmd: Command) -> Result<Invocation, CliError> {
    let (kind, common, k, lemma) = match cmd {
        Command::NlsRun(c) => (ExperimentKind::NlsRun, c, None, None),
        Command::ManybodyRun(c) => (ExperimentKind::ManybodyRun, c, None, None),
        Command::Chaos(c) => (ExperimentKind::Chaos, c, None, None),
        Command::Residuals(c) => (ExperimentKind::Residuals, c, None, None),
        Command::Hufl(c) => (ExperimentKind::Hufl, c, None, None),
        Command::Couplings { common, k } => (ExperimentKind::Couplings, common, k, None),
        Command::Probe { common, lemma } => (ExperimentKind::Probe, common, None, lemma),
    };
    let config = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    Ok(Invocation {
        kind,
        config,
        seed: common.seed,
        out: common.out,
        k,
        lemma,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads()
        .and_then(|()| invocation(cli.command))
        .and_then(run_experiment);
    match result {
        Ok((report, dir)) => {
            let verdict = if report.passed { "pass" } else { "tolerance failure" };
            println!("{}: {verdict}; report at {}", report.kind, dir.join("report.json").display());
            ExitCode::from(if report.passed { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
