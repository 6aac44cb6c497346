//! Orchestration for the `lab` binary: configuration, dispatch and artifacts.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod report;
pub mod run;

use std::path::PathBuf;
use std::time::Instant;

use quintlab_core::probes::LemmaId;
use quintlab_core::LabError;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::report::{emit_plotdata, OutputDir, RunReport, SCHEMA_VERSION};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),
    #[error(transparent)]
    Core(#[from] LabError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// `1` for numerical failures during a run, `2` for everything the user
    /// can fix in the configuration or environment.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(LabError::BlowUp { .. } | LabError::KrylovTolerance { .. }) => 1,
            _ => 2,
        }
    }
}

/// One command-line request after flags are parsed.
#[derive(Clone, Debug)]
pub struct Invocation {
    pub kind: ExperimentKind,
    pub config: ExperimentConfig,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub k: Option<usize>,
    pub lemma: Option<LemmaId>,
}

impl Invocation {
    /// Applies flag overrides and validates the section the run will read.
    pub fn resolve(mut self) -> Result<(ExperimentKind, ExperimentConfig, PathBuf, Option<LemmaId>), CliError> {
        if let Some(seed) = self.seed {
            self.config.seed = seed;
        }
        if let Some(k) = self.k {
            self.config.couplings.k = k;
        }
        let lemma = self.lemma.or(self.config.probe.lemma);
        let mut errors = self.config.validate(self.kind);
        if self.kind == ExperimentKind::Probe && lemma.is_none() {
            errors.push("probe.lemma: required (or pass --lemma)".into());
        }
        if !errors.is_empty() {
            return Err(CliError::Validation(errors));
        }
        let out = self
            .out
            .or_else(|| self.config.out.clone())
            .unwrap_or_else(|| PathBuf::from("out").join(self.kind.name()));
        Ok((self.kind, self.config, out, lemma))
    }
}

/// Runs the experiment and writes its artifacts; nothing is left behind when
/// the run fails.
pub fn run_experiment(inv: Invocation) -> Result<(RunReport, PathBuf), CliError> {
    let (kind, cfg, out_path, lemma) = inv.resolve()?;
    let started = Instant::now();
    let mut out = OutputDir::create(&out_path)?;
    let outcome = run::dispatch(kind, &cfg, lemma)?;
    let mut artifacts = Vec::new();
    for table in &outcome.tables {
        artifacts.push(out.write(&format!("{}.csv", table.name), table.to_csv().as_bytes())?);
    }
    for (name, bytes) in &outcome.binaries {
        artifacts.push(out.write(name, bytes)?);
    }
    let mut report = RunReport {
        schema_version: SCHEMA_VERSION,
        kind: kind.name().to_string(),
        seed: cfg.seed,
        config: outcome.config,
        wall_time_s: 0.0,
        artifacts: Vec::new(),
        metrics: outcome.metrics,
        tolerances: outcome.tolerances,
        passed: outcome.passed,
        tables: outcome.tables,
        details: outcome.details,
    };
    artifacts.extend(emit_plotdata(&report, &mut out)?);
    artifacts.push("report.json".into());
    report.artifacts = artifacts;
    report.wall_time_s = started.elapsed().as_secs_f64();
    out.write("report.json", serde_json::to_string_pretty(&report)?.as_bytes())?;
    let root = out.root().to_path_buf();
    out.commit();
    Ok((report, root))
}
