use std::fs;
use std::path::{Path, PathBuf};

use padic_pme::evolve::{ConvergenceStudy, Regularity, StepDiagnostics};
use padic_pme::sobolev::{EquivalenceConstants, EquivalenceEnvelope, NormReport};
use padic_pme::verify::{ArbitrationTable, Check, Suite};
use padic_pme::Error;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: Tool,
    pub command: &'static str,
    pub config: ExperimentConfig,
    pub passed: bool,
    pub exit_code: i32,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arbitration: Option<ArbitrationSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norms: Option<NormsSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<TrajectorySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contraction: Option<ContractionSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceStudy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suites: Option<Vec<Suite>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<FailureRecord>,
    /// CSV files written next to the report.
    pub tables: Vec<String>,
}

impl Report {
    pub fn new(command: &'static str, config: &ExperimentConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool: Tool {
                name: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
            },
            command,
            config: config.clone(),
            passed: true,
            exit_code: 0,
            checks: Vec::new(),
            grid: None,
            arbitration: None,
            norms: None,
            trajectory: None,
            contraction: None,
            convergence: None,
            suites: None,
            failure: None,
            tables: Vec::new(),
        }
    }

    /// Sets `passed` and `exit_code` from the checks, suites and failure.
    pub fn settle(&mut self) {
        let suites_ok = self
            .suites
            .as_ref()
            .is_none_or(|s| s.iter().all(|s| s.passed));
        let checks_ok = self.checks.iter().all(|c| c.passed);
        self.passed = self.failure.is_none() && suites_ok && checks_ok;
        self.exit_code = if self.failure.is_some() {
            3
        } else if self.passed {
            0
        } else {
            1
        };
    }
}

#[derive(Debug, Serialize)]
pub struct ShellRow {
    pub exponent: Option<i32>,
    pub radius: f64,
    pub count: usize,
    pub measure: f64,
}

#[derive(Debug, Serialize)]
pub struct DualRow {
    pub exponent: Option<i32>,
    pub norm: f64,
    pub count: usize,
    pub symbol: f64,
}

#[derive(Debug, Serialize)]
pub struct GridSummary {
    pub p: u64,
    pub n: i32,
    pub k: i32,
    pub cells: usize,
    pub haar_weight: f64,
    pub ball_measure: f64,
    pub lambda0: f64,
    pub lambda1: f64,
    pub point_shells: Vec<ShellRow>,
    pub dual_classes: Vec<DualRow>,
}

#[derive(Debug, Serialize)]
pub struct ArbitrationSummary {
    pub candidates: [&'static str; 3],
    pub formulas: [&'static str; 3],
    pub max_gaps: [f64; 3],
    pub matching: Vec<&'static str>,
    pub rows: usize,
}

impl From<&ArbitrationTable> for ArbitrationSummary {
    fn from(t: &ArbitrationTable) -> Self {
        Self {
            candidates: t.candidates,
            formulas: t.formulas,
            max_gaps: t.max_gaps,
            matching: t.matching.clone(),
            rows: t.rows.len(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct NormsSummary {
    pub s: f64,
    pub function: String,
    pub values: NormReport,
    pub constants: EquivalenceConstants,
    /// Certified when `alpha` lies in `(0, 1)`.
    pub envelope: Option<EquivalenceEnvelope>,
    pub ratios: Option<[f64; 3]>,
}

#[derive(Debug, Serialize)]
pub struct TrajectorySummary {
    pub steps: usize,
    pub complete: bool,
    pub initial: StepDiagnostics,
    #[serde(rename = "final")]
    pub last: StepDiagnostics,
    pub psi_max_increase: f64,
    pub hminus1_max_increase: f64,
    pub zero_mode_defect: f64,
    pub max_residual: f64,
    pub max_constraint_gap: f64,
    pub max_newton_iters: usize,
    pub regularity: Regularity,
}

#[derive(Debug, Serialize)]
pub struct PairSummary {
    pub first: String,
    pub second: String,
    pub gap: f64,
    pub initial_distance: f64,
    pub final_distance: f64,
}

#[derive(Debug, Serialize)]
pub struct ContractionSummary {
    pub max_gap: f64,
    pub pairs: Vec<PairSummary>,
}

#[derive(Debug, Serialize)]
pub struct FailureRecord {
    pub message: String,
    pub step: Option<usize>,
    pub mu: Option<f64>,
    pub residual: Option<f64>,
    pub iterations: Option<usize>,
    pub history: Vec<f64>,
}

impl FailureRecord {
    pub fn new(error: &Error, step: Option<usize>) -> Self {
        let mut rec = Self {
            message: error.to_string(),
            step,
            mu: None,
            residual: None,
            iterations: None,
            history: Vec::new(),
        };
        if let Error::NonConvergence {
            mu,
            residual,
            iterations,
            history,
        } = error
        {
            rec.mu = Some(*mu);
            rec.residual = Some(*residual);
            rec.iterations = Some(*iterations);
            rec.history = history.clone();
        }
        rec
    }
}

/// Destination directory for one command's outputs.
pub struct Output {
    dir: PathBuf,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
        })
    }

    /// Writes a CSV table and records its name in the report.
    pub fn table(
        &self,
        report: &mut Report,
        name: &str,
        header: &[&str],
        rows: impl IntoIterator<Item = Vec<String>>,
    ) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
        w.write_record(header).map_err(|e| io_err(&path, e))?;
        for row in rows {
            w.write_record(&row).map_err(|e| io_err(&path, e))?;
        }
        w.flush().map_err(|e| io_err(&path, e))?;
        report.tables.push(name.to_string());
        Ok(())
    }

    pub fn report(&self, report: &Report) -> Result<PathBuf, CliError> {
        let path = self.dir.join(format!("{}.json", report.command));
        let mut text = serde_json::to_string_pretty(report).map_err(|e| io_err(&path, e))?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| io_err(&path, e))?;
        Ok(path)
    }
}

/// Plain decimal formatting for CSV cells; non-finite values become empty cells.
pub fn num(v: f64) -> String {
    if !v.is_finite() {
        String::new()
    } else if v == 0.0 || (1e-4..1e15).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}
