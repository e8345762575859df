//! Sweep reports and the metadata block shared by every JSON output.
//!
//! JSON layout (field order is fixed):
//!
//! ```text
//! { "metadata": { "tool", "version", "command", "tolerances": {..}, "config": {..} },
//!   "rows": [ SweepPoint, .. ],
//!   "fit": ScalingFit | null }
//! ```
//!
//! The CSV companion has the columns
//! `family,size,delta_star,schedule,p,epsilon,t_star,final_error,steps`.

use std::path::Path;

use adiasched_core::bounds::BOUND_INTEGRAL_RTOL;
use adiasched_core::evolve::{DEFAULT_RECORD_CAP, MIN_STEPS};
use adiasched_core::harness::{fit_sweep, ScalingFit, SweepPoint, BISECTION_ROUNDS, MAX_RUNTIME};
use adiasched_core::schedule::NORMALIZATION_RTOL;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{format_err, io_err, CliResult};
use crate::formats::{read_json, write_json};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub step_rule: String,
    pub min_steps: usize,
    pub record_cap: usize,
    pub bisection_rounds: usize,
    pub max_runtime: f64,
    pub normalization_rtol: f64,
    pub bound_quadrature_rtol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            step_rule: "max(4096, ceil(64*T))".into(),
            min_steps: MIN_STEPS,
            record_cap: DEFAULT_RECORD_CAP,
            bisection_rounds: BISECTION_ROUNDS,
            max_runtime: MAX_RUNTIME,
            normalization_rtol: NORMALIZATION_RTOL,
            bound_quadrature_rtol: BOUND_INTEGRAL_RTOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub tolerances: Tolerances,
    /// Resolved parameters, defaults included.
    pub config: Value,
}

impl Metadata {
    pub fn new(command: &str, config: Value) -> Self {
        Self {
            tool: "adiasched".into(),
            version: crate::VERSION.into(),
            command: command.into(),
            tolerances: Tolerances::default(),
            config,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub metadata: Metadata,
    pub rows: Vec<SweepPoint>,
    pub fit: Option<ScalingFit>,
}

impl SweepReport {
    /// Rows are sorted by size; the fit is present from three rows on.
    pub fn new(metadata: Metadata, mut rows: Vec<SweepPoint>) -> CliResult<Self> {
        rows.sort_by(|a, b| a.size.total_cmp(&b.size));
        let fit = if rows.len() >= 3 { Some(fit_sweep(&rows)?) } else { None };
        Ok(Self { metadata, rows, fit })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub family: String,
    pub size: f64,
    pub delta_star: f64,
    pub schedule: String,
    pub p: Option<f64>,
    pub epsilon: f64,
    pub t_star: f64,
    pub final_error: f64,
    pub steps: usize,
}

impl From<&SweepPoint> for ReportRow {
    fn from(p: &SweepPoint) -> Self {
        Self {
            family: p.family.clone(),
            size: p.size,
            delta_star: p.min_gap,
            schedule: p.schedule.clone(),
            p: p.p,
            epsilon: p.epsilon,
            t_star: p.t_star,
            final_error: p.final_error,
            steps: p.steps,
        }
    }
}

pub const CSV_HEADER: &str = "family,size,delta_star,schedule,p,epsilon,t_star,final_error,steps";

/// Write `report` as JSON to `json_path` and as CSV to `csv_path`.
pub fn emit_report(report: &SweepReport, json_path: &Path, csv_path: &Path) -> CliResult<()> {
    write_json(json_path, report)?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(csv_path)
        .map_err(|e| format_err(csv_path, e))?;
    w.write_record(CSV_HEADER.split(',')).map_err(|e| format_err(csv_path, e))?;
    for row in &report.rows {
        w.serialize(ReportRow::from(row)).map_err(|e| format_err(csv_path, e))?;
    }
    w.flush().map_err(io_err(csv_path))
}

pub fn import_report(json_path: &Path) -> CliResult<SweepReport> {
    read_json(json_path)
}

pub fn read_report_csv(path: &Path) -> CliResult<Vec<ReportRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| format_err(path, e))?;
    r.deserialize().map(|row| row.map_err(|e| format_err(path, e))).collect()
}
