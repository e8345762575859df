//! Readers and writers for the on-disk formats.
//!
//! * matrices: `{"dim": n, "re": [[..]], "im": [[..]]}`, vectors: `{"re": [..], "im": [..]}`
//! * gap profiles: CSV `u,delta`
//! * schedules: CSV `s,u,du,ddu` plus a JSON sidecar next to it (same stem, `.json`)
//! * traces: CSV `s,error`, optional states JSON
//! * residuals: CSV `s,full,l1,l2`

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use adiasched_core::evolve::EvolutionTrace;
use adiasched_core::gap::GapKind;
use adiasched_core::operators::{CVector, HermitianOperator};
use adiasched_core::schedule::{Schedule, ScheduleFamily, ScheduleNode};
use adiasched_core::variational::ELResidualReport;
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{format_err, io_err, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDoc {
    #[serde(default)]
    pub dim: Option<usize>,
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorDoc {
    pub re: Vec<f64>,
    #[serde(default)]
    pub im: Option<Vec<f64>>,
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| format_err(path, e))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| format_err(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

pub fn read_matrix(path: &Path) -> CliResult<HermitianOperator> {
    let doc: MatrixDoc = read_json(path)?;
    let n = doc.re.len();
    if doc.dim.is_some_and(|d| d != n) {
        return Err(format_err(path, format!("dim {} does not match {n} rows", doc.dim.unwrap_or(0))));
    }
    let im = doc.im.unwrap_or_else(|| vec![vec![0.0; n]; n]);
    HermitianOperator::from_parts(&doc.re, &im).map_err(|e| format_err(path, e))
}

pub fn write_matrix(path: &Path, h: &HermitianOperator) -> CliResult<()> {
    let (re, im) = h.to_parts();
    write_json(
        path,
        &MatrixDoc {
            dim: Some(h.dim()),
            re,
            im: Some(im),
        },
    )
}

pub fn read_vector(path: &Path) -> CliResult<CVector> {
    let doc: VectorDoc = read_json(path)?;
    let im = doc.im.unwrap_or_else(|| vec![0.0; doc.re.len()]);
    if im.len() != doc.re.len() {
        return Err(format_err(path, "re and im lengths differ"));
    }
    if doc.re.is_empty() {
        return Err(format_err(path, "empty vector"));
    }
    Ok(CVector::from_iterator(
        doc.re.len(),
        doc.re.iter().zip(&im).map(|(&r, &i)| Complex64::new(r, i)),
    ))
}

pub fn vector_doc(v: &CVector) -> VectorDoc {
    VectorDoc {
        re: v.iter().map(|z| z.re).collect(),
        im: Some(v.iter().map(|z| z.im).collect()),
    }
}

fn csv_writer(path: &Path) -> CliResult<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| format_err(path, e))
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> CliResult<()> {
    let mut w = csv_writer(path)?;
    for r in rows {
        w.serialize(r).map_err(|e| format_err(path, e))?;
    }
    w.flush().map_err(io_err(path))
}

/// Read a headed CSV. The header must equal `header` exactly.
fn read_rows<T: DeserializeOwned>(path: &Path, header: &[&str]) -> CliResult<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| format_err(path, e))?;
    let found: Vec<String> = r
        .headers()
        .map_err(|e| format_err(path, e))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if found != header {
        return Err(format_err(path, format!("expected header {}, found {}", header.join(","), found.join(","))));
    }
    r.deserialize().map(|row| row.map_err(|e| format_err(path, e))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct ProfileRow {
    u: f64,
    delta: f64,
}

pub fn write_profile_csv(path: &Path, samples: &[(f64, f64)]) -> CliResult<()> {
    write_rows(path, samples.iter().map(|&(u, delta)| ProfileRow { u, delta }))
}

pub fn read_profile_csv(path: &Path) -> CliResult<Vec<(f64, f64)>> {
    let rows: Vec<ProfileRow> = read_rows(path, &["u", "delta"])?;
    Ok(rows.into_iter().map(|r| (r.u, r.delta)).collect())
}

/// Sidecar written next to a schedule CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSidecar {
    pub schedule: ScheduleFamily,
    pub nodes: usize,
    /// `(u′(0), u′(1))`.
    pub boundary_derivatives: (f64, f64),
    pub profile: Option<GapKind>,
    /// Largest `|u′ − c_p Δ^p|/c_p` over the nodes, for power-law schedules.
    pub ode_residual: Option<f64>,
    pub csv: String,
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

pub fn write_schedule(csv_path: &Path, sched: &Schedule, profile: Option<GapKind>, ode_residual: Option<f64>) -> CliResult<()> {
    write_rows(csv_path, sched.nodes().iter())?;
    let name = csv_path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    write_json(
        &sidecar_path(csv_path),
        &ScheduleSidecar {
            schedule: *sched.family(),
            nodes: sched.nodes().len(),
            boundary_derivatives: sched.boundary_derivatives(),
            profile,
            ode_residual,
            csv: name,
        },
    )
}

pub fn read_schedule(csv_path: &Path) -> CliResult<Schedule> {
    let meta: ScheduleSidecar = read_json(&sidecar_path(csv_path))?;
    let nodes: Vec<ScheduleNode> = read_rows(csv_path, &["s", "u", "du", "ddu"])?;
    if nodes.len() != meta.nodes {
        return Err(format_err(csv_path, format!("sidecar lists {} nodes, CSV has {}", meta.nodes, nodes.len())));
    }
    Schedule::from_nodes(meta.schedule, nodes).map_err(|e| format_err(csv_path, e))
}

#[derive(Debug, Clone, Copy, Serialize)]
struct TraceRow {
    s: f64,
    error: f64,
}

pub fn write_trace_csv(path: &Path, trace: &EvolutionTrace) -> CliResult<()> {
    write_rows(path, trace.s_grid.iter().zip(&trace.errors).map(|(&s, &error)| TraceRow { s, error }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatesDoc {
    pub s: Vec<f64>,
    pub states: Vec<VectorDoc>,
}

pub fn write_states_json(path: &Path, trace: &EvolutionTrace) -> CliResult<()> {
    write_json(
        path,
        &StatesDoc {
            s: trace.s_grid.clone(),
            states: trace.states.iter().map(vector_doc).collect(),
        },
    )
}

#[derive(Debug, Clone, Copy, Serialize)]
struct ResidualRow {
    s: f64,
    full: f64,
    l1: f64,
    l2: f64,
}

pub fn write_residuals_csv(path: &Path, r: &ELResidualReport) -> CliResult<()> {
    let rows = (0..r.s_grid.len()).map(|i| ResidualRow {
        s: r.s_grid[i],
        full: r.full_residual[i],
        l1: r.l1_residual[i],
        l2: r.l2_residual[i],
    });
    write_rows(path, rows)
}

/// Plain text file with a trailing newline.
pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(text.as_bytes()).map_err(io_err(path))?;
    if !text.ends_with('\n') {
        f.write_all(b"\n").map_err(io_err(path))?;
    }
    Ok(())
}
