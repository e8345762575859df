//! Flag groups, the defaults table and config-file merging.
//!
//! Every flag can also be given as a key of a JSON config object passed with
//! `--config`. Keys are flag names with `-` replaced by `_` (`--x-grid` is
//! `x_grid`, `--T` is `T`). Flags win over the file; the file wins over the
//! defaults below. Keys the chosen command does not take are rejected.

use std::path::PathBuf;

use adiasched_core::gap::GapKind;
use clap::{Args, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{invalid, CliResult};

/// Defaults for every tunable. [`table`] exposes the same values by key.
pub mod defaults {
    pub const GRID: usize = 201;
    pub const X_GRID: usize = 256;
    pub const RESOLUTION: usize = 4096;
    pub const P: f64 = 1.5;
    pub const SCHEDULE_GRID: usize = 1025;
    pub const RUNTIME: f64 = 50.0;
    pub const EL_GRID: usize = 1025;
    pub const EPS: f64 = 0.1;
    pub const T_LO: f64 = 1.0;
    pub const GROWTH: f64 = 2.0;
    pub const MARKED: usize = 0;
    pub const SEED: u64 = 0;
    pub const DIM: usize = 4;
    pub const S_END: f64 = 1.0;
    pub const OUT: &str = "adiasched-out";
}

/// Defaults by config key. Flags not listed here have no default.
pub fn table() -> Map<String, Value> {
    use defaults::*;
    let v = serde_json::json!({
        "grid": GRID,
        "x_grid": X_GRID,
        "resolution": RESOLUTION,
        "p": P,
        "schedule": "power",
        "schedule_grid": SCHEDULE_GRID,
        "T": RUNTIME,
        "el_grid": EL_GRID,
        "eps": EPS,
        "t_lo": T_LO,
        "growth": GROWTH,
        "marked": MARKED,
        "seed": SEED,
        "dim": DIM,
        "s_end": S_END,
        "dense": false,
        "measure": false,
        "pl": false,
        "allow_p_outside": false,
        "dump_states": false,
        "json": false,
        "out": OUT,
    });
    match v {
        Value::Object(m) => m,
        _ => unreachable!(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    /// Unstructured search on N items.
    Grover,
    /// Linear gap 1 − u + u/κ (from --kappa) or α·u + β (from --alpha/--beta).
    #[value(alias = "qlsa", alias = "qlsa-linear")]
    #[serde(alias = "qlsa", alias = "qlsa_linear")]
    Linear,
    /// Hamiltonians from --h0/--h1 or a linear system from --matrix/--vector.
    Custom,
    /// Seeded random Hermitian pair of size --dim.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleName {
    /// u′ = c_p·Δ(u)^p.
    #[value(alias = "power-law", alias = "power_law")]
    #[serde(alias = "power_law")]
    Power,
    /// u(s) = s.
    Linear,
    /// Smooth bump with all derivatives vanishing at both ends.
    #[value(alias = "boundary-cancellation", alias = "bc")]
    #[serde(alias = "boundary_cancellation", alias = "bc")]
    Boundary,
}

fn parse_kind(s: &str) -> Result<GapKind, String> {
    serde_json::from_str(s).map_err(|e| e.to_string())
}

/// Problem selection.
#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
pub struct FamilyArgs {
    /// Problem family.
    #[arg(long, value_enum)]
    pub family: Option<FamilyName>,
    /// Grover search space size N (at least 2).
    #[arg(long)]
    pub n: Option<u64>,
    /// Marked item index for the dense Grover pair.
    #[arg(long)]
    pub marked: Option<usize>,
    /// Condition number κ of the linear family.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Slope α of a linear gap α·u + β.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// Intercept β of a linear gap α·u + β.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Closed-form profile as JSON, e.g. '{"kind":"grover","N":16}'.
    #[arg(long, value_parser = parse_kind)]
    pub profile: Option<GapKind>,
    /// Tabulated profile CSV with header u,delta.
    #[arg(long)]
    pub profile_file: Option<PathBuf>,
    /// Initial Hamiltonian (JSON matrix file).
    #[arg(long)]
    pub h0: Option<PathBuf>,
    /// Final Hamiltonian (JSON matrix file).
    #[arg(long)]
    pub h1: Option<PathBuf>,
    /// Linear-system matrix A (JSON matrix file).
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Linear-system right-hand side b (JSON vector file).
    #[arg(long)]
    pub vector: Option<PathBuf>,
    /// Seed for randomized test Hamiltonians.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Dimension of the random family.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Use the full N-dimensional Grover pair instead of the 2-level reduction.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub dense: Option<bool>,
    /// Override ‖H₁ − H₀‖ (needed when only a profile is given; else 1).
    #[arg(long)]
    pub a_norm: Option<f64>,
    /// Points of the sampled or written gap profile.
    #[arg(long)]
    pub grid: Option<usize>,
}

/// Schedule selection.
#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
pub struct ScheduleArgs {
    /// Schedule family.
    #[arg(long, value_enum)]
    pub schedule: Option<ScheduleName>,
    /// Power-law exponent.
    #[arg(long)]
    pub p: Option<f64>,
    /// Accept exponents outside (1, 2).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub allow_p_outside: Option<bool>,
    /// Replay a schedule CSV (s,u,du,ddu) with its JSON sidecar.
    #[arg(long)]
    pub schedule_file: Option<PathBuf>,
    /// Nodes of the synthesized schedule.
    #[arg(long)]
    pub schedule_grid: Option<usize>,
}

/// Output location and format.
#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
pub struct OutputArgs {
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the JSON summary instead of text.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub json: Option<bool>,
}

impl OutputArgs {
    pub fn dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(defaults::OUT))
    }

    pub fn json(&self) -> bool {
        self.json.unwrap_or(false)
    }
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
pub struct GapArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub family: FamilyArgs,
    /// Estimate the measure constant.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub measure: Option<bool>,
    /// Write the piecewise-linear lower bound.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub pl: Option<bool>,
    /// Thresholds scanned by the measure estimate.
    #[arg(long)]
    pub x_grid: Option<usize>,
    /// Cells of the u-grid used for sublevel measures.
    #[arg(long)]
    pub resolution: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
pub struct ScheduleCmdArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub family: FamilyArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub schedule: ScheduleArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
pub struct EvolveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub family: FamilyArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub schedule: ScheduleArgs,
    /// Runtime T.
    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub runtime: Option<f64>,
    /// Integrator steps (default max(4096, ⌈64·T⌉)).
    #[arg(long)]
    pub steps: Option<usize>,
    /// Also write the recorded state vectors.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub dump_states: Option<bool>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
pub struct BoundArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub family: FamilyArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub schedule: ScheduleArgs,
    /// Runtime T.
    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub runtime: Option<f64>,
    /// End of the evaluation window in (0, 1].
    #[arg(long)]
    pub s_end: Option<f64>,
    /// Thresholds scanned by the measure estimate.
    #[arg(long)]
    pub x_grid: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
pub struct ElcheckArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub family: FamilyArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub schedule: ScheduleArgs,
    /// Points of the residual grid.
    #[arg(long)]
    pub el_grid: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
pub struct SweepArgs {
    /// Family swept over (grover or linear).
    #[arg(long, value_enum)]
    pub family: Option<FamilyName>,
    /// Ascending sizes: N for grover, κ for linear.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<f64>>,
    /// Use the dense Grover pair.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub dense: Option<bool>,
    #[command(flatten)]
    #[serde(flatten)]
    pub schedule: ScheduleArgs,
    /// Target final error ε.
    #[arg(long)]
    pub eps: Option<f64>,
    /// First runtime tried.
    #[arg(long)]
    pub t_lo: Option<f64>,
    /// Geometric growth factor of the runtime search.
    #[arg(long)]
    pub growth: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

/// Overlay the config file under the flags. Unknown keys are rejected.
pub fn merge<T: Serialize + DeserializeOwned>(flags: &T, file: &Map<String, Value>) -> CliResult<T> {
    let mut v = serde_json::to_value(flags).map_err(|e| invalid(e.to_string()))?;
    let obj = v.as_object_mut().ok_or_else(|| invalid("arguments are not a record"))?;
    let mut unknown: Vec<&str> = file.keys().filter(|k| !obj.contains_key(*k)).map(String::as_str).collect();
    if !unknown.is_empty() {
        unknown.sort_unstable();
        return Err(invalid(format!("unknown config keys for this command: {}", unknown.join(", "))));
    }
    for (k, val) in file {
        if obj[k].is_null() {
            obj.insert(k.clone(), val.clone());
        }
    }
    serde_json::from_value(v).map_err(|e| invalid(format!("config: {e}")))
}

/// The arguments as a key-sorted record with defaults filled in and output
/// location keys dropped, suitable for embedding in reports.
pub fn resolved<T: Serialize>(args: &T) -> Value {
    let mut v = serde_json::to_value(args).unwrap_or(Value::Null);
    if let Some(obj) = v.as_object_mut() {
        let table = table();
        for (k, val) in obj.iter_mut() {
            if val.is_null() {
                if let Some(d) = table.get(k) {
                    *val = d.clone();
                }
            }
        }
        obj.retain(|k, val| !val.is_null() && k != "out" && k != "json");
    }
    v
}
