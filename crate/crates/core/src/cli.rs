//! Command-line front end: argument parsing, per-cell execution, JSON-lines
//! output, error records and report collation.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::analysis::Cell;
use crate::costs::Method;
use crate::error::{QresError, Result};
use crate::qcc::{qcc_run, QccConfig, DEFAULT_BATCH};
use crate::states::{eigensolve, SymmetrySector};

/// Exit code for missing or unreadable input.
pub const EXIT_INPUT: i32 = 2;
/// Exit code for failures inside an analysis.
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "qres", version, about = "Quantum resource estimates for molecular Hamiltonians")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fragment statistics of a Hamiltonian partitioning.
    Partition {
        #[arg(long, value_enum)]
        method: Method,
        #[command(flatten)]
        common: Common,
    },
    /// Measurement count M(ε) with the truncated CISD proxy.
    MeasureCost {
        #[arg(long, value_enum)]
        method: Method,
        #[command(flatten)]
        common: Common,
    },
    /// κ_Q, spectral descriptors and first-order Trotter steps.
    TrotterCost {
        #[arg(long, value_enum)]
        method: Method,
        /// Initial-state overlap p0; defaults to the HF overlap sum.
        #[arg(long)]
        p0: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// LCU 1-norm with unitary or fragment counts and ΔE/2.
    LcuCost {
        #[arg(long, value_enum)]
        method: Method,
        #[command(flatten)]
        common: Common,
    },
    /// Iterative qubit coupled cluster over an entangler schedule.
    Qcc {
        /// Cumulative entangler counts.
        #[arg(long, value_delimiter = ',', default_value = "10,20,50")]
        nent: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        restarts: usize,
        /// Entanglers per dressing round.
        #[arg(long, default_value_t = DEFAULT_BATCH)]
        iqcc_batch: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Lowest eigenpairs, in the electron sector when known.
    Exact {
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Directory for eigenvectors as `index re im` text.
        #[arg(long)]
        vectors: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Collates JSON-lines reports into one table.
    Report {
        /// JSON-lines report files.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct Common {
    /// FCIDUMP files, or `.pauli` text files of `coeff label` lines.
    #[arg(required = true)]
    pub fixtures: Vec<PathBuf>,
    /// Energy tolerance in hartree (1e-3; 1.5e-3 for qcc).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Apply the optimal electron-number shift.
    #[arg(long)]
    pub shift: bool,
    /// Electron-number sector, `ne=<int>`.
    #[arg(long, value_parser = parse_sector)]
    pub sector: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Append reports to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write each qubit Hamiltonian as `<molecule>_<geometry>.pauli` next to
    /// the output.
    #[arg(long)]
    pub dump_pauli: bool,
}

fn parse_sector(s: &str) -> std::result::Result<usize, String> {
    s.strip_prefix("ne=")
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| format!("expected ne=<int>, got '{s}'"))
}

/// Machine-readable failure record.
#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub error: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixture: Option<String>,
}

impl ErrorRecord {
    fn new(e: &QresError, fixture: Option<&Path>) -> Self {
        ErrorRecord { error: e.kind_name(), message: e.to_string(), fixture: fixture.map(|p| p.display().to_string()) }
    }
}

/// Exit code for an error: input problems map to 2, the rest to 3.
pub fn exit_code(e: &QresError) -> i32 {
    match e {
        QresError::Io(_) | QresError::Parse(_) | QresError::Argument(_) => EXIT_INPUT,
        _ => EXIT_SOLVER,
    }
}

/// Runs a parsed command; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Report { inputs, format, out } => match collate(&inputs, format, out.as_deref()) {
            Ok(()) => 0,
            Err(e) => fail(&e, None),
        },
        Command::Partition { method, common } => {
            let shift = common.shift;
            per_cell(&common, |cell| to_json(&cell.partition(method, shift)?, PARTITION_UNITS))
        }
        Command::MeasureCost { method, common } => {
            let eps = common.epsilon.unwrap_or(1e-3);
            per_cell(&common, |cell| to_json(&cell.measure_cost(method, eps)?, &[]))
        }
        Command::TrotterCost { method, p0, common } => {
            let eps = common.epsilon.unwrap_or(1e-3);
            per_cell(&common, |cell| to_json(&cell.trotter_cost(method, eps, p0)?, &[]))
        }
        Command::LcuCost { method, common } => {
            let shift = common.shift;
            per_cell(&common, |cell| to_json(&cell.lcu_cost(method, shift)?, &[]))
        }
        Command::Qcc { nent, restarts, iqcc_batch, common } => {
            let config = QccConfig {
                schedule: nent,
                batch: iqcc_batch,
                restarts,
                seed: common.seed,
                epsilon: common.epsilon.unwrap_or(1.5e-3),
            };
            per_cell(&common, |cell| qcc_record(cell, &config))
        }
        Command::Exact { k, vectors, common } => per_cell(&common, |cell| exact_record(cell, k, vectors.as_deref())),
    }
}

const PARTITION_UNITS: &[(&str, &str)] = &[
    ("fragments.l1_norm", "hartree"),
    ("fragments.l2_norm", "hartree"),
    ("fragments.size", "Pauli terms"),
    ("fragments.givens_rotations", "count"),
    ("fragments.one_qubit", "gates"),
    ("fragments.two_qubit", "gates"),
    ("fragments.depth", "layers"),
    ("n_fragments", "count"),
    ("reconstruction_error", "hartree"),
    ("shift", "hartree"),
];

/// Serializes `value`, adding a `units` map unless it already carries one.
fn to_json<T: Serialize>(value: &T, units: &[(&str, &str)]) -> Result<Value> {
    let mut v = serde_json::to_value(value).map_err(|e| QresError::State(e.to_string()))?;
    if let Value::Object(m) = &mut v {
        if !m.contains_key("units") {
            let u: Map<String, Value> = units.iter().map(|(k, u)| (k.to_string(), json!(u))).collect();
            m.insert("units".into(), Value::Object(u));
        }
    }
    Ok(v)
}

fn qcc_record(cell: &Cell, config: &QccConfig) -> Result<Value> {
    let ne = cell.n_electrons.ok_or_else(|| QresError::Argument("qcc needs --sector ne=<int>".into()))?;
    let rows = qcc_run(&cell.qubit, ne, config)?;
    to_json(
        &json!({
            "molecule": cell.molecule,
            "geometry": cell.geometry,
            "config": config,
            "rows": rows,
        }),
        &[
            ("rows.energy", "hartree"),
            ("rows.exact_energy", "hartree"),
            ("rows.error", "hartree"),
            ("rows.overlap_sum", "dimensionless"),
            ("rows.n_ent", "count"),
            ("config.epsilon", "hartree"),
        ],
    )
}

fn exact_record(cell: &Cell, k: usize, vectors: Option<&Path>) -> Result<Value> {
    if k == 0 {
        return Err(QresError::Argument("--k must be at least 1".into()));
    }
    let n = cell.n_qubits();
    let sector = cell.n_electrons.map(SymmetrySector::electrons);
    let dim = match &sector {
        Some(s) => s.basis(n)?.dim(),
        None => 1usize << n,
    };
    let pairs = eigensolve(&cell.qubit, k.min(dim), sector.as_ref())?;
    if let Some(dir) = vectors {
        std::fs::create_dir_all(dir)?;
        for (i, (_, v)) in pairs.iter().enumerate() {
            std::fs::write(dir.join(format!("{}_{}_{i}.txt", cell.molecule, cell.geometry)), v.to_text())?;
        }
    }
    to_json(
        &json!({
            "molecule": cell.molecule,
            "geometry": cell.geometry,
            "n_qubits": n,
            "n_electrons": cell.n_electrons,
            "energies": pairs.iter().map(|(e, _)| *e).collect::<Vec<_>>(),
        }),
        &[("energies", "hartree"), ("n_qubits", "count"), ("n_electrons", "count")],
    )
}

fn fail(e: &QresError, fixture: Option<&Path>) -> i32 {
    let record = serde_json::to_string(&ErrorRecord::new(e, fixture)).expect("plain record");
    eprintln!("{record}");
    exit_code(e)
}

fn load(path: &Path, sector: Option<usize>) -> Result<Cell> {
    if !path.is_file() {
        return Err(QresError::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("fixture {} not found", path.display()),
        )));
    }
    let mut cell = Cell::load(path)?;
    if sector.is_some() {
        cell.n_electrons = sector;
    }
    Ok(cell)
}

/// Loads every fixture, runs `f` on the cells in parallel and writes one
/// JSON line per cell in input order. Failing cells produce error records
/// on stderr; the exit code is the largest one seen.
fn per_cell(common: &Common, f: impl Fn(&Cell) -> Result<Value> + Sync) -> i32 {
    let mut cells = Vec::new();
    for path in &common.fixtures {
        match load(path, common.sector) {
            Ok(c) => cells.push((path, c)),
            Err(e) => return fail(&e, Some(path)),
        }
    }
    if common.dump_pauli {
        let dir = common.out.as_deref().and_then(Path::parent).unwrap_or(Path::new(""));
        for (path, cell) in &cells {
            let file = dir.join(format!("{}_{}.pauli", cell.molecule, cell.geometry));
            if let Err(e) = std::fs::write(&file, cell.qubit.to_text()) {
                return fail(&e.into(), Some(path));
            }
        }
    }
    let results: Vec<Result<Value>> = cells.par_iter().map(|(_, c)| f(c)).collect();
    let mut lines = String::new();
    let mut code = 0;
    for ((path, _), r) in cells.iter().zip(results) {
        match r {
            Ok(v) => {
                lines.push_str(&v.to_string());
                lines.push('\n');
            }
            Err(e) => code = code.max(fail(&e, Some(path))),
        }
    }
    if let Err(e) = emit(&lines, common.out.as_deref()) {
        return fail(&e, None);
    }
    code
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => {
            let mut f = OpenOptions::new().create(true).append(true).open(p)?;
            f.write_all(text.as_bytes())?;
        }
        None => {
            let mut s = std::io::stdout().lock();
            s.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

/// Flattens nested objects into dotted keys; arrays and `units` are dropped.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, Value)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                if prefix.is_empty() && k == "units" {
                    continue;
                }
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::Array(_) => {}
        _ => out.push((prefix.to_string(), v.clone())),
    }
}

/// Table rows of one record; QCC records yield one row per schedule point.
fn record_rows(record: &Value) -> Vec<Vec<(String, Value)>> {
    let mut base = Vec::new();
    flatten("", record, &mut base);
    match record.get("rows").and_then(Value::as_array) {
        Some(rows) => rows
            .iter()
            .map(|r| {
                let mut row = base.clone();
                flatten("", r, &mut row);
                row
            })
            .collect(),
        None => vec![base],
    }
}

/// Joins JSON-lines reports into a table sorted by molecule, geometry and
/// method, with columns in order of first appearance.
pub fn collate(inputs: &[PathBuf], format: Format, out: Option<&Path>) -> Result<()> {
    let mut rows = Vec::new();
    for path in inputs {
        let text = std::fs::read_to_string(path)?;
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let v: Value = serde_json::from_str(line)
                .map_err(|e| QresError::Parse(format!("{}:{}: {e}", path.display(), i + 1)))?;
            rows.extend(record_rows(&v));
        }
    }
    let mut columns: Vec<String> = ["molecule", "geometry", "method"].map(String::from).to_vec();
    for row in &rows {
        for (k, _) in row {
            if !columns.contains(k) {
                columns.push(k.clone());
            }
        }
    }
    let key = |row: &Vec<(String, Value)>, c: &str| {
        row.iter().find(|(k, _)| k == c).map(|(_, v)| cell_text(v)).unwrap_or_default()
    };
    rows.sort_by_cached_key(|r| (key(r, "molecule"), key(r, "geometry"), key(r, "method")));
    let text = match format {
        Format::Json => {
            let table: Vec<Map<String, Value>> = rows.into_iter().map(|r| r.into_iter().collect()).collect();
            let mut s = serde_json::to_string_pretty(&table).map_err(|e| QresError::State(e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let csv_err = |e: csv::Error| QresError::State(e.to_string());
            w.write_record(&columns).map_err(csv_err)?;
            for r in &rows {
                w.write_record(columns.iter().map(|c| key(r, c))).map_err(csv_err)?;
            }
            String::from_utf8(w.into_inner().map_err(|e| QresError::State(e.to_string()))?)
                .map_err(|e| QresError::State(e.to_string()))?
        }
    };
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => emit(&text, None)?,
    }
    Ok(())
}

fn cell_text(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
