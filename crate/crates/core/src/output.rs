//! CSV tables and JSON run manifests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{EntanglementReport, InferredVariant};
use crate::model::ModelParams;
use crate::scans::{Backend, SweepResult};

pub const TOOL: &str = "spinmix";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Modelling assumptions recorded in every manifest.
pub fn standard_assumptions() -> Vec<String> {
    vec![
        "local oscillator moments taken at the measurement time (no splitting delay)".into(),
        "local oscillator split from the pump on a two-port beam splitter with a vacuum port"
            .into(),
        "thermal and coherent seeds are propagated with the truncated Wigner method".into(),
    ]
}

pub const UNIT_TAU: &str = "g*t/hbar";
pub const UNIT_ATOMS: &str = "atoms";
pub const UNIT_ONE: &str = "1";
pub const UNIT_RAD: &str = "rad";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
    pub values: Vec<Option<f64>>,
}

impl Column {
    pub fn new(name: impl Into<String>, unit: &str, values: Vec<Option<f64>>) -> Self {
        Self {
            name: name.into(),
            unit: unit.into(),
            values,
        }
    }

    pub fn dense(
        name: impl Into<String>,
        unit: &str,
        values: impl IntoIterator<Item = f64>,
    ) -> Self {
        Self::new(name, unit, values.into_iter().map(Some).collect())
    }

    pub fn header(&self) -> String {
        format!("{}[{}]", self.name, self.unit)
    }
}

/// One CSV file: the first column is the x axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub stem: String,
    pub columns: Vec<Column>,
}

fn cell(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x}"),
        _ => String::new(),
    }
}

impl Table {
    pub fn new(stem: impl Into<String>, x: Column) -> Self {
        Self {
            stem: stem.into(),
            columns: vec![x],
        }
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.values.len())
    }

    /// Appends a column, padding or truncating it to the x length.
    pub fn push(&mut self, mut c: Column) {
        c.values.resize(self.rows(), None);
        self.columns.push(c);
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.stem)
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(self.columns.iter().map(Column::header))?;
        for i in 0..self.rows() {
            wr.write_record(self.columns.iter().map(|c| cell(c.values[i])))?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::InvalidData(e.to_string()))
    }
}

/// Reads a CSV written by [`Table::write_csv`].
pub fn read_table(path: &Path) -> Result<Table> {
    let mut rd = csv::Reader::from_path(path)?;
    let headers = rd.headers()?.clone();
    let mut columns: Vec<Column> = headers
        .iter()
        .map(|h| {
            let (name, unit) = match h.find('[') {
                Some(i) if h.ends_with(']') => (&h[..i], &h[i + 1..h.len() - 1]),
                _ => (h, ""),
            };
            Column::new(name, unit, Vec::new())
        })
        .collect();
    for rec in rd.records() {
        let rec = rec?;
        for (c, v) in columns.iter_mut().zip(rec.iter()) {
            c.values.push(if v.is_empty() {
                None
            } else {
                Some(
                    v.parse()
                        .map_err(|_| Error::InvalidData(format!("bad number '{v}'")))?,
                )
            });
        }
    }
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(Table { stem, columns })
}

/// Stem `<id>_<n0>_<seedkind>`; `n0` is printed without a fractional part
/// when integral.
pub fn file_stem(id: &str, n0: Option<f64>, seed: &str) -> String {
    let n = match n0 {
        Some(n) if n.fract() == 0.0 => format!("{}", n as i64),
        Some(n) => format!("{n}"),
        None => "n0scan".into(),
    };
    format!("{id}_{n}_{seed}")
}

/// Every field of the reports of a tau sweep, one row per time.
pub fn report_table(stem: impl Into<String>, sweep: &SweepResult) -> Table {
    let reports = sweep.reports();
    let col = |name: &str, unit: &str, f: fn(&EntanglementReport<f64>) -> f64| {
        Column::dense(name, unit, reports.iter().map(f))
    };
    let mut t = Table::new(stem, col("tau", UNIT_TAU, |r| r.tau));
    t.push(col("n_signal", UNIT_ATOMS, |r| r.n_signal));
    t.push(col("n_pump", UNIT_ATOMS, |r| r.n_pump));
    t.push(col("theta0", UNIT_RAD, |r| r.theta0));
    t.push(col("upsilon", UNIT_ONE, |r| r.upsilon));
    t.push(col("correlation_c", UNIT_ONE, |r| r.correlation_c));
    t.push(col("var_xminus_min", UNIT_ONE, |r| r.var_xminus_min));
    t.push(col("theta_xminus", UNIT_RAD, |r| r.theta_xminus));
    t.push(col("insep_ratio", UNIT_ONE, |r| r.insep_ratio));
    t.push(col("theta_insep", UNIT_RAD, |r| r.theta_insep));
    if reports.iter().any(|r| r.stochastic) {
        t.push(col("n_signal_stderr", UNIT_ATOMS, |r| r.n_signal_err));
        t.push(col("n_pump_stderr", UNIT_ATOMS, |r| r.n_pump_err));
        t.push(col("theta0_stderr", UNIT_RAD, |r| r.theta0_err));
        t.push(col("upsilon_stderr", UNIT_ONE, |r| r.upsilon_err));
        t.push(col("correlation_c_stderr", UNIT_ONE, |r| {
            r.correlation_c_err
        }));
        t.push(col("var_xminus_min_stderr", UNIT_ONE, |r| {
            r.var_xminus_min_err
        }));
        t.push(col("insep_ratio_stderr", UNIT_ONE, |r| r.insep_ratio_err));
    }
    t
}

/// Time-optimized measures of a seed or `N0` sweep, one row per point.
pub fn optimized_table(
    stem: impl Into<String>,
    sweep: &SweepResult,
    x_name: &str,
    x_unit: &str,
) -> Table {
    let opt: Vec<_> = sweep.points.iter().map(|p| p.optimized).collect();
    let col = |name: &str, f: fn(&crate::scans::TimeOptimized) -> f64, unit: &str| {
        Column::new(name, unit, opt.iter().map(|o| o.as_ref().map(f)).collect())
    };
    let mut t = Table::new(stem, Column::dense(x_name, x_unit, sweep.xs()));
    t.push(col("upsilon_min", |o| o.upsilon_min, UNIT_ONE));
    t.push(col("tau_upsilon", |o| o.tau_upsilon, UNIT_TAU));
    t.push(col("xminus_min", |o| o.xminus_min, UNIT_ONE));
    t.push(col("tau_xminus", |o| o.tau_xminus, UNIT_TAU));
    t.push(col("insep_min", |o| o.insep_min, UNIT_ONE));
    t.push(col("tau_insep", |o| o.tau_insep, UNIT_TAU));
    if sweep.backend == Backend::Wigner {
        t.push(col("upsilon_min_stderr", |o| o.upsilon_min_err, UNIT_ONE));
        t.push(col("xminus_min_stderr", |o| o.xminus_min_err, UNIT_ONE));
        t.push(col("insep_min_stderr", |o| o.insep_min_err, UNIT_ONE));
    }
    t
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grids {
    pub tau_max: f64,
    pub tau_steps: usize,
    pub theta_steps: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n0_values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub seed_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub wigner_tol: f64,
    pub epsilon_cut: f64,
    pub theta_tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold_tol: Option<f64>,
}

/// Everything needed to interpret and re-run one invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub params: ModelParams<f64>,
    pub backends: Vec<Backend>,
    pub rng_seed: Option<u64>,
    pub trajectories: Option<usize>,
    pub batches: Option<usize>,
    pub grids: Grids,
    pub tolerances: Tolerances,
    pub inferred: InferredVariant,
    pub assumptions: Vec<String>,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
    /// Command-specific summary values.
    #[serde(default)]
    pub results: serde_json::Value,
    /// Resolved invocation, replayed by `rerun`.
    pub invocation: serde_json::Value,
}

impl RunManifest {
    pub fn file_name(stem: &str) -> String {
        format!("{stem}.manifest.json")
    }

    pub fn write(&self, dir: &Path, stem: &str) -> Result<PathBuf> {
        let path = dir.join(Self::file_name(stem));
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        fs::write(&path, s)?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

/// Writes `tables` into `dir` (created if missing) and returns their paths.
pub fn write_tables(dir: &Path, tables: &[Table]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut out = Vec::with_capacity(tables.len());
    for t in tables {
        let path = dir.join(t.file_name());
        let f = fs::File::create(&path)?;
        t.write_csv(std::io::BufWriter::new(f))?;
        out.push(path);
    }
    Ok(out)
}
