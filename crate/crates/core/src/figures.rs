//! Datasets behind each reference figure: CSV tables plus a run manifest.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analytic::{epr_min_ud, epr_ud, population_ud, UndepletedParams};
use crate::error::{Error, Result};
use crate::measures::{Objective, THETA_TOL};
use crate::model::{ModelParams, SeedKind, SeedSpec};
use crate::output::{
    file_stem, standard_assumptions, write_tables, Column, Grids, RunManifest, Table, Tolerances,
    TOOL, UNIT_ATOMS, UNIT_ONE, UNIT_RAD, UNIT_TAU, VERSION,
};
use crate::scans::{
    sweep_n0, sweep_seed, sweep_tau, sweep_theta, tau_grid, Backend, ScanOptions, SweepResult,
    DEFAULT_TAU_MAX, DEFAULT_TAU_STEPS, SCALING_N0, TAU_PRIME,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FigureId {
    F1a,
    F1b,
    F2a,
    F2b,
    F2c,
    F2d,
    F3a,
    F3b,
    F3c,
    F4a,
    F4b,
}

impl FigureId {
    pub const ALL: [FigureId; 11] = [
        FigureId::F1a,
        FigureId::F1b,
        FigureId::F2a,
        FigureId::F2b,
        FigureId::F2c,
        FigureId::F2d,
        FigureId::F3a,
        FigureId::F3b,
        FigureId::F3c,
        FigureId::F4a,
        FigureId::F4b,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FigureId::F1a => "F1a",
            FigureId::F1b => "F1b",
            FigureId::F2a => "F2a",
            FigureId::F2b => "F2b",
            FigureId::F2c => "F2c",
            FigureId::F2d => "F2d",
            FigureId::F3a => "F3a",
            FigureId::F3b => "F3b",
            FigureId::F3c => "F3c",
            FigureId::F4a => "F4a",
            FigureId::F4b => "F4b",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .into_iter()
            .find(|id| id.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown figure id '{s}'")))
    }
}

/// Seed of the thermal and coherent phase curves.
pub const PHASE_CURVE_SEED: f64 = 1.0;
pub const DEFAULT_THETA_POINTS: usize = 181;
pub const DEFAULT_CURVE_N0: [f64; 3] = [150.0, 175.0, 200.0];
pub const DEFAULT_CURVE_NBAR: [f64; 3] = [0.5, 1.0, 1.5];

pub fn default_seed_values() -> Vec<f64> {
    (0..=8).map(|i| 0.25 * i as f64).collect()
}

/// Knobs of a figure dataset. `None` lists fall back to per-figure defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureOverrides {
    /// Headline pump population (single-`N0` panels, grey and coherent curves).
    pub n0: f64,
    /// Curve populations, or the x axis of `N0` panels.
    pub n0_values: Option<Vec<f64>>,
    /// x axis of seed panels (`nbar_th`, and `|alpha|^2` for coherent curves).
    pub seed_values: Option<Vec<f64>>,
    /// Thermal seeds of the per-curve families.
    pub curve_nbar: Option<Vec<f64>>,
    /// Forces one backend for every curve.
    pub backend: Option<Backend>,
    pub tau_max: f64,
    pub tau_steps: usize,
    pub theta_points: usize,
    pub scan: ScanOptions,
}

impl Default for FigureOverrides {
    fn default() -> Self {
        Self {
            n0: 175.0,
            n0_values: None,
            seed_values: None,
            curve_nbar: None,
            backend: None,
            tau_max: DEFAULT_TAU_MAX,
            tau_steps: DEFAULT_TAU_STEPS,
            theta_points: DEFAULT_THETA_POINTS,
            scan: ScanOptions::default(),
        }
    }
}

impl FigureOverrides {
    fn backend_for(&self, kind: SeedKind) -> Backend {
        self.backend.unwrap_or(Backend::default_for(kind))
    }

    fn curve_n0(&self) -> Vec<f64> {
        self.n0_values
            .clone()
            .unwrap_or_else(|| DEFAULT_CURVE_N0.to_vec())
    }

    fn axis_n0(&self) -> Vec<f64> {
        self.n0_values
            .clone()
            .unwrap_or_else(|| SCALING_N0.to_vec())
    }

    fn seeds(&self) -> Vec<f64> {
        self.seed_values.clone().unwrap_or_else(default_seed_values)
    }

    fn nbars(&self) -> Vec<f64> {
        self.curve_nbar
            .clone()
            .unwrap_or_else(|| DEFAULT_CURVE_NBAR.to_vec())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureData {
    pub id: FigureId,
    pub tables: Vec<Table>,
    pub backends: Vec<Backend>,
    pub params: ModelParams<f64>,
    pub overrides: FigureOverrides,
    pub warnings: Vec<String>,
}

impl FigureData {
    pub fn manifest(&self, invocation: serde_json::Value, wall_clock_seconds: f64) -> RunManifest {
        let o = &self.overrides;
        let stochastic = self.backends.contains(&Backend::Wigner);
        RunManifest {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: format!("figure {}", self.id),
            params: self.params,
            backends: self.backends.clone(),
            rng_seed: stochastic.then_some(o.scan.rng_seed),
            trajectories: stochastic.then_some(o.scan.trajectories),
            batches: stochastic.then_some(o.scan.batches),
            grids: Grids {
                tau_max: o.tau_max,
                tau_steps: o.tau_steps,
                theta_steps: o.scan.theta_steps,
                n0_values: o.n0_values.clone().unwrap_or_default(),
                seed_values: o.seed_values.clone().unwrap_or_default(),
            },
            tolerances: Tolerances {
                wigner_tol: o.scan.tol,
                epsilon_cut: o.scan.epsilon_cut,
                theta_tol: THETA_TOL,
                threshold_tol: None,
            },
            inferred: o.scan.inferred,
            assumptions: standard_assumptions(),
            wall_clock_seconds,
            outputs: self.tables.iter().map(Table::file_name).collect(),
            warnings: self.warnings.clone(),
            results: serde_json::Value::Null,
            invocation,
        }
    }

    /// Writes the tables and `<id>.manifest.json` into `dir`.
    pub fn write(
        &self,
        dir: &Path,
        invocation: serde_json::Value,
        wall_clock_seconds: f64,
    ) -> Result<Vec<PathBuf>> {
        let mut paths = write_tables(dir, &self.tables)?;
        paths.push(
            self.manifest(invocation, wall_clock_seconds)
                .write(dir, self.id.as_str())?,
        );
        Ok(paths)
    }
}

fn label(v: f64) -> String {
    format!("{v}")
}

struct Builder<'a> {
    o: &'a FigureOverrides,
    grid: Vec<f64>,
    tables: Vec<Table>,
    backends: Vec<Backend>,
    warnings: Vec<String>,
}

impl<'a> Builder<'a> {
    fn note(&mut self, backend: Backend, warnings: &[String], curve: &str) {
        if !self.backends.contains(&backend) {
            self.backends.push(backend);
        }
        self.warnings
            .extend(warnings.iter().map(|w| format!("{curve}: {w}")));
    }

    fn table(&mut self, stem: String, x: impl FnOnce() -> Column) -> &mut Table {
        if let Some(i) = self.tables.iter().position(|t| t.stem == stem) {
            return &mut self.tables[i];
        }
        self.tables.push(Table::new(stem, x()));
        self.tables.last_mut().expect("just pushed")
    }

    fn tau_x(&self) -> Column {
        Column::dense("tau", UNIT_TAU, self.grid.iter().copied())
    }

    fn tau_curve(&mut self, params: &ModelParams<f64>, curve: &str) -> Result<SweepResult> {
        let backend = self.o.backend_for(params.seed.kind);
        let s = sweep_tau(params, &self.grid, backend, &self.o.scan)?;
        self.note(backend, &s.warnings, curve);
        Ok(s)
    }

    /// Adds `quantity` (and its error when stochastic) of a tau sweep.
    fn push_tau(
        &mut self,
        stem: String,
        s: &SweepResult,
        name: &str,
        unit: &str,
        f: fn(&crate::measures::EntanglementReport<f64>, f64) -> (f64, f64),
    ) {
        let n0 = s.params.n0_mean;
        let x = self.tau_x();
        let t = self.table(stem, || x);
        let (v, e): (Vec<_>, Vec<_>) = s.points.iter().map(|p| f(&p.report, n0)).unzip();
        let stochastic = s.backend == Backend::Wigner;
        t.push(Column::new(name, unit, v.into_iter().map(Some).collect()));
        if stochastic {
            t.push(Column::new(
                format!("{name}_stderr"),
                unit,
                e.into_iter().map(Some).collect(),
            ));
        }
    }

    fn push_analytic_tau(
        &mut self,
        stem: String,
        name: &str,
        up: &UndepletedParams<f64>,
        f: fn(&UndepletedParams<f64>, f64) -> Result<f64>,
        scale: f64,
    ) {
        let vals = self
            .grid
            .iter()
            .map(|&t| f(up, t).ok().map(|v| v / scale))
            .collect();
        let x = self.tau_x();
        self.table(stem, || x)
            .push(Column::new(name, UNIT_ONE, vals));
    }
}

fn population(r: &crate::measures::EntanglementReport<f64>, n0: f64) -> (f64, f64) {
    (r.n_signal / n0, r.n_signal_err / n0)
}

fn upsilon(r: &crate::measures::EntanglementReport<f64>, _: f64) -> (f64, f64) {
    (r.upsilon, r.upsilon_err)
}

fn theta0(r: &crate::measures::EntanglementReport<f64>, _: f64) -> (f64, f64) {
    (r.theta0, r.theta0_err)
}

fn objective_for(id: FigureId) -> Objective {
    match id {
        FigureId::F3b | FigureId::F3c => Objective::TwoModeMinus,
        FigureId::F4a | FigureId::F4b => Objective::Insep,
        _ => Objective::Epr,
    }
}

fn objective_name(o: Objective) -> &'static str {
    match o {
        Objective::Epr => "upsilon_min",
        Objective::TwoModeMinus => "xminus_min",
        Objective::Insep => "insep_min",
    }
}

fn epr_min_closed(n0: f64, nbar: f64) -> Option<f64> {
    UndepletedParams::new(n0, nbar)
        .and_then(|p| epr_min_ud(&p))
        .ok()
}

/// Builds the dataset of figure `id`.
pub fn figure_dataset(id: FigureId, o: &FigureOverrides) -> Result<FigureData> {
    let mut b = Builder {
        o,
        grid: tau_grid(o.tau_max, o.tau_steps)?,
        tables: Vec::new(),
        backends: Vec::new(),
        warnings: Vec::new(),
    };
    let headline = ModelParams::matched(o.n0, SeedSpec::vacuum());
    headline.validate()?;
    let sid = id.as_str();
    match id {
        FigureId::F1a | FigureId::F2a => {
            for &n0 in &b.o.curve_n0() {
                let p = ModelParams::matched(n0, SeedSpec::vacuum());
                let stem = file_stem(sid, Some(n0), "vacuum");
                let s = b.tau_curve(&p, &format!("N0 = {n0} matched"))?;
                let up = UndepletedParams::new(n0, 0.0)?;
                if id == FigureId::F1a {
                    b.push_tau(
                        stem.clone(),
                        &s,
                        "n_signal_over_n0_matched",
                        UNIT_ONE,
                        population,
                    );
                    b.push_analytic_tau(
                        stem,
                        "n_signal_over_n0_matched_analytic",
                        &up,
                        population_ud,
                        n0,
                    );
                } else {
                    b.push_tau(stem.clone(), &s, "upsilon_matched", UNIT_ONE, upsilon);
                    b.push_tau(stem.clone(), &s, "theta0_matched", UNIT_RAD, theta0);
                    b.push_analytic_tau(stem, "upsilon_matched_analytic", &up, epr_ud, 1.0);
                }
            }
            let p = ModelParams::new(o.n0, 0.0, SeedSpec::vacuum());
            let stem = file_stem(sid, Some(o.n0), "vacuum");
            let s = b.tau_curve(&p, &format!("N0 = {} q = 0", o.n0))?;
            if id == FigureId::F1a {
                b.push_tau(stem, &s, "n_signal_over_n0_q0", UNIT_ONE, population);
            } else {
                b.push_tau(stem.clone(), &s, "upsilon_q0", UNIT_ONE, upsilon);
                b.push_tau(stem, &s, "theta0_q0", UNIT_RAD, theta0);
            }
        }
        FigureId::F1b | FigureId::F2b => {
            let stem = file_stem(sid, Some(o.n0), "thermal");
            for nbar in b.o.nbars() {
                let p = ModelParams::matched(o.n0, SeedSpec::thermal(nbar));
                let s = b.tau_curve(&p, &format!("nbar = {nbar}"))?;
                let up = UndepletedParams::new(o.n0, nbar)?;
                let l = label(nbar);
                if id == FigureId::F1b {
                    b.push_tau(
                        stem.clone(),
                        &s,
                        &format!("n_signal_over_n0_nbar{l}"),
                        UNIT_ONE,
                        population,
                    );
                    b.push_analytic_tau(
                        stem.clone(),
                        &format!("n_signal_over_n0_nbar{l}_analytic"),
                        &up,
                        population_ud,
                        o.n0,
                    );
                } else {
                    b.push_tau(
                        stem.clone(),
                        &s,
                        &format!("upsilon_nbar{l}"),
                        UNIT_ONE,
                        upsilon,
                    );
                    b.push_analytic_tau(
                        stem.clone(),
                        &format!("upsilon_nbar{l}_analytic"),
                        &up,
                        epr_ud,
                        1.0,
                    );
                }
            }
        }
        FigureId::F2c | FigureId::F3b | FigureId::F4a => {
            let obj = objective_for(id);
            let name = objective_name(obj);
            let seeds = b.o.seeds();
            let families =
                b.o.curve_n0()
                    .into_iter()
                    .map(|n0| (n0, SeedKind::Thermal))
                    .chain(std::iter::once((o.n0, SeedKind::Coherent)));
            for (n0, kind) in families {
                let base = ModelParams::matched(n0, SeedSpec::vacuum());
                let backend = b.o.backend_for(kind);
                let s = sweep_seed(&base, kind, &seeds, &b.grid, backend, &b.o.scan)?;
                b.note(backend, &s.warnings, &format!("N0 = {n0} {kind}"));
                let x_name = if kind == SeedKind::Coherent {
                    "alpha_sq"
                } else {
                    "nbar_th"
                };
                let mut t = Table::new(
                    file_stem(sid, Some(n0), kind.as_str()),
                    Column::dense(x_name, UNIT_ATOMS, s.xs()),
                );
                let opt: Vec<_> = s
                    .points
                    .iter()
                    .map(|p| p.optimized.expect("seed sweeps optimize"))
                    .collect();
                t.push(Column::dense(
                    name,
                    UNIT_ONE,
                    opt.iter().map(|v| v.value(obj)),
                ));
                if backend == Backend::Wigner {
                    t.push(Column::dense(
                        format!("{name}_stderr"),
                        UNIT_ONE,
                        opt.iter().map(|v| v.err(obj)),
                    ));
                }
                let tau_at = |v: &crate::scans::TimeOptimized| match obj {
                    Objective::Epr => v.tau_upsilon,
                    Objective::TwoModeMinus => v.tau_xminus,
                    Objective::Insep => v.tau_insep,
                };
                t.push(Column::dense(
                    "tau_at_min",
                    UNIT_TAU,
                    opt.iter().map(tau_at),
                ));
                if id == FigureId::F2c && kind == SeedKind::Thermal {
                    t.push(Column::new(
                        format!("{name}_analytic"),
                        UNIT_ONE,
                        seeds.iter().map(|&v| epr_min_closed(n0, v)).collect(),
                    ));
                }
                b.tables.push(t);
            }
        }
        FigureId::F2d | FigureId::F3c | FigureId::F4b => {
            let obj = objective_for(id);
            let name = objective_name(obj);
            let n0s = b.o.axis_n0();
            let stem = file_stem(sid, None, "thermal");
            let x = Column::dense("n0", UNIT_ATOMS, n0s.iter().copied());
            b.table(stem.clone(), || x);
            for nbar in b.o.nbars() {
                let base = ModelParams::matched(o.n0, SeedSpec::thermal(nbar));
                let backend = b.o.backend_for(SeedKind::Thermal);
                let s = sweep_n0(&base, true, &n0s, &b.grid, backend, &b.o.scan)?;
                b.note(backend, &s.warnings, &format!("nbar = {nbar}"));
                let l = label(nbar);
                let opt: Vec<_> = s
                    .points
                    .iter()
                    .map(|p| p.optimized.expect("N0 sweeps optimize"))
                    .collect();
                let mut cols = vec![Column::dense(
                    format!("{name}_nbar{l}"),
                    UNIT_ONE,
                    opt.iter().map(|v| v.value(obj)),
                )];
                if backend == Backend::Wigner {
                    cols.push(Column::dense(
                        format!("{name}_nbar{l}_stderr"),
                        UNIT_ONE,
                        opt.iter().map(|v| v.err(obj)),
                    ));
                }
                if id == FigureId::F2d {
                    cols.push(Column::new(
                        format!("{name}_nbar{l}_analytic"),
                        UNIT_ONE,
                        n0s.iter().map(|&n0| epr_min_closed(n0, nbar)).collect(),
                    ));
                }
                let x = Column::dense("n0", UNIT_ATOMS, n0s.iter().copied());
                let t = b.table(stem.clone(), || x);
                for c in cols {
                    t.push(c);
                }
            }
        }
        FigureId::F3a => {
            let npts = o.theta_points.max(2);
            let half = std::f64::consts::FRAC_PI_2;
            let offsets: Vec<f64> = (0..npts)
                .map(|i| -half + 2.0 * half * i as f64 / (npts - 1) as f64)
                .collect();
            let seeds = [
                SeedSpec::vacuum(),
                SeedSpec::thermal(PHASE_CURVE_SEED),
                SeedSpec::coherent(PHASE_CURVE_SEED),
            ];
            for seed in seeds {
                let p = ModelParams::matched(o.n0, seed);
                let backend = b.o.backend_for(seed.kind);
                let s = sweep_theta(&p, TAU_PRIME, &offsets, backend, &b.o.scan)?;
                b.note(backend, &s.warnings, seed.kind.as_str());
                let mut t = Table::new(
                    file_stem(sid, Some(o.n0), seed.kind.as_str()),
                    Column::dense("theta_minus_theta0", UNIT_RAD, offsets.iter().copied()),
                );
                t.push(Column::dense(
                    "var_xplus",
                    UNIT_ONE,
                    s.var_plus.iter().copied(),
                ));
                t.push(Column::dense(
                    "var_xminus",
                    UNIT_ONE,
                    s.var_minus.iter().copied(),
                ));
                if !s.var_plus_err.is_empty() {
                    t.push(Column::dense(
                        "var_xplus_stderr",
                        UNIT_ONE,
                        s.var_plus_err.iter().copied(),
                    ));
                    t.push(Column::dense(
                        "var_xminus_stderr",
                        UNIT_ONE,
                        s.var_minus_err.iter().copied(),
                    ));
                }
                b.tables.push(t);
            }
        }
    }
    let Builder {
        tables,
        mut backends,
        warnings,
        ..
    } = b;
    backends.sort_by_key(|k| k.as_str());
    Ok(FigureData {
        id,
        tables,
        backends,
        params: headline,
        overrides: o.clone(),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_parse_case_insensitively() {
        assert_eq!("f2C".parse::<FigureId>().unwrap(), FigureId::F2c);
        assert!("F5a".parse::<FigureId>().is_err());
        for id in FigureId::ALL {
            assert_eq!(id.as_str().parse::<FigureId>().unwrap(), id);
        }
    }
}
