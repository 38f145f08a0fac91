//! Fast self-checks: sector solver against the dense oracle, and exact
//! dynamics against the undepleted formulas at short times.

use serde::Serialize;

use crate::analytic::{insep_ud, UndepletedParams};
use crate::error::Result;
use crate::exact::SectorPropagator;
use crate::exact::{
    dense_oracle, evolve_exact, init_coherent_pump, init_coherent_pump_range, moments_exact,
    SectorState,
};
use crate::measures::{entanglement_report, PhaseOptions};
use crate::model::{ModelParams, SeedSpec};

pub const ORACLE_N0: f64 = 4.0;
pub const ORACLE_CUT: usize = 16;
pub const ORACLE_TOL: f64 = 1e-8;
pub const RABI_TOL: f64 = 1e-10;
pub const NORM_TOL: f64 = 1e-10;
pub const POPULATION_REL: f64 = 0.05;
pub const POPULATION_TAU: f64 = 0.004;
pub const EPR_REL: f64 = 0.10;
pub const EPR_TAU: f64 = 0.003;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Worst observed deviation.
    pub value: f64,
    pub bound: f64,
}

impl CheckResult {
    fn new(name: &str, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            passed: value <= bound,
            value,
            bound,
        }
    }
}

/// Largest moment difference between sectors `[0, cut]` and the dense solver
/// with per-mode cutoff `cut`, over `taus`.
pub fn oracle_max_diff(n0: f64, q: f64, cut: usize, taus: &[f64]) -> Result<f64> {
    let p = ModelParams::new(n0, q, SeedSpec::vacuum());
    let state = init_coherent_pump_range(&p, 0, cut)?;
    let states = evolve_exact(&state, &p, taus)?;
    let mut worst = 0.0f64;
    for (s, &t) in states.iter().zip(taus) {
        let dense = dense_oracle(&p, t, cut)?;
        worst = worst.max(moments_exact(s).max_abs_diff(&dense));
    }
    Ok(worst)
}

/// Largest `|pair population - sin^2(sqrt 2 tau)|` for the `n = 2`, `k = 0`
/// ket at `q = 0`.
pub fn rabi_max_diff(taus: &[f64]) -> Result<f64> {
    let p = ModelParams::new(2.0, 0.0, SeedSpec::vacuum());
    let s = SectorState::basis_ket(2, 0)?;
    let states = evolve_exact(&s, &p, taus)?;
    Ok(states
        .iter()
        .zip(taus)
        .map(|(s, &t)| (s.pair_population() - (2f64.sqrt() * t).sin().powi(2)).abs())
        .fold(0.0, f64::max))
}

/// Short-time exact-vs-closed-form deviations at `n0`, vacuum, phase
/// matched: (population, EPR, inseparability) worst relative errors.
pub fn short_time_rel(n0: f64, grid_points: usize) -> Result<(f64, f64, f64)> {
    let p = ModelParams::matched(n0, SeedSpec::vacuum());
    let state = init_coherent_pump(&p, 1e-12)?;
    let prop = SectorPropagator::new(&state, &p)?;
    let up = UndepletedParams::new(n0, 0.0)?;
    let phase = PhaseOptions::default();
    let (mut pop, mut epr, mut ins) = (0.0f64, 0.0f64, 0.0f64);
    for i in 1..=grid_points {
        let t = POPULATION_TAU * i as f64 / grid_points as f64;
        let m = moments_exact(&prop.state_at(t));
        let r = entanglement_report(&m, t, &phase)?;
        let sh = (n0 * t).sinh().powi(2);
        pop = pop.max((r.n_signal - sh).abs() / sh);
        if t <= EPR_TAU + 1e-15 {
            let c = (2.0 * n0 * t).cosh();
            epr = epr.max((r.upsilon - 1.0 / (c * c)).abs() * c * c);
            let ud = insep_ud(&up, t)?;
            ins = ins.max((r.insep_ratio - ud).abs() / ud);
        }
    }
    Ok((pop, epr, ins))
}

/// Worst `|norm - 1|` over a grid for a phase-matched vacuum run.
pub fn norm_drift(n0: f64, taus: &[f64]) -> Result<f64> {
    let p = ModelParams::matched(n0, SeedSpec::vacuum());
    let state = init_coherent_pump(&p, 1e-12)?;
    let n_start = state.norm_sqr();
    Ok(evolve_exact(&state, &p, taus)?
        .iter()
        .map(|s| (s.norm_sqr() - n_start).abs())
        .fold((n_start - 1.0).abs(), f64::max))
}

/// Runs the oracle-equivalence and analytic-limit suites.
pub fn run_suite() -> Result<Vec<CheckResult>> {
    let taus: Vec<f64> = (1..=8).map(|i| 0.15 * i as f64).collect();
    let mut out = vec![CheckResult::new(
        "sectors vs dense oracle (N0 = 4, cutoff 16), max moment difference",
        oracle_max_diff(ORACLE_N0, 0.0, ORACLE_CUT, &taus)?
            .max(oracle_max_diff(ORACLE_N0, ORACLE_N0, ORACLE_CUT, &taus)?),
        ORACLE_TOL,
    )];
    let rabi: Vec<f64> = (0..=40).map(|i| 0.1 * i as f64).collect();
    out.push(CheckResult::new(
        "n = 2 pair population vs sin^2(sqrt(2) tau)",
        rabi_max_diff(&rabi)?,
        RABI_TOL,
    ));
    let (pop, epr, ins) = short_time_rel(175.0, 16)?;
    out.push(CheckResult::new(
        "N0 = 175 population vs sinh^2(N0 tau), relative, tau <= 0.004",
        pop,
        POPULATION_REL,
    ));
    out.push(CheckResult::new(
        "N0 = 175 Upsilon vs cosh^-2(2 N0 tau), relative, tau <= 0.003",
        epr,
        EPR_REL,
    ));
    out.push(CheckResult::new(
        "N0 = 175 inseparability vs 1 - tanh(2 N0 tau), relative, tau <= 0.003",
        ins,
        EPR_REL,
    ));
    let grid: Vec<f64> = (0..=24).map(|i| 0.0005 * i as f64).collect();
    out.push(CheckResult::new(
        "N0 = 175 norm conservation",
        norm_drift(175.0, &grid)?,
        NORM_TOL,
    ));
    Ok(out)
}
