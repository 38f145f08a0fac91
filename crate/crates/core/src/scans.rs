//! Parameter sweeps, thermal thresholds for EPR entanglement and power-law
//! fits of the threshold scaling. Everything here runs in `f64`.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{
    epr_ud, insep_ud, moments_ud, nth_max_ud, population_ud, two_mode_var_ud, validity_advisories,
    UndepletedParams,
};
use crate::error::{Error, Result};
use crate::exact::{init_coherent_pump, moments_exact, SectorPropagator, DEFAULT_EPSILON_CUT};
use crate::measures::{
    attach_jackknife, entanglement_report, jackknife_stderr, optimize_phase, optimize_time,
    two_mode_variance, EntanglementReport, InferredVariant, Objective, PhaseOptions, TwoModeSign,
    DEFAULT_THETA_STEPS, THETA_TOL,
};
use crate::model::{ModelParams, MomentSet, SeedKind, SeedSpec};
use crate::wigner::{
    integrate_ensemble_with, sample_initial, IntegrateOptions, WignerRun, DEFAULT_BATCHES,
    DEFAULT_TOL, SCAN_TRAJECTORIES,
};

/// Measurement time of the reference experiment.
pub const TAU_PRIME: f64 = 0.0073;
pub const DEFAULT_TAU_MAX: f64 = 0.012;
pub const DEFAULT_TAU_STEPS: usize = 600;
/// Coarser grid used inside threshold searches; the time minimum is refined
/// parabolically.
pub const THRESHOLD_TAU_STEPS: usize = 120;
pub const DEFAULT_THRESHOLD_TOL: f64 = 0.02;
/// Pump populations of the scaling fit.
pub const SCALING_N0: [f64; 7] = [100.0, 150.0, 200.0, 250.0, 300.0, 350.0, 400.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Wigner,
    Analytic,
}

impl Backend {
    pub fn as_str(self) -> &'static str {
        match self {
            Backend::Exact => "exact",
            Backend::Wigner => "wigner",
            Backend::Analytic => "analytic",
        }
    }

    /// Backend that handles `kind` by default: exact for vacuum, Wigner otherwise.
    pub fn default_for(kind: SeedKind) -> Self {
        match kind {
            SeedKind::Vacuum => Backend::Exact,
            _ => Backend::Wigner,
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(Backend::Exact),
            "wigner" => Ok(Backend::Wigner),
            "analytic" => Ok(Backend::Analytic),
            other => Err(Error::invalid(format!("unknown backend '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Tau,
    NbarTh,
    N0,
    Theta,
}

/// Numerical settings shared by all sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub trajectories: usize,
    pub rng_seed: u64,
    /// Wigner integrator tolerance.
    pub tol: f64,
    pub batches: usize,
    pub epsilon_cut: f64,
    pub theta_steps: usize,
    pub inferred: InferredVariant,
    /// Attach jackknife errors to Wigner reports.
    pub jackknife: bool,
    /// Leading Wigner trajectories whose histories are kept.
    pub record: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            trajectories: SCAN_TRAJECTORIES,
            rng_seed: 1,
            tol: DEFAULT_TOL,
            batches: DEFAULT_BATCHES,
            epsilon_cut: DEFAULT_EPSILON_CUT,
            theta_steps: DEFAULT_THETA_STEPS,
            inferred: InferredVariant::Optimal,
            jackknife: true,
            record: 0,
        }
    }
}

impl ScanOptions {
    pub fn phase(&self) -> PhaseOptions {
        PhaseOptions {
            steps: self.theta_steps,
            tol: THETA_TOL,
            variant: self.inferred,
        }
    }
}

/// `steps + 1` uniform points on `[0, tau_max]`. When `TAU_PRIME` lies inside
/// the range the nearest point is moved onto it if it is within rounding,
/// otherwise `TAU_PRIME` is inserted.
pub fn tau_grid(tau_max: f64, steps: usize) -> Result<Vec<f64>> {
    if !(tau_max.is_finite() && tau_max > 0.0) {
        return Err(Error::invalid(format!("tau_max = {tau_max} must be > 0")));
    }
    if steps == 0 {
        return Err(Error::invalid("tau grid needs at least one step"));
    }
    let mut grid: Vec<f64> = (0..=steps)
        .map(|i| tau_max * i as f64 / steps as f64)
        .collect();
    if TAU_PRIME <= tau_max {
        let (i, d) = grid
            .iter()
            .enumerate()
            .map(|(i, &g)| (i, (g - TAU_PRIME).abs()))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        if d <= 1e-9 * tau_max {
            grid[i] = TAU_PRIME;
        } else {
            let at = grid.partition_point(|&g| g < TAU_PRIME);
            grid.insert(at, TAU_PRIME);
        }
    }
    Ok(grid)
}

/// Time-optimized values of the three measures over one `tau` series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeOptimized {
    pub upsilon_min: f64,
    pub upsilon_min_err: f64,
    pub tau_upsilon: f64,
    pub xminus_min: f64,
    pub xminus_min_err: f64,
    pub tau_xminus: f64,
    pub insep_min: f64,
    pub insep_min_err: f64,
    pub tau_insep: f64,
}

impl TimeOptimized {
    pub fn from_reports(reports: &[EntanglementReport<f64>]) -> Result<Self> {
        let e = optimize_time(reports, Objective::Epr)?;
        let x = optimize_time(reports, Objective::TwoModeMinus)?;
        let i = optimize_time(reports, Objective::Insep)?;
        Ok(Self {
            upsilon_min: e.value,
            upsilon_min_err: e.report.upsilon_err,
            tau_upsilon: e.tau,
            xminus_min: x.value,
            xminus_min_err: x.report.var_xminus_min_err,
            tau_xminus: x.tau,
            insep_min: i.value,
            insep_min_err: i.report.insep_ratio_err,
            tau_insep: i.tau,
        })
    }

    pub fn value(&self, objective: Objective) -> f64 {
        match objective {
            Objective::Epr => self.upsilon_min,
            Objective::TwoModeMinus => self.xminus_min,
            Objective::Insep => self.insep_min,
        }
    }

    pub fn err(&self, objective: Objective) -> f64 {
        match objective {
            Objective::Epr => self.upsilon_min_err,
            Objective::TwoModeMinus => self.xminus_min_err,
            Objective::Insep => self.insep_min_err,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub x: f64,
    /// The report at `x` (tau sweeps) or at the EPR time optimum.
    pub report: EntanglementReport<f64>,
    pub optimized: Option<TimeOptimized>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: Axis,
    pub backend: Backend,
    /// Parameters of the sweep (for seed and N0 axes, those of the first point).
    pub params: ModelParams<f64>,
    pub rng_seed: Option<u64>,
    pub trajectories: Option<usize>,
    pub tau_marker: f64,
    pub points: Vec<SweepPoint>,
    pub warnings: Vec<String>,
}

impl SweepResult {
    pub fn xs(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.x).collect()
    }

    pub fn reports(&self) -> Vec<EntanglementReport<f64>> {
        self.points.iter().map(|p| p.report).collect()
    }
}

/// Moments on a time grid, with leave-one-batch-out replicates for Wigner.
#[derive(Debug, Clone)]
pub struct MomentSeries {
    pub grid: Vec<f64>,
    pub centers: Vec<MomentSet<f64>>,
    pub replicates: Vec<Vec<MomentSet<f64>>>,
    pub warnings: Vec<String>,
    pub run: Option<WignerRun<f64>>,
}

fn wigner_flags(params: &ModelParams<f64>) -> Vec<String> {
    match params.seed.kind {
        SeedKind::Coherent => {
            vec!["coherent seed evaluated with the truncated Wigner backend".into()]
        }
        _ => Vec::new(),
    }
}

/// Moments of `params` on `grid` from the chosen backend.
pub fn moment_series(
    params: &ModelParams<f64>,
    grid: &[f64],
    backend: Backend,
    opts: &ScanOptions,
) -> Result<MomentSeries> {
    params.validate()?;
    let mut warnings = Vec::new();
    let (centers, replicates, run) = match backend {
        Backend::Exact => {
            let state = init_coherent_pump(params, opts.epsilon_cut)?;
            crate::exact::check_grid(grid, 0.0)?;
            let centers = if grid.is_empty() {
                Vec::new()
            } else {
                let prop = SectorPropagator::new(&state, params)?;
                grid.par_iter()
                    .map(|&t| moments_exact(&prop.state_at(t)))
                    .collect()
            };
            (centers, Vec::new(), None)
        }
        Backend::Analytic => {
            let up = analytic_params(params)?;
            let centers = grid
                .iter()
                .map(|&t| moments_ud(&up, t))
                .collect::<Result<Vec<_>>>()?;
            if let Some(&last) = grid.last() {
                warnings.extend(validity_advisories(&up, last));
            }
            (centers, Vec::new(), None)
        }
        Backend::Wigner => {
            warnings.extend(wigner_flags(params));
            let ens = sample_initial(params, opts.rng_seed, opts.trajectories)?;
            let iopts = IntegrateOptions {
                tol: opts.tol,
                batches: opts.batches,
                record: opts.record,
            };
            let run = integrate_ensemble_with(&ens, params, grid, &iopts)?;
            warnings.extend(run.warnings.iter().cloned());
            let centers: Vec<MomentSet<f64>> = (0..grid.len()).map(|g| run.moments_at(g)).collect();
            let flagged = centers.iter().filter(|m| !m.warnings.is_empty()).count();
            if flagged > 0 {
                let first = centers
                    .iter()
                    .find(|m| !m.warnings.is_empty())
                    .map(|m| m.warnings[0].clone());
                warnings.push(format!(
                    "{flagged} of {} grid points have fourth-order moments above the relative error bound (first: {})",
                    grid.len(),
                    first.unwrap_or_default()
                ));
            }
            let replicates = if opts.jackknife {
                (0..grid.len()).map(|g| run.replicates_at(g)).collect()
            } else {
                Vec::new()
            };
            (centers, replicates, Some(run))
        }
    };
    Ok(MomentSeries {
        grid: grid.to_vec(),
        centers,
        replicates,
        warnings,
        run,
    })
}

fn analytic_params(params: &ModelParams<f64>) -> Result<UndepletedParams<f64>> {
    match params.seed.kind {
        SeedKind::Coherent => Err(Error::Routing {
            backend: "analytic",
            seed: "coherent",
        }),
        _ => UndepletedParams::new(params.n0_mean, params.seed.effective_nbar()),
    }
}

fn is_domain_error(e: &Error) -> bool {
    matches!(
        e,
        Error::DepletedLocalOscillator(_)
            | Error::DegenerateInference(_)
            | Error::DegenerateVariance(_)
            | Error::CriterionUndefined(_)
            | Error::FormulaBreakdown(_)
    )
}

/// Closed-form report: values from the formulas, phases and correlation from
/// the Gaussian undepleted moments.
fn analytic_report(
    up: &UndepletedParams<f64>,
    m: &MomentSet<f64>,
    tau: f64,
    phase: &PhaseOptions,
) -> Result<EntanglementReport<f64>> {
    let mut r = entanglement_report(m, tau, phase)?;
    r.n_signal = population_ud(up, tau)?;
    r.n_pump = up.n0;
    r.upsilon = epr_ud(up, tau)?;
    r.var_xminus_min = two_mode_var_ud(up, tau)?;
    r.insep_ratio = insep_ud(up, tau)?;
    Ok(r)
}

/// Reports along a series. The series ends at the first time where a measure
/// leaves its domain (empty LO, signal/LO ratio past one, formula breakdown);
/// a warning records where.
pub fn report_series(
    params: &ModelParams<f64>,
    series: &MomentSeries,
    backend: Backend,
    opts: &ScanOptions,
) -> Result<(Vec<EntanglementReport<f64>>, Vec<String>)> {
    let phase = opts.phase();
    let up = match backend {
        Backend::Analytic => Some(analytic_params(params)?),
        _ => None,
    };
    let results: Vec<Result<EntanglementReport<f64>>> = (0..series.grid.len())
        .into_par_iter()
        .map(|g| {
            let tau = series.grid[g];
            let m = &series.centers[g];
            let mut r = match &up {
                Some(up) => analytic_report(up, m, tau, &phase)?,
                None => entanglement_report(m, tau, &phase)?,
            };
            if let Some(reps) = series.replicates.get(g) {
                let rr = reps
                    .iter()
                    .map(|rm| entanglement_report(rm, tau, &phase))
                    .collect::<Result<Vec<_>>>()?;
                attach_jackknife(&mut r, &rr);
            }
            Ok(r)
        })
        .collect();
    let mut reports = Vec::with_capacity(results.len());
    let mut warnings = Vec::new();
    for (g, r) in results.into_iter().enumerate() {
        match r {
            Ok(r) => reports.push(r),
            Err(e) if is_domain_error(&e) => {
                warnings.push(format!(
                    "series truncated at tau = {} after {g} points: {e}",
                    series.grid[g]
                ));
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok((reports, warnings))
}

fn stochastic_meta(backend: Backend, opts: &ScanOptions) -> (Option<u64>, Option<usize>) {
    match backend {
        Backend::Wigner => (Some(opts.rng_seed), Some(opts.trajectories)),
        _ => (None, None),
    }
}

/// Full report at each grid time. An empty grid gives an empty result.
pub fn sweep_tau(
    params: &ModelParams<f64>,
    grid: &[f64],
    backend: Backend,
    opts: &ScanOptions,
) -> Result<SweepResult> {
    Ok(sweep_tau_detailed(params, grid, backend, opts)?.0)
}

/// As [`sweep_tau`], also returning the Wigner run (for trajectory dumps).
pub fn sweep_tau_detailed(
    params: &ModelParams<f64>,
    grid: &[f64],
    backend: Backend,
    opts: &ScanOptions,
) -> Result<(SweepResult, Option<WignerRun<f64>>)> {
    let (rng_seed, trajectories) = stochastic_meta(backend, opts);
    let mut out = SweepResult {
        axis: Axis::Tau,
        backend,
        params: *params,
        rng_seed,
        trajectories,
        tau_marker: TAU_PRIME,
        points: Vec::new(),
        warnings: Vec::new(),
    };
    if grid.is_empty() {
        params.validate()?;
        return Ok((out, None));
    }
    let series = moment_series(params, grid, backend, opts)?;
    let (reports, w) = report_series(params, &series, backend, opts)?;
    out.warnings = series.warnings.clone();
    out.warnings.extend(w);
    out.points = reports
        .into_iter()
        .map(|r| SweepPoint {
            x: r.tau,
            report: r,
            optimized: None,
        })
        .collect();
    Ok((out, series.run))
}

fn optimized_point(
    x: f64,
    params: &ModelParams<f64>,
    grid: &[f64],
    backend: Backend,
    opts: &ScanOptions,
    warnings: &mut Vec<String>,
) -> Result<SweepPoint> {
    let sweep = sweep_tau(params, grid, backend, opts)?;
    warnings.extend(sweep.warnings.iter().map(|w| format!("x = {x}: {w}")));
    let reports = sweep.reports();
    let opt = TimeOptimized::from_reports(&reports)?;
    let best = optimize_time(&reports, Objective::Epr)?;
    Ok(SweepPoint {
        x,
        report: best.report,
        optimized: Some(opt),
    })
}

fn check_increasing(xs: &[f64], what: &str) -> Result<()> {
    if xs.iter().any(|x| !x.is_finite()) || xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid(format!(
            "{what} must be finite and strictly increasing"
        )));
    }
    Ok(())
}

/// Time-optimized measures as a function of the seed strength. `kind`
/// selects thermal (`values` are `nbar_th`) or coherent (`values` are
/// `|alpha|^2`) seeds. All points share `opts.rng_seed`, so Wigner runs use
/// common random numbers.
pub fn sweep_seed(
    base: &ModelParams<f64>,
    kind: SeedKind,
    values: &[f64],
    grid: &[f64],
    backend: Backend,
    opts: &ScanOptions,
) -> Result<SweepResult> {
    check_increasing(values, "seed values")?;
    let make = |v: f64| -> Result<SeedSpec<f64>> {
        match kind {
            SeedKind::Thermal => Ok(SeedSpec::thermal(v)),
            SeedKind::Coherent => Ok(SeedSpec::coherent(v)),
            SeedKind::Vacuum => Err(Error::invalid(
                "seed sweeps need a thermal or coherent seed kind",
            )),
        }
    };
    let (rng_seed, trajectories) = stochastic_meta(backend, opts);
    let mut warnings = Vec::new();
    let mut points = Vec::with_capacity(values.len());
    for &v in values {
        let p = base.with_seed(make(v)?);
        points.push(optimized_point(v, &p, grid, backend, opts, &mut warnings)?);
    }
    let params = base.with_seed(make(values.first().copied().unwrap_or(0.0))?);
    Ok(SweepResult {
        axis: Axis::NbarTh,
        backend,
        params,
        rng_seed,
        trajectories,
        tau_marker: TAU_PRIME,
        points,
        warnings,
    })
}

/// Time-optimized measures as a function of `N0`. With `matched`, `q/g`
/// follows `N0`; otherwise `base.q_over_g` is kept.
pub fn sweep_n0(
    base: &ModelParams<f64>,
    matched: bool,
    n0_values: &[f64],
    grid: &[f64],
    backend: Backend,
    opts: &ScanOptions,
) -> Result<SweepResult> {
    check_increasing(n0_values, "N0 values")?;
    let at = |n0: f64| ModelParams {
        n0_mean: n0,
        q_over_g: if matched { n0 } else { base.q_over_g },
        ..*base
    };
    let (rng_seed, trajectories) = stochastic_meta(backend, opts);
    let mut warnings = Vec::new();
    let mut points = Vec::with_capacity(n0_values.len());
    for &n0 in n0_values {
        points.push(optimized_point(
            n0,
            &at(n0),
            grid,
            backend,
            opts,
            &mut warnings,
        )?);
    }
    Ok(SweepResult {
        axis: Axis::N0,
        backend,
        params: at(n0_values.first().copied().unwrap_or(base.n0_mean)),
        rng_seed,
        trajectories,
        tau_marker: TAU_PRIME,
        points,
        warnings,
    })
}

/// Two-mode variances at one time as functions of `theta - theta0`, where
/// `theta0` is the EPR-optimal phase at that time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaSweep {
    pub axis: Axis,
    pub backend: Backend,
    pub params: ModelParams<f64>,
    pub tau: f64,
    pub theta0: f64,
    pub offsets: Vec<f64>,
    pub var_plus: Vec<f64>,
    pub var_minus: Vec<f64>,
    /// Jackknife errors (empty unless stochastic).
    pub var_plus_err: Vec<f64>,
    pub var_minus_err: Vec<f64>,
    pub warnings: Vec<String>,
}

pub fn sweep_theta(
    params: &ModelParams<f64>,
    tau: f64,
    offsets: &[f64],
    backend: Backend,
    opts: &ScanOptions,
) -> Result<ThetaSweep> {
    check_increasing(offsets, "phase offsets")?;
    let series = moment_series(params, &[tau], backend, opts)?;
    let m = &series.centers[0];
    let theta0 = optimize_phase(m, Objective::Epr, &opts.phase())?.theta;
    let curve = |m: &MomentSet<f64>, sign: TwoModeSign, th0: f64| -> Result<Vec<f64>> {
        offsets
            .iter()
            .map(|&d| two_mode_variance(m, th0 + d, sign))
            .collect()
    };
    let var_plus = curve(m, TwoModeSign::Plus, theta0)?;
    let var_minus = curve(m, TwoModeSign::Minus, theta0)?;
    let (mut var_plus_err, mut var_minus_err) = (Vec::new(), Vec::new());
    if let Some(reps) = series.replicates.first() {
        // each replicate re-optimizes its own reference phase
        let mut rp = Vec::with_capacity(reps.len());
        let mut rm = Vec::with_capacity(reps.len());
        for r in reps {
            let th = optimize_phase(r, Objective::Epr, &opts.phase())?.theta;
            rp.push(curve(r, TwoModeSign::Plus, th)?);
            rm.push(curve(r, TwoModeSign::Minus, th)?);
        }
        let col = |rows: &[Vec<f64>], i: usize| {
            jackknife_stderr(&rows.iter().map(|r| r[i]).collect::<Vec<_>>())
        };
        var_plus_err = (0..offsets.len()).map(|i| col(&rp, i)).collect();
        var_minus_err = (0..offsets.len()).map(|i| col(&rm, i)).collect();
    }
    Ok(ThetaSweep {
        axis: Axis::Theta,
        backend,
        params: *params,
        tau,
        theta0,
        offsets: offsets.to_vec(),
        var_plus,
        var_minus,
        var_plus_err,
        var_minus_err,
        warnings: series.warnings,
    })
}

/// Result of a thermal-threshold search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub n0: f64,
    pub backend: Backend,
    /// `nbar_th` where the time-optimized EPR parameter reaches one.
    pub nbar: f64,
    /// Final bracket `[lo, hi]` with `Upsilon_min(lo) < 1 <= Upsilon_min(hi)`.
    pub bracket: (f64, f64),
    pub tol: f64,
    /// Every evaluation `(nbar, Upsilon_min, stderr)` in search order.
    pub evaluations: Vec<(f64, f64, f64)>,
    pub warnings: Vec<String>,
}

/// Time-optimized EPR parameter of one parameter set on `grid`.
pub fn upsilon_min(
    params: &ModelParams<f64>,
    grid: &[f64],
    backend: Backend,
    opts: &ScanOptions,
) -> Result<(f64, f64, Vec<String>)> {
    time_optimized(params, grid, backend, opts, Objective::Epr)
}

/// Time-optimized `objective` on `grid`: (value, stderr, warnings).
pub fn time_optimized(
    params: &ModelParams<f64>,
    grid: &[f64],
    backend: Backend,
    opts: &ScanOptions,
    objective: Objective,
) -> Result<(f64, f64, Vec<String>)> {
    let sweep = sweep_tau(params, grid, backend, opts)?;
    let best = optimize_time(&sweep.reports(), objective)?;
    Ok((
        best.value,
        best.report.objective_err(objective),
        sweep.warnings,
    ))
}

/// Thermal occupation at which the time-optimized EPR parameter of
/// `base` (seed ignored) reaches one, to absolute tolerance `tol`.
///
/// The analytic backend bisects the closed-form minimum. The Wigner backend
/// brackets by doubling from `nbar = 1`, bisects with every iterate drawing
/// the same normals (`opts.rng_seed`), and interpolates linearly inside the
/// final bracket. Bisection iterates skip jackknife errors.
pub fn nth_threshold(
    base: &ModelParams<f64>,
    tol: f64,
    grid: &[f64],
    backend: Backend,
    opts: &ScanOptions,
) -> Result<Threshold> {
    if !(tol > 0.0) {
        return Err(Error::invalid(format!(
            "threshold tolerance {tol} must be > 0"
        )));
    }
    let n0 = base.n0_mean;
    match backend {
        Backend::Exact => {
            return Err(Error::Routing {
                backend: "exact",
                seed: "thermal",
            })
        }
        Backend::Analytic => {
            let nbar = nth_max_ud(n0, tol).map_err(|e| match e {
                Error::RootNotFound(msg) if msg.contains("no EPR violation") => {
                    let v = UndepletedParams::new(n0, 0.0)
                        .and_then(|p| crate::analytic::epr_min_ud(&p))
                        .unwrap_or(f64::NAN);
                    Error::NoEntanglementAtVacuum(v)
                }
                other => other,
            })?;
            let half = tol / 2.0;
            return Ok(Threshold {
                n0,
                backend,
                nbar,
                bracket: (nbar - half, nbar + half),
                tol,
                evaluations: Vec::new(),
                warnings: Vec::new(),
            });
        }
        Backend::Wigner => {}
    }
    seed_crossing(base, Objective::Epr, 1.0, tol, grid, backend, opts)
}

/// Thermal occupation at which the time-optimized `objective` of `base`
/// (seed ignored) rises through `level`, to absolute tolerance `tol`.
/// Brackets by doubling from `nbar = 1`, then bisects with common random
/// numbers and interpolates linearly inside the final bracket.
pub fn seed_crossing(
    base: &ModelParams<f64>,
    objective: Objective,
    level: f64,
    tol: f64,
    grid: &[f64],
    backend: Backend,
    opts: &ScanOptions,
) -> Result<Threshold> {
    if !(tol > 0.0) {
        return Err(Error::invalid(format!(
            "crossing tolerance {tol} must be > 0"
        )));
    }
    if backend == Backend::Exact {
        return Err(Error::Routing {
            backend: "exact",
            seed: "thermal",
        });
    }
    let n0 = base.n0_mean;
    let iter_opts = ScanOptions {
        jackknife: false,
        record: 0,
        ..*opts
    };
    let mut warnings = Vec::new();
    let mut evaluations = Vec::new();
    let mut eval = |nbar: f64, evaluations: &mut Vec<(f64, f64, f64)>| -> Result<f64> {
        let p = base.with_seed(SeedSpec::thermal(nbar));
        let (v, e, w) = time_optimized(&p, grid, backend, &iter_opts, objective)?;
        warnings.extend(w.into_iter().map(|w| format!("nbar = {nbar}: {w}")));
        evaluations.push((nbar, v, e));
        Ok(v)
    };
    let f0 = eval(0.0, &mut evaluations)?;
    if f0 >= level {
        return Err(match objective {
            Objective::Epr if level == 1.0 => Error::NoEntanglementAtVacuum(f0),
            _ => Error::RootNotFound(format!(
                "{objective:?} minimum {f0} is already above {level} at nbar = 0"
            )),
        });
    }
    let (mut lo, mut flo) = (0.0, f0);
    let mut hi = 1.0;
    let mut fhi = eval(hi, &mut evaluations)?;
    let mut doublings = 0;
    while fhi < level {
        doublings += 1;
        if doublings > 8 {
            return Err(Error::RootNotFound(format!(
                "{objective:?} minimum stays below {level} up to nbar = {hi} at N0 = {n0}"
            )));
        }
        lo = hi;
        flo = fhi;
        hi *= 2.0;
        fhi = eval(hi, &mut evaluations)?;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = eval(mid, &mut evaluations)?;
        if fm < level {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    let nbar = lo + (level - flo) * (hi - lo) / (fhi - flo);
    // errors at the bracket ends from a jackknifed pass
    for e in evaluations.iter_mut().filter(|e| e.0 == lo || e.0 == hi) {
        if opts.jackknife {
            let p = base.with_seed(SeedSpec::thermal(e.0));
            let (_, err, _) = time_optimized(&p, grid, backend, opts, objective)?;
            e.2 = err;
        }
    }
    Ok(Threshold {
        n0,
        backend,
        nbar,
        bracket: (lo, hi),
        tol,
        evaluations,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub prefactor: f64,
    pub exponent: f64,
    /// RMS residual of `ln y` about the fitted line.
    pub residual: f64,
    pub range: (f64, f64),
    pub points: usize,
}

impl PowerLawFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.prefactor * x.powf(self.exponent)
    }
}

/// Least-squares line through `(ln x, ln y)`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    if points.len() < 4 {
        return Err(Error::InvalidData(format!(
            "power-law fit needs at least 4 points, got {}",
            points.len()
        )));
    }
    if let Some(p) = points
        .iter()
        .find(|(x, y)| !(x.is_finite() && y.is_finite() && *x > 0.0 && *y > 0.0))
    {
        return Err(Error::InvalidData(format!(
            "non-positive point ({}, {})",
            p.0, p.1
        )));
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InvalidData(
            "power-law fit needs at least two distinct x".into(),
        ));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let rss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - a - b * x).powi(2))
        .sum();
    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), p| {
            (l.min(p.0), h.max(p.0))
        });
    Ok(PowerLawFit {
        prefactor: a.exp(),
        exponent: b,
        residual: (rss / n).sqrt(),
        range: (lo, hi),
        points: points.len(),
    })
}
