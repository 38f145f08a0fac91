use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;
use spinmix::analytic::{
    anomalous_ud, epr_min_ud, epr_ud, insep_ud, nth_max_fit_ud, nth_max_ud, population_ud,
    tau_min_ud, two_mode_var_ud, validity_advisories, UndepletedParams,
};
use spinmix::exact::{init_coherent_pump, SectorPropagator};
use spinmix::figures::{figure_dataset, FigureOverrides, DEFAULT_THETA_POINTS};
use spinmix::measures::THETA_TOL;
use spinmix::output::{
    file_stem, optimized_table, read_table, report_table, standard_assumptions, write_tables,
    Column, Grids, RunManifest, Table, Tolerances, TOOL, UNIT_ATOMS, UNIT_ONE, UNIT_TAU, VERSION,
};
use spinmix::scans::{
    fit_power_law, nth_threshold, sweep_n0, sweep_seed, sweep_tau_detailed, tau_grid, Backend,
    Threshold, DEFAULT_TAU_STEPS, DEFAULT_THRESHOLD_TOL, SCALING_N0, THRESHOLD_TAU_STEPS,
};
use spinmix::validate::run_suite;
use spinmix::{ModelParams, SeedKind, SeedSpec};

use crate::settings::QChoice;
use crate::{CliError, Command, Context};

type Out<'a> = &'a mut dyn Write;

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

/// Subcommand tokens that, with the settings flags, replay `cmd`.
fn command_args(cmd: &Command) -> Vec<String> {
    let mut a = Vec::new();
    let mut opt = |k: &str, v: &Option<Vec<f64>>| {
        if let Some(v) = v {
            a.push(format!("--{k}"));
            a.push(fmt_list(v));
        }
    };
    let name = match cmd {
        Command::Populations => "populations",
        Command::Epr => "epr",
        Command::Squeezing => "squeezing",
        Command::Inseparability => "inseparability",
        Command::ScanSeed { values } => {
            opt("values", values);
            "scan-seed"
        }
        Command::ScanN0 { values } => {
            opt("values", values);
            "scan-n0"
        }
        Command::Threshold {
            values,
            threshold_tol,
        } => {
            opt("values", values);
            opt("threshold-tol", &threshold_tol.map(|t| vec![t]));
            "threshold"
        }
        Command::Fit {
            input,
            values,
            threshold_tol,
        } => {
            opt("values", values);
            opt("threshold-tol", &threshold_tol.map(|t| vec![t]));
            if let Some(p) = input {
                a.push("--input".into());
                a.push(p.display().to_string());
            }
            "fit"
        }
        Command::Analytic => "analytic",
        Command::Figure {
            id,
            n0_values,
            seed_values,
            curve_nbar,
            theta_points,
        } => {
            opt("n0-values", n0_values);
            opt("seed-values", seed_values);
            opt("curve-nbar", curve_nbar);
            if let Some(t) = theta_points {
                a.push("--theta-points".into());
                a.push(t.to_string());
            }
            a.insert(0, id.to_string());
            "figure"
        }
        Command::Validate => "validate",
        Command::Rerun { .. } => "rerun",
    };
    a.insert(0, name.into());
    a
}

fn invocation(cmd: &Command, ctx: &Context) -> serde_json::Value {
    let mut argv = command_args(cmd);
    argv.extend(ctx.settings.to_args());
    if let Some(n) = ctx.dump_trajectories {
        argv.push("--dump-trajectories".into());
        argv.push(n.to_string());
    }
    if ctx.dump_spectra {
        argv.push("--dump-spectra".into());
    }
    if ctx.dump_state {
        argv.push("--dump-state".into());
    }
    json!({ "argv": argv, "settings": ctx.settings })
}

struct ManifestInfo {
    command: String,
    params: ModelParams<f64>,
    backends: Vec<Backend>,
    tau_steps: usize,
    n0_values: Vec<f64>,
    seed_values: Vec<f64>,
    threshold_tol: Option<f64>,
    outputs: Vec<String>,
    warnings: Vec<String>,
    results: serde_json::Value,
}

fn manifest(
    ctx: &Context,
    info: ManifestInfo,
    invocation: serde_json::Value,
    started: Instant,
) -> RunManifest {
    let s = &ctx.settings;
    let stochastic = info.backends.contains(&Backend::Wigner);
    RunManifest {
        tool: TOOL.into(),
        version: VERSION.into(),
        command: info.command,
        params: info.params,
        backends: info.backends,
        rng_seed: stochastic.then_some(s.rng_seed),
        trajectories: stochastic.then_some(s.trajectories),
        batches: stochastic.then_some(s.batches),
        grids: Grids {
            tau_max: s.tau_max,
            tau_steps: info.tau_steps,
            theta_steps: s.theta_steps,
            n0_values: info.n0_values,
            seed_values: info.seed_values,
        },
        tolerances: Tolerances {
            wigner_tol: s.tol,
            epsilon_cut: s.epsilon_cut,
            theta_tol: THETA_TOL,
            threshold_tol: info.threshold_tol,
        },
        inferred: s.inferred,
        assumptions: standard_assumptions(),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        outputs: info.outputs,
        warnings: info.warnings,
        results: info.results,
        invocation,
    }
}

fn finish(
    ctx: &Context,
    stem: &str,
    tables: &[Table],
    extra: Vec<PathBuf>,
    info: ManifestInfo,
    inv: serde_json::Value,
    started: Instant,
    out: Out,
) -> Result<(), CliError> {
    let mut paths = write_tables(&ctx.out, tables)?;
    paths.extend(extra);
    let mut info = info;
    info.outputs = paths
        .iter()
        .filter_map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()))
        .collect();
    let mpath = manifest(ctx, info, inv, started).write(&ctx.out, stem)?;
    for p in paths.iter().chain(std::iter::once(&mpath)) {
        writeln!(out, "wrote {}", p.display())?;
    }
    Ok(())
}

fn warn_all(err: Out, warnings: &[String]) -> Result<(), CliError> {
    for w in warnings {
        writeln!(err, "warning: {w}")?;
    }
    Ok(())
}

pub fn dispatch(cmd: &Command, ctx: &Context, out: Out, err: Out) -> Result<(), CliError> {
    let started = Instant::now();
    let inv = invocation(cmd, ctx);
    match cmd {
        Command::Populations | Command::Epr | Command::Squeezing | Command::Inseparability => {
            tau_command(cmd, ctx, inv, started, out, err)
        }
        Command::ScanSeed { values } => scan_seed(ctx, values.as_deref(), inv, started, out, err),
        Command::ScanN0 { values } => scan_n0(ctx, values.as_deref(), inv, started, out, err),
        Command::Threshold {
            values,
            threshold_tol,
        } => threshold(
            ctx,
            values.as_deref(),
            *threshold_tol,
            inv,
            started,
            out,
            err,
        ),
        Command::Fit {
            input,
            values,
            threshold_tol,
        } => fit(
            ctx,
            input.as_deref(),
            values.as_deref(),
            *threshold_tol,
            inv,
            started,
            out,
            err,
        ),
        Command::Analytic => analytic(ctx, inv, started, out, err),
        Command::Figure {
            id,
            n0_values,
            seed_values,
            curve_nbar,
            theta_points,
        } => {
            let s = &ctx.settings;
            let o = FigureOverrides {
                n0: s.n0,
                n0_values: n0_values.clone(),
                seed_values: seed_values.clone(),
                curve_nbar: curve_nbar.clone(),
                backend: s.backend,
                tau_max: s.tau_max,
                tau_steps: s.tau_steps.unwrap_or(DEFAULT_TAU_STEPS),
                theta_points: theta_points.unwrap_or(DEFAULT_THETA_POINTS),
                scan: s.scan(0),
            };
            let data = figure_dataset(*id, &o)?;
            warn_all(err, &data.warnings)?;
            let paths = data.write(&ctx.out, inv, started.elapsed().as_secs_f64())?;
            for p in paths {
                writeln!(out, "wrote {}", p.display())?;
            }
            Ok(())
        }
        Command::Validate => {
            let checks = run_suite()?;
            let failed = checks.iter().filter(|c| !c.passed).count();
            for c in &checks {
                writeln!(
                    out,
                    "{} {}: {:.3e} (bound {:.1e})",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.bound
                )?;
            }
            if failed > 0 {
                return Err(CliError::Validation(failed));
            }
            Ok(())
        }
        Command::Rerun { .. } => Err(CliError::Usage("nested rerun".into())),
    }
}

fn keep_columns(t: &mut Table, names: &[&str]) {
    t.columns.retain(|c| {
        names
            .iter()
            .any(|n| c.name == *n || c.name.strip_suffix("_stderr") == Some(n))
    });
}

fn tau_command(
    cmd: &Command,
    ctx: &Context,
    inv: serde_json::Value,
    started: Instant,
    out: Out,
    err: Out,
) -> Result<(), CliError> {
    let s = &ctx.settings;
    let params = s.params();
    let backend = s.backend_or_default();
    let steps = s.tau_steps.unwrap_or(DEFAULT_TAU_STEPS);
    let grid = tau_grid(s.tau_max, steps)?;
    let record = ctx.dump_trajectories.unwrap_or(0);
    let (sweep, run) = sweep_tau_detailed(&params, &grid, backend, &s.scan(record))?;
    let (name, cols, quantity, analytic): (
        &str,
        &[&str],
        &str,
        Option<fn(&UndepletedParams<f64>, f64) -> spinmix::Result<f64>>,
    ) = match cmd {
        Command::Populations => (
            "populations",
            &["tau", "n_signal", "n_pump"],
            "n_signal",
            Some(population_ud),
        ),
        Command::Epr => (
            "epr",
            &["tau", "upsilon", "theta0", "correlation_c"],
            "upsilon",
            Some(epr_ud),
        ),
        Command::Squeezing => (
            "squeezing",
            &["tau", "var_xminus_min", "theta_xminus"],
            "var_xminus_min",
            Some(two_mode_var_ud),
        ),
        _ => (
            "inseparability",
            &["tau", "insep_ratio", "theta_insep"],
            "insep_ratio",
            Some(insep_ud),
        ),
    };
    let stem = file_stem(name, Some(s.n0), s.seed.as_str());
    let mut table = report_table(stem.clone(), &sweep);
    keep_columns(&mut table, cols);
    if let (Some(f), false) = (analytic, s.seed == SeedKind::Coherent) {
        let up = UndepletedParams::new(s.n0, params.seed.effective_nbar())?;
        let taus: Vec<f64> = sweep.xs();
        let unit = if quantity == "n_signal" {
            UNIT_ATOMS
        } else {
            UNIT_ONE
        };
        table.push(Column::new(
            format!("{quantity}_analytic"),
            unit,
            taus.iter().map(|&t| f(&up, t).ok()).collect(),
        ));
    }
    warn_all(err, &sweep.warnings)?;
    let reports = sweep.reports();
    let mut summary = serde_json::Map::new();
    if let Some(r) = reports.iter().find(|r| r.tau == spinmix::scans::TAU_PRIME) {
        let v = r.objective_like(quantity);
        writeln!(out, "{quantity}(tau' = {}) = {v}", r.tau)?;
        summary.insert("at_tau_prime".into(), json!(v));
    }
    if quantity != "n_signal" {
        if let Some(r) = reports
            .iter()
            .filter(|r| r.objective_like(quantity).is_finite())
            .min_by(|a, b| {
                a.objective_like(quantity)
                    .total_cmp(&b.objective_like(quantity))
            })
        {
            writeln!(
                out,
                "min {quantity} = {} at tau = {}",
                r.objective_like(quantity),
                r.tau
            )?;
            summary.insert(
                "grid_min".into(),
                json!({ "value": r.objective_like(quantity), "tau": r.tau }),
            );
        }
    }
    let mut extra = Vec::new();
    if let Some(run) = &run {
        if record > 0 {
            let p = ctx.out.join(format!("{stem}_trajectories.csv"));
            fs::create_dir_all(&ctx.out)?;
            run.write_trajectory_csv(std::io::BufWriter::new(fs::File::create(&p)?))?;
            extra.push(p);
        }
    }
    if (ctx.dump_spectra || ctx.dump_state) && backend == Backend::Exact {
        fs::create_dir_all(&ctx.out)?;
        let state = init_coherent_pump(&params, s.epsilon_cut)?;
        let prop = SectorPropagator::new(&state, &params)?;
        if ctx.dump_spectra {
            let p = ctx.out.join(format!("{stem}_spectra.csv"));
            prop.write_spectra_csv(std::io::BufWriter::new(fs::File::create(&p)?))?;
            extra.push(p);
        }
        if ctx.dump_state {
            let p = ctx.out.join(format!("{stem}_state.csv"));
            let last = *grid.last().expect("grid has at least two points");
            prop.state_at(last)
                .write_csv(std::io::BufWriter::new(fs::File::create(&p)?))?;
            extra.push(p);
        }
    } else if ctx.dump_spectra || ctx.dump_state {
        writeln!(err, "warning: sector dumps need the exact backend; skipped")?;
    }
    let info = ManifestInfo {
        command: name.into(),
        params,
        backends: vec![backend],
        tau_steps: steps,
        n0_values: Vec::new(),
        seed_values: Vec::new(),
        threshold_tol: None,
        outputs: Vec::new(),
        warnings: sweep.warnings.clone(),
        results: serde_json::Value::Object(summary),
    };
    finish(ctx, &stem, &[table], extra, info, inv, started, out)
}

trait ObjectiveLike {
    fn objective_like(&self, name: &str) -> f64;
}

impl ObjectiveLike for spinmix::measures::EntanglementReport<f64> {
    fn objective_like(&self, name: &str) -> f64 {
        match name {
            "n_signal" => self.n_signal,
            "upsilon" => self.upsilon,
            "var_xminus_min" => self.var_xminus_min,
            _ => self.insep_ratio,
        }
    }
}

fn scan_seed(
    ctx: &Context,
    values: Option<&[f64]>,
    inv: serde_json::Value,
    started: Instant,
    out: Out,
    err: Out,
) -> Result<(), CliError> {
    let s = &ctx.settings;
    let kind = match s.seed {
        SeedKind::Coherent => SeedKind::Coherent,
        _ => SeedKind::Thermal,
    };
    let values = values
        .map(<[f64]>::to_vec)
        .unwrap_or_else(spinmix::figures::default_seed_values);
    let steps = s.tau_steps.unwrap_or(DEFAULT_TAU_STEPS);
    let grid = tau_grid(s.tau_max, steps)?;
    let backend = s.backend.unwrap_or(Backend::default_for(kind));
    let base = ModelParams::new(s.n0, s.q_over_g(s.n0), SeedSpec::vacuum());
    let sweep = sweep_seed(&base, kind, &values, &grid, backend, &s.scan(0))?;
    warn_all(err, &sweep.warnings)?;
    let x_name = if kind == SeedKind::Coherent {
        "alpha_sq"
    } else {
        "nbar_th"
    };
    let stem = file_stem("scan-seed", Some(s.n0), kind.as_str());
    let mut table = optimized_table(stem.clone(), &sweep, x_name, UNIT_ATOMS);
    if kind == SeedKind::Thermal {
        table.push(Column::new(
            "upsilon_min_analytic",
            UNIT_ONE,
            values
                .iter()
                .map(|&v| {
                    UndepletedParams::new(s.n0, v)
                        .and_then(|p| epr_min_ud(&p))
                        .ok()
                })
                .collect(),
        ));
    }
    for p in &sweep.points {
        if let Some(o) = p.optimized {
            writeln!(
                out,
                "{x_name} = {}: upsilon_min = {} xminus_min = {} insep_min = {}",
                p.x, o.upsilon_min, o.xminus_min, o.insep_min
            )?;
        }
    }
    let info = ManifestInfo {
        command: "scan-seed".into(),
        params: sweep.params,
        backends: vec![backend],
        tau_steps: steps,
        n0_values: Vec::new(),
        seed_values: values,
        threshold_tol: None,
        outputs: Vec::new(),
        warnings: sweep.warnings.clone(),
        results: serde_json::Value::Null,
    };
    finish(ctx, &stem, &[table], Vec::new(), info, inv, started, out)
}

fn scan_n0(
    ctx: &Context,
    values: Option<&[f64]>,
    inv: serde_json::Value,
    started: Instant,
    out: Out,
    err: Out,
) -> Result<(), CliError> {
    let s = &ctx.settings;
    let values = values
        .map(<[f64]>::to_vec)
        .unwrap_or_else(|| SCALING_N0.to_vec());
    let steps = s.tau_steps.unwrap_or(DEFAULT_TAU_STEPS);
    let grid = tau_grid(s.tau_max, steps)?;
    let backend = s.backend_or_default();
    let matched = s.q == QChoice::Matched;
    let sweep = sweep_n0(&s.params(), matched, &values, &grid, backend, &s.scan(0))?;
    warn_all(err, &sweep.warnings)?;
    let stem = file_stem("scan-n0", None, s.seed.as_str());
    let table = optimized_table(stem.clone(), &sweep, "n0", UNIT_ATOMS);
    for p in &sweep.points {
        if let Some(o) = p.optimized {
            writeln!(
                out,
                "N0 = {}: upsilon_min = {} xminus_min = {} insep_min = {}",
                p.x, o.upsilon_min, o.xminus_min, o.insep_min
            )?;
        }
    }
    let info = ManifestInfo {
        command: "scan-n0".into(),
        params: sweep.params,
        backends: vec![backend],
        tau_steps: steps,
        n0_values: values,
        seed_values: Vec::new(),
        threshold_tol: None,
        outputs: Vec::new(),
        warnings: sweep.warnings.clone(),
        results: serde_json::Value::Null,
    };
    finish(ctx, &stem, &[table], Vec::new(), info, inv, started, out)
}

fn thresholds(
    ctx: &Context,
    n0s: &[f64],
    tol: f64,
    backend: Backend,
    steps: usize,
) -> Result<Vec<Threshold>, CliError> {
    let s = &ctx.settings;
    let grid = tau_grid(s.tau_max, steps)?;
    n0s.iter()
        .map(|&n0| {
            let base = ModelParams::new(n0, s.q_over_g(n0), SeedSpec::vacuum());
            Ok(nth_threshold(&base, tol, &grid, backend, &s.scan(0))?)
        })
        .collect()
}

fn threshold_table(stem: &str, th: &[Threshold]) -> Table {
    let mut t = Table::new(
        stem,
        Column::dense("n0", UNIT_ATOMS, th.iter().map(|t| t.n0)),
    );
    t.push(Column::dense(
        "nbar_threshold",
        UNIT_ATOMS,
        th.iter().map(|t| t.nbar),
    ));
    t.push(Column::dense(
        "bracket_lo",
        UNIT_ATOMS,
        th.iter().map(|t| t.bracket.0),
    ));
    t.push(Column::dense(
        "bracket_hi",
        UNIT_ATOMS,
        th.iter().map(|t| t.bracket.1),
    ));
    t
}

fn threshold(
    ctx: &Context,
    values: Option<&[f64]>,
    tol: Option<f64>,
    inv: serde_json::Value,
    started: Instant,
    out: Out,
    err: Out,
) -> Result<(), CliError> {
    let s = &ctx.settings;
    let n0s = values.map(<[f64]>::to_vec).unwrap_or_else(|| vec![s.n0]);
    let tol = tol.unwrap_or(DEFAULT_THRESHOLD_TOL);
    let backend = s.backend.unwrap_or(Backend::Wigner);
    let steps = s.tau_steps.unwrap_or(THRESHOLD_TAU_STEPS);
    let th = thresholds(ctx, &n0s, tol, backend, steps)?;
    let single = if n0s.len() == 1 { Some(n0s[0]) } else { None };
    let stem = file_stem("threshold", single, "thermal");
    let warnings: Vec<String> = th
        .iter()
        .flat_map(|t| {
            t.warnings
                .iter()
                .map(move |w| format!("N0 = {}: {w}", t.n0))
        })
        .collect();
    warn_all(err, &warnings)?;
    for t in &th {
        writeln!(
            out,
            "N0 = {}: nbar_threshold = {} (bracket [{}, {}])",
            t.n0, t.nbar, t.bracket.0, t.bracket.1
        )?;
    }
    let info = ManifestInfo {
        command: "threshold".into(),
        params: ModelParams::new(n0s[0], s.q_over_g(n0s[0]), SeedSpec::thermal(0.0)),
        backends: vec![backend],
        tau_steps: steps,
        n0_values: n0s.clone(),
        seed_values: Vec::new(),
        threshold_tol: Some(tol),
        outputs: Vec::new(),
        warnings,
        results: json!(th),
    };
    finish(
        ctx,
        &stem,
        &[threshold_table(&stem, &th)],
        Vec::new(),
        info,
        inv,
        started,
        out,
    )
}

#[allow(clippy::too_many_arguments)]
fn fit(
    ctx: &Context,
    input: Option<&Path>,
    values: Option<&[f64]>,
    tol: Option<f64>,
    inv: serde_json::Value,
    started: Instant,
    out: Out,
    err: Out,
) -> Result<(), CliError> {
    let s = &ctx.settings;
    let tol = tol.unwrap_or(DEFAULT_THRESHOLD_TOL);
    let backend = s.backend.unwrap_or(Backend::Wigner);
    let steps = s.tau_steps.unwrap_or(THRESHOLD_TAU_STEPS);
    let (points, backends, warnings) = match input {
        Some(p) => {
            let t = read_table(p)?;
            let col = |n: &str| {
                t.column(n)
                    .ok_or_else(|| CliError::Usage(format!("{} has no column '{n}'", p.display())))
            };
            let xs = col("n0")?;
            let ys = col("nbar_threshold")?;
            let pts = xs
                .values
                .iter()
                .zip(&ys.values)
                .map(|(x, y)| match (x, y) {
                    (Some(x), Some(y)) => Ok((*x, *y)),
                    _ => Err(CliError::Run(spinmix::Error::InvalidData(
                        "empty cell in fit input".into(),
                    ))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            (pts, Vec::new(), Vec::new())
        }
        None => {
            let n0s = values
                .map(<[f64]>::to_vec)
                .unwrap_or_else(|| SCALING_N0.to_vec());
            let th = thresholds(ctx, &n0s, tol, backend, steps)?;
            let w = th.iter().flat_map(|t| t.warnings.clone()).collect();
            (
                th.iter().map(|t| (t.n0, t.nbar)).collect(),
                vec![backend],
                w,
            )
        }
    };
    warn_all(err, &warnings)?;
    let f = fit_power_law(&points)?;
    writeln!(
        out,
        "nbar_max = {} * N0^{} (rms log residual {}, N0 in [{}, {}])",
        f.prefactor, f.exponent, f.residual, f.range.0, f.range.1
    )?;
    let stem = file_stem("fit", None, "thermal");
    let mut t = Table::new(
        stem.clone(),
        Column::dense("n0", UNIT_ATOMS, points.iter().map(|p| p.0)),
    );
    t.push(Column::dense(
        "nbar_threshold",
        UNIT_ATOMS,
        points.iter().map(|p| p.1),
    ));
    t.push(Column::dense(
        "nbar_fit",
        UNIT_ATOMS,
        points.iter().map(|p| f.eval(p.0)),
    ));
    if backends.contains(&Backend::Analytic) || input.is_none() {
        t.push(Column::dense(
            "nbar_fit_analytic_law",
            UNIT_ATOMS,
            points.iter().map(|p| nth_max_fit_ud(p.0)),
        ));
    }
    let info = ManifestInfo {
        command: "fit".into(),
        params: ModelParams::matched(points[0].0, SeedSpec::thermal(0.0)),
        backends,
        tau_steps: steps,
        n0_values: points.iter().map(|p| p.0).collect(),
        seed_values: Vec::new(),
        threshold_tol: Some(tol),
        outputs: Vec::new(),
        warnings,
        results: json!(f),
    };
    finish(ctx, &stem, &[t], Vec::new(), info, inv, started, out)
}

fn analytic(
    ctx: &Context,
    inv: serde_json::Value,
    started: Instant,
    out: Out,
    err: Out,
) -> Result<(), CliError> {
    let s = &ctx.settings;
    if s.seed == SeedKind::Coherent {
        return Err(CliError::Usage(
            "analytic formulas cover vacuum and thermal seeds only".into(),
        ));
    }
    let params = s.params();
    let up = UndepletedParams::new(s.n0, params.seed.effective_nbar())?;
    let steps = s.tau_steps.unwrap_or(DEFAULT_TAU_STEPS);
    let grid = tau_grid(s.tau_max, steps)?;
    let stem = file_stem("analytic", Some(s.n0), s.seed.as_str());
    let col = |name: &str, unit: &str, f: &dyn Fn(f64) -> spinmix::Result<f64>| {
        Column::new(name, unit, grid.iter().map(|&t| f(t).ok()).collect())
    };
    let mut t = Table::new(
        stem.clone(),
        Column::dense("tau", UNIT_TAU, grid.iter().copied()),
    );
    t.push(col("n_signal", UNIT_ATOMS, &|x| population_ud(&up, x)));
    t.push(col("anomalous_im", UNIT_ATOMS, &|x| {
        anomalous_ud(&up, x).map(|c| c.im)
    }));
    t.push(col("upsilon", UNIT_ONE, &|x| epr_ud(&up, x)));
    t.push(col("var_xminus_min", UNIT_ONE, &|x| {
        two_mode_var_ud(&up, x)
    }));
    t.push(col("insep_ratio", UNIT_ONE, &|x| insep_ud(&up, x)));
    let mut warnings = validity_advisories(&up, s.tau_max);
    let mut results = serde_json::Map::new();
    match (epr_min_ud(&up), tau_min_ud(&up)) {
        (Ok(v), Ok(tm)) => {
            writeln!(out, "upsilon_min = {v} at tau_min = {tm}")?;
            results.insert("upsilon_min".into(), json!(v));
            results.insert("tau_min".into(), json!(tm));
        }
        (Err(e), _) | (_, Err(e)) => warnings.push(e.to_string()),
    }
    match nth_max_ud(s.n0, 1e-9) {
        Ok(v) => {
            writeln!(out, "nbar_max = {v} (fit law {})", nth_max_fit_ud(s.n0))?;
            results.insert("nbar_max".into(), json!(v));
        }
        Err(e) => warnings.push(e.to_string()),
    }
    warn_all(err, &warnings)?;
    let info = ManifestInfo {
        command: "analytic".into(),
        params,
        backends: vec![Backend::Analytic],
        tau_steps: steps,
        n0_values: Vec::new(),
        seed_values: Vec::new(),
        threshold_tol: None,
        outputs: Vec::new(),
        warnings,
        results: serde_json::Value::Object(results),
    };
    finish(ctx, &stem, &[t], Vec::new(), info, inv, started, out)
}

/// Replays a manifest's recorded invocation into `out_flag` (default: the
/// manifest's directory).
pub fn rerun(path: &Path, out_flag: Option<&Path>, out: Out, err: Out) -> Result<(), CliError> {
    let m = RunManifest::read(path)
        .map_err(|e| CliError::Usage(format!("manifest {}: {e}", path.display())))?;
    let argv: Vec<String> = m
        .invocation
        .get("argv")
        .and_then(|v| serde_json::from_value(v.clone()).ok())
        .ok_or_else(|| {
            CliError::Usage(format!("manifest {} has no recorded argv", path.display()))
        })?;
    let dir = match out_flag {
        Some(d) => d.to_path_buf(),
        None => path.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let mut full = vec!["spinmix".to_string()];
    full.extend(argv);
    full.push("--out".into());
    full.push(dir.display().to_string());
    match crate::run_with(full, out, err) {
        0 => Ok(()),
        code => Err(CliError::Relayed(code)),
    }
}
