use spinmix::analytic::{epr_min_ud, epr_ud, nth_max_ud, population_ud, UndepletedParams};
use spinmix::figures::{figure_dataset, FigureData, FigureId, FigureOverrides};
use spinmix::output::{report_table, Table};
use spinmix::scans::{
    fit_power_law, nth_threshold, sweep_n0, sweep_seed, sweep_tau, tau_grid, upsilon_min, Backend,
    ScanOptions,
};
use spinmix::{ModelParams, SeedKind, SeedSpec};

fn small_scan() -> ScanOptions {
    ScanOptions {
        trajectories: 200,
        batches: 4,
        ..ScanOptions::default()
    }
}

fn small_overrides() -> FigureOverrides {
    FigureOverrides {
        n0_values: Some(vec![150.0, 200.0]),
        seed_values: Some(vec![0.0, 1.0]),
        curve_nbar: Some(vec![0.5, 1.5]),
        tau_steps: 20,
        theta_points: 7,
        scan: small_scan(),
        ..FigureOverrides::default()
    }
}

fn csvs(d: &FigureData) -> Vec<(String, String)> {
    d.tables
        .iter()
        .map(|t| (t.stem.clone(), t.to_csv_string().unwrap()))
        .collect()
}

fn stem_n0(t: &Table) -> f64 {
    t.stem.split('_').nth(1).unwrap().parse().unwrap()
}

fn close(got: &[Option<f64>], want: impl Iterator<Item = Option<f64>>) {
    for (g, w) in got.iter().zip(want) {
        match (g, w) {
            (Some(g), Some(w)) => assert!((g - w).abs() <= 1e-12 * w.abs().max(1.0), "{g} vs {w}"),
            (None, None) => {}
            other => panic!("mismatch {other:?}"),
        }
    }
}

#[test]
fn every_figure_builds_and_grey_curves_match_closed_forms() {
    let o = small_overrides();
    for id in FigureId::ALL {
        let d = figure_dataset(id, &o).unwrap();
        assert!(!d.tables.is_empty(), "{id}");
        for t in &d.tables {
            assert!(t.columns.len() >= 2, "{}", t.stem);
            assert!(t.stem.starts_with(id.as_str()));
            for c in &t.columns {
                assert_eq!(c.values.len(), t.rows());
            }
        }
        let analytic_cols: usize = d
            .tables
            .iter()
            .map(|t| {
                t.columns
                    .iter()
                    .filter(|c| c.name.ends_with("_analytic"))
                    .count()
            })
            .sum();
        let expects_grey = matches!(
            id,
            FigureId::F1a
                | FigureId::F1b
                | FigureId::F2a
                | FigureId::F2b
                | FigureId::F2c
                | FigureId::F2d
        );
        assert_eq!(analytic_cols > 0, expects_grey, "{id}");

        for t in &d.tables {
            let x: Vec<f64> = t.columns[0].values.iter().map(|v| v.unwrap()).collect();
            for c in t.columns.iter().filter(|c| c.name.ends_with("_analytic")) {
                match id {
                    FigureId::F1a | FigureId::F2a => {
                        let n0 = stem_n0(t);
                        let up = UndepletedParams::new(n0, 0.0).unwrap();
                        if id == FigureId::F1a {
                            close(
                                &c.values,
                                x.iter()
                                    .map(|&tau| population_ud(&up, tau).ok().map(|v| v / n0)),
                            );
                        } else {
                            close(&c.values, x.iter().map(|&tau| epr_ud(&up, tau).ok()));
                        }
                    }
                    FigureId::F1b | FigureId::F2b => {
                        let nbar: f64 = c
                            .name
                            .split("nbar")
                            .nth(1)
                            .unwrap()
                            .trim_end_matches("_analytic")
                            .parse()
                            .unwrap();
                        let up = UndepletedParams::new(o.n0, nbar).unwrap();
                        if id == FigureId::F1b {
                            close(
                                &c.values,
                                x.iter()
                                    .map(|&tau| population_ud(&up, tau).ok().map(|v| v / o.n0)),
                            );
                        } else {
                            close(&c.values, x.iter().map(|&tau| epr_ud(&up, tau).ok()));
                        }
                    }
                    FigureId::F2c => {
                        let n0 = stem_n0(t);
                        close(
                            &c.values,
                            x.iter().map(|&nb| {
                                UndepletedParams::new(n0, nb)
                                    .and_then(|p| epr_min_ud(&p))
                                    .ok()
                            }),
                        );
                    }
                    FigureId::F2d => {
                        let nbar: f64 = c
                            .name
                            .split("nbar")
                            .nth(1)
                            .unwrap()
                            .trim_end_matches("_analytic")
                            .parse()
                            .unwrap();
                        close(
                            &c.values,
                            x.iter().map(|&n0| {
                                UndepletedParams::new(n0, nbar)
                                    .and_then(|p| epr_min_ud(&p))
                                    .ok()
                            }),
                        );
                    }
                    _ => unreachable!(),
                }
            }
        }
    }
}

#[test]
fn figure_datasets_are_deterministic() {
    let o = small_overrides();
    for id in [FigureId::F2b, FigureId::F3a, FigureId::F4b] {
        assert_eq!(
            csvs(&figure_dataset(id, &o).unwrap()),
            csvs(&figure_dataset(id, &o).unwrap()),
            "{id}"
        );
    }
}

#[test]
fn figure_writes_manifest_listing_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = figure_dataset(FigureId::F3a, &small_overrides()).unwrap();
    let paths = d
        .write(dir.path(), serde_json::json!({"argv": []}), 0.5)
        .unwrap();
    let m = spinmix::output::RunManifest::read(&dir.path().join("F3a.manifest.json")).unwrap();
    assert_eq!(m.outputs.len() + 1, paths.len());
    assert_eq!(m.command, "figure F3a");
    // vacuum curve is exact, the seeded ones stochastic
    assert_eq!(m.backends, vec![Backend::Exact, Backend::Wigner]);
}

#[test]
fn tau_sweeps_are_reproducible_and_seed_sensitive() {
    let p = ModelParams::matched(120.0, SeedSpec::thermal(0.5));
    let grid = tau_grid(0.012, 20).unwrap();
    let a = report_table(
        "a",
        &sweep_tau(&p, &grid, Backend::Wigner, &small_scan()).unwrap(),
    );
    let b = report_table(
        "a",
        &sweep_tau(&p, &grid, Backend::Wigner, &small_scan()).unwrap(),
    );
    assert_eq!(a.to_csv_string().unwrap(), b.to_csv_string().unwrap());
    let other = ScanOptions {
        rng_seed: 99,
        ..small_scan()
    };
    let c = report_table("a", &sweep_tau(&p, &grid, Backend::Wigner, &other).unwrap());
    assert_ne!(a.to_csv_string().unwrap(), c.to_csv_string().unwrap());
}

#[test]
fn seed_and_n0_sweeps_keep_axis_order() {
    let grid = tau_grid(0.012, 20).unwrap();
    let base = ModelParams::matched(100.0, SeedSpec::vacuum());
    let s = sweep_seed(
        &base,
        SeedKind::Thermal,
        &[0.0, 0.5, 1.0],
        &grid,
        Backend::Analytic,
        &small_scan(),
    )
    .unwrap();
    assert_eq!(s.xs(), vec![0.0, 0.5, 1.0]);
    let ups: Vec<f64> = s
        .points
        .iter()
        .map(|p| p.optimized.unwrap().upsilon_min)
        .collect();
    assert!(ups.windows(2).all(|w| w[0] < w[1]), "{ups:?}");
    let n = sweep_n0(
        &base,
        true,
        &[60.0, 80.0, 100.0],
        &grid,
        Backend::Exact,
        &small_scan(),
    )
    .unwrap();
    assert_eq!(n.xs(), vec![60.0, 80.0, 100.0]);
    assert!(n
        .points
        .iter()
        .all(|p| p.report.tau == 0.0 || p.optimized.is_some()));
    assert!(sweep_seed(
        &base,
        SeedKind::Thermal,
        &[1.0, 0.5],
        &grid,
        Backend::Analytic,
        &small_scan()
    )
    .is_err());
}

#[test]
fn wigner_threshold_bracket_straddles_one() {
    let base = ModelParams::matched(100.0, SeedSpec::vacuum());
    let grid = tau_grid(0.012, 40).unwrap();
    let opts = ScanOptions {
        trajectories: 1500,
        batches: 8,
        ..ScanOptions::default()
    };
    let tol = 0.05;
    let th = nth_threshold(&base, tol, &grid, Backend::Wigner, &opts).unwrap();
    let (lo, hi) = th.bracket;
    assert!(hi - lo <= tol + 1e-12 && lo <= th.nbar && th.nbar <= hi);
    let at = |nbar: f64| {
        upsilon_min(
            &base.with_seed(SeedSpec::thermal(nbar)),
            &grid,
            Backend::Wigner,
            &opts,
        )
        .unwrap()
    };
    let (below, be, _) = at((th.nbar - tol).max(0.0));
    let (above, ae, _) = at(th.nbar + tol);
    assert!(below <= 1.0 + 3.0 * be, "{below} +- {be}");
    assert!(above >= 1.0 - 3.0 * ae, "{above} +- {ae}");
    // bracket ends were evaluated with the same normals
    let ends: Vec<_> = th
        .evaluations
        .iter()
        .filter(|e| e.0 == lo || e.0 == hi)
        .collect();
    assert!(ends.iter().any(|e| e.0 == lo && e.1 < 1.0));
    assert!(ends.iter().any(|e| e.0 == hi && e.1 >= 1.0));
}

#[test]
fn analytic_thresholds_grow_with_n0_and_fit_a_power_law() {
    let th: Vec<f64> = [100.0, 200.0, 400.0]
        .iter()
        .map(|&n0| nth_max_ud(n0, 1e-9).unwrap())
        .collect();
    assert!(th.windows(2).all(|w| w[0] < w[1]), "{th:?}");
    let at175: f64 = nth_max_ud(175.0, 1e-9).unwrap();
    assert!((at175 - 1.4).abs() < 0.05, "{at175}");
    assert!(nth_max_ud(175.0f64, 0.0).is_err());

    let pts: Vec<(f64, f64)> = [100.0, 150.0, 200.0, 250.0]
        .iter()
        .map(|&n0| (n0, nth_max_ud(n0, 1e-9).unwrap()))
        .collect();
    let f = fit_power_law(&pts).unwrap();
    assert!(f.prefactor > 0.0 && f.points == 4);
    assert!(fit_power_law(&pts[..3]).is_err());
}
