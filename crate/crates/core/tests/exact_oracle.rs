use spinmix::exact::{
    dense_oracle_with, evolve_exact, init_coherent_pump, init_coherent_pump_range, moments_exact,
    DenseOptions, Integrator, SectorPropagator,
};
use spinmix::scans::TAU_PRIME;
use spinmix::validate::oracle_max_diff;
use spinmix::{ModelParams, MomentId, SeedSpec};

#[test]
fn sectors_match_dense_oracle_for_small_pumps() {
    let taus = [0.05, 0.3, 0.9];
    for &n0 in &[1.0, 2.5, 4.0, 6.0] {
        for &q in &[0.0, n0, 1.7] {
            let cut = if n0 > 4.0 { 18 } else { 16 };
            let d = oracle_max_diff(n0, q, cut, &taus).unwrap();
            assert!(d < 1e-8, "N0 = {n0}, q = {q}: {d}");
        }
    }
}

#[test]
fn dense_integrators_agree() {
    let p = ModelParams::<f64>::new(4.0, 4.0, SeedSpec::vacuum());
    let taylor = dense_oracle_with(&p, 0.05, 16, &DenseOptions::default()).unwrap();
    let rk4 = dense_oracle_with(
        &p,
        0.05,
        16,
        &DenseOptions {
            integrator: Integrator::Rk4,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(taylor.max_abs_diff(&rk4) < 1e-8);
}

#[test]
fn dense_thermal_mixture_at_zero_time() {
    let p = ModelParams::<f64>::new(1.0, 0.0, SeedSpec::thermal(1.0));
    let m = dense_oracle_with(&p, 0.0, 14, &DenseOptions::default()).unwrap();
    // independent thermal modes; truncation at 14 leaves a (1/2)^15 tail
    assert!((m.real(MomentId::Np) - 1.0).abs() < 1e-3);
    assert!((m.real(MomentId::NpNm) - 1.0).abs() < 1e-2);
}

#[test]
fn zero_time_moments_are_the_initial_product_state() {
    let p = ModelParams::<f64>::matched(175.0, SeedSpec::vacuum());
    let s = init_coherent_pump(&p, 1e-12).unwrap();
    let m = moments_exact(&s);
    assert!((m.real(MomentId::N0) - 175.0).abs() < 1e-8);
    assert!((m.real(MomentId::N0N0) - 175.0 * 175.0).abs() < 1e-6);
    for &id in MomentId::ALL {
        let mono = id.monomial();
        if mono.create[1] + mono.create[2] + mono.annihilate[1] + mono.annihilate[2] > 0 {
            assert!(m.value(id).norm() < 1e-12, "{}", id.label());
        }
    }
}

#[test]
fn per_sector_norms_are_conserved() {
    let p = ModelParams::<f64>::matched(60.0, SeedSpec::vacuum());
    let s = init_coherent_pump(&p, 1e-12).unwrap();
    let before = s.sector_norms();
    let taus: Vec<f64> = (1..=12).map(|i| 0.002 * i as f64).collect();
    for st in evolve_exact(&s, &p, &taus).unwrap() {
        for (a, b) in before.iter().zip(st.sector_norms()) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}

#[test]
fn truncation_range_matches_explicit_range() {
    let p = ModelParams::<f64>::matched(30.0, SeedSpec::vacuum());
    let auto = init_coherent_pump(&p, 1e-12).unwrap();
    let explicit = init_coherent_pump_range(&p, auto.n_min(), auto.n_max()).unwrap();
    assert!((auto.norm_sqr() - explicit.norm_sqr()).abs() < 1e-12);
    assert!(1.0 - auto.norm_sqr() < 1e-11);
}

#[test]
fn phase_mismatch_slows_pair_production() {
    let n0 = 175.0;
    let pop = |q: f64| {
        let p = ModelParams::<f64>::new(n0, q, SeedSpec::vacuum());
        let s = init_coherent_pump(&p, 1e-12).unwrap();
        moments_exact(&SectorPropagator::new(&s, &p).unwrap().state_at(TAU_PRIME))
            .real(MomentId::Np)
    };
    let (matched, free) = (pop(n0), pop(0.0));
    // at q = 0 the linearized amplifier is critical: detuning equals gain, so
    // <n> = (N0 tau)^2 instead of sinh^2(N0 tau)
    let critical = (n0 * TAU_PRIME).powi(2);
    assert!(
        (free - critical).abs() < 0.05 * critical,
        "{free} vs {critical}"
    );
    assert!(matched > 1.5 * free, "{matched} vs {free}");
    let grown = (n0 * TAU_PRIME).sinh().powi(2);
    assert!(
        (matched - grown).abs() < 0.05 * grown,
        "{matched} vs {grown}"
    );
}
