//! Literal four-mode check of the vacuum-port elimination: the local
//! oscillator `b_j = (a0 + s_j a_vac)/sqrt 2` is built explicitly on a Fock
//! space that includes the vacuum port, and the resulting quadrature moments
//! are compared with the three-mode measures layer.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spinmix::exact::dense::DenseSystem;
use spinmix::exact::fock::{FockBasis, Ladder};
use spinmix::measures::{generalized_quadrature_variance, quadrature_covariance, quadrature_mean};
use spinmix::{ModelParams, SeedSpec, Signal};

const CUT: usize = 5;
const SUPPORT: usize = 3;
const VAC: usize = 3;

type V = Vec<Complex<f64>>;

fn random_state(basis: &FockBasis, seed: u64) -> V {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut psi: V = (0..basis.dim())
        .map(|i| {
            if basis.occupations(i).iter().all(|&n| n <= SUPPORT) {
                Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            } else {
                Complex::new(0.0, 0.0)
            }
        })
        .collect();
    let norm = FockBasis::inner(&psi, &psi).re.sqrt();
    psi.iter_mut().for_each(|c| *c /= norm);
    psi
}

fn embed(b3: &FockBasis, b4: &FockBasis, psi: &[Complex<f64>]) -> V {
    let mut out = vec![Complex::new(0.0, 0.0); b4.dim()];
    for (i, c) in psi.iter().enumerate() {
        let mut occ = b3.occupations(i);
        occ.push(0);
        out[b4.index(&occ)] = *c;
    }
    out
}

fn axpy(acc: &mut V, a: Complex<f64>, x: &[Complex<f64>]) {
    for (y, v) in acc.iter_mut().zip(x) {
        *y += a * v;
    }
}

/// `X_j(theta)|psi>` with the literal local oscillator.
fn apply_x(b4: &FockBasis, psi: &[Complex<f64>], mode: usize, s: f64, theta: f64, nb: f64) -> V {
    use Ladder::{Annihilate as A, Create as Cr};
    let e = Complex::from_polar(1.0, theta);
    let k = 1.0 / (2.0f64.sqrt() * nb.sqrt());
    let mut out = vec![Complex::new(0.0, 0.0); b4.dim()];
    axpy(&mut out, e * k, &b4.apply(&[Cr(mode), A(0)], psi));
    axpy(&mut out, e * k * s, &b4.apply(&[Cr(mode), A(VAC)], psi));
    axpy(&mut out, e.conj() * k, &b4.apply(&[Cr(0), A(mode)], psi));
    axpy(
        &mut out,
        e.conj() * k * s,
        &b4.apply(&[Cr(VAC), A(mode)], psi),
    );
    out
}

#[test]
fn vacuum_port_elimination_matches_four_mode_calculation() {
    let params = ModelParams::<f64>::new(2.0, 0.0, SeedSpec::vacuum());
    let sys = DenseSystem::new(&params, CUT, 10_000).unwrap();
    let b3 = sys.basis().clone();
    let b4 = FockBasis::new(4, CUT, 10_000).unwrap();
    for seed in 0..4u64 {
        let psi3 = random_state(&b3, seed);
        let m = sys.moments(&[(1.0, psi3.clone())]);
        let psi4 = embed(&b3, &b4, &psi3);
        for &theta in &[0.0, 0.4, 1.3, 2.9] {
            let mut xs = Vec::new();
            for (j, mode, s) in [(Signal::Plus, 1usize, 1.0), (Signal::Minus, 2usize, -1.0)] {
                // literal <b^dag b>
                let lo: V = {
                    let mut v = b4.apply(&[Ladder::Annihilate(0)], &psi4);
                    axpy(
                        &mut v,
                        Complex::new(s, 0.0),
                        &b4.apply(&[Ladder::Annihilate(VAC)], &psi4),
                    );
                    v
                };
                let nb = FockBasis::inner(&lo, &lo).re / 2.0;
                let x = apply_x(&b4, &psi4, mode, s, theta, nb);
                let mean = FockBasis::inner(&psi4, &x).re;
                let second = FockBasis::inner(&x, &x).re;
                let want_mean = quadrature_mean(&m, theta, j).unwrap();
                let want_var = generalized_quadrature_variance(&m, theta, j).unwrap();
                assert!(
                    (mean - want_mean).abs() < 1e-12,
                    "mean {mean} vs {want_mean}"
                );
                assert!(
                    (second - mean * mean - want_var).abs() < 1e-12,
                    "var {} vs {want_var}",
                    second - mean * mean
                );
                xs.push((x, mean));
            }
            let cross = FockBasis::inner(&xs[0].0, &xs[1].0);
            // X_1 and X_-1 commute, so the mixed moment is real
            assert!(cross.im.abs() < 1e-12);
            let cov = cross.re - xs[0].1 * xs[1].1;
            let want = quadrature_covariance(&m, theta).unwrap();
            assert!((cov - want).abs() < 1e-12, "cov {cov} vs {want}");
        }
    }
}
