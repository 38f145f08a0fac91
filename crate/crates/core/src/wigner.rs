//! Truncated-Wigner Monte Carlo backend.
//!
//! Initial amplitudes are sampled with half-quantum (plus thermal) Gaussian
//! noise and propagated under the mean-field drift with an adaptive
//! Dormand-Prince 5(4) integrator. Trajectories are grouped into contiguous
//! index batches; each batch accumulates the normal-order estimators of every
//! [`MomentId`] at every grid time with compensated sums, and batches are
//! combined in index order. Results are therefore bit-identical for any thread
//! count, and leave-one-batch-out replicates give jackknife errors.

use std::io::Write;

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::check_grid;
use crate::measures::jackknife_stderr;
use crate::model::{ModelParams, Moment, MomentId, MomentSet, SeedKind};
use crate::scalar::{czero, CompensatedSum, Real};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_BATCHES: usize = 64;
pub const SCAN_TRAJECTORIES: usize = 20_000;
pub const ACCEPTANCE_TRAJECTORIES: usize = 100_000;
/// Relative standard error of a fourth-order moment above which a quality
/// warning is attached.
pub const FOURTH_ORDER_REL_BOUND: f64 = 0.1;
const MAX_STEPS_PER_TRAJECTORY: usize = 10_000_000;

/// Phase-space amplitudes of the pump, signal, idler and LO vacuum port.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Trajectory<T> {
    pub alpha0: Complex<T>,
    pub alpha_p1: Complex<T>,
    pub alpha_m1: Complex<T>,
    pub alpha_vac: Complex<T>,
}

impl<T: Real> Trajectory<T> {
    /// Symbol of the total number of the three evolving modes.
    pub fn weyl_number(&self) -> T {
        self.alpha0.norm_sqr() + self.alpha_p1.norm_sqr() + self.alpha_m1.norm_sqr()
    }

    fn modes(&self) -> [Complex<T>; 3] {
        [self.alpha0, self.alpha_p1, self.alpha_m1]
    }

    fn with_modes(&self, y: [Complex<T>; 3]) -> Self {
        Self {
            alpha0: y[0],
            alpha_p1: y[1],
            alpha_m1: y[2],
            alpha_vac: self.alpha_vac,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WignerEnsemble<T> {
    pub trajectories: Vec<Trajectory<T>>,
    pub rng_seed: u64,
    pub count: usize,
    /// Time of the stored amplitudes.
    pub tau: T,
}

/// Eight standard normals of trajectory `index`: pump, +1, -1, vacuum port
/// (real and imaginary parts).
fn trajectory_normals(rng_seed: u64, index: usize) -> [f64; 8] {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    rng.set_stream(index as u64);
    let mut z = [0.0; 8];
    for v in z.iter_mut() {
        *v = StandardNormal.sample(&mut rng);
    }
    z
}

fn sample_one<T: Real>(params: &ModelParams<T>, rng_seed: u64, index: usize) -> Trajectory<T> {
    let z = trajectory_normals(rng_seed, index);
    let half = T::of(0.5);
    // complex Gaussian with <|eta|^2> = v
    let noise =
        |v: T, re: f64, im: f64| Complex::new(T::of(re), T::of(im)) * (v / T::of(2.0)).sqrt();
    let seed = params.seed;
    let (mu, v) = match seed.kind {
        SeedKind::Vacuum => (T::zero(), half),
        SeedKind::Thermal => (T::zero(), seed.nbar_th + half),
        SeedKind::Coherent => (seed.alpha_seed_sq.sqrt(), half),
    };
    let mu = Complex::new(mu, T::zero());
    Trajectory {
        alpha0: Complex::new(params.n0_mean.sqrt(), T::zero()) + noise(half, z[0], z[1]),
        alpha_p1: mu + noise(v, z[2], z[3]),
        alpha_m1: mu + noise(v, z[4], z[5]),
        alpha_vac: noise(half, z[6], z[7]),
    }
}

/// Draws `count` initial samples. Trajectory `i` uses substream `i` of the
/// generator keyed by `rng_seed`, so seeds of different `nbar` share their
/// underlying normals.
pub fn sample_initial<T: Real>(
    params: &ModelParams<T>,
    rng_seed: u64,
    count: usize,
) -> Result<WignerEnsemble<T>> {
    params.validate()?;
    if count < 2 {
        return Err(Error::invalid(format!(
            "trajectory count {count} must be >= 2"
        )));
    }
    let trajectories = (0..count)
        .into_par_iter()
        .map(|i| sample_one(params, rng_seed, i))
        .collect();
    Ok(WignerEnsemble {
        trajectories,
        rng_seed,
        count,
        tau: T::zero(),
    })
}

#[inline]
fn drift_modes<T: Real>(y: &[Complex<T>; 3], q: T) -> [Complex<T>; 3] {
    let half = T::of(0.5);
    let w = |a: Complex<T>| a.norm_sqr() - half;
    let [a0, ap, am] = *y;
    let minus_i = Complex::new(T::zero(), -T::one());
    let a0sq = a0 * a0;
    [
        minus_i * (a0.conj() * ap * am * T::of(2.0) + a0 * (w(ap) + w(am))),
        minus_i * (a0sq * am.conj() + ap * (w(a0) - q)),
        minus_i * (a0sq * ap.conj() + am * (w(a0) - q)),
    ]
}

/// Time derivative of a trajectory; the vacuum-port amplitude is constant.
pub fn drift<T: Real>(traj: &Trajectory<T>, params: &ModelParams<T>) -> Trajectory<T> {
    let d = drift_modes(&traj.modes(), params.q_over_g);
    Trajectory {
        alpha0: d[0],
        alpha_p1: d[1],
        alpha_m1: d[2],
        alpha_vac: czero(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub tol: f64,
    pub batches: usize,
    /// Number of leading trajectories whose full history is kept for dumps.
    pub record: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            batches: DEFAULT_BATCHES,
            record: 0,
        }
    }
}

/// Integrated ensemble: per-batch moment-estimator sums on the time grid.
#[derive(Debug, Clone)]
pub struct WignerRun<T> {
    pub grid: Vec<T>,
    pub count: usize,
    pub rng_seed: u64,
    /// Trajectory index ranges `[start, end)` of the batches.
    pub batches: Vec<(usize, usize)>,
    /// `sums[b][g][id]`: batch `b`, grid point `g`.
    sums: Vec<Vec<[Complex<T>; MomentId::COUNT]>>,
    /// Ensemble at the last grid time (unchanged if the grid is empty).
    pub ensemble: WignerEnsemble<T>,
    /// Largest `|N_W(tau) - N_W(start)|` over all trajectories and grid points.
    pub max_weyl_drift: T,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Histories `(trajectory index, amplitudes on the grid)` of recorded trajectories.
    pub histories: Vec<(usize, Vec<Trajectory<T>>)>,
    pub warnings: Vec<String>,
}

/// Propagates the ensemble onto `tau_grid` with local tolerance `tol`.
pub fn integrate_ensemble<T: Real>(
    ensemble: &WignerEnsemble<T>,
    params: &ModelParams<T>,
    tau_grid: &[T],
    tol: T,
) -> Result<WignerRun<T>> {
    let opts = IntegrateOptions {
        tol: tol.to_f64_lossy(),
        ..Default::default()
    };
    integrate_ensemble_with(ensemble, params, tau_grid, &opts)
}

pub fn integrate_ensemble_with<T: Real>(
    ensemble: &WignerEnsemble<T>,
    params: &ModelParams<T>,
    tau_grid: &[T],
    opts: &IntegrateOptions,
) -> Result<WignerRun<T>> {
    params.validate()?;
    if !(opts.tol > 0.0) {
        return Err(Error::invalid(format!(
            "tolerance {} must be > 0",
            opts.tol
        )));
    }
    check_grid(tau_grid, ensemble.tau)?;
    let count = ensemble.trajectories.len();
    if count < 2 {
        return Err(Error::invalid(format!(
            "trajectory count {count} must be >= 2"
        )));
    }
    let mut warnings = Vec::new();
    let floor = 100.0 * T::epsilon().to_f64_lossy();
    let tol = if opts.tol < floor {
        warnings.push(format!(
            "tolerance {} raised to {floor} for the scalar precision",
            opts.tol
        ));
        T::of(floor)
    } else {
        T::of(opts.tol)
    };
    let nb = opts.batches.clamp(1, count);
    let batches: Vec<(usize, usize)> = (0..nb)
        .map(|b| (b * count / nb, (b + 1) * count / nb))
        .collect();
    let q = params.q_over_g;
    let start = ensemble.tau;
    let ng = tau_grid.len();

    let outputs = batches
        .par_iter()
        .map(|&(lo, hi)| -> Result<BatchOutput<T>> {
            let mut acc = vec![[CompensatedSum::<T>::new(); MomentId::COUNT]; ng];
            let mut out = BatchOutput {
                sums: Vec::new(),
                finals: Vec::with_capacity(hi - lo),
                drift: T::zero(),
                accepted: 0,
                rejected: 0,
                histories: Vec::new(),
            };
            for idx in lo..hi {
                let traj0 = ensemble.trajectories[idx];
                let record = idx < opts.record;
                let mut hist = Vec::new();
                let n_start = traj0.weyl_number();
                let mut stepper = Dp45::new(traj0.modes(), start, q, tol, params.n0_mean + q.abs());
                for (g, &t) in tau_grid.iter().enumerate() {
                    stepper.advance_to(t).map_err(|detail| {
                        Error::numerical(format!("Wigner trajectory {idx}"), detail)
                    })?;
                    let traj = traj0.with_modes(stepper.y);
                    out.drift = out.drift.max((traj.weyl_number() - n_start).abs());
                    let est = estimators(&stepper.y);
                    for (a, e) in acc[g].iter_mut().zip(est.iter()) {
                        a.add(*e);
                    }
                    if record {
                        hist.push(traj);
                    }
                }
                out.accepted += stepper.accepted;
                out.rejected += stepper.rejected;
                out.finals.push(traj0.with_modes(stepper.y));
                if record {
                    out.histories.push((idx, hist));
                }
            }
            out.sums = acc
                .iter()
                .map(|row| {
                    let mut s = [czero(); MomentId::COUNT];
                    for (d, a) in s.iter_mut().zip(row.iter()) {
                        *d = a.value();
                    }
                    s
                })
                .collect();
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut sums = Vec::with_capacity(nb);
    let mut finals = Vec::with_capacity(count);
    let mut histories = Vec::new();
    let (mut drift, mut accepted, mut rejected) = (T::zero(), 0, 0);
    for o in outputs {
        sums.push(o.sums);
        finals.extend(o.finals);
        histories.extend(o.histories);
        drift = drift.max(o.drift);
        accepted += o.accepted;
        rejected += o.rejected;
    }
    Ok(WignerRun {
        grid: tau_grid.to_vec(),
        count,
        rng_seed: ensemble.rng_seed,
        batches,
        sums,
        ensemble: WignerEnsemble {
            trajectories: finals,
            rng_seed: ensemble.rng_seed,
            count,
            tau: tau_grid.last().copied().unwrap_or(start),
        },
        max_weyl_drift: drift,
        accepted_steps: accepted,
        rejected_steps: rejected,
        histories,
        warnings,
    })
}

struct BatchOutput<T> {
    sums: Vec<[Complex<T>; MomentId::COUNT]>,
    finals: Vec<Trajectory<T>>,
    drift: T,
    accepted: usize,
    rejected: usize,
    histories: Vec<(usize, Vec<Trajectory<T>>)>,
}

/// Per-mode symbols of the normal-ordered `a^dag^c a^d`, `c, d <= 2`:
/// `sum_k (-1/2)^k k! C(c,k) C(d,k) alpha*^(c-k) alpha^(d-k)`.
#[inline]
fn mode_symbols<T: Real>(a: Complex<T>) -> [[Complex<T>; 3]; 3] {
    let half = T::of(0.5);
    let one = Complex::new(T::one(), T::zero());
    let ac = a.conj();
    let n = a.norm_sqr();
    let a2 = a * a;
    let ac2 = ac * ac;
    [
        [one, a, a2],
        [ac, Complex::new(n - half, T::zero()), ac * a2 - a],
        [
            ac2,
            ac2 * a - ac,
            Complex::new(n * n - T::of(2.0) * n + half, T::zero()),
        ],
    ]
}

#[inline]
fn estimators<T: Real>(y: &[Complex<T>; 3]) -> [Complex<T>; MomentId::COUNT] {
    let s = [mode_symbols(y[0]), mode_symbols(y[1]), mode_symbols(y[2])];
    let mut out = [czero(); MomentId::COUNT];
    for (o, &id) in out.iter_mut().zip(MomentId::ALL.iter()) {
        let m = id.monomial();
        *o = s[0][m.create[0] as usize][m.annihilate[0] as usize]
            * s[1][m.create[1] as usize][m.annihilate[1] as usize]
            * s[2][m.create[2] as usize][m.annihilate[2] as usize];
    }
    out
}

// Dormand-Prince 5(4) tableau (the drift is autonomous, so the nodes are not needed)
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// fifth-order minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Dp45<T: Real> {
    y: [Complex<T>; 3],
    t: T,
    h: T,
    q: T,
    tol: T,
    k1: [Complex<T>; 3],
    accepted: usize,
    rejected: usize,
    a: [[T; 6]; 7],
    e: [T; 7],
}

impl<T: Real> Dp45<T> {
    fn new(y: [Complex<T>; 3], t: T, q: T, tol: T, rate: T) -> Self {
        let k1 = drift_modes(&y, q);
        let a = A.map(|row| row.map(T::of));
        let e = E.map(T::of);
        Self {
            y,
            t,
            h: T::of(0.01) / (rate + T::one()),
            q,
            tol,
            k1,
            accepted: 0,
            rejected: 0,
            a,
            e,
        }
    }

    fn advance_to(&mut self, target: T) -> std::result::Result<(), String> {
        let mut steps = 0usize;
        while self.t < target {
            let remaining = target - self.t;
            let last = self.h >= remaining;
            let h = if last { remaining } else { self.h };
            let (y_new, k7, err) = self.try_step(h);
            steps += 1;
            if steps > MAX_STEPS_PER_TRAJECTORY {
                return Err(format!("step budget exhausted at tau = {}", self.t));
            }
            if !err.is_finite() {
                self.rejected += 1;
                self.h = h / T::of(10.0);
            } else if err <= T::one() {
                self.accepted += 1;
                self.t = if last { target } else { self.t + h };
                self.y = y_new;
                self.k1 = k7;
                let grow = if err == T::zero() {
                    T::of(5.0)
                } else {
                    (T::of(0.9) * err.powf(T::of(-0.2))).min(T::of(5.0))
                };
                // a step shortened to hit the grid does not shrink the proposal
                let proposed = h * grow.max(T::of(0.2));
                self.h = if last { self.h.max(proposed) } else { proposed };
            } else {
                self.rejected += 1;
                self.h = h * (T::of(0.9) * err.powf(T::of(-0.2))).max(T::of(0.1));
            }
            let scale = self.t.abs().max(target.abs()).max(T::of(1e-3));
            if self.h < T::of(16.0) * T::epsilon() * scale {
                return Err(format!(
                    "step size underflow (h = {}) at tau = {}",
                    self.h, self.t
                ));
            }
        }
        Ok(())
    }

    fn try_step(&self, h: T) -> ([Complex<T>; 3], [Complex<T>; 3], T) {
        let a = &self.a;
        let mut k = [[czero::<T>(); 3]; 7];
        k[0] = self.k1;
        for s in 1..7 {
            let mut ys = self.y;
            for (i, y) in ys.iter_mut().enumerate() {
                let mut inc = czero();
                for j in 0..s {
                    if a[s][j] != T::zero() {
                        inc = inc + k[j][i] * a[s][j];
                    }
                }
                *y = *y + inc * h;
            }
            k[s] = drift_modes(&ys, self.q);
        }
        // row 6 of A is the fifth-order solution, so k[6] is f(y_new)
        let mut y_new = self.y;
        for (i, y) in y_new.iter_mut().enumerate() {
            let mut inc = czero();
            for j in 0..6 {
                inc = inc + k[j][i] * a[6][j];
            }
            *y = *y + inc * h;
        }
        let mut err = T::zero();
        for i in 0..3 {
            let mut e = czero();
            for j in 0..7 {
                e = e + k[j][i] * self.e[j];
            }
            let sc = self.tol * (T::one() + self.y[i].norm().max(y_new[i].norm()));
            err = err.max((e * h).norm() / sc);
        }
        (y_new, k[6], err)
    }
}

impl<T: Real> WignerRun<T> {
    /// Index of `tau` on the recorded grid.
    pub fn grid_index(&self, tau: T) -> Result<usize> {
        self.grid
            .iter()
            .position(|&g| (g - tau).abs() <= T::of(1e-12) * g.abs().max(T::one()))
            .ok_or_else(|| Error::invalid(format!("tau = {tau} is not on the recorded grid")))
    }

    fn loo_means(&self, g: usize) -> (Vec<Complex<T>>, Vec<Vec<Complex<T>>>) {
        let total_n = T::of_usize(self.count);
        let mut totals = vec![czero(); MomentId::COUNT];
        for b in &self.sums {
            for (t, s) in totals.iter_mut().zip(b[g].iter()) {
                *t = *t + *s;
            }
        }
        let means: Vec<Complex<T>> = totals.iter().map(|t| *t / total_n).collect();
        let loo = self
            .batches
            .iter()
            .zip(self.sums.iter())
            .map(|(&(lo, hi), b)| {
                let n = T::of_usize(self.count - (hi - lo));
                totals
                    .iter()
                    .zip(b[g].iter())
                    .map(|(t, s)| (*t - *s) / n)
                    .collect()
            })
            .collect();
        (means, loo)
    }

    /// Moments at grid point `g` with jackknife standard errors.
    pub fn moments_at(&self, g: usize) -> MomentSet<T> {
        let (means, loo) = self.loo_means(g);
        let stderr = |i: usize| -> T {
            if loo.len() < 2 {
                return T::zero();
            }
            let re: Vec<T> = loo.iter().map(|r| r[i].re).collect();
            let im: Vec<T> = loo.iter().map(|r| r[i].im).collect();
            jackknife_stderr(&re).hypot(jackknife_stderr(&im))
        };
        let mut m = MomentSet::from_fn(|id| Moment {
            value: means[id.index()],
            stderr: stderr(id.index()),
        });
        for &id in MomentId::ALL {
            let mono = id.monomial();
            if mono.order() == 4 && mono.magnetization_change() == 0 {
                let e = m.get(id);
                let bound = T::of(FOURTH_ORDER_REL_BOUND) * e.value.norm();
                if e.stderr > bound {
                    m.warnings.push(format!(
                        "{} at tau = {}: relative standard error {:.3} exceeds {FOURTH_ORDER_REL_BOUND}",
                        id.label(),
                        self.grid[g],
                        (e.stderr / e.value.norm()).to_f64_lossy()
                    ));
                }
            }
        }
        m
    }

    /// Leave-one-batch-out moment sets at grid point `g`.
    pub fn replicates_at(&self, g: usize) -> Vec<MomentSet<T>> {
        let (_, loo) = self.loo_means(g);
        loo.into_iter()
            .map(|r| MomentSet::from_fn(|id| Moment::exact(r[id.index()])))
            .collect()
    }

    /// Writes `traj_id,tau,re_a0,im_a0,re_ap,im_ap,re_am,im_am` rows of the
    /// recorded histories.
    pub fn write_trajectory_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "traj_id,tau,re_a0,im_a0,re_ap,im_ap,re_am,im_am")?;
        for (id, hist) in &self.histories {
            for (t, tr) in self.grid.iter().zip(hist.iter()) {
                writeln!(
                    w,
                    "{id},{t},{},{},{},{},{},{}",
                    tr.alpha0.re,
                    tr.alpha0.im,
                    tr.alpha_p1.re,
                    tr.alpha_p1.im,
                    tr.alpha_m1.re,
                    tr.alpha_m1.im
                )?;
            }
        }
        Ok(())
    }
}

/// Normally-ordered moments at `at_tau` estimated from the ensemble.
pub fn moments_wigner<T: Real>(run: &WignerRun<T>, at_tau: T) -> Result<MomentSet<T>> {
    Ok(run.moments_at(run.grid_index(at_tau)?))
}

/// Moments of the initial ensemble (no propagation).
pub fn moments_initial<T: Real>(
    ensemble: &WignerEnsemble<T>,
    batches: usize,
) -> Result<MomentSet<T>> {
    // integrating to the start time is the identity; reuse the reduction path
    let grid = [ensemble.tau];
    let dummy = ModelParams::new(T::one(), T::zero(), crate::model::SeedSpec::vacuum());
    let opts = IntegrateOptions {
        batches,
        ..Default::default()
    };
    let run = integrate_ensemble_with(ensemble, &dummy, &grid, &opts)?;
    Ok(run.moments_at(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SeedSpec;

    fn within(m: &MomentSet<f64>, id: MomentId, want: Complex<f64>, k: f64) {
        let e = m.get(id);
        assert!(
            (e.value - want).norm() <= k * e.stderr.max(1e-15),
            "{:?}: {} vs {want} (se {})",
            id,
            e.value,
            e.stderr
        );
    }

    #[test]
    fn sampling_statistics() {
        let c = |x: f64| Complex::new(x, 0.0);
        let p = ModelParams::matched(175.0, SeedSpec::vacuum());
        let ens = sample_initial(&p, 11, 20_000).unwrap();
        let m = moments_initial(&ens, 64).unwrap();
        within(&m, MomentId::Np, c(0.0), 3.0);
        within(&m, MomentId::N0, c(175.0), 3.0);
        let p = ModelParams::matched(175.0, SeedSpec::thermal(1.0));
        let m = moments_initial(&sample_initial(&p, 11, 20_000).unwrap(), 64).unwrap();
        within(&m, MomentId::Np, c(1.0), 3.0);
        within(&m, MomentId::NpNm, c(1.0), 3.0);
        let p = ModelParams::matched(175.0, SeedSpec::coherent(1.0));
        let m = moments_initial(&sample_initial(&p, 11, 20_000).unwrap(), 64).unwrap();
        within(&m, MomentId::Ap, c(1.0), 3.0);
        within(&m, MomentId::Am, c(1.0), 3.0);
        assert!(sample_initial(&p, 1, 1).is_err());
    }

    #[test]
    fn substreams_are_index_addressed() {
        let p = ModelParams::matched(50.0, SeedSpec::thermal(0.5));
        let a = sample_initial(&p, 3, 100).unwrap();
        let b = sample_initial(&p, 3, 40).unwrap();
        assert_eq!(&a.trajectories[..40], &b.trajectories[..]);
        let v = sample_initial(&p.with_seed(SeedSpec::thermal(2.0)), 3, 40).unwrap();
        // common normals, rescaled widths
        let r = ((2.0f64 + 0.5) / (0.5 + 0.5)).sqrt();
        for (x, y) in b.trajectories.iter().zip(v.trajectories.iter()) {
            assert!((x.alpha_p1 * r - y.alpha_p1).norm() < 1e-12);
            assert_eq!(x.alpha0, y.alpha0);
        }
    }

    #[test]
    fn drift_examples() {
        let p = ModelParams::matched(175.0, SeedSpec::<f64>::vacuum());
        let t = Trajectory {
            alpha0: Complex::new(13.0, 0.5),
            alpha_p1: czero(),
            alpha_m1: czero(),
            alpha_vac: Complex::new(0.3, 0.1),
        };
        let d = drift(&t, &p);
        // only the elastic rotation remains: -i (W+ + W-) a0 with W = -1/2
        assert!((d.alpha0 - Complex::new(0.0, 1.0) * t.alpha0).norm() < 1e-12);
        assert_eq!(d.alpha_vac, czero());
        // real amplitudes at q = W(n0): signal phase stationary, growth purely imaginary
        let a0 = 13.0f64;
        let p = ModelParams::new(175.0, a0 * a0 - 0.5, SeedSpec::vacuum());
        let t = Trajectory {
            alpha0: Complex::new(a0, 0.0),
            alpha_p1: Complex::new(0.4, 0.0),
            alpha_m1: Complex::new(0.4, 0.0),
            alpha_vac: czero(),
        };
        let d = drift(&t, &p);
        assert!(d.alpha_p1.re.abs() < 1e-12);
    }

    #[test]
    fn weyl_number_conserved_and_reproducible() {
        let p = ModelParams::matched(175.0, SeedSpec::thermal(1.0));
        let ens = sample_initial(&p, 5, 64).unwrap();
        let grid: Vec<f64> = (0..=60).map(|i| 0.0002 * i as f64).collect();
        let opts = IntegrateOptions {
            batches: 8,
            record: 2,
            ..Default::default()
        };
        let run = integrate_ensemble_with(&ens, &p, &grid, &opts).unwrap();
        assert!(run.max_weyl_drift < 1e-7, "{}", run.max_weyl_drift);
        let again = integrate_ensemble_with(&ens, &p, &grid, &opts).unwrap();
        assert_eq!(run.moments_at(60), again.moments_at(60));
        let mut buf = Vec::new();
        run.write_trajectory_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "traj_id,tau,re_a0,im_a0,re_ap,im_ap,re_am,im_am"
        );
        assert_eq!(text.lines().count(), 1 + 2 * 61);
    }

    #[test]
    fn empty_grid_and_missing_tau() {
        let p = ModelParams::matched(10.0, SeedSpec::<f64>::vacuum());
        let ens = sample_initial(&p, 1, 10).unwrap();
        let run = integrate_ensemble(&ens, &p, &[], 1e-10).unwrap();
        assert_eq!(run.ensemble, ens);
        let run = integrate_ensemble(&ens, &p, &[0.001], 1e-10).unwrap();
        assert!(moments_wigner(&run, 0.002).is_err());
        assert!(moments_wigner(&run, 0.001).is_ok());
        assert!(integrate_ensemble(&ens, &p, &[0.001], 0.0).is_err());
    }

    #[test]
    fn symbols_match_general_formula() {
        fn binom(n: u32, k: u32) -> f64 {
            (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
        }
        let a = Complex::new(0.7, -1.3);
        let s = mode_symbols(a);
        for c in 0..3u32 {
            for d in 0..3u32 {
                let mut want = czero();
                for k in 0..=c.min(d) {
                    let fact = (1..=k).product::<u32>() as f64;
                    let coef = (-0.5f64).powi(k as i32) * fact * binom(c, k) * binom(d, k);
                    want += a.conj().powu(c - k) * a.powu(d - k) * coef;
                }
                assert!((s[c as usize][d as usize] - want).norm() < 1e-12);
            }
        }
    }
}
