//! Quadrature variances, EPR parameter, two-mode squeezing and inseparability
//! from a [`MomentSet`].
//!
//! The local oscillator for signal mode `j` is `b_j = (a0 + s_j a_vac)/sqrt 2`
//! (`s_{+1} = +1`, `s_{-1} = -1`) with the vacuum port `a_vac` in its ground
//! state, so `<b_j^dag b_j> = <n0>/2 = N_b`. With
//! `X_j(theta) = (a_j^dag b_j e^{i theta} + h.c.)/sqrt(N_b)` the vacuum port
//! drops out of every expectation value:
//!
//! * `<X_j> = sqrt 2 Re(e^{i theta} <a_j^dag a0>) / sqrt(N_b)`
//! * `N_b <X_j^2> = Re(e^{2 i theta} <a_j^dag2 a0^2>) + <n_j n0> + <n_j> + <n0>/2`,
//!   from `a^dag b b^dag a + b^dag a a^dag b = 2 n_a n_b + n_a + n_b` and
//!   `<a^dag2 b^2> = <a^dag2 a0^2>/2`, `<n_a n_b> = <n_a n0>/2`.
//! * `N_b <X_1 X_-1> = Re(e^{2 i theta} <a1^dag a-1^dag a0^2>) + Re <a1^dag a-1 a0^dag a0>`,
//!   using `b_1 b_-1 = (a0^2 - a_vac^2)/2` and `<b_1 b_-1^dag> = <n0>/2`
//!   (the `a0 a0^dag` and `a_vac a_vac^dag` commutator terms cancel).
//!
//! `X_1` and `X_-1` commute because `[b_1, b_-1^dag] = 0`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{MomentId, MomentSet, Signal};
use crate::scalar::{cis, Real};

/// Points of the uniform phase scan on `[0, pi)`.
pub const DEFAULT_THETA_STEPS: usize = 512;
/// Golden-section stopping width in `theta`.
pub const THETA_TOL: f64 = 1e-6;
/// Smallest admissible EPR denominator `(1 - n_j/N_b)^2`.
pub const DENOMINATOR_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum InferredVariant {
    /// Least-squares inference from the partner quadrature.
    #[default]
    Optimal,
    /// `X_j - X_i` and `Y_j + Y_i` combinations.
    #[serde(rename = "symdiff")]
    SymmetricDifference,
}

impl InferredVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            InferredVariant::Optimal => "optimal",
            InferredVariant::SymmetricDifference => "symdiff",
        }
    }
}

impl fmt::Display for InferredVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for InferredVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "optimal" => Ok(InferredVariant::Optimal),
            "symdiff" | "symmetric-difference" => Ok(InferredVariant::SymmetricDifference),
            other => Err(Error::invalid(format!(
                "unknown inferred-variance variant '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig<T> {
    theta: T,
    pub inferred_variant: InferredVariant,
}

impl<T: Real> QuadratureConfig<T> {
    pub fn new(theta: T, inferred_variant: InferredVariant) -> Self {
        Self {
            theta: reduce_angle(theta, T::of(2.0 * PI)),
            inferred_variant,
        }
    }

    /// Phase in `[0, 2 pi)`.
    pub fn theta(&self) -> T {
        self.theta
    }
}

fn reduce_angle<T: Real>(theta: T, period: T) -> T {
    let r = theta % period;
    let r = if r < T::zero() { r + period } else { r };
    if r >= period {
        T::zero()
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Epr,
    TwoModeMinus,
    Insep,
}

impl std::str::FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "epr" => Ok(Objective::Epr),
            "two-mode-minus" | "squeezing" | "xminus" => Ok(Objective::TwoModeMinus),
            "insep" | "inseparability" => Ok(Objective::Insep),
            other => Err(Error::invalid(format!("unknown objective '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoModeSign {
    Plus,
    Minus,
}

/// Moment combinations entering the generalized quadratures, with the vacuum
/// port already eliminated.
#[derive(Debug, Clone, Copy)]
struct Lo<T> {
    nb: T,
    n0: T,
    n: [T; 2],
    lo_cross: [Complex<T>; 2],
    pair2: [Complex<T>; 2],
    nn0: [T; 2],
    cross_pair: Complex<T>,
    cross_hop: T,
}

fn slot(j: Signal) -> usize {
    match j {
        Signal::Plus => 0,
        Signal::Minus => 1,
    }
}

impl<T: Real> Lo<T> {
    fn new(m: &MomentSet<T>) -> Result<Self> {
        let n0 = m.real(MomentId::N0);
        let nb = n0 / T::of(2.0);
        if !(nb > T::zero()) {
            return Err(Error::DepletedLocalOscillator(n0.to_f64_lossy()));
        }
        Ok(Self {
            nb,
            n0,
            n: [m.real(MomentId::Np), m.real(MomentId::Nm)],
            lo_cross: [m.value(MomentId::ApDagA0), m.value(MomentId::AmDagA0)],
            pair2: [m.value(MomentId::Ap2Pump), m.value(MomentId::Am2Pump)],
            nn0: [m.real(MomentId::NpN0), m.real(MomentId::NmN0)],
            cross_pair: m.value(MomentId::PairPump),
            cross_hop: m.real(MomentId::ApDagAmN0),
        })
    }

    fn mean(&self, j: usize, theta: T) -> T {
        T::of(2.0).sqrt() * (cis(theta) * self.lo_cross[j]).re / self.nb.sqrt()
    }

    fn second(&self, j: usize, theta: T) -> T {
        let e2 = cis(T::of(2.0) * theta);
        ((e2 * self.pair2[j]).re + self.nn0[j] + self.n[j] + self.n0 / T::of(2.0)) / self.nb
    }

    fn cross(&self, theta: T) -> T {
        let e2 = cis(T::of(2.0) * theta);
        ((e2 * self.cross_pair).re + self.cross_hop) / self.nb
    }

    fn var(&self, j: usize, theta: T) -> T {
        let mu = self.mean(j, theta);
        self.second(j, theta) - mu * mu
    }

    fn cov(&self, theta: T) -> T {
        self.cross(theta) - self.mean(0, theta) * self.mean(1, theta)
    }

    fn two_mode(&self, theta: T, sign: TwoModeSign) -> T {
        let s = match sign {
            TwoModeSign::Plus => T::one(),
            TwoModeSign::Minus => -T::one(),
        };
        self.var(0, theta) + self.var(1, theta) + T::of(2.0) * s * self.cov(theta)
    }

    fn inferred(&self, j: usize, theta: T, variant: InferredVariant, conjugate: bool) -> Result<T> {
        match variant {
            InferredVariant::Optimal => {
                let vi = self.var(1 - j, theta);
                if !(vi > T::zero()) {
                    return Err(Error::DegenerateInference(vi.to_f64_lossy()));
                }
                let c = self.cov(theta);
                Ok(self.var(j, theta) - c * c / vi)
            }
            InferredVariant::SymmetricDifference => {
                let sign = if conjugate {
                    TwoModeSign::Plus
                } else {
                    TwoModeSign::Minus
                };
                Ok(self.two_mode(theta, sign))
            }
        }
    }

    fn epr_mode(&self, j: usize, theta: T, variant: InferredVariant) -> Result<T> {
        let ratio = self.n[j] / self.nb;
        let den = (T::one() - ratio) * (T::one() - ratio);
        if ratio >= T::one() || den < T::of(DENOMINATOR_FLOOR) {
            return Err(Error::CriterionUndefined(ratio.to_f64_lossy()));
        }
        let x = self.inferred(j, theta, variant, false)?;
        let y = self.inferred(j, theta + T::FRAC_PI_2(), variant, true)?;
        Ok(x * y / den)
    }

    fn epr(&self, theta: T, variant: InferredVariant) -> Result<T> {
        Ok((self.epr_mode(0, theta, variant)? + self.epr_mode(1, theta, variant)?) / T::of(2.0))
    }
}

/// Standard single-mode quadratures `X_j = a_j e^{-i theta} + h.c.`.
#[derive(Debug, Clone, Copy)]
struct Standard<T> {
    a: [Complex<T>; 2],
    aa: [Complex<T>; 2],
    n: [T; 2],
}

impl<T: Real> Standard<T> {
    fn new(m: &MomentSet<T>) -> Self {
        Self {
            a: [m.value(MomentId::Ap), m.value(MomentId::Am)],
            aa: [m.value(MomentId::ApAp), m.value(MomentId::AmAm)],
            n: [m.real(MomentId::Np), m.real(MomentId::Nm)],
        }
    }

    fn var(&self, j: usize, theta: T) -> T {
        let two = T::of(2.0);
        let mu = two * (cis(-theta) * self.a[j]).re;
        two * (cis(-two * theta) * self.aa[j]).re + two * self.n[j] + T::one() - mu * mu
    }

    /// Sum of `X_j(theta)` and `X_j(theta + pi/2)` variances over both modes,
    /// which equals `2(D^2 X_1 + D^2 Y_1)` for signal/idler-symmetric states.
    fn sum(&self, theta: T) -> T {
        let y = theta + T::FRAC_PI_2();
        self.var(0, theta) + self.var(0, y) + self.var(1, theta) + self.var(1, y)
    }
}

fn insep_from<T: Real>(lo: &Lo<T>, st: &Standard<T>, theta: T) -> Result<T> {
    let den = st.sum(theta);
    if !(den > T::zero()) {
        return Err(Error::DegenerateVariance("single-mode quadrature sum"));
    }
    let num = lo.two_mode(theta, TwoModeSign::Minus)
        + lo.two_mode(theta + T::FRAC_PI_2(), TwoModeSign::Plus);
    Ok(num / den)
}

/// `Delta^2 X_j(theta)` of the pump-referenced quadrature.
pub fn generalized_quadrature_variance<T: Real>(
    m: &MomentSet<T>,
    theta: T,
    j: Signal,
) -> Result<T> {
    Ok(Lo::new(m)?.var(slot(j), theta))
}

/// `<X_j(theta)>` of the pump-referenced quadrature.
pub fn quadrature_mean<T: Real>(m: &MomentSet<T>, theta: T, j: Signal) -> Result<T> {
    Ok(Lo::new(m)?.mean(slot(j), theta))
}

/// `<Delta X_1 Delta X_-1>` at a common phase.
pub fn quadrature_covariance<T: Real>(m: &MomentSet<T>, theta: T) -> Result<T> {
    Ok(Lo::new(m)?.cov(theta))
}

/// `Delta^2 X_+-(theta)` for `X_+- = X_1 +- X_-1`.
pub fn two_mode_variance<T: Real>(m: &MomentSet<T>, theta: T, sign: TwoModeSign) -> Result<T> {
    Ok(Lo::new(m)?.two_mode(theta, sign))
}

/// Inferred variance of `X_j(theta)` given the partner mode.
pub fn inferred_variance<T: Real>(
    m: &MomentSet<T>,
    theta: T,
    j: Signal,
    variant: InferredVariant,
) -> Result<T> {
    Lo::new(m)?.inferred(slot(j), theta, variant, false)
}

/// EPR parameter `Upsilon_j` of a single signal mode.
pub fn epr_parameter_mode<T: Real>(
    m: &MomentSet<T>,
    theta: T,
    j: Signal,
    variant: InferredVariant,
) -> Result<T> {
    Lo::new(m)?.epr_mode(slot(j), theta, variant)
}

/// EPR parameter, averaged over the two (symmetric) signal modes.
pub fn epr_parameter<T: Real>(m: &MomentSet<T>, theta: T, variant: InferredVariant) -> Result<T> {
    Lo::new(m)?.epr(theta, variant)
}

/// `C = <X_1 X_-1> / sqrt(<X_1^2><X_-1^2>)`.
pub fn correlation<T: Real>(m: &MomentSet<T>, theta: T) -> Result<T> {
    let lo = Lo::new(m)?;
    let (s1, s2) = (lo.second(0, theta), lo.second(1, theta));
    if !(s1 > T::zero() && s2 > T::zero()) {
        return Err(Error::DegenerateVariance("quadrature second moment"));
    }
    Ok(lo.cross(theta) / (s1 * s2).sqrt())
}

/// Variance of the standard quadrature `a_j e^{-i theta} + a_j^dag e^{i theta}`.
pub fn standard_quadrature_variance<T: Real>(m: &MomentSet<T>, theta: T, j: Signal) -> T {
    Standard::new(m).var(slot(j), theta)
}

/// `Sigma Delta^2_2 / Sigma Delta^2_1` at phase `theta`.
pub fn inseparability_ratio<T: Real>(m: &MomentSet<T>, theta: T) -> Result<T> {
    insep_from(&Lo::new(m)?, &Standard::new(m), theta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseOptions {
    pub steps: usize,
    pub tol: f64,
    pub variant: InferredVariant,
}

impl Default for PhaseOptions {
    fn default() -> Self {
        Self {
            steps: DEFAULT_THETA_STEPS,
            tol: THETA_TOL,
            variant: InferredVariant::Optimal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseOptimum<T> {
    /// Minimizing phase in `[0, pi)`.
    pub theta: T,
    pub value: T,
}

fn minimize_periodic<T: Real>(
    f: impl Fn(T) -> Result<T>,
    steps: usize,
    tol: T,
) -> Result<PhaseOptimum<T>> {
    if steps < 3 {
        return Err(Error::invalid(format!(
            "phase scan needs >= 3 points, got {steps}"
        )));
    }
    let pi = T::PI();
    let h = pi / T::of_usize(steps);
    let mut best = (T::zero(), f(T::zero())?);
    for k in 1..steps {
        let th = h * T::of_usize(k);
        let v = f(th)?;
        if v < best.1 {
            best = (th, v);
        }
    }
    let inv_phi = T::of((5f64.sqrt() - 1.0) / 2.0);
    let (mut a, mut b) = (best.0 - h, best.0 + h);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    let mid = (a + b) / T::of(2.0);
    let fm = f(mid)?;
    let (theta, value) = if fm < best.1 { (mid, fm) } else { best };
    Ok(PhaseOptimum {
        theta: reduce_angle(theta, pi),
        value,
    })
}

/// Global minimum over `theta in [0, pi)` of the chosen objective: uniform scan
/// then golden-section refinement around the best scan point.
///
/// The EPR parameter has period pi/2 (it pairs `X(theta)` with
/// `X(theta + pi/2)`), so its optimum comes in two branches; the one where
/// `X_-` rather than `X_+` is squeezed is returned.
pub fn optimize_phase<T: Real>(
    m: &MomentSet<T>,
    objective: Objective,
    opts: &PhaseOptions,
) -> Result<PhaseOptimum<T>> {
    let lo = Lo::new(m)?;
    let tol = T::of(opts.tol);
    match objective {
        Objective::Epr => {
            let best = minimize_periodic(|th| lo.epr(th, opts.variant), opts.steps, tol)?;
            let alt = reduce_angle(best.theta + T::FRAC_PI_2(), T::PI());
            if lo.two_mode(alt, TwoModeSign::Minus) < lo.two_mode(best.theta, TwoModeSign::Minus) {
                Ok(PhaseOptimum {
                    theta: alt,
                    value: lo.epr(alt, opts.variant)?,
                })
            } else {
                Ok(best)
            }
        }
        Objective::TwoModeMinus => minimize_periodic(
            |th| Ok(lo.two_mode(th, TwoModeSign::Minus)),
            opts.steps,
            tol,
        ),
        Objective::Insep => {
            let st = Standard::new(m);
            minimize_periodic(|th| insep_from(&lo, &st, th), opts.steps, tol)
        }
    }
}

/// Objective value at a fixed phase.
pub fn objective_value<T: Real>(
    m: &MomentSet<T>,
    objective: Objective,
    theta: T,
    variant: InferredVariant,
) -> Result<T> {
    match objective {
        Objective::Epr => epr_parameter(m, theta, variant),
        Objective::TwoModeMinus => two_mode_variance(m, theta, TwoModeSign::Minus),
        Objective::Insep => inseparability_ratio(m, theta),
    }
}

/// Entanglement summary at one time point. Error fields are zero unless
/// `stochastic`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport<T> {
    pub tau: T,
    pub n_signal: T,
    pub n_pump: T,
    pub theta0: T,
    pub upsilon: T,
    pub correlation_c: T,
    pub var_xminus_min: T,
    pub theta_xminus: T,
    pub insep_ratio: T,
    pub theta_insep: T,
    pub stochastic: bool,
    pub n_signal_err: T,
    pub n_pump_err: T,
    pub theta0_err: T,
    pub upsilon_err: T,
    pub correlation_c_err: T,
    pub var_xminus_min_err: T,
    pub insep_ratio_err: T,
}

impl<T: Real> EntanglementReport<T> {
    pub fn objective(&self, objective: Objective) -> T {
        match objective {
            Objective::Epr => self.upsilon,
            Objective::TwoModeMinus => self.var_xminus_min,
            Objective::Insep => self.insep_ratio,
        }
    }

    pub fn objective_err(&self, objective: Objective) -> T {
        match objective {
            Objective::Epr => self.upsilon_err,
            Objective::TwoModeMinus => self.var_xminus_min_err,
            Objective::Insep => self.insep_ratio_err,
        }
    }

    pub fn cast<U: Real>(&self) -> EntanglementReport<U> {
        let c = |x: T| U::of(x.to_f64_lossy());
        EntanglementReport {
            tau: c(self.tau),
            n_signal: c(self.n_signal),
            n_pump: c(self.n_pump),
            theta0: c(self.theta0),
            upsilon: c(self.upsilon),
            correlation_c: c(self.correlation_c),
            var_xminus_min: c(self.var_xminus_min),
            theta_xminus: c(self.theta_xminus),
            insep_ratio: c(self.insep_ratio),
            theta_insep: c(self.theta_insep),
            stochastic: self.stochastic,
            n_signal_err: c(self.n_signal_err),
            n_pump_err: c(self.n_pump_err),
            theta0_err: c(self.theta0_err),
            upsilon_err: c(self.upsilon_err),
            correlation_c_err: c(self.correlation_c_err),
            var_xminus_min_err: c(self.var_xminus_min_err),
            insep_ratio_err: c(self.insep_ratio_err),
        }
    }
}

/// Optimizes every measure over `theta` and assembles the report.
pub fn entanglement_report<T: Real>(
    m: &MomentSet<T>,
    tau: T,
    opts: &PhaseOptions,
) -> Result<EntanglementReport<T>> {
    let epr = optimize_phase(m, Objective::Epr, opts)?;
    let xm = optimize_phase(m, Objective::TwoModeMinus, opts)?;
    let ins = optimize_phase(m, Objective::Insep, opts)?;
    let z = T::zero();
    Ok(EntanglementReport {
        tau,
        n_signal: (m.real(MomentId::Np) + m.real(MomentId::Nm)) / T::of(2.0),
        n_pump: m.real(MomentId::N0),
        theta0: epr.theta,
        upsilon: epr.value,
        correlation_c: correlation(m, epr.theta)?,
        var_xminus_min: xm.value,
        theta_xminus: xm.theta,
        insep_ratio: ins.value,
        theta_insep: ins.theta,
        stochastic: false,
        n_signal_err: z,
        n_pump_err: z,
        theta0_err: z,
        upsilon_err: z,
        correlation_c_err: z,
        var_xminus_min_err: z,
        insep_ratio_err: z,
    })
}

/// Jackknife standard error from leave-one-out replicates.
pub fn jackknife_stderr<T: Real>(replicates: &[T]) -> T {
    let b = replicates.len();
    if b < 2 {
        return T::zero();
    }
    let bt = T::of_usize(b);
    let mean = replicates.iter().copied().sum::<T>() / bt;
    let ss: T = replicates.iter().map(|&x| (x - mean) * (x - mean)).sum();
    ((bt - T::one()) / bt * ss).sqrt()
}

/// Attaches jackknife errors computed from replicate reports (one per left-out
/// batch) to `center`.
pub fn attach_jackknife<T: Real>(
    center: &mut EntanglementReport<T>,
    replicates: &[EntanglementReport<T>],
) {
    let se = |f: fn(&EntanglementReport<T>) -> T| {
        jackknife_stderr(&replicates.iter().map(f).collect::<Vec<_>>())
    };
    center.stochastic = true;
    center.n_signal_err = se(|r| r.n_signal);
    center.n_pump_err = se(|r| r.n_pump);
    center.upsilon_err = se(|r| r.upsilon);
    center.correlation_c_err = se(|r| r.correlation_c);
    center.var_xminus_min_err = se(|r| r.var_xminus_min);
    center.insep_ratio_err = se(|r| r.insep_ratio);
    // phases are pi-periodic: measure replicate offsets from the centre
    let pi = T::PI();
    let half = pi / T::of(2.0);
    let offsets: Vec<T> = replicates
        .iter()
        .map(|r| reduce_angle(r.theta0 - center.theta0 + half, pi) - half)
        .collect();
    center.theta0_err = jackknife_stderr(&offsets);
}

/// Minimum of a report sequence with parabolic refinement of the time and value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeOptimum<T> {
    /// Report at the best grid point.
    pub report: EntanglementReport<T>,
    pub index: usize,
    /// Refined minimizing time.
    pub tau: T,
    /// Refined minimum value.
    pub value: T,
}

pub fn optimize_time<T: Real>(
    reports: &[EntanglementReport<T>],
    objective: Objective,
) -> Result<TimeOptimum<T>> {
    if reports.is_empty() {
        return Err(Error::invalid(
            "time optimization needs at least one report",
        ));
    }
    let (index, best) =
        reports
            .iter()
            .enumerate()
            .fold((0, reports[0].objective(objective)), |acc, (i, r)| {
                let v = r.objective(objective);
                if v < acc.1 {
                    (i, v)
                } else {
                    acc
                }
            });
    let report = reports[index];
    let (mut tau, mut value) = (report.tau, best);
    if index > 0 && index + 1 < reports.len() {
        let (t0, t1, t2) = (reports[index - 1].tau, report.tau, reports[index + 1].tau);
        let (f0, f1, f2) = (
            reports[index - 1].objective(objective),
            best,
            reports[index + 1].objective(objective),
        );
        // vertex of the interpolating parabola
        let d01 = (f1 - f0) / (t1 - t0);
        let d12 = (f2 - f1) / (t2 - t1);
        let curv = (d12 - d01) / (t2 - t0);
        if curv > T::zero() {
            // Newton form p(t) = f0 + d01 (t - t0) + curv (t - t0)(t - t1)
            let p = |t: T| f0 + d01 * (t - t0) + curv * (t - t0) * (t - t1);
            let t_star = ((t0 + t1) / T::of(2.0) - d01 / (T::of(2.0) * curv))
                .max(t0)
                .min(t2);
            let v = p(t_star);
            if v <= best {
                tau = t_star;
                value = v;
            }
        }
    }
    Ok(TimeOptimum {
        report,
        index,
        tau,
        value,
    })
}
