//! Closed-form undepleted-pump results (pump held at the constant classical
//! amplitude `sqrt(N0)`, phase-matched), transcribed without simplification.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::model::{Moment, MomentId, MomentSet};
use crate::scalar::{czero, Real};

/// Pump depletion above which the formulas are outside their validity regime.
pub const DEPLETION_LIMIT: f64 = 0.1;
/// Pump size below which the `N0 >> 1` expansion is flagged.
pub const LARGE_N0_ADVISORY: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UndepletedParams<T> {
    pub n0: T,
    pub nbar: T,
}

impl<T: Real> UndepletedParams<T> {
    pub fn new(n0: T, nbar: T) -> Result<Self> {
        if !(n0.is_finite() && n0 > T::zero()) {
            return Err(Error::invalid(format!("N0 = {n0} must be > 0")));
        }
        if !(nbar.is_finite() && nbar >= T::zero()) {
            return Err(Error::invalid(format!("nbar = {nbar} must be >= 0")));
        }
        Ok(Self { n0, nbar })
    }

    /// `1 + 2 nbar`.
    fn s(&self) -> T {
        T::one() + T::of(2.0) * self.nbar
    }
}

fn check_tau<T: Real>(tau: T) -> Result<()> {
    if tau >= T::zero() && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("tau = {tau} must be >= 0")))
    }
}

/// Advisories for evaluating the formulas at `tau`: pump depletion beyond the
/// short-time regime and small `N0`.
pub fn validity_advisories<T: Real>(p: &UndepletedParams<T>, tau: T) -> Vec<String> {
    let mut out = Vec::new();
    if p.n0 < T::of(LARGE_N0_ADVISORY) {
        out.push(format!("N0 = {} is small for the large-N0 expansion", p.n0));
    }
    if let Ok(n) = population_ud(p, tau) {
        // two atoms leave the pump per pair
        let depletion = T::of(2.0) * n / p.n0;
        if depletion > T::of(DEPLETION_LIMIT) {
            out.push(format!(
                "pump depletion {:.3} at tau = {tau} exceeds the short-time validity limit {DEPLETION_LIMIT}",
                depletion.to_f64_lossy()
            ));
        }
    }
    out
}

/// `sinh^2(N0 tau)(1 + 2 nbar) + nbar`.
pub fn population_ud<T: Real>(p: &UndepletedParams<T>, tau: T) -> Result<T> {
    check_tau(tau)?;
    let sh = (p.n0 * tau).sinh();
    Ok(sh * sh * p.s() + p.nbar)
}

/// `<a_{+1} a_{-1}> = -i sinh(N0 tau) cosh(N0 tau)(1 + 2 nbar)`.
pub fn anomalous_ud<T: Real>(p: &UndepletedParams<T>, tau: T) -> Result<Complex<T>> {
    check_tau(tau)?;
    let r = p.n0 * tau;
    Ok(Complex::new(T::zero(), -(r.sinh() * r.cosh() * p.s())))
}

/// Undepleted EPR parameter including the `1/N0` terms.
pub fn epr_ud<T: Real>(p: &UndepletedParams<T>, tau: T) -> Result<T> {
    check_tau(tau)?;
    let s = p.s();
    let inv = T::one() / p.n0;
    let c = (T::of(2.0) * p.n0 * tau).cosh();
    let sc = s * c;
    let num = s * s + inv * (sc - T::one()) * (T::of(2.0) * sc - T::one());
    let den = sc - inv * (sc - T::one()) * (sc - T::one());
    if !(den > T::zero()) {
        return Err(Error::FormulaBreakdown(format!(
            "EPR denominator {den} <= 0 at N0 = {}, nbar = {}, tau = {tau}",
            p.n0, p.nbar
        )));
    }
    let ratio = num / den;
    Ok(ratio * ratio)
}

fn check_min_precondition<T: Real>(p: &UndepletedParams<T>) -> Result<()> {
    let s = p.s();
    if p.n0 > s * s {
        Ok(())
    } else {
        Err(Error::FormulaBreakdown(format!(
            "minimum formulas need N0 > (1 + 2 nbar)^2; N0 = {}, nbar = {}",
            p.n0, p.nbar
        )))
    }
}

/// Closed-form minimum over time of the undepleted EPR parameter.
pub fn epr_min_ud<T: Real>(p: &UndepletedParams<T>) -> Result<T> {
    check_min_precondition(p)?;
    let s = p.s();
    let two = T::of(2.0);
    let root2n = (two * p.n0).sqrt();
    let den = (p.n0 / two).sqrt() - s - (s * s * s - (s * s + T::one()) * root2n) / (two * p.n0);
    if !(den > T::zero()) {
        return Err(Error::FormulaBreakdown(format!(
            "minimum-EPR denominator {den} <= 0 at N0 = {}, nbar = {}",
            p.n0, p.nbar
        )));
    }
    let inner = root2n / den - two;
    Ok(inner * inner)
}

/// Closed-form time of the undepleted EPR minimum.
pub fn tau_min_ud<T: Real>(p: &UndepletedParams<T>) -> Result<T> {
    check_min_precondition(p)?;
    let s = p.s();
    let half = T::of(0.5);
    let arg = -half * s + half * (s * s + T::of(2.0) * p.n0).sqrt();
    if !(arg >= T::one()) {
        return Err(Error::FormulaBreakdown(format!(
            "arccosh argument {arg} < 1"
        )));
    }
    Ok(arg.acosh() / (T::of(2.0) * p.n0))
}

/// `2(1 + 2 nbar)[cosh(2 N0 tau) - sinh(2 N0 tau)]`.
pub fn two_mode_var_ud<T: Real>(p: &UndepletedParams<T>, tau: T) -> Result<T> {
    check_tau(tau)?;
    let x = T::of(2.0) * p.n0 * tau;
    Ok(T::of(2.0) * p.s() * (x.cosh() - x.sinh()))
}

/// `1 - tanh(2 N0 tau)`; the seed does not enter.
pub fn insep_ud<T: Real>(p: &UndepletedParams<T>, tau: T) -> Result<T> {
    check_tau(tau)?;
    Ok(T::one() - (T::of(2.0) * p.n0 * tau).tanh())
}

/// Empirical large-N0 fit of the analytic threshold, `0.05 N0^(2/3)`.
pub fn nth_max_fit_ud<T: Real>(n0: T) -> T {
    T::of(0.05) * n0.powf(T::of(2.0 / 3.0))
}

/// Thermal occupation at which the closed-form minimum EPR parameter reaches 1,
/// by bisection to absolute tolerance `tol`.
pub fn nth_max_ud<T: Real>(n0: T, tol: T) -> Result<T> {
    if !(tol > T::zero()) {
        return Err(Error::invalid(format!("tolerance {tol} must be > 0")));
    }
    let f = |nbar: T| -> Option<T> {
        let p = UndepletedParams::new(n0, nbar).ok()?;
        epr_min_ud(&p).ok().map(|v| v - T::one())
    };
    let f0 = f(T::zero())
        .ok_or_else(|| Error::RootNotFound(format!("formula undefined at nbar = 0, N0 = {n0}")))?;
    if f0 >= T::zero() {
        return Err(Error::RootNotFound(format!(
            "no EPR violation at nbar = 0 for N0 = {n0}"
        )));
    }
    // precondition N0 > (1 + 2 nbar)^2 bounds the search
    let limit = (n0.sqrt() - T::one()) / T::of(2.0);
    let scan = 512;
    let mut lo = T::zero();
    let mut hi = None;
    for i in 1..=scan {
        let x = limit * T::of_usize(i) / T::of_usize(scan + 1);
        match f(x) {
            Some(v) if v < T::zero() => lo = x,
            _ => {
                hi = Some(x);
                break;
            }
        }
    }
    let mut hi =
        hi.ok_or_else(|| Error::RootNotFound(format!("no sign change below nbar = {limit}")))?;
    while hi - lo > tol {
        let mid = (lo + hi) / T::of(2.0);
        match f(mid) {
            Some(v) if v < T::zero() => lo = mid,
            _ => hi = mid,
        }
    }
    Ok((lo + hi) / T::of(2.0))
}

/// Moments of the undepleted model: constant coherent pump `sqrt(N0)` (real),
/// two-mode squeezed thermal signal/idler. Gaussian factorization supplies the
/// fourth-order entries.
pub fn moments_ud<T: Real>(p: &UndepletedParams<T>, tau: T) -> Result<MomentSet<T>> {
    let n = population_ud(p, tau)?;
    let m = anomalous_ud(p, tau)?;
    let n0 = p.n0;
    let a0 = Complex::new(n0.sqrt(), T::zero());
    let re = |x: T| Complex::new(x, T::zero());
    Ok(MomentSet::from_fn(|id| {
        use MomentId::*;
        let v = match id {
            A0 => a0,
            N0 | A0A0 => re(n0),
            N0N0 => re(n0 * n0),
            Np | Nm => re(n),
            ApAm => m,
            PairPump => m.conj() * n0,
            NpN0 | NmN0 => re(n * n0),
            NpNm => re(n * n + m.norm_sqr()),
            _ => czero(),
        };
        Moment::exact(v)
    }))
}
