//! Dimensionless model parameters, seed specifications and the moment contract
//! shared by every solver backend.
//!
//! Time is `tau = g t` and energies are in units of `hbar g`. The three modes
//! are the pump (`m_F = 0`) and the signal/idler pair (`m_F = +1`, `m_F = -1`).

use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cis, czero, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedKind {
    Vacuum,
    Thermal,
    Coherent,
}

impl SeedKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SeedKind::Vacuum => "vacuum",
            SeedKind::Thermal => "thermal",
            SeedKind::Coherent => "coherent",
        }
    }
}

impl fmt::Display for SeedKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SeedKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "vacuum" => Ok(SeedKind::Vacuum),
            "thermal" => Ok(SeedKind::Thermal),
            "coherent" => Ok(SeedKind::Coherent),
            other => Err(Error::invalid(format!("unknown seed kind '{other}'"))),
        }
    }
}

/// Initial state of the signal/idler pair. Both modes always carry the same
/// seed; coherent seeds share the (real) phase of the pump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedSpec<T> {
    pub kind: SeedKind,
    /// Mean thermal occupation per mode (thermal only).
    pub nbar_th: T,
    /// Coherent seed population `|alpha_{+-1}(0)|^2` (coherent only).
    pub alpha_seed_sq: T,
}

impl<T: Real> SeedSpec<T> {
    pub fn vacuum() -> Self {
        Self {
            kind: SeedKind::Vacuum,
            nbar_th: T::zero(),
            alpha_seed_sq: T::zero(),
        }
    }

    pub fn thermal(nbar_th: T) -> Self {
        Self {
            kind: SeedKind::Thermal,
            nbar_th,
            alpha_seed_sq: T::zero(),
        }
    }

    pub fn coherent(alpha_seed_sq: T) -> Self {
        Self {
            kind: SeedKind::Coherent,
            nbar_th: T::zero(),
            alpha_seed_sq,
        }
    }

    /// Thermal occupation actually in effect (zero unless the seed is thermal).
    pub fn effective_nbar(&self) -> T {
        match self.kind {
            SeedKind::Thermal => self.nbar_th,
            _ => T::zero(),
        }
    }

    /// Coherent seed amplitude actually in effect (zero unless coherent).
    pub fn effective_alpha(&self) -> T {
        match self.kind {
            SeedKind::Coherent => self.alpha_seed_sq.sqrt(),
            _ => T::zero(),
        }
    }

    /// True when the seed keeps the state in the zero-magnetization manifold.
    pub fn is_unpolarized(&self) -> bool {
        !matches!(self.kind, SeedKind::Coherent) || self.alpha_seed_sq == T::zero()
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: T| x.is_finite() && x >= T::zero();
        if !ok(self.nbar_th) {
            return Err(Error::invalid(format!(
                "nbar_th = {} must be >= 0",
                self.nbar_th
            )));
        }
        if !ok(self.alpha_seed_sq) {
            return Err(Error::invalid(format!(
                "alpha_seed_sq = {} must be >= 0",
                self.alpha_seed_sq
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<T> {
    /// Initial mean pump population `N0`.
    pub n0_mean: T,
    /// Quadratic Zeeman (plus dressing) shift in units of `g`.
    pub q_over_g: T,
    /// Linear Zeeman shift in units of `g`; solvers only accept zero.
    pub p_over_g: T,
    pub seed: SeedSpec<T>,
}

impl<T: Real> ModelParams<T> {
    pub fn new(n0_mean: T, q_over_g: T, seed: SeedSpec<T>) -> Self {
        Self {
            n0_mean,
            q_over_g,
            p_over_g: T::zero(),
            seed,
        }
    }

    /// Parameters with `q/g = N0`. `N0` is not validated here; evolution
    /// entry points check it.
    pub fn matched(n0_mean: T, seed: SeedSpec<T>) -> Self {
        Self::new(n0_mean, n0_mean, seed)
    }

    pub fn with_seed(mut self, seed: SeedSpec<T>) -> Self {
        self.seed = seed;
        self
    }

    /// Checks everything an evolution run requires.
    pub fn validate(&self) -> Result<()> {
        if !(self.n0_mean.is_finite() && self.n0_mean > T::zero()) {
            return Err(Error::invalid(format!("N0 = {} must be > 0", self.n0_mean)));
        }
        if !self.q_over_g.is_finite() {
            return Err(Error::invalid("q/g must be finite"));
        }
        if self.p_over_g != T::zero() {
            return Err(Error::UnsupportedLinearZeeman(self.p_over_g.to_f64_lossy()));
        }
        self.seed.validate()
    }
}

/// Phase-matching choice `q/g = N0`.
pub fn phase_matched_q<T: Real>(n0_mean: T) -> Result<T> {
    if !(n0_mean.is_finite() && n0_mean > T::zero()) {
        return Err(Error::invalid(format!("N0 = {n0_mean} must be > 0")));
    }
    Ok(n0_mean)
}

/// Squeezing parameter `r = N0 tau` of the undepleted-pump model.
pub fn squeezing_parameter<T: Real>(n0_mean: T, tau: T) -> Result<T> {
    if !(tau >= T::zero()) {
        return Err(Error::invalid(format!("tau = {tau} must be >= 0")));
    }
    Ok(n0_mean * tau)
}

/// Mode labels in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    Pump,
    Plus,
    Minus,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Pump, Mode::Plus, Mode::Minus];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            Mode::Pump => 0,
            Mode::Plus => 1,
            Mode::Minus => 2,
        }
    }
}

/// One of the two signal/idler modes, `m_F = +1` or `m_F = -1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Signal {
    Plus,
    Minus,
}

impl Signal {
    pub const BOTH: [Signal; 2] = [Signal::Plus, Signal::Minus];

    pub fn partner(self) -> Signal {
        match self {
            Signal::Plus => Signal::Minus,
            Signal::Minus => Signal::Plus,
        }
    }

    pub fn mode(self) -> Mode {
        match self {
            Signal::Plus => Mode::Plus,
            Signal::Minus => Mode::Minus,
        }
    }

    /// Sign of the vacuum port in the LO beam splitter, `b_j = (a0 +- a_vac)/sqrt 2`.
    pub fn port_sign(self) -> i8 {
        match self {
            Signal::Plus => 1,
            Signal::Minus => -1,
        }
    }
}

/// Normal-ordered product `prod_j (a_j^dag)^create[j] prod_j (a_j)^annihilate[j]`
/// over modes in `Mode` storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub create: [u8; 3],
    pub annihilate: [u8; 3],
}

impl Monomial {
    pub const fn new(create: [u8; 3], annihilate: [u8; 3]) -> Self {
        Self { create, annihilate }
    }

    pub fn dagger(self) -> Self {
        Self::new(self.annihilate, self.create)
    }

    /// Change of `n_{+1} - n_{-1}` produced by the operator string.
    pub fn magnetization_change(self) -> i32 {
        let d = |i: usize| self.create[i] as i32 - self.annihilate[i] as i32;
        d(1) - d(2)
    }

    /// Change of total atom number.
    pub fn number_change(self) -> i32 {
        (0..3)
            .map(|i| self.create[i] as i32 - self.annihilate[i] as i32)
            .sum()
    }

    /// Relabels `+1 <-> -1`.
    pub fn swap_signals(self) -> Self {
        let s = |a: [u8; 3]| [a[0], a[2], a[1]];
        Self::new(s(self.create), s(self.annihilate))
    }

    /// Net creation count on the signal/idler modes; a phase rotation
    /// `a_{+-1} -> a_{+-1} e^{-i phi}` multiplies the moment by `e^{i phi * this}`.
    pub fn signal_phase_weight(self) -> i32 {
        (self.create[1] + self.create[2]) as i32 - (self.annihilate[1] + self.annihilate[2]) as i32
    }

    pub fn order(self) -> u32 {
        self.create
            .iter()
            .chain(self.annihilate.iter())
            .map(|&c| c as u32)
            .sum()
    }
}

macro_rules! moment_ids {
    ($( $id:ident => ([$($c:expr),*], [$($a:expr),*]), $label:expr; )*) => {
        /// Entries of a [`MomentSet`]. One representative of each Hermitian pair is stored.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
        pub enum MomentId { $($id),* }

        impl MomentId {
            pub const ALL: &'static [MomentId] = &[$(MomentId::$id),*];
            pub const COUNT: usize = Self::ALL.len();

            pub fn monomial(self) -> Monomial {
                match self { $(MomentId::$id => Monomial::new([$($c),*], [$($a),*])),* }
            }

            pub fn label(self) -> &'static str {
                match self { $(MomentId::$id => $label),* }
            }

            #[inline]
            pub fn index(self) -> usize { self as usize }
        }
    };
}

// modes: [pump, +1, -1]
moment_ids! {
    A0 => ([0, 0, 0], [1, 0, 0]), "<a0>";
    Ap => ([0, 0, 0], [0, 1, 0]), "<a+>";
    Am => ([0, 0, 0], [0, 0, 1]), "<a->";
    N0 => ([1, 0, 0], [1, 0, 0]), "<a0^dag a0>";
    Np => ([0, 1, 0], [0, 1, 0]), "<a+^dag a+>";
    Nm => ([0, 0, 1], [0, 0, 1]), "<a-^dag a->";
    A0A0 => ([0, 0, 0], [2, 0, 0]), "<a0 a0>";
    ApAp => ([0, 0, 0], [0, 2, 0]), "<a+ a+>";
    AmAm => ([0, 0, 0], [0, 0, 2]), "<a- a->";
    ApAm => ([0, 0, 0], [0, 1, 1]), "<a+ a->";
    A0Ap => ([0, 0, 0], [1, 1, 0]), "<a0 a+>";
    A0Am => ([0, 0, 0], [1, 0, 1]), "<a0 a->";
    ApDagA0 => ([0, 1, 0], [1, 0, 0]), "<a+^dag a0>";
    AmDagA0 => ([0, 0, 1], [1, 0, 0]), "<a-^dag a0>";
    ApDagAm => ([0, 1, 0], [0, 0, 1]), "<a+^dag a->";
    PairPump => ([0, 1, 1], [2, 0, 0]), "<a+^dag a-^dag a0 a0>";
    NpN0 => ([1, 1, 0], [1, 1, 0]), "<a+^dag a+ a0^dag a0>";
    NmN0 => ([1, 0, 1], [1, 0, 1]), "<a-^dag a- a0^dag a0>";
    NpNm => ([0, 1, 1], [0, 1, 1]), "<a+^dag a+ a-^dag a->";
    Ap2Pump => ([0, 2, 0], [2, 0, 0]), "<a+^dag2 a0^2>";
    Am2Pump => ([0, 0, 2], [2, 0, 0]), "<a-^dag2 a0^2>";
    N0N0 => ([2, 0, 0], [2, 0, 0]), "<a0^dag2 a0^2>";
    ApDagAmN0 => ([1, 1, 0], [1, 0, 1]), "<a+^dag a- a0^dag a0>";
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Moment<T> {
    pub value: Complex<T>,
    /// Standard error of `value` (modulus of the complex error); zero for exact backends.
    pub stderr: T,
}

impl<T: Real> Moment<T> {
    pub fn exact(value: Complex<T>) -> Self {
        Self {
            value,
            stderr: T::zero(),
        }
    }
}

/// Equal-time normally-ordered moments up to fourth order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSet<T> {
    entries: Vec<Moment<T>>,
    /// Statistical-quality advisories attached by Monte Carlo backends.
    pub warnings: Vec<String>,
}

impl<T: Real> MomentSet<T> {
    /// Builds a set by evaluating every entry through `f`.
    pub fn from_fn(mut f: impl FnMut(MomentId) -> Moment<T>) -> Self {
        let entries = MomentId::ALL.iter().map(|&id| f(id)).collect();
        Self {
            entries,
            warnings: Vec::new(),
        }
    }

    pub fn zeros() -> Self {
        Self::from_fn(|_| Moment::default())
    }

    #[inline]
    pub fn get(&self, id: MomentId) -> Moment<T> {
        self.entries[id.index()]
    }

    #[inline]
    pub fn value(&self, id: MomentId) -> Complex<T> {
        self.entries[id.index()].value
    }

    #[inline]
    pub fn real(&self, id: MomentId) -> T {
        self.entries[id.index()].value.re
    }

    pub fn set(&mut self, id: MomentId, m: Moment<T>) {
        self.entries[id.index()] = m;
    }

    pub fn iter(&self) -> impl Iterator<Item = (MomentId, Moment<T>)> + '_ {
        MomentId::ALL.iter().map(move |&id| (id, self.get(id)))
    }

    /// Expectation of any normal-ordered monomial stored directly or through its
    /// Hermitian partner.
    pub fn expect(&self, m: Monomial) -> Option<Complex<T>> {
        MomentId::ALL.iter().find_map(|&id| {
            let stored = id.monomial();
            if stored == m {
                Some(self.value(id))
            } else if stored.dagger() == m {
                Some(self.value(id).conj())
            } else {
                None
            }
        })
    }

    /// Hermitian partner of an entry, `<O^dag> = <O>^*`.
    pub fn partner(&self, id: MomentId) -> Complex<T> {
        self.value(id).conj()
    }

    pub fn signal_population(&self, j: Signal) -> T {
        match j {
            Signal::Plus => self.real(MomentId::Np),
            Signal::Minus => self.real(MomentId::Nm),
        }
    }

    pub fn pump_population(&self) -> T {
        self.real(MomentId::N0)
    }

    /// Same physical state with the signal and idler labels exchanged.
    pub fn swap_signal_idler(&self) -> Self {
        let mut out = self.clone();
        for &id in MomentId::ALL {
            let target = id.monomial().swap_signals();
            let (src, conj) = lookup(target).expect("moment set closed under +1 <-> -1");
            let m = self.get(src);
            let value = if conj { m.value.conj() } else { m.value };
            out.set(
                id,
                Moment {
                    value,
                    stderr: m.stderr,
                },
            );
        }
        out
    }

    /// Moments after `a_{+-1} -> a_{+-1} e^{-i phi}`: anomalous pair moments
    /// pick up `e^{2 i phi}`.
    pub fn rotate_signal_phase(&self, phi: T) -> Self {
        let mut out = self.clone();
        for &id in MomentId::ALL {
            let w = id.monomial().signal_phase_weight();
            if w != 0 {
                let mut m = self.get(id);
                m.value = m.value * cis(phi * T::of(w as f64));
                out.set(id, m);
            }
        }
        out
    }

    /// Largest deviation `|a - b|` over all entries.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a.value - b.value).norm())
            .fold(T::zero(), T::max)
    }

    pub fn cast<U: Real>(&self) -> MomentSet<U> {
        MomentSet {
            entries: self
                .entries
                .iter()
                .map(|m| Moment {
                    value: Complex::new(
                        U::of(m.value.re.to_f64_lossy()),
                        U::of(m.value.im.to_f64_lossy()),
                    ),
                    stderr: U::of(m.stderr.to_f64_lossy()),
                })
                .collect(),
            warnings: self.warnings.clone(),
        }
    }

    /// Entries that must vanish in the zero-magnetization manifold.
    pub fn magnetization_changing(&self) -> impl Iterator<Item = (MomentId, Moment<T>)> + '_ {
        self.iter()
            .filter(|(id, _)| id.monomial().magnetization_change() != 0)
    }

    pub(crate) fn zero_magnetization_changing(&mut self) {
        for &id in MomentId::ALL {
            if id.monomial().magnetization_change() != 0 {
                self.set(id, Moment::exact(czero()));
            }
        }
    }
}

fn lookup(m: Monomial) -> Option<(MomentId, bool)> {
    MomentId::ALL.iter().find_map(|&id| {
        let stored = id.monomial();
        if stored == m {
            Some((id, false))
        } else if stored.dagger() == m {
            Some((id, true))
        } else {
            None
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_matching_is_identity_on_n0() {
        assert_eq!(phase_matched_q(175.0).unwrap(), 175.0);
        assert_eq!(phase_matched_q(275.0).unwrap(), 275.0);
        assert!(matches!(
            phase_matched_q(0.0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(phase_matched_q(-3.0).is_err());
    }

    #[test]
    fn squeezing_parameter_values() {
        assert!((squeezing_parameter(275.0f64, 0.0073).unwrap() - 2.0075).abs() < 1e-12);
        assert_eq!(squeezing_parameter(175.0, 0.0).unwrap(), 0.0);
        assert!((squeezing_parameter(175.0f64, 0.0073).unwrap() - 1.2775).abs() < 1e-12);
        assert!(squeezing_parameter(175.0, -1e-3).is_err());
    }

    #[test]
    fn params_reject_nonzero_linear_zeeman() {
        let mut p = ModelParams::matched(175.0, SeedSpec::vacuum());
        assert!(p.validate().is_ok());
        p.p_over_g = 0.5;
        assert!(matches!(
            p.validate(),
            Err(Error::UnsupportedLinearZeeman(_))
        ));
        let p = ModelParams::matched(0.0, SeedSpec::<f64>::vacuum());
        assert!(p.validate().is_err());
        let p = ModelParams::matched(10.0, SeedSpec::thermal(-1.0));
        assert!(p.validate().is_err());
    }

    #[test]
    fn moment_table_closed_under_relabeling_and_conjugation() {
        for &id in MomentId::ALL {
            assert!(lookup(id.monomial().swap_signals()).is_some(), "{id:?}");
            assert!(lookup(id.monomial().dagger()).is_some(), "{id:?}");
        }
        assert_eq!(MomentId::COUNT, 23);
    }

    #[test]
    fn selection_rule_classification() {
        let changing: Vec<_> = MomentId::ALL
            .iter()
            .filter(|id| id.monomial().magnetization_change() != 0)
            .copied()
            .collect();
        use MomentId::*;
        assert_eq!(
            changing,
            vec![
                Ap, Am, ApAp, AmAm, A0Ap, A0Am, ApDagA0, AmDagA0, ApDagAm, Ap2Pump, Am2Pump,
                ApDagAmN0
            ]
        );
    }

    #[test]
    fn swap_and_rotation() {
        let mut m = MomentSet::<f64>::zeros();
        m.set(MomentId::Np, Moment::exact(Complex::new(2.0, 0.0)));
        m.set(MomentId::ApDagAm, Moment::exact(Complex::new(0.3, 0.4)));
        m.set(MomentId::PairPump, Moment::exact(Complex::new(1.0, 0.0)));
        let s = m.swap_signal_idler();
        assert_eq!(s.real(MomentId::Nm), 2.0);
        assert_eq!(s.value(MomentId::ApDagAm), Complex::new(0.3, -0.4));
        assert_eq!(s.swap_signal_idler(), m);
        let r = m.rotate_signal_phase(0.25);
        let expected = cis(0.5);
        assert!((r.value(MomentId::PairPump) - expected).norm() < 1e-15);
        assert_eq!(r.real(MomentId::Np), 2.0);
        assert_eq!(
            m.expect(MomentId::PairPump.monomial().dagger()),
            Some(Complex::new(1.0, -0.0))
        );
    }
}
