//! Exact evolution in the zero-magnetization manifold.
//!
//! Total atom number `N` and magnetization `n_{+1} - n_{-1}` are conserved, so for
//! a coherent pump with empty signal/idler modes the state lives on kets
//! `|N - 2k, k, k>`. Each fixed-`N` block is a real symmetric tridiagonal matrix
//! and is propagated through its eigendecomposition.

pub mod dense;
pub mod fock;

use std::io::Write;

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{ModelParams, Moment, MomentSet, Monomial, SeedKind};
use crate::scalar::{cis, creal, czero, Real};
use crate::tridiag::{eigh_tridiagonal, tridiag_norm, SymTridiagEigen};

pub use dense::{dense_oracle, dense_oracle_with, DenseOptions, DenseSystem, Integrator};

/// Default omitted Poisson weight of the pump number distribution.
pub const DEFAULT_EPSILON_CUT: f64 = 1e-12;
/// Default ceiling on the largest retained pump sector.
pub const DEFAULT_MAX_SECTOR: usize = 100_000;

/// Hamiltonian block of fixed total number `n` on kets `|n - 2k, k, k>`,
/// `k = 0..=n/2`, in units of `hbar g`.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorHamiltonian<T> {
    pub n: usize,
    pub diag: Vec<T>,
    /// `offdiag[k]` couples `k` and `k + 1`.
    pub offdiag: Vec<T>,
}

/// Builds the block for total number `n`.
///
/// Diagonal: `n0 (n1 + n-1) - q (n1 + n-1) = 2k(n - 2k) - 2k q/g`.
/// Off-diagonal: `<n-2k-2, k+1, k+1| a1^dag a-1^dag a0 a0 |n-2k, k, k> = (k+1) sqrt((n-2k)(n-2k-1))`.
pub fn build_sector<T: Real>(n: usize, params: &ModelParams<T>) -> SectorHamiltonian<T> {
    let kmax = n / 2;
    let q = params.q_over_g;
    let diag = (0..=kmax)
        .map(|k| {
            let pairs = T::of_usize(2 * k);
            let pump = T::of_usize(n - 2 * k);
            pairs * pump - q * pairs
        })
        .collect();
    let offdiag = (0..kmax)
        .map(|k| {
            let pump = T::of_usize(n - 2 * k);
            T::of_usize(k + 1) * (pump * (pump - T::one())).sqrt()
        })
        .collect();
    SectorHamiltonian { n, diag, offdiag }
}

impl<T: Real> SectorHamiltonian<T> {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn eigen(&self) -> Result<SymTridiagEigen<T>> {
        eigh_tridiagonal(&self.diag, &self.offdiag).map_err(|e| match e {
            Error::NumericalFailure { detail, .. } => Error::numerical(
                format!("eigendecomposition of sector n = {}", self.n),
                detail,
            ),
            other => other,
        })
    }

    pub fn norm(&self) -> T {
        tridiag_norm(&self.diag, &self.offdiag)
    }
}

/// Exact state as amplitudes `c_{n,k}` on `|n - 2k, k, k>` for `n_min <= n <= n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorState<T> {
    n_min: usize,
    sectors: Vec<Vec<Complex<T>>>,
    pub time: T,
}

impl<T: Real> SectorState<T> {
    /// State from explicit sector amplitudes; `sectors[i]` holds `n = n_min + i`
    /// and must have length `(n_min + i) / 2 + 1`.
    pub fn from_sectors(n_min: usize, sectors: Vec<Vec<Complex<T>>>, time: T) -> Result<Self> {
        for (i, s) in sectors.iter().enumerate() {
            let n = n_min + i;
            if s.len() != n / 2 + 1 {
                return Err(Error::invalid(format!(
                    "sector n = {n} needs {} amplitudes, got {}",
                    n / 2 + 1,
                    s.len()
                )));
            }
        }
        Ok(Self {
            n_min,
            sectors,
            time,
        })
    }

    /// Single Fock ket `|n - 2k, k, k>`.
    pub fn basis_ket(n: usize, k: usize) -> Result<Self> {
        if k > n / 2 {
            return Err(Error::invalid(format!(
                "pair index {k} exceeds n/2 for n = {n}"
            )));
        }
        let mut amps = vec![czero(); n / 2 + 1];
        amps[k] = creal(T::one());
        Self::from_sectors(n, vec![amps], T::zero())
    }

    pub fn n_min(&self) -> usize {
        self.n_min
    }

    pub fn n_max(&self) -> usize {
        self.n_min + self.sectors.len().saturating_sub(1)
    }

    pub fn sectors(&self) -> impl Iterator<Item = (usize, &[Complex<T>])> {
        self.sectors
            .iter()
            .enumerate()
            .map(move |(i, s)| (self.n_min + i, s.as_slice()))
    }

    pub fn sector(&self, n: usize) -> Option<&[Complex<T>]> {
        n.checked_sub(self.n_min)
            .and_then(|i| self.sectors.get(i))
            .map(Vec::as_slice)
    }

    #[inline]
    pub fn amplitude(&self, n: usize, k: usize) -> Complex<T> {
        self.sector(n)
            .and_then(|s| s.get(k).copied())
            .unwrap_or_else(czero)
    }

    pub fn sector_norms(&self) -> Vec<T> {
        self.sectors
            .iter()
            .map(|s| s.iter().map(|c| c.norm_sqr()).sum())
            .collect()
    }

    pub fn norm_sqr(&self) -> T {
        self.sector_norms().into_iter().sum()
    }

    /// Mean number of atoms in each signal/idler mode.
    pub fn pair_population(&self) -> T {
        self.sectors()
            .map(|(_, s)| {
                s.iter()
                    .enumerate()
                    .map(|(k, c)| T::of_usize(k) * c.norm_sqr())
                    .sum::<T>()
            })
            .sum()
    }

    /// Writes `n,k,amplitude_re,amplitude_im` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,k,re,im")?;
        for (n, s) in self.sectors() {
            for (k, c) in s.iter().enumerate() {
                writeln!(w, "{n},{k},{},{}", c.re, c.im)?;
            }
        }
        Ok(())
    }
}

/// Range of pump sectors holding all but `epsilon_cut` of the Poisson weight of
/// mean `n0`.
pub fn poisson_sector_range<T: Real>(
    n0: T,
    epsilon_cut: T,
    max_n: usize,
) -> Result<(usize, usize)> {
    if !(epsilon_cut > T::zero() && epsilon_cut < T::one()) {
        return Err(Error::invalid(format!(
            "epsilon_cut = {epsilon_cut} must lie in (0, 1)"
        )));
    }
    let weights = poisson_weights(n0, epsilon_cut, max_n)?;
    let half = epsilon_cut / T::of(2.0);
    let mut lower = T::zero();
    let mut n_min = 0;
    while n_min + 1 < weights.len() && lower + weights[n_min] <= half {
        lower += weights[n_min];
        n_min += 1;
    }
    let mut upper = T::zero();
    let mut n_max = weights.len() - 1;
    while n_max > n_min && upper + weights[n_max] <= half {
        upper += weights[n_max];
        n_max -= 1;
    }
    Ok((n_min, n_max))
}

// Poisson pmf on 0..=U with U large enough that the tail beyond U is negligible
// against epsilon.
fn poisson_weights<T: Real>(n0: T, epsilon_cut: T, max_n: usize) -> Result<Vec<T>> {
    let ln_n0 = n0.ln();
    let mut weights = Vec::new();
    let mut ln_fact = T::zero();
    let floor = epsilon_cut * T::of(1e-6);
    let mut n = 0usize;
    loop {
        if n > 0 {
            ln_fact += T::of_usize(n).ln();
        }
        let w = (T::of_usize(n) * ln_n0 - n0 - ln_fact).exp();
        weights.push(w);
        if T::of_usize(n) > T::of(2.0) * n0 + T::one() && w < floor {
            break;
        }
        n += 1;
        if n > max_n {
            return Err(Error::ResourceLimit {
                what: "pump sector cutoff",
                needed: n,
                ceiling: max_n,
            });
        }
    }
    Ok(weights)
}

/// Coherent pump `|alpha_0 = sqrt(N0)>` with empty signal/idler modes, truncated
/// so that the omitted Poisson weight is below `epsilon_cut`.
pub fn init_coherent_pump<T: Real>(
    params: &ModelParams<T>,
    epsilon_cut: T,
) -> Result<SectorState<T>> {
    init_coherent_pump_with_ceiling(params, epsilon_cut, DEFAULT_MAX_SECTOR)
}

pub fn init_coherent_pump_with_ceiling<T: Real>(
    params: &ModelParams<T>,
    epsilon_cut: T,
    max_n: usize,
) -> Result<SectorState<T>> {
    check_vacuum_seed(params)?;
    let (n_min, n_max) = poisson_sector_range(params.n0_mean, epsilon_cut, max_n)?;
    init_coherent_pump_range(params, n_min, n_max)
}

/// Coherent pump restricted to sectors `n_min..=n_max`, renormalized.
pub fn init_coherent_pump_range<T: Real>(
    params: &ModelParams<T>,
    n_min: usize,
    n_max: usize,
) -> Result<SectorState<T>> {
    check_vacuum_seed(params)?;
    if n_min > n_max {
        return Err(Error::invalid(format!(
            "empty sector range {n_min}..={n_max}"
        )));
    }
    let n0 = params.n0_mean;
    let ln_n0 = n0.ln();
    let mut ln_fact = T::zero();
    let mut amps = Vec::with_capacity(n_max - n_min + 1);
    for n in 0..=n_max {
        if n > 0 {
            ln_fact += T::of_usize(n).ln();
        }
        if n >= n_min {
            // c_{n,0} = e^{-N0/2} N0^{n/2} / sqrt(n!)
            let ln_w = T::of_usize(n) * ln_n0 - n0 - ln_fact;
            amps.push((ln_w / T::of(2.0)).exp());
        }
    }
    let norm = amps.iter().map(|a| *a * *a).sum::<T>().sqrt();
    let sectors = amps
        .into_iter()
        .enumerate()
        .map(|(i, a)| {
            let n = n_min + i;
            let mut s = vec![czero(); n / 2 + 1];
            s[0] = creal(a / norm);
            s
        })
        .collect();
    SectorState::from_sectors(n_min, sectors, T::zero())
}

fn check_vacuum_seed<T: Real>(params: &ModelParams<T>) -> Result<()> {
    params.validate()?;
    match params.seed.kind {
        SeedKind::Vacuum => Ok(()),
        other => Err(Error::Routing {
            backend: "exact",
            seed: other.as_str(),
        }),
    }
}

/// Per-sector eigendecompositions of a state's blocks, reusable across a time grid.
#[derive(Debug, Clone)]
pub struct SectorPropagator<T> {
    n_min: usize,
    start: T,
    blocks: Vec<Block<T>>,
}

#[derive(Debug, Clone)]
struct Block<T> {
    eigen: SymTridiagEigen<T>,
    /// `V^T c(start)`.
    projected: Vec<Complex<T>>,
}

impl<T: Real> SectorPropagator<T> {
    pub fn new(state: &SectorState<T>, params: &ModelParams<T>) -> Result<Self> {
        params.validate()?;
        let blocks = state
            .sectors
            .par_iter()
            .enumerate()
            .map(|(i, amps)| {
                let n = state.n_min + i;
                let h = build_sector(n, params);
                let eigen = h.eigen()?;
                let dim = eigen.n;
                let projected = (0..dim)
                    .map(|k| (0..dim).fold(czero(), |acc, j| acc + amps[j] * eigen.vector(j, k)))
                    .collect();
                Ok(Block { eigen, projected })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n_min: state.n_min,
            start: state.time,
            blocks,
        })
    }

    /// `c(tau) = V e^{-i Lambda (tau - t0)} V^T c(t0)` in every sector.
    pub fn state_at(&self, tau: T) -> SectorState<T> {
        let dt = tau - self.start;
        let sectors = self
            .blocks
            .iter()
            .map(|b| {
                let dim = b.eigen.n;
                let phased: Vec<Complex<T>> = (0..dim)
                    .map(|k| b.projected[k] * cis(-b.eigen.values[k] * dt))
                    .collect();
                (0..dim)
                    .map(|j| {
                        (0..dim).fold(czero(), |acc, k| acc + phased[k] * b.eigen.vector(j, k))
                    })
                    .collect()
            })
            .collect();
        SectorState {
            n_min: self.n_min,
            sectors,
            time: tau,
        }
    }

    /// Writes `n,k,eigenvalue` rows for every block.
    pub fn write_spectra_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,k,eigenvalue")?;
        for (i, b) in self.blocks.iter().enumerate() {
            for (k, lam) in b.eigen.values.iter().enumerate() {
                writeln!(w, "{},{k},{lam}", self.n_min + i)?;
            }
        }
        Ok(())
    }
}

/// Checks that `grid` is strictly increasing and does not start before `start`.
pub(crate) fn check_grid<T: Real>(grid: &[T], start: T) -> Result<()> {
    if let Some(&first) = grid.first() {
        if !(first >= start) {
            return Err(Error::invalid(format!(
                "tau grid starts at {first}, before state time {start}"
            )));
        }
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("tau grid must be strictly increasing"));
    }
    Ok(())
}

/// Propagates `state` to every time in `tau_grid`.
pub fn evolve_exact<T: Real>(
    state: &SectorState<T>,
    params: &ModelParams<T>,
    tau_grid: &[T],
) -> Result<Vec<SectorState<T>>> {
    check_grid(tau_grid, state.time)?;
    if tau_grid.is_empty() {
        return Ok(Vec::new());
    }
    let prop = SectorPropagator::new(state, params)?;
    Ok(tau_grid.par_iter().map(|&t| prop.state_at(t)).collect())
}

/// Exact moments by sequential ladder application on the sector amplitudes.
pub fn moments_exact<T: Real>(state: &SectorState<T>) -> MomentSet<T> {
    let mut out = MomentSet::from_fn(|id| Moment::exact(expect_monomial(state, id.monomial())));
    out.zero_magnetization_changing();
    out
}

/// `<psi| M |psi>` for a normal-ordered monomial.
pub fn expect_monomial<T: Real>(state: &SectorState<T>, m: Monomial) -> Complex<T> {
    if m.magnetization_change() != 0 {
        return czero();
    }
    let mut acc = czero();
    for (n, amps) in state.sectors() {
        for (k, &c) in amps.iter().enumerate() {
            if c == czero() {
                continue;
            }
            let occ = [n - 2 * k, k, k];
            let Some((target, coef)) = apply_monomial::<T>(m, occ) else {
                continue;
            };
            debug_assert_eq!(target[1], target[2]);
            let tn = target[0] + 2 * target[1];
            let tc = state.amplitude(tn, target[1]);
            acc = acc + tc.conj() * c * coef;
        }
    }
    acc
}

/// Image of a Fock ket under a normal-ordered monomial.
fn apply_monomial<T: Real>(m: Monomial, occ: [usize; 3]) -> Option<([usize; 3], T)> {
    let mut coef = T::one();
    let mut out = occ;
    for j in 0..3 {
        let d = m.annihilate[j] as usize;
        if out[j] < d {
            return None;
        }
        for _ in 0..d {
            coef *= T::of_usize(out[j]).sqrt();
            out[j] -= 1;
        }
    }
    for j in 0..3 {
        for _ in 0..m.create[j] {
            out[j] += 1;
            coef *= T::of_usize(out[j]).sqrt();
        }
    }
    Some((out, coef))
}
