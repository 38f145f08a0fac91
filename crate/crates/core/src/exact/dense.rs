//! Brute-force validation backend on the full three-mode Fock space.
//!
//! The Hamiltonian is assembled by applying every ladder string of the
//! interaction, elastic and Zeeman terms to every basis ket, with no use of the
//! conserved quantities. States are propagated by a Taylor-series exponential or
//! by fine-step RK4; the two integrators check each other.

use num_complex::Complex;
use rayon::prelude::*;

use super::fock::{coherent_amplitudes, number_amplitudes, FockBasis, Ladder, SparseMatrix};
use crate::error::{Error, Result};
use crate::model::{ModelParams, Moment, MomentId, MomentSet, Monomial, SeedKind};
use crate::scalar::{czero, Real};

const PUMP: usize = 0;
const PLUS: usize = 1;
const MINUS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    Taylor,
    Rk4,
}

#[derive(Debug, Clone, Copy)]
pub struct DenseOptions {
    pub integrator: Integrator,
    pub dim_ceiling: usize,
    /// Mixture components lighter than this are dropped (thermal seeds).
    pub mixture_floor: f64,
}

impl Default for DenseOptions {
    fn default() -> Self {
        Self {
            integrator: Integrator::Taylor,
            dim_ceiling: 50_000,
            mixture_floor: 1e-14,
        }
    }
}

/// Weighted pure-state component of a density matrix.
pub type Component<T> = (T, Vec<Complex<T>>);

pub struct DenseSystem<T> {
    basis: FockBasis,
    params: ModelParams<T>,
    hamiltonian: SparseMatrix<T>,
}

/// Terms of `H / (hbar g)` as (coefficient, ladder string).
fn hamiltonian_terms<T: Real>(params: &ModelParams<T>) -> Vec<(T, Vec<Ladder>)> {
    use Ladder::{Annihilate as A, Create as Cr};
    let q = params.q_over_g;
    let p = params.p_over_g;
    vec![
        (T::one(), vec![Cr(PUMP), Cr(PUMP), A(MINUS), A(PLUS)]),
        (T::one(), vec![Cr(PLUS), Cr(MINUS), A(PUMP), A(PUMP)]),
        (T::one(), vec![Cr(PUMP), A(PUMP), Cr(PLUS), A(PLUS)]),
        (T::one(), vec![Cr(PUMP), A(PUMP), Cr(MINUS), A(MINUS)]),
        (-p - q, vec![Cr(PLUS), A(PLUS)]),
        (p - q, vec![Cr(MINUS), A(MINUS)]),
    ]
}

fn monomial_ladders(m: Monomial) -> Vec<Ladder> {
    let mut ops = Vec::new();
    for j in 0..3 {
        ops.extend(std::iter::repeat(Ladder::Create(j)).take(m.create[j] as usize));
    }
    for j in 0..3 {
        ops.extend(std::iter::repeat(Ladder::Annihilate(j)).take(m.annihilate[j] as usize));
    }
    ops
}

impl<T: Real> DenseSystem<T> {
    pub fn new(params: &ModelParams<T>, n_cut: usize, dim_ceiling: usize) -> Result<Self> {
        let basis = FockBasis::new(3, n_cut, dim_ceiling)?;
        let terms = hamiltonian_terms(params);
        let rows = (0..basis.dim())
            .into_par_iter()
            .map(|col| {
                // column `col` of H, scattered into (row, value) pairs
                let occ = basis.occupations(col);
                let mut entries = Vec::new();
                for (coef, ops) in &terms {
                    if let Some((target, c)) = basis.apply_to_ket::<T>(ops, &occ) {
                        entries.push((basis.index(&target), *coef * c));
                    }
                }
                entries
            })
            .collect::<Vec<_>>();
        let mut by_row: Vec<Vec<(usize, T)>> = vec![Vec::new(); basis.dim()];
        for (col, entries) in rows.into_iter().enumerate() {
            for (row, v) in entries {
                if v != T::zero() {
                    by_row[row].push((col, v));
                }
            }
        }
        Ok(Self {
            hamiltonian: SparseMatrix::from_rows(basis.dim(), by_row),
            basis,
            params: *params,
        })
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn hamiltonian(&self) -> &SparseMatrix<T> {
        &self.hamiltonian
    }

    /// Initial density matrix of `params` as a mixture of pure product states.
    pub fn initial_mixture(&self, mixture_floor: T) -> Vec<Component<T>> {
        let cut = self.basis.cut();
        let zero = T::zero();
        let pump = coherent_amplitudes(Complex::new(self.params.n0_mean.sqrt(), zero), cut);
        let seed = self.params.seed;
        match seed.kind {
            SeedKind::Vacuum => {
                let v = number_amplitudes(0, cut);
                vec![(T::one(), self.basis.product_state(&[pump, v.clone(), v]))]
            }
            SeedKind::Coherent => {
                let s = coherent_amplitudes(Complex::new(seed.alpha_seed_sq.sqrt(), zero), cut);
                vec![(T::one(), self.basis.product_state(&[pump, s.clone(), s]))]
            }
            SeedKind::Thermal => {
                let nbar = seed.nbar_th;
                let mut p: Vec<T> = (0..=cut)
                    .map(|m| nbar.powi(m as i32) / (T::one() + nbar).powi(m as i32 + 1))
                    .collect();
                let total: T = p.iter().copied().sum();
                p.iter_mut().for_each(|x| *x /= total);
                let mut comps = Vec::new();
                for m1 in 0..=cut {
                    for m2 in 0..=cut {
                        let w = p[m1] * p[m2];
                        if w < mixture_floor {
                            continue;
                        }
                        let psi = self.basis.product_state(&[
                            pump.clone(),
                            number_amplitudes(m1, cut),
                            number_amplitudes(m2, cut),
                        ]);
                        comps.push((w, psi));
                    }
                }
                let wsum: T = comps.iter().map(|(w, _)| *w).sum();
                comps.iter_mut().for_each(|(w, _)| *w /= wsum);
                comps
            }
        }
    }

    pub fn evolve(&self, psi0: &[Complex<T>], tau: T, integrator: Integrator) -> Vec<Complex<T>> {
        match integrator {
            Integrator::Taylor => self.evolve_taylor(psi0, tau),
            Integrator::Rk4 => self.evolve_rk4(psi0, tau),
        }
    }

    fn evolve_taylor(&self, psi0: &[Complex<T>], tau: T) -> Vec<Complex<T>> {
        let norm = self.hamiltonian.norm_inf();
        let steps = (norm * tau.abs()).ceil().to_usize().unwrap_or(1).max(1);
        let h = tau / T::of_usize(steps);
        let dim = psi0.len();
        let mut psi = psi0.to_vec();
        let mut term = vec![czero(); dim];
        let mut next = vec![czero(); dim];
        let tiny = T::epsilon() * T::of(1e-3);
        let minus_i_h = Complex::new(T::zero(), -h);
        for _ in 0..steps {
            term.copy_from_slice(&psi);
            let mut acc = psi.clone();
            for k in 1..200 {
                self.hamiltonian.mul_vec(&term, &mut next);
                let scale = minus_i_h / T::of_usize(k);
                let mut size = T::zero();
                for (t, n) in term.iter_mut().zip(next.iter()) {
                    *t = *n * scale;
                    size = size.max(t.norm());
                }
                for (a, t) in acc.iter_mut().zip(term.iter()) {
                    *a = *a + *t;
                }
                if size < tiny {
                    break;
                }
            }
            psi = acc;
        }
        psi
    }

    fn evolve_rk4(&self, psi0: &[Complex<T>], tau: T) -> Vec<Complex<T>> {
        let norm = self.hamiltonian.norm_inf();
        let steps = (norm * tau.abs() / T::of(0.005))
            .ceil()
            .to_usize()
            .unwrap_or(1)
            .max(1);
        let h = tau / T::of_usize(steps);
        let dim = psi0.len();
        let mut psi = psi0.to_vec();
        let minus_i = Complex::new(T::zero(), -T::one());
        let f = |x: &[Complex<T>], out: &mut Vec<Complex<T>>| {
            self.hamiltonian.mul_vec(x, out);
            out.iter_mut().for_each(|v| *v = *v * minus_i);
        };
        let (mut k1, mut k2, mut k3, mut k4) = (
            vec![czero(); dim],
            vec![czero(); dim],
            vec![czero(); dim],
            vec![czero(); dim],
        );
        let mut tmp = vec![czero(); dim];
        let half = h / T::of(2.0);
        let sixth = h / T::of(6.0);
        let two = T::of(2.0);
        for _ in 0..steps {
            f(&psi, &mut k1);
            for i in 0..dim {
                tmp[i] = psi[i] + k1[i] * half;
            }
            f(&tmp, &mut k2);
            for i in 0..dim {
                tmp[i] = psi[i] + k2[i] * half;
            }
            f(&tmp, &mut k3);
            for i in 0..dim {
                tmp[i] = psi[i] + k3[i] * h;
            }
            f(&tmp, &mut k4);
            for i in 0..dim {
                psi[i] = psi[i] + (k1[i] + (k2[i] + k3[i]) * two + k4[i]) * sixth;
            }
        }
        psi
    }

    /// Expectation of a normal-ordered monomial in a mixture.
    pub fn expect(&self, m: Monomial, mixture: &[Component<T>]) -> Complex<T> {
        let ops = monomial_ladders(m);
        mixture.iter().fold(czero(), |acc, (w, psi)| {
            acc + self.basis.expect(&ops, psi) * *w
        })
    }

    /// Every moment evaluated literally, including magnetization-changing entries.
    pub fn moments(&self, mixture: &[Component<T>]) -> MomentSet<T> {
        MomentSet::from_fn(|id: MomentId| Moment::exact(self.expect(id.monomial(), mixture)))
    }

    /// Propagates each mixture component to `tau`.
    pub fn evolve_mixture(
        &self,
        mixture: &[Component<T>],
        tau: T,
        integrator: Integrator,
    ) -> Vec<Component<T>> {
        mixture
            .par_iter()
            .map(|(w, psi)| (*w, self.evolve(psi, tau, integrator)))
            .collect()
    }
}

/// Exact moments at `tau` from brute-force propagation with per-mode cutoff `n_cut`.
pub fn dense_oracle<T: Real>(
    params: &ModelParams<T>,
    tau: T,
    n_cut: usize,
) -> Result<MomentSet<T>> {
    dense_oracle_with(params, tau, n_cut, &DenseOptions::default())
}

pub fn dense_oracle_with<T: Real>(
    params: &ModelParams<T>,
    tau: T,
    n_cut: usize,
    opts: &DenseOptions,
) -> Result<MomentSet<T>> {
    params.validate()?;
    if !(tau >= T::zero()) {
        return Err(Error::invalid(format!("tau = {tau} must be >= 0")));
    }
    let sys = DenseSystem::new(params, n_cut, opts.dim_ceiling)?;
    let mixture = sys.initial_mixture(T::of(opts.mixture_floor));
    let evolved = if tau == T::zero() {
        mixture
    } else {
        sys.evolve_mixture(&mixture, tau, opts.integrator)
    };
    Ok(sys.moments(&evolved))
}
