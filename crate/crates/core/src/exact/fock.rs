//! Truncated multimode Fock space with literal ladder-operator application.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{czero, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    Create(usize),
    Annihilate(usize),
}

/// Product basis `|n_0, ..., n_{M-1}>` with `0 <= n_j <= cut` for each mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockBasis {
    modes: usize,
    cut: usize,
    dim: usize,
}

impl FockBasis {
    pub fn new(modes: usize, cut: usize, dim_ceiling: usize) -> Result<Self> {
        let dim = (cut + 1)
            .checked_pow(modes as u32)
            .filter(|&d| d <= dim_ceiling)
            .ok_or(Error::ResourceLimit {
                what: "dense Fock dimension",
                needed: (cut + 1).saturating_pow(modes as u32),
                ceiling: dim_ceiling,
            })?;
        Ok(Self { modes, cut, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cut(&self) -> usize {
        self.cut
    }

    /// Mode 0 is the most significant digit.
    pub fn index(&self, occ: &[usize]) -> usize {
        occ.iter().fold(0, |acc, &n| acc * (self.cut + 1) + n)
    }

    pub fn occupations(&self, mut index: usize) -> Vec<usize> {
        let mut occ = vec![0; self.modes];
        for j in (0..self.modes).rev() {
            occ[j] = index % (self.cut + 1);
            index /= self.cut + 1;
        }
        occ
    }

    /// Applies `ops[0] ops[1] ... ops[last]` (rightmost first) to one basis ket.
    /// Returns `None` when the ket is annihilated or pushed past the cutoff.
    pub fn apply_to_ket<T: Real>(&self, ops: &[Ladder], occ: &[usize]) -> Option<(Vec<usize>, T)> {
        let mut out = occ.to_vec();
        let mut coef = T::one();
        for op in ops.iter().rev() {
            match *op {
                Ladder::Annihilate(j) => {
                    if out[j] == 0 {
                        return None;
                    }
                    coef *= T::of_usize(out[j]).sqrt();
                    out[j] -= 1;
                }
                Ladder::Create(j) => {
                    if out[j] == self.cut {
                        return None;
                    }
                    out[j] += 1;
                    coef *= T::of_usize(out[j]).sqrt();
                }
            }
        }
        Some((out, coef))
    }

    pub fn apply<T: Real>(&self, ops: &[Ladder], psi: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut out = vec![czero(); self.dim];
        for (i, &c) in psi.iter().enumerate() {
            if c == czero() {
                continue;
            }
            let occ = self.occupations(i);
            if let Some((target, coef)) = self.apply_to_ket::<T>(ops, &occ) {
                let t = self.index(&target);
                out[t] = out[t] + c * coef;
            }
        }
        out
    }

    /// `<phi|psi>`.
    pub fn inner<T: Real>(phi: &[Complex<T>], psi: &[Complex<T>]) -> Complex<T> {
        phi.iter()
            .zip(psi.iter())
            .fold(czero(), |acc, (a, b)| acc + a.conj() * b)
    }

    pub fn expect<T: Real>(&self, ops: &[Ladder], psi: &[Complex<T>]) -> Complex<T> {
        Self::inner(psi, &self.apply(ops, psi))
    }

    /// Tensor product of single-mode amplitude vectors (each of length `cut + 1`).
    pub fn product_state<T: Real>(&self, factors: &[Vec<Complex<T>>]) -> Vec<Complex<T>> {
        assert_eq!(factors.len(), self.modes);
        (0..self.dim)
            .map(|i| {
                self.occupations(i)
                    .iter()
                    .zip(factors.iter())
                    .fold(Complex::new(T::one(), T::zero()), |acc, (&n, f)| acc * f[n])
            })
            .collect()
    }
}

/// Real sparse matrix in compressed rows.
#[derive(Debug, Clone)]
pub struct SparseMatrix<T> {
    pub dim: usize,
    rows: Vec<Vec<(usize, T)>>,
}

impl<T: Real> SparseMatrix<T> {
    pub fn from_rows(dim: usize, rows: Vec<Vec<(usize, T)>>) -> Self {
        Self { dim, rows }
    }

    pub fn mul_vec(&self, x: &[Complex<T>], out: &mut [Complex<T>]) {
        for (o, row) in out.iter_mut().zip(self.rows.iter()) {
            *o = row.iter().fold(czero(), |acc, &(j, v)| acc + x[j] * v);
        }
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.rows[i]
            .iter()
            .filter(|(c, _)| *c == j)
            .map(|(_, v)| *v)
            .fold(T::zero(), |a, b| a + b)
    }

    /// Max-abs-row-sum norm.
    pub fn norm_inf(&self) -> T {
        self.rows
            .iter()
            .map(|r| r.iter().map(|(_, v)| v.abs()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }
}

/// Amplitudes of a coherent state `|alpha>` truncated to `0..=cut`, renormalized.
pub fn coherent_amplitudes<T: Real>(alpha: Complex<T>, cut: usize) -> Vec<Complex<T>> {
    let mut amps = Vec::with_capacity(cut + 1);
    let mut term = Complex::new(T::one(), T::zero());
    amps.push(term);
    for n in 1..=cut {
        term = term * alpha / T::of_usize(n).sqrt();
        amps.push(term);
    }
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<T>().sqrt();
    amps.into_iter().map(|a| a / norm).collect()
}

/// Fock ket `|n>` as a single-mode amplitude vector.
pub fn number_amplitudes<T: Real>(n: usize, cut: usize) -> Vec<Complex<T>> {
    let mut v = vec![czero(); cut + 1];
    v[n] = Complex::new(T::one(), T::zero());
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        let b = FockBasis::new(3, 4, 1000).unwrap();
        assert_eq!(b.dim(), 125);
        for i in 0..b.dim() {
            assert_eq!(b.index(&b.occupations(i)), i);
        }
        assert!(FockBasis::new(3, 40, 1000).is_err());
    }

    #[test]
    fn commutator_is_identity_below_cut() {
        let b = FockBasis::new(1, 6, 100).unwrap();
        for n in 0..6 {
            let psi = number_amplitudes::<f64>(n, 6);
            let aad = b.expect(&[Ladder::Annihilate(0), Ladder::Create(0)], &psi);
            let ada = b.expect(&[Ladder::Create(0), Ladder::Annihilate(0)], &psi);
            assert!(((aad - ada).re - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn coherent_state_mean() {
        let b = FockBasis::new(1, 40, 100).unwrap();
        let alpha = Complex::new(1.2, -0.5);
        let psi = coherent_amplitudes(alpha, 40);
        let a = b.expect(&[Ladder::Annihilate(0)], &psi);
        assert!((a - alpha).norm() < 1e-12);
    }
}
