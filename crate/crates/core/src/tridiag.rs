//! Real symmetric tridiagonal eigensolver (implicit QL with Wilkinson shifts).

use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_SWEEPS: usize = 64;

#[derive(Debug, Clone)]
pub struct SymTridiagEigen<T> {
    /// Eigenvalues in ascending order.
    pub values: Vec<T>,
    /// Row-major `n x n`; column `k` is the unit eigenvector of `values[k]`.
    pub vectors: Vec<T>,
    pub n: usize,
}

impl<T: Real> SymTridiagEigen<T> {
    /// Component `i` of eigenvector `k`.
    #[inline]
    pub fn vector(&self, i: usize, k: usize) -> T {
        self.vectors[i * self.n + k]
    }

    /// `max_k || H v_k - lambda_k v_k ||_2`.
    pub fn residual(&self, diag: &[T], off: &[T]) -> T {
        let n = self.n;
        let mut worst = T::zero();
        for k in 0..n {
            let mut acc = T::zero();
            for i in 0..n {
                let mut hv = diag[i] * self.vector(i, k);
                if i > 0 {
                    hv += off[i - 1] * self.vector(i - 1, k);
                }
                if i + 1 < n {
                    hv += off[i] * self.vector(i + 1, k);
                }
                let r = hv - self.values[k] * self.vector(i, k);
                acc += r * r;
            }
            worst = worst.max(acc.sqrt());
        }
        worst
    }
}

/// Max-abs-row-sum norm of a symmetric tridiagonal matrix.
pub fn tridiag_norm<T: Real>(diag: &[T], off: &[T]) -> T {
    let n = diag.len();
    (0..n)
        .map(|i| {
            let mut s = diag[i].abs();
            if i > 0 {
                s += off[i - 1].abs();
            }
            if i + 1 < n {
                s += off[i].abs();
            }
            s
        })
        .fold(T::zero(), T::max)
}

/// Eigendecomposition of the symmetric tridiagonal matrix with diagonal `diag`
/// and first off-diagonal `off` (`off.len() == diag.len() - 1`, or both empty).
pub fn eigh_tridiagonal<T: Real>(diag: &[T], off: &[T]) -> Result<SymTridiagEigen<T>> {
    let n = diag.len();
    if n == 0 {
        return Ok(SymTridiagEigen {
            values: Vec::new(),
            vectors: Vec::new(),
            n,
        });
    }
    if off.len() + 1 != n {
        return Err(Error::invalid(format!(
            "tridiagonal shape mismatch: {} diagonal vs {} off-diagonal entries",
            n,
            off.len()
        )));
    }
    let mut d = diag.to_vec();
    // e[i] couples i and i+1; e[n-1] is scratch
    let mut e: Vec<T> = off
        .iter()
        .copied()
        .chain(std::iter::once(T::zero()))
        .collect();
    let mut z = vec![T::zero(); n * n];
    for i in 0..n {
        z[i * n + i] = T::one();
    }
    let eps = T::epsilon();
    let two = T::of(2.0);

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(Error::numerical(
                    "tridiagonal eigensolver",
                    format!("no convergence for eigenvalue {l} after {MAX_SWEEPS} sweeps"),
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + r.abs().copysign(g));
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] -= p;
                    e[m] = T::zero();
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let zk = &mut z[k * n..(k + 1) * n];
                    let f = zk[i + 1];
                    zk[i + 1] = s * zk[i] + c * f;
                    zk[i] = c * zk[i] - s * f;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&k| d[k]).collect();
    let mut vectors = vec![T::zero(); n * n];
    for (new_k, &old_k) in order.iter().enumerate() {
        for i in 0..n {
            vectors[i * n + new_k] = z[i * n + old_k];
        }
    }
    if values_have_nan(&vectors) {
        return Err(Error::numerical(
            "tridiagonal eigensolver",
            "non-finite eigenvector entries",
        ));
    }
    Ok(SymTridiagEigen { values, vectors, n })
}

fn values_have_nan<T: Real>(v: &[T]) -> bool {
    v.iter().any(|x| !x.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_by_two() {
        let eig = eigh_tridiagonal(&[0.0, 0.0], &[2f64.sqrt()]).unwrap();
        assert!((eig.values[0] + 2f64.sqrt()).abs() < 1e-14);
        assert!((eig.values[1] - 2f64.sqrt()).abs() < 1e-14);
        assert!(eig.residual(&[0.0, 0.0], &[2f64.sqrt()]) < 1e-14);
    }

    #[test]
    fn one_by_one_and_empty() {
        let eig = eigh_tridiagonal(&[3.5], &[]).unwrap();
        assert_eq!(eig.values, vec![3.5]);
        assert_eq!(eig.vectors, vec![1.0]);
        assert_eq!(eigh_tridiagonal::<f64>(&[], &[]).unwrap().n, 0);
        assert!(eigh_tridiagonal(&[1.0, 2.0], &[]).is_err());
    }

    #[test]
    fn free_chain_spectrum() {
        // -2 cos(pi k / (n+1)) for the unit-hopping chain
        let n = 40;
        let diag = vec![0.0; n];
        let off = vec![1.0; n - 1];
        let eig = eigh_tridiagonal(&diag, &off).unwrap();
        let mut exact: Vec<f64> = (1..=n)
            .map(|k| 2.0 * (std::f64::consts::PI * k as f64 / (n as f64 + 1.0)).cos())
            .collect();
        exact.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in eig.values.iter().zip(exact.iter()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    proptest! {
        #[test]
        fn residual_and_orthonormality(
            diag in proptest::collection::vec(-1e4f64..1e4, 1..60),
            seed in proptest::collection::vec(-1e4f64..1e4, 60),
        ) {
            let n = diag.len();
            let off: Vec<f64> = seed[..n - 1].to_vec();
            let eig = eigh_tridiagonal(&diag, &off).unwrap();
            let norm = tridiag_norm(&diag, &off).max(1.0);
            prop_assert!(eig.residual(&diag, &off) <= 1e-10 * norm);
            for a in 0..n {
                for b in 0..n {
                    let dot: f64 = (0..n).map(|i| eig.vector(i, a) * eig.vector(i, b)).sum();
                    let want = if a == b { 1.0 } else { 0.0 };
                    prop_assert!((dot - want).abs() < 1e-11);
                }
            }
            for w in eig.values.windows(2) {
                prop_assert!(w[0] <= w[1]);
            }
        }
    }
}
