use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar the numerical core is written against: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal. Every `Real` can represent (a rounding of) any `f64`.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn cis<T: Real>(phase: T) -> Complex<T> {
    Complex::new(phase.cos(), phase.sin())
}

#[inline]
pub(crate) fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
pub(crate) fn creal<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

/// Neumaier-compensated running sum of complex values.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum<T> {
    sum: Complex<T>,
    carry: Complex<T>,
}

impl<T: Real> CompensatedSum<T> {
    pub fn new() -> Self {
        Self {
            sum: czero(),
            carry: czero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: Complex<T>) {
        self.sum.re = neumaier(self.sum.re, x.re, &mut self.carry.re);
        self.sum.im = neumaier(self.sum.im, x.im, &mut self.carry.im);
    }

    #[inline]
    pub fn value(&self) -> Complex<T> {
        self.sum + self.carry
    }
}

#[inline]
fn neumaier<T: Real>(sum: T, x: T, carry: &mut T) -> T {
    let t = sum + x;
    if sum.abs() >= x.abs() {
        *carry += (sum - t) + x;
    } else {
        *carry += (x - t) + sum;
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::<f64>::new();
        s.add(creal(1.0));
        for _ in 0..10_000 {
            s.add(creal(1e-16));
        }
        s.add(creal(-1.0));
        assert!((s.value().re - 1e-12).abs() < 1e-24);
    }

    #[test]
    fn literals_round_trip() {
        assert_eq!(<f64 as Real>::of(0.25), 0.25);
        assert_eq!(<f32 as Real>::of(0.25), 0.25f32);
        assert_eq!(<f32 as Real>::of_usize(7), 7.0);
    }
}
