//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar the estimators and certificates are generic over.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Number of significand bits, including the implicit one.
    const MANTISSA_DIGITS: u32;

    /// Converts an `f64` literal. Every literal used in this crate is representable
    /// (possibly rounded) in any `Real`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable as Real")
    }

    /// Converts a count.
    #[inline]
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable as Real")
    }

    /// Uniform variate on `[0, 1)` built from the top `MANTISSA_DIGITS` bits of `bits`.
    #[inline]
    fn unit_from_bits(bits: u64) -> Self {
        let shift = 64 - Self::MANTISSA_DIGITS;
        let scale = Self::lit(0.5).powi(Self::MANTISSA_DIGITS as i32);
        Self::from_count(bits >> shift) * scale
    }
}

impl Real for f32 {
    const MANTISSA_DIGITS: u32 = f32::MANTISSA_DIGITS;
}

impl Real for f64 {
    const MANTISSA_DIGITS: u32 = f64::MANTISSA_DIGITS;
}

/// Relative slack applied before taking a ceiling, so that values such as
/// `800.0000000000001` (representation error of an exact integer) do not bump up.
pub fn ceil_guard<T: Real>() -> T {
    T::lit(1e-12).max(T::epsilon() * T::lit(8.0))
}

/// `⌈x⌉` with the relative guard from [`ceil_guard`]. `None` when `x` is not finite,
/// is negative, or exceeds the largest integer `T` represents exactly.
pub fn guarded_ceil<T: Real>(x: T) -> Option<u64> {
    if !x.is_finite() || x < T::zero() {
        return None;
    }
    let nearest = x.round();
    let value = if (x - nearest).abs() <= ceil_guard::<T>() * x {
        nearest
    } else {
        x.ceil()
    };
    let exact_limit = T::lit(2.0).powi(T::MANTISSA_DIGITS as i32);
    if value > exact_limit {
        return None;
    }
    value.to_u64()
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    compensation: T,
}

impl<T: Real> CompensatedSum<T> {
    pub fn new() -> Self {
        Self { sum: T::zero(), compensation: T::zero() }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation = self.compensation + ((self.sum - t) + x);
        } else {
            self.compensation = self.compensation + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn total(&self) -> T {
        self.sum + self.compensation
    }
}

impl<T: Real> FromIterator<T> for CompensatedSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}
