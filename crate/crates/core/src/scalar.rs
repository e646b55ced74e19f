//! Coefficient scalar abstraction for the polynomial layer.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Coefficient ring of [`ScaledPoly`](crate::poly::ScaledPoly).
///
/// The exact lane uses `BigRational`; `f32`/`f64` give approximate lanes with
/// the same polynomial API. Division is required by the fraction-free
/// determinant (exact for rationals, approximate for floats).
pub trait Scalar:
    Clone
    + PartialEq
    + Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_int(v: i64) -> Self;
    /// Lossy conversion to double-precision complex, used by evaluation.
    fn to_c64(&self) -> Complex64;
}

macro_rules! impl_float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn from_int(v: i64) -> Self {
                v as $t
            }
            fn to_c64(&self) -> Complex64 {
                Complex64::new(*self as f64, 0.0)
            }
        }
    };
}

impl_float_scalar!(f32);
impl_float_scalar!(f64);

impl Scalar for BigRational {
    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(big_ratio_to_f64(self), 0.0)
    }
}

/// `BigRational` → `f64` that stays accurate when numerator or denominator
/// exceed the `f64` range: both are shifted into a ~96-bit window first.
pub fn big_ratio_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let num = r.numer();
    let den = r.denom();
    let nbits = num.bits() as i64;
    let dbits = den.bits() as i64;
    let nshift = (nbits - 96).max(0);
    let dshift = (dbits - 96).max(0);
    // Shr on negatives rounds toward -inf; at 96 retained bits the relative
    // error is < 2^-95, far below f64 resolution.
    let n = (num >> (nshift as usize)).to_f64().unwrap_or(f64::NAN);
    let d = (den >> (dshift as usize)).to_f64().unwrap_or(f64::NAN);
    (n / d) * 2f64.powi((nshift - dshift) as i32)
}
