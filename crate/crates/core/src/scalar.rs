//! Scalar abstraction shared by every numerical routine in the crate.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar type the library is generic over (`f32`, `f64`).
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive {}

impl<T> Real for T where T: RealField + Copy + FromPrimitive + ToPrimitive {}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(v: f64) -> T {
    T::from_f64(v).expect("f64 literal representable in scalar type")
}

#[inline]
pub fn from_usize<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("usize representable in scalar type")
}

#[inline]
pub fn to_f64<T: Real>(v: T) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// Floor of a nonnegative ratio as an integer exponent.
#[inline]
pub fn floor_ratio<T: Real>(t: T, t0: T) -> i32 {
    let r = to_f64(t / t0).floor();
    if r <= 0.0 {
        0
    } else if r >= i32::MAX as f64 {
        i32::MAX
    } else {
        r as i32
    }
}

#[inline]
pub fn max_of<T: Real>(a: T, b: T) -> T {
    if b > a {
        b
    } else {
        a
    }
}

#[inline]
pub fn min_of<T: Real>(a: T, b: T) -> T {
    if b < a {
        b
    } else {
        a
    }
}
