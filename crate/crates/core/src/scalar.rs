//! Real scalar abstraction.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive};

/// Real floating-point scalar the simulator is generic over.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

/// Converts a small integer into the working scalar.
#[inline]
pub fn from_usize<T: Real>(k: usize) -> T {
    T::from_usize(k).expect("index representable in scalar type")
}

#[inline]
pub(crate) fn re<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

#[inline]
pub(crate) fn im<T: Real>(x: T) -> Complex<T> {
    Complex::new(T::zero(), x)
}

/// `e^{iθ}`.
#[inline]
pub(crate) fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

/// `sin(x)/x` with the removable singularity filled in.
pub fn sinc<T: Real>(x: T) -> T {
    if x.abs() < lit(1e-4) {
        let x2 = x * x;
        T::one() - x2 / lit(6.0) + x2 * x2 / lit(120.0)
    } else {
        x.sin() / x
    }
}

/// Default tolerance for unit-norm checks: 1e-12, floored at a few hundred ulps
/// for narrow scalar types.
pub fn default_norm_tol<T: Real>() -> T {
    lit::<T>(1e-12).max(T::epsilon() * lit(256.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinc_is_continuous_across_switch() {
        for &x in &[0.0f64, 1e-8, 9.99e-5, 1.0001e-4, 0.3] {
            let want = if x == 0.0 { 1.0 } else { x.sin() / x };
            assert!((sinc(x) - want).abs() < 1e-15, "x = {x}");
        }
        assert!((sinc(-0.5f64) - sinc(0.5)).abs() < 1e-16);
    }

    #[test]
    fn narrow_types_get_looser_norm_tol() {
        assert_eq!(default_norm_tol::<f64>(), 1e-12);
        assert!(default_norm_tol::<f32>() > 1e-5);
    }
}
