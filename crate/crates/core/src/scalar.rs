//! Scalar abstractions shared by every numerical routine in the crate.
//!
//! [`Real`] is the floating-point type parameter (`f32` or `f64`); [`Element`]
//! is the matrix entry type, implemented both for the real type itself and for
//! `Complex<Real>`. All dense algorithms are written once against `Element`.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, Neg, RemAssign, SubAssign};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, Num, ToPrimitive};

/// Floating point: f32 or f64.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + LowerExp
    + Default
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + RemAssign
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal (tolerances, coefficients).
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in Real")
    }

    #[inline]
    fn from_usize_lossy(x: usize) -> Self {
        Self::from_usize(x).expect("usize representable in Real")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Entry type of a dense matrix: a real number or a complex number over a [`Real`].
pub trait Element:
    Copy
    + Debug
    + PartialEq
    + Num
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Send
    + Sync
    + 'static
{
    type Real: Real;

    const IS_COMPLEX: bool;

    fn conj(self) -> Self;
    /// Modulus `|x|`.
    fn modulus(self) -> Self::Real;
    /// `|x|²`, cheaper than squaring [`Element::modulus`].
    fn modulus_sqr(self) -> Self::Real;
    fn from_real(r: Self::Real) -> Self;
    fn re(self) -> Self::Real;
    fn im(self) -> Self::Real;

    #[inline]
    fn finite(self) -> bool {
        Float::is_finite(self.re()) && Float::is_finite(self.im())
    }

    #[inline]
    fn scale(self, s: Self::Real) -> Self {
        self * Self::from_real(s)
    }
}

impl<T: Real> Element for T {
    type Real = T;
    const IS_COMPLEX: bool = false;

    #[inline]
    fn conj(self) -> Self {
        self
    }
    #[inline]
    fn modulus(self) -> T {
        self.abs()
    }
    #[inline]
    fn modulus_sqr(self) -> T {
        self * self
    }
    #[inline]
    fn from_real(r: T) -> Self {
        r
    }
    #[inline]
    fn re(self) -> T {
        self
    }
    #[inline]
    fn im(self) -> T {
        T::zero()
    }
}

impl<T: Real> Element for Complex<T> {
    type Real = T;
    const IS_COMPLEX: bool = true;

    #[inline]
    fn conj(self) -> Self {
        Complex::conj(&self)
    }
    #[inline]
    fn modulus(self) -> T {
        self.norm()
    }
    #[inline]
    fn modulus_sqr(self) -> T {
        self.norm_sqr()
    }
    #[inline]
    fn from_real(r: T) -> Self {
        Complex::new(r, T::zero())
    }
    #[inline]
    fn re(self) -> T {
        self.re
    }
    #[inline]
    fn im(self) -> T {
        self.im
    }
}

/// The `j`-th of the `k`-th roots of unity, `exp(2πi j / k)`.
///
/// `j` is reduced modulo `k` and folded into the upper half so that
/// `unit_root(k, k - j)` is bit-for-bit the conjugate of `unit_root(k, j)`.
pub fn unit_root<T: Real>(k: usize, j: i64) -> Complex<T> {
    assert!(k > 0, "root of unity of order zero");
    let k_i = k as i64;
    let j = j.rem_euclid(k_i);
    if j == 0 {
        return Complex::new(T::one(), T::zero());
    }
    if 2 * j > k_i {
        return unit_root::<T>(k, k_i - j).conj();
    }
    if 2 * j == k_i {
        return Complex::new(-T::one(), T::zero());
    }
    if 4 * j == k_i {
        return Complex::new(T::zero(), T::one());
    }
    let angle = T::TAU() * T::lit(j as f64) / T::lit(k as f64);
    Complex::new(angle.cos(), angle.sin())
}
