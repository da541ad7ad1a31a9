//! Scalar abstraction over the floating-point type used by the signal chain.
//!
//! Every numeric module in this crate is generic over [`Scalar`] so the same
//! code runs in `f32` or `f64`. The concrete aliases at the crate root pick
//! `f64`, which is what the CLI and the validation suites use.

use std::fmt;
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FromPrimitive, NumAssign};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Floating-point scalar usable throughout the simulator.
///
/// The RNG hooks live here so that generic code can draw Gaussian and uniform
/// variates without dragging `rand_distr` bounds through every signature.
pub trait Scalar:
    Float + FromPrimitive + NumAssign + Sum + Send + Sync + fmt::Debug + fmt::Display + 'static
{
    /// One draw from N(0, 1).
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// One draw from U[0, 1).
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Shorthand for embedding an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).expect("scalar convertible to f64")
    }
}

impl Scalar for f32 {
    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
    #[inline]
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.gen::<f32>()
    }
}

impl Scalar for f64 {
    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
    #[inline]
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.gen::<f64>()
    }
}

/// Circularly-symmetric complex Gaussian draw with E|z|^2 = `variance`.
#[inline]
pub fn complex_gaussian<T: Scalar, R: Rng + ?Sized>(rng: &mut R, variance: T) -> Complex<T> {
    let half = variance * T::lit(0.5);
    let s = half.sqrt();
    Complex::new(T::standard_normal(rng) * s, T::standard_normal(rng) * s)
}
