//! Scalar abstractions so the numeric kernels run over f32/f64 or exact
//! rationals.
//!
//! Dense distribution evolution and total-variation distances are generic
//! over [`Real`] (a floating-point type); coupling expectations are generic
//! over [`Weight`], which `BigRational` also satisfies, so the one-step
//! Hamming expectation can be computed exactly.

use core::fmt::Debug;
use core::iter::Sum;
use core::ops::{Add, AddAssign, Div, Mul, Sub};

use num_traits::{Float, FromPrimitive, One, Zero};

/// Floating-point scalar for dense probability vectors.
pub trait Real: Float + FromPrimitive + AddAssign + Sum + Debug + Default + Send + Sync {}

impl<T> Real for T where T: Float + FromPrimitive + AddAssign + Sum + Debug + Default + Send + Sync {}

/// Scalar for probability mass bookkeeping built from integer ratios.
/// Satisfied by `f32`, `f64` and `num_rational::BigRational`.
pub trait Weight:
    Clone
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + FromPrimitive
    + Debug
{
    /// The exact ratio `num / den`.
    fn ratio(num: usize, den: usize) -> Self {
        Self::from_usize(num).expect("numerator representable")
            / Self::from_usize(den).expect("denominator representable")
    }
}

impl<T> Weight for T where
    T: Clone
        + PartialOrd
        + Zero
        + One
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Div<Output = T>
        + FromPrimitive
        + Debug
{
}
