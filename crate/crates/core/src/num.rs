//! Scalar abstraction shared by the estimation kernels.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating-point scalar usable by the panel, VAR and CI-test kernels.
///
/// Implemented for `f32` and `f64`. Distribution tail probabilities are
/// always evaluated in `f64`, so only the linear algebra runs at `Self`
/// precision.
pub trait Scalar:
    RealField + Copy + FromPrimitive + ToPrimitive + FromStr + Display + Debug + Send + Sync + 'static
{
    /// Relative tolerance used for rank and positive-definiteness checks.
    fn rank_tolerance() -> Self;

    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite literal")
    }

    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    fn count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("representable count")
    }
}

impl Scalar for f64 {
    fn rank_tolerance() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    fn rank_tolerance() -> Self {
        1e-4
    }
}
