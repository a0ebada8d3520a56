//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! All DGP algebra, estimators and boundary rules are written against
//! [`Scalar`], which is implemented for `f64` and `f32`. The tolerance used for
//! mass conservation and atom merging is a property of the scalar type.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Absolute tolerance for mass sums, atom merging and exact-equality checks.
    const TOLERANCE: f64;

    #[inline]
    fn tolerance() -> Self {
        Self::lit(Self::TOLERANCE)
    }

    /// Converts an `f64` constant into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("constant representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }
}

impl Scalar for f64 {
    const TOLERANCE: f64 = 1e-12;
}

impl Scalar for f32 {
    const TOLERANCE: f64 = 1e-5;
}
