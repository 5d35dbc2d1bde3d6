//! Scalar abstraction for the geometry and loss kernels.
//!
//! Everything numeric in this crate is generic over [`Real`], which is
//! satisfied by `f32`, `f64` and the forward-mode [`Dual`](crate::dual::Dual)
//! number. Concrete `f64` aliases live at the crate root.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssignOps};

/// Floating-point scalar: `f32`, `f64`, or a dual number.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssignOps + Debug + Display + Default + Send + Sync + 'static
{
    /// Lift an `f64` constant (tolerances, config values) into the scalar type.
    #[inline]
    fn cst(v: f64) -> Self {
        Self::from_f64(v).expect("constant not representable in scalar type")
    }

    /// Lower to `f64` for reporting and serialization.
    fn to_f64_value(self) -> f64;

    #[inline]
    fn two() -> Self {
        Self::cst(2.0)
    }

    #[inline]
    fn half() -> Self {
        Self::cst(0.5)
    }
}

impl Real for f32 {
    #[inline]
    fn to_f64_value(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    #[inline]
    fn to_f64_value(self) -> f64 {
        self
    }
}
