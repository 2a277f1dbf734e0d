//! Floating-point abstraction shared by the tensor and interpolation code.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Element type for [`crate::solohead::Tensor`] and [`crate::raster::GrayRaster`]: `f32` or `f64`.
pub trait Scalar: Float + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static {
    /// Converts an `f64` literal, which always succeeds for the two implementors.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("usize representable")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
