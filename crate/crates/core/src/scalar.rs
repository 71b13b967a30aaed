//! Scalar abstraction for the numeric kernels.

use std::fmt::Debug;
use std::iter::Sum;
use std::ops::{AddAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, NumCast};

/// Floating-point scalar: f32 or f64.
///
/// The geometric kernels (hexagon tests, winding numbers, loop metrics) and
/// the spectral kernels (eigenbasis, norms, fits) are generic over this
/// trait; the simulation drivers use the crate-level [`crate::Scalar`] alias.
pub trait Real:
    Float + FromPrimitive + NumCast + AddAssign + SubAssign + MulAssign + Sum + Debug + Send + Sync + 'static
{
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("f64 conversion")
    }
}

impl Real for f32 {}
impl Real for f64 {}
