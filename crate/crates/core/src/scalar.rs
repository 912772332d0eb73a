//! Real scalar abstraction used by every numeric type in the crate.
//!
//! All matrices and states are generic over `T: Real`, with complex
//! amplitudes represented as `num_complex::Complex<T>`. Tolerances are tied
//! to the scalar so that `f32` builds get thresholds that are meaningful at
//! single precision.

use core::fmt::{Debug, Display};
use core::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar with the tolerances the algorithms rely on.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Tolerance for construction checks (Hermiticity, unitarity, normalization).
    const ATOL: Self;
    /// Tolerance for results of iterative or accumulated computations.
    const ITOL: Self;
    /// Branch probabilities below this cannot be renormalized.
    const MIN_PROB: Self;
    /// Eigenvalues at or below this are dropped when extracting Kraus operators.
    const RANK_CUTOFF: Self;

    /// Converts an `f64` literal into this scalar.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Real for f64 {
    const ATOL: f64 = 1e-12;
    const ITOL: f64 = 1e-10;
    const MIN_PROB: f64 = 1e-15;
    const RANK_CUTOFF: f64 = 1e-12;
}

impl Real for f32 {
    const ATOL: f32 = 1e-5;
    const ITOL: f32 = 1e-4;
    const MIN_PROB: f32 = 1e-15;
    const RANK_CUTOFF: f32 = 1e-6;
}
