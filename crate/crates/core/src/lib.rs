//! Discrete-step quantum trajectory simulation for a system q-bit coupled to
//! a stream of environment q-bits.
//!
//! Each step the system interacts with a fresh environment q-bit through a
//! weak two-q-bit gate, the environment is measured (or discarded), and the
//! system is conditioned on the outcome. Everything is exact at the level of
//! a single step; the continuum stochastic equations are available only as
//! residual checks.
//!
//! Conventions used throughout:
//!
//! * `σz = diag(−1, +1)`, so `|0⟩` has eigenvalue −1 and `|1⟩` has +1.
//! * Two-q-bit basis index is `2·system + environment`.
//! * Pure states are compared up to a global phase, never amplitude-wise.
//!
//! The numeric core is generic over [`Real`] (`f64` or `f32`); the aliases at
//! the crate root fix `f64`.

// Domain checks are written as `!(x >= lo && x <= hi)` so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod analysis;
pub mod channel;
pub mod error;
pub mod gates;
pub mod measurement;
pub mod qbit;
pub mod rng;
pub mod scalar;
pub mod trajectory;

pub use error::{Error, Result};
pub use scalar::Real;

pub use num_complex::Complex;

pub type C64 = Complex<f64>;
pub type ComplexVec2 = algebra::Ket2<f64>;
pub type ComplexVec4 = algebra::Ket4<f64>;
pub type ComplexMat2 = algebra::Mat2<f64>;
pub type ComplexMat4 = algebra::Mat4<f64>;
pub type TwoQbitOperator = algebra::Mat4<f64>;
pub type PureQbit = qbit::PureQbit<f64>;
pub type DensityMatrix = qbit::DensityMatrix<f64>;
pub type QState = qbit::QState<f64>;
pub type GateFamily = gates::GateFamily<f64>;
pub type Instrument = measurement::Instrument<f64>;
pub type KrausChannel = channel::KrausChannel<f64>;
pub type LindbladGen = channel::LindbladGen<f64>;
pub type EnvPrep = channel::EnvPrep<f64>;
pub type Scenario = trajectory::Scenario<f64>;
pub type TrajectoryRecord = trajectory::TrajectoryRecord<f64>;

/// Single-precision aliases.
pub mod f32 {
    pub type ComplexMat2 = crate::algebra::Mat2<f32>;
    pub type ComplexMat4 = crate::algebra::Mat4<f32>;
    pub type PureQbit = crate::qbit::PureQbit<f32>;
    pub type DensityMatrix = crate::qbit::DensityMatrix<f32>;
    pub type Scenario = crate::trajectory::Scenario<f32>;
}

pub use gates::GateKind;
pub use trajectory::EnvMeasurement;
