//! System q-bit states: normalized kets, density matrices and the Bloch ball.

use num_complex::Complex;
use num_traits::Zero;

use crate::algebra::{re, HermitianEigen, Ket, Ket2, Mat2, Matrix};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Pure state `α|0⟩ + β|1⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PureQbit<T> {
    pub alpha: Complex<T>,
    pub beta: Complex<T>,
}

impl<T: Real> PureQbit<T> {
    /// Validated constructor; the amplitudes must already be normalized.
    pub fn new(alpha: Complex<T>, beta: Complex<T>) -> Result<Self> {
        let q = PureQbit { alpha, beta };
        let err = (q.ket().norm_sqr() - T::one()).abs();
        if !q.ket().is_finite() || err > T::ATOL {
            return Err(Error::domain(format!(
                "amplitudes not normalized (|‖ψ‖² − 1| = {:e})",
                err.as_f64()
            )));
        }
        Ok(q)
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalize(alpha: Complex<T>, beta: Complex<T>) -> Result<Self> {
        let k = Ket([alpha, beta]);
        if !k.is_finite() {
            return Err(Error::domain("amplitudes must be finite"));
        }
        let k = k
            .normalized()
            .ok_or_else(|| Error::domain("zero state vector"))?;
        Ok(Self::from_ket_unchecked(k))
    }

    pub fn zero() -> Self {
        PureQbit {
            alpha: Complex::new(T::one(), T::zero()),
            beta: Complex::zero(),
        }
    }

    pub fn one() -> Self {
        PureQbit {
            alpha: Complex::zero(),
            beta: Complex::new(T::one(), T::zero()),
        }
    }

    /// Real amplitudes `(a, b)`, normalized.
    pub fn real(a: T, b: T) -> Result<Self> {
        Self::normalize(re(a), re(b))
    }

    pub(crate) fn from_ket_unchecked(k: Ket2<T>) -> Self {
        PureQbit {
            alpha: k.0[0],
            beta: k.0[1],
        }
    }

    pub fn ket(&self) -> Ket2<T> {
        Ket([self.alpha, self.beta])
    }

    pub fn density(&self) -> DensityMatrix<T> {
        DensityMatrix(self.ket().projector())
    }

    pub fn beta_sq(&self) -> T {
        self.beta.norm_sqr()
    }

    /// Phase-insensitive distance between two rays.
    pub fn phase_distance(&self, other: &Self) -> T {
        self.ket().phase_distance(&other.ket())
    }

    /// `|⟨ψ|φ⟩| = 1` within `tol`.
    pub fn same_ray(&self, other: &Self, tol: T) -> bool {
        (T::one() - self.ket().inner(&other.ket()).norm()).abs() <= tol
    }

    pub fn bloch(&self) -> BlochPoint<T> {
        bloch_of(&self.density())
    }
}

/// Point in the Bloch ball. `r = 1` on the surface (pure states).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochPoint<T> {
    pub theta: T,
    pub phi: T,
    pub r: T,
}

/// 2×2 Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix<T>(pub(crate) Mat2<T>);

impl<T: Real> DensityMatrix<T> {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(m: Mat2<T>) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::domain("density matrix entries must be finite"));
        }
        let dev = m.hermitian_deviation();
        if dev > T::ATOL {
            return Err(Error::NotHermitian {
                deviation: dev.as_f64(),
            });
        }
        let tr = m.trace();
        if (tr - re(T::one())).norm() > T::ATOL {
            return Err(Error::domain(format!("density matrix trace is {}", tr.re)));
        }
        let e = m.eig_hermitian()?;
        if e.values[1] < -T::ATOL {
            return Err(Error::domain(format!(
                "density matrix has negative eigenvalue {:e}",
                e.values[1].as_f64()
            )));
        }
        Ok(DensityMatrix(m.hermitian_part()))
    }

    /// Wraps a matrix known to be a state up to rounding, symmetrizing it
    /// and fixing the trace.
    pub(crate) fn from_raw(m: Mat2<T>) -> Self {
        let h = m.hermitian_part();
        let tr = h.trace().re;
        DensityMatrix(h.scale_re(T::one() / tr))
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix(Mat2::identity().scale_re(T::of(0.5)))
    }

    /// `diag(p0, 1 − p0)`
    pub fn diagonal(p0: T) -> Result<Self> {
        if !(T::zero()..=T::one()).contains(&p0) {
            return Err(Error::domain("diagonal weight must lie in [0, 1]"));
        }
        Ok(DensityMatrix(Mat2::real_diag([p0, T::one() - p0])))
    }

    pub fn matrix(&self) -> &Mat2<T> {
        &self.0
    }

    pub fn rho00(&self) -> T {
        self.0[(0, 0)].re
    }

    pub fn rho01(&self) -> Complex<T> {
        self.0[(0, 1)]
    }

    pub fn rho11(&self) -> T {
        self.0[(1, 1)].re
    }

    pub fn purity(&self) -> T {
        (self.0 * self.0).trace().re
    }

    /// `Tr(ρ O)`
    pub fn expect(&self, o: &Mat2<T>) -> Complex<T> {
        (self.0 * *o).trace()
    }

    /// `½ Σ|λ_i(ρ − σ)|`
    pub fn trace_distance(&self, other: &Self) -> T {
        let d = self.0 - other.0;
        // Traceless Hermitian 2×2: eigenvalues ±sqrt(a² + |b|²).
        let a = d[(0, 0)].re;
        let b = d[(0, 1)];
        (a * a + b.norm_sqr()).sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.0.max_abs_diff(&other.0)
    }
}

/// Pure or mixed system state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QState<T> {
    Pure(PureQbit<T>),
    Mixed(DensityMatrix<T>),
}

impl<T: Real> QState<T> {
    pub fn density(&self) -> DensityMatrix<T> {
        match self {
            QState::Pure(p) => p.density(),
            QState::Mixed(d) => *d,
        }
    }

    pub fn beta_sq(&self) -> T {
        match self {
            QState::Pure(p) => p.beta_sq(),
            QState::Mixed(d) => d.rho11(),
        }
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, QState::Pure(_))
    }

    pub fn as_pure(&self) -> Option<&PureQbit<T>> {
        match self {
            QState::Pure(p) => Some(p),
            QState::Mixed(_) => None,
        }
    }
}

impl<T: Real> From<PureQbit<T>> for QState<T> {
    fn from(p: PureQbit<T>) -> Self {
        QState::Pure(p)
    }
}

impl<T: Real> From<DensityMatrix<T>> for QState<T> {
    fn from(d: DensityMatrix<T>) -> Self {
        QState::Mixed(d)
    }
}

fn check_angles<T: Real>(theta: T, phi: T) -> Result<()> {
    if !(theta >= T::zero() && theta <= T::PI()) {
        return Err(Error::domain(format!("polar angle {theta} outside [0, π]")));
    }
    if !(phi >= T::zero() && phi < T::PI() + T::PI()) {
        return Err(Error::domain(format!("azimuth {phi} outside [0, 2π)")));
    }
    Ok(())
}

/// `cos(θ/2)e^{−iφ/2}|0⟩ + sin(θ/2)e^{iφ/2}|1⟩`
pub fn pure_from_bloch<T: Real>(theta: T, phi: T) -> Result<PureQbit<T>> {
    check_angles(theta, phi)?;
    let half = T::of(0.5);
    let (s, c) = (theta * half).sin_cos();
    Ok(PureQbit {
        alpha: Complex::from_polar(c, -phi * half),
        beta: Complex::from_polar(s, phi * half),
    })
}

/// Mixed state at radius `r` along the direction `(θ, φ)`.
///
/// The coherence is `ρ01 = (r/2) sin θ e^{−iφ}`, the same phase convention
/// as [`pure_from_bloch`], so `r = 1` reproduces its projector.
pub fn mixed_from_bloch<T: Real>(theta: T, phi: T, r: T) -> Result<DensityMatrix<T>> {
    check_angles(theta, phi)?;
    if !(r >= T::zero() && r <= T::one()) {
        return Err(Error::domain(format!("Bloch radius {r} outside [0, 1]")));
    }
    let half = T::of(0.5);
    let (s, c) = (theta * half).sin_cos();
    let p = (T::one() + r) * half;
    let q = (T::one() - r) * half;
    let off = Complex::from_polar(r * c * s, -phi);
    let m = Matrix([
        [re(p * c * c + q * s * s), off],
        [off.conj(), re(p * s * s + q * c * c)],
    ]);
    Ok(DensityMatrix(m))
}

/// Inverse of [`mixed_from_bloch`]. At `r = 0` the angles are `0`; at the
/// poles `φ = 0`.
pub fn bloch_of<T: Real>(rho: &DensityMatrix<T>) -> BlochPoint<T> {
    let z = rho.rho00() - rho.rho11();
    let off = rho.rho01();
    let two = T::of(2.0);
    let r = (z * z + two * two * off.norm_sqr()).sqrt().min(T::one());
    if r <= T::ATOL {
        return BlochPoint {
            theta: T::zero(),
            phi: T::zero(),
            r: T::zero(),
        };
    }
    let theta = (two * off.norm()).atan2(z);
    let phi = if off.norm() <= T::ATOL {
        T::zero()
    } else {
        let mut p = -off.arg();
        if p < T::zero() {
            p = p + two * T::PI();
        }
        if p >= two * T::PI() {
            p = p - two * T::PI();
        }
        p
    };
    BlochPoint { theta, phi, r }
}
