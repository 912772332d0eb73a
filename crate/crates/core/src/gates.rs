//! Single- and two-q-bit gates, including the phase-corrected weak families.
//!
//! `σz = diag(−1, +1)`: the computational state `|0⟩` is the −1 eigenvector.

use num_complex::Complex;
use num_traits::Zero;

use crate::algebra::{c, re, tensor, Ket4, Mat2, Mat4, Matrix};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Pauli matrix `σ_i` with `σ_0 = 1`.
pub fn pauli<T: Real>(i: usize) -> Mat2<T> {
    let o = T::one();
    let z = T::zero();
    match i {
        0 => Mat2::identity(),
        1 => Matrix([[re(z), re(o)], [re(o), re(z)]]),
        2 => Matrix([[re(z), c(z, -o)], [c(z, o), re(z)]]),
        3 => Mat2::real_diag([-o, o]),
        _ => panic!("Pauli index {i} out of range"),
    }
}

/// `1·cos φ + i (n·σ) sin φ`
pub fn axis_angle_unitary<T: Real>(n: [T; 3], varphi: T) -> Result<Mat2<T>> {
    check_unit(n)?;
    let (s, co) = varphi.sin_cos();
    let ns = pauli::<T>(1).scale_re(n[0]) + pauli(2).scale_re(n[1]) + pauli(3).scale_re(n[2]);
    Ok(Mat2::identity().scale_re(co) + ns.scale(c(T::zero(), s)))
}

pub(crate) fn check_unit<T: Real>(n: [T; 3]) -> Result<()> {
    let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    if !norm.is_finite() || (norm - T::one()).abs() > T::ITOL {
        return Err(Error::domain(format!("axis has norm {norm}, expected 1")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    Cnot,
    Swap,
}

/// Two-q-bit family `U_kind(θ)` with `θ ∈ [0, π/2]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GateFamily<T> {
    pub kind: GateKind,
    theta: T,
}

impl<T: Real> GateFamily<T> {
    pub fn new(kind: GateKind, theta: T) -> Result<Self> {
        if !(theta >= T::zero() && theta <= T::FRAC_PI_2()) {
            return Err(Error::domain(format!(
                "interaction angle {theta} outside [0, π/2]"
            )));
        }
        Ok(GateFamily { kind, theta })
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn unitary(&self) -> Mat4<T> {
        weak_gate(self)
    }
}

fn permutation<T: Real>(images: [usize; 4]) -> Mat4<T> {
    let mut m = Mat4::zeros();
    for (from, &to) in images.iter().enumerate() {
        m[(to, from)] = Complex::new(T::one(), T::zero());
    }
    m
}

/// Strong CNOT (system controls) or SWAP, both built from their basis action.
pub fn strong_gate<T: Real>(kind: GateKind) -> Mat4<T> {
    match kind {
        // |00⟩→|00⟩, |01⟩→|01⟩, |10⟩→|11⟩, |11⟩→|10⟩
        GateKind::Cnot => permutation([0, 1, 3, 2]),
        // |01⟩↔|10⟩
        GateKind::Swap => permutation([0, 2, 1, 3]),
    }
}

/// Uncorrected family `1·cos θ − i U sin θ`. Defined for any real `θ`.
pub fn weak_unitary<T: Real>(kind: GateKind, theta: T) -> Mat4<T> {
    let (s, co) = theta.sin_cos();
    Mat4::identity().scale_re(co) + strong_gate(kind).scale(c(T::zero(), -s))
}

/// System phase correction `exp(−iσzθ/2) ⊗ 1`.
pub fn z_correction<T: Real>(theta: T) -> Mat4<T> {
    let h = theta * T::of(0.5);
    let z = Mat2::diag([
        Complex::from_polar(T::one(), h),
        Complex::from_polar(T::one(), -h),
    ]);
    tensor(&z, &Mat2::identity())
}

/// Corrected weak gate `Z_S(θ)·U_kind(θ)`, for an arbitrary real angle.
pub fn weak_gate_at<T: Real>(kind: GateKind, theta: T) -> Mat4<T> {
    z_correction(theta) * weak_unitary(kind, theta)
}

/// Corrected weak gate `Z_S(θ)·U_kind(θ)`.
pub fn weak_gate<T: Real>(family: &GateFamily<T>) -> Mat4<T> {
    weak_gate_at(family.kind, family.theta)
}

/// Coefficients of `O = Σ R_ij σ_i ⊗ σ_j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RMatrix<T>(pub [[Complex<T>; 4]; 4]);

impl<T: Real> RMatrix<T> {
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.0[i][j]
    }

    pub fn reconstruct(&self) -> Mat4<T> {
        let mut out = Mat4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                if !self.0[i][j].is_zero() {
                    out = out + tensor(&pauli(i), &pauli(j)).scale(self.0[i][j]);
                }
            }
        }
        out
    }

    pub fn max_imag(&self) -> T {
        self.0
            .iter()
            .flatten()
            .map(|z| z.im.abs())
            .fold(T::zero(), T::max)
    }
}

/// `R_ij = Tr(O (σ_i ⊗ σ_j)) / 4`
pub fn pauli_rep<T: Real>(o: &Mat4<T>) -> RMatrix<T> {
    let quarter = T::of(0.25);
    let mut r = [[Complex::zero(); 4]; 4];
    for (i, row) in r.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = (*o * tensor(&pauli(i), &pauli(j))).trace() * quarter;
        }
    }
    RMatrix(r)
}

/// `|s⟩ ⊗ |e⟩` for computational basis labels.
pub fn basis4<T: Real>(s: usize, e: usize) -> Ket4<T> {
    Ket4::basis(2 * s + e)
}
