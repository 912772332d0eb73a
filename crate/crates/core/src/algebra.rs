//! Fixed-size complex linear algebra for the one- and two-q-bit spaces.
//!
//! Two-q-bit objects use the convention `|i⟩ ⊗ |j⟩ → 2i + j`: the system
//! q-bit is the high index and the environment q-bit the low one.

use core::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Column vector of `N` complex amplitudes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ket<T, const N: usize>(pub [Complex<T>; N]);

/// Dense `N × N` complex matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Matrix<T, const N: usize>(pub [[Complex<T>; N]; N]);

pub type Ket2<T> = Ket<T, 2>;
pub type Ket4<T> = Ket<T, 4>;
pub type Mat2<T> = Matrix<T, 2>;
pub type Mat4<T> = Matrix<T, 4>;

#[inline]
pub(crate) fn c<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn re<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

impl<T: Real, const N: usize> Ket<T, N> {
    pub fn zero() -> Self {
        Ket([Complex::zero(); N])
    }

    /// Standard basis vector `|i⟩`.
    pub fn basis(i: usize) -> Self {
        let mut k = Self::zero();
        k.0[i] = Complex::one();
        k
    }

    pub fn norm_sqr(&self) -> T {
        self.0.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    /// Returns `self / ‖self‖`, or `None` for a numerically null vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        if n <= T::MIN_PROB {
            return None;
        }
        Some(self.scale_re(T::one() / n))
    }

    /// Inner product `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(Complex::zero(), |acc, (a, b)| acc + a.conj() * b)
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Ket(self.0.map(|a| a * s))
    }

    pub fn scale_re(&self, s: T) -> Self {
        Ket(self.0.map(|a| a * s))
    }

    /// Outer product `|self⟩⟨other|`.
    pub fn outer(&self, other: &Self) -> Matrix<T, N> {
        let mut m = Matrix::zeros();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = self.0[i] * other.0[j].conj();
            }
        }
        m
    }

    pub fn projector(&self) -> Matrix<T, N> {
        self.outer(self)
    }

    /// Distance between the rays of two vectors, minimized over a global phase:
    /// `min_φ ‖a − e^{iφ} b‖ = sqrt(‖a‖² + ‖b‖² − 2|⟨a|b⟩|)`, evaluated at the
    /// optimal phase to avoid cancellation.
    pub fn phase_distance(&self, other: &Self) -> T {
        let overlap = self.inner(other);
        let n = overlap.norm();
        let phase = if n > T::zero() {
            overlap.conj() / n
        } else {
            Complex::one()
        };
        (*self - other.scale(phase)).norm()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|a| a.re.is_finite() && a.im.is_finite())
    }
}

impl<T: Real, const N: usize> Index<usize> for Ket<T, N> {
    type Output = Complex<T>;
    fn index(&self, i: usize) -> &Complex<T> {
        &self.0[i]
    }
}

impl<T: Real, const N: usize> Add for Ket<T, N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = self;
        for (a, b) in out.0.iter_mut().zip(rhs.0.iter()) {
            *a = *a + b;
        }
        out
    }
}

impl<T: Real, const N: usize> Sub for Ket<T, N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut out = self;
        for (a, b) in out.0.iter_mut().zip(rhs.0.iter()) {
            *a = *a - b;
        }
        out
    }
}

impl<T: Real, const N: usize> Matrix<T, N> {
    pub fn zeros() -> Self {
        Matrix([[Complex::zero(); N]; N])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            m.0[i][i] = Complex::one();
        }
        m
    }

    pub fn diag(d: [Complex<T>; N]) -> Self {
        let mut m = Self::zeros();
        for (i, x) in d.into_iter().enumerate() {
            m.0[i][i] = x;
        }
        m
    }

    pub fn real_diag(d: [T; N]) -> Self {
        Self::diag(d.map(re))
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = self.0[j][i].conj();
            }
        }
        m
    }

    pub fn trace(&self) -> Complex<T> {
        (0..N).fold(Complex::zero(), |acc, i| acc + self.0[i][i])
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Matrix(self.0.map(|row| row.map(|a| a * s)))
    }

    pub fn scale_re(&self, s: T) -> Self {
        Matrix(self.0.map(|row| row.map(|a| a * s)))
    }

    pub fn apply(&self, v: &Ket<T, N>) -> Ket<T, N> {
        let mut out = Ket::zero();
        for i in 0..N {
            out.0[i] = (0..N).fold(Complex::zero(), |acc, j| acc + self.0[i][j] * v.0[j]);
        }
        out
    }

    /// `⟨a|M|b⟩`
    pub fn sandwich(&self, a: &Ket<T, N>, b: &Ket<T, N>) -> Complex<T> {
        a.inner(&self.apply(b))
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> T {
        self.0
            .iter()
            .flat_map(|row| row.iter())
            .map(|a| a.norm())
            .fold(T::zero(), T::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        (*self - *other).max_abs()
    }

    pub fn frobenius_sqr(&self) -> T {
        self.0
            .iter()
            .flat_map(|row| row.iter())
            .map(|a| a.norm_sqr())
            .sum()
    }

    pub fn hermitian_deviation(&self) -> T {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn unitary_deviation(&self) -> T {
        (self.adjoint() * *self).max_abs_diff(&Self::identity())
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.hermitian_deviation() <= tol
    }

    pub fn is_unitary(&self, tol: T) -> bool {
        self.unitary_deviation() <= tol
    }

    /// Checks unitarity at the construction tolerance.
    pub fn require_unitary(&self) -> Result<()> {
        let deviation = self.unitary_deviation();
        if deviation <= T::ATOL {
            Ok(())
        } else {
            Err(Error::NotUnitary {
                deviation: deviation.as_f64(),
            })
        }
    }

    /// `(M + M†)/2`
    pub fn hermitian_part(&self) -> Self {
        (*self + self.adjoint()).scale_re(T::of(0.5))
    }

    pub fn is_finite(&self) -> bool {
        self.0
            .iter()
            .flat_map(|r| r.iter())
            .all(|a| a.re.is_finite() && a.im.is_finite())
    }

    /// Hilbert–Schmidt inner product `Tr(self† other)`.
    pub fn hs_inner(&self, other: &Self) -> Complex<T> {
        let mut acc = Complex::zero();
        for i in 0..N {
            for j in 0..N {
                acc = acc + self.0[i][j].conj() * other.0[i][j];
            }
        }
        acc
    }

    /// `M ρ M†`
    pub fn conjugate(&self, rho: &Self) -> Self {
        *self * *rho * self.adjoint()
    }
}

impl<T: Real, const N: usize> Index<(usize, usize)> for Matrix<T, N> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.0[i][j]
    }
}

impl<T: Real, const N: usize> IndexMut<(usize, usize)> for Matrix<T, N> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.0[i][j]
    }
}

impl<T: Real, const N: usize> Add for Matrix<T, N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = self;
        for i in 0..N {
            for j in 0..N {
                out.0[i][j] = out.0[i][j] + rhs.0[i][j];
            }
        }
        out
    }
}

impl<T: Real, const N: usize> Sub for Matrix<T, N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut out = self;
        for i in 0..N {
            for j in 0..N {
                out.0[i][j] = out.0[i][j] - rhs.0[i][j];
            }
        }
        out
    }
}

impl<T: Real, const N: usize> Neg for Matrix<T, N> {
    type Output = Self;
    fn neg(self) -> Self {
        Matrix(self.0.map(|row| row.map(|a| -a)))
    }
}

impl<T: Real, const N: usize> Mul for Matrix<T, N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                out.0[i][j] =
                    (0..N).fold(Complex::zero(), |acc, k| acc + self.0[i][k] * rhs.0[k][j]);
            }
        }
        out
    }
}

impl<T: Real, const N: usize> Mul<Ket<T, N>> for Matrix<T, N> {
    type Output = Ket<T, N>;
    fn mul(self, rhs: Ket<T, N>) -> Ket<T, N> {
        self.apply(&rhs)
    }
}

impl<T: Real, const N: usize> core::iter::Sum for Matrix<T, N> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zeros(), |a, b| a + b)
    }
}

/// Kronecker product of one-q-bit objects into two-q-bit objects.
pub trait Tensor<Rhs = Self> {
    type Output;
    fn tensor(&self, rhs: &Rhs) -> Self::Output;
}

impl<T: Real> Tensor for Mat2<T> {
    type Output = Mat4<T>;
    fn tensor(&self, rhs: &Mat2<T>) -> Mat4<T> {
        let mut out = Mat4::zeros();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        out.0[2 * i + k][2 * j + l] = self.0[i][j] * rhs.0[k][l];
                    }
                }
            }
        }
        out
    }
}

impl<T: Real> Tensor for Ket2<T> {
    type Output = Ket4<T>;
    fn tensor(&self, rhs: &Ket2<T>) -> Ket4<T> {
        let mut out = Ket4::zero();
        for i in 0..2 {
            for j in 0..2 {
                out.0[2 * i + j] = self.0[i] * rhs.0[j];
            }
        }
        out
    }
}

/// `a ⊗ b` with the system factor first.
pub fn tensor<A: Tensor>(a: &A, b: &A) -> A::Output {
    a.tensor(b)
}

/// Traces out the environment (low) index of a two-q-bit operator.
pub fn partial_trace_env<T: Real>(m: &Mat4<T>) -> Mat2<T> {
    let mut out = Mat2::zeros();
    for i in 0..2 {
        for k in 0..2 {
            out.0[i][k] = (0..2).fold(Complex::zero(), |acc, j| acc + m.0[2 * i + j][2 * k + j]);
        }
    }
    out
}

/// System operator `(1 ⊗ ⟨bra|) M (1 ⊗ |ket⟩)`.
pub fn env_matrix_element<T: Real>(m: &Mat4<T>, bra: &Ket2<T>, ket: &Ket2<T>) -> Mat2<T> {
    let mut out = Mat2::zeros();
    for i in 0..2 {
        for k in 0..2 {
            let mut acc = Complex::zero();
            for j in 0..2 {
                for l in 0..2 {
                    acc = acc + bra.0[j].conj() * m.0[2 * i + j][2 * k + l] * ket.0[l];
                }
            }
            out.0[i][k] = acc;
        }
    }
    out
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues are sorted descending. Within a degenerate cluster the
/// eigenvectors are rebuilt by Gram–Schmidt on the projected standard basis
/// in index order, and every eigenvector has its first non-negligible
/// component real and positive, so the output is reproducible.
#[derive(Clone, Debug, PartialEq)]
pub struct Eigen<T, const N: usize> {
    pub values: [T; N],
    pub vectors: [Ket<T, N>; N],
}

impl<T: Real, const N: usize> Eigen<T, N> {
    /// `Σ λ_k v_k v_k†`
    pub fn reconstruct(&self) -> Matrix<T, N> {
        self.values
            .iter()
            .zip(self.vectors.iter())
            .map(|(&l, v)| v.projector().scale_re(l))
            .sum()
    }
}

pub trait HermitianEigen<T: Real, const N: usize> {
    fn eig_hermitian(&self) -> Result<Eigen<T, N>>;
}

fn check_hermitian<T: Real, const N: usize>(m: &Matrix<T, N>) -> Result<()> {
    let deviation = m.hermitian_deviation();
    if deviation > T::ITOL {
        return Err(Error::NotHermitian {
            deviation: deviation.as_f64(),
        });
    }
    Ok(())
}

impl<T: Real> HermitianEigen<T, 2> for Mat2<T> {
    /// Closed-form solution.
    fn eig_hermitian(&self) -> Result<Eigen<T, 2>> {
        check_hermitian(self)?;
        let h = self.hermitian_part();
        let a = h.0[0][0].re;
        let d = h.0[1][1].re;
        let b = h.0[0][1];
        let half = T::of(0.5);
        let mean = (a + d) * half;
        let gap = (((a - d) * half).powi(2) + b.norm_sqr()).sqrt();
        let values = [mean + gap, mean - gap];
        let scale = a.abs().max(d.abs()).max(b.norm()).max(T::one());
        let vectors = if b.norm() <= T::epsilon() * scale {
            // Already diagonal.
            if a >= d {
                [Ket::basis(0), Ket::basis(1)]
            } else {
                [Ket::basis(1), Ket::basis(0)]
            }
        } else {
            let vec_for = |l: T| {
                // (A − λ)v = 0 has solutions (b, λ − a) and (λ − d, b*);
                // use the better conditioned one.
                let v1 = Ket([b, re(l - a)]);
                let v2 = Ket([re(l - d), b.conj()]);
                let v = if v1.norm_sqr() >= v2.norm_sqr() {
                    v1
                } else {
                    v2
                };
                // Rescale first so tiny off-diagonals do not underflow the norm test.
                let m = v.0[0].norm().max(v.0[1].norm());
                v.scale_re(T::one() / m)
                    .normalized()
                    .expect("nonzero eigenvector")
            };
            let top = vec_for(values[0]);
            // Orthogonal complement of the top vector.
            let bottom = Ket([-top.0[1].conj(), top.0[0].conj()]);
            [top, bottom]
        };
        Ok(canonicalize(values, vectors))
    }
}

impl<T: Real> HermitianEigen<T, 4> for Mat4<T> {
    /// Cyclic Jacobi rotations.
    fn eig_hermitian(&self) -> Result<Eigen<T, 4>> {
        check_hermitian(self)?;
        let (values, vectors) = jacobi(&self.hermitian_part());
        Ok(canonicalize(values, vectors))
    }
}

/// Cyclic complex Jacobi eigenvalue iteration for a Hermitian matrix.
///
/// Each rotation first removes the phase of the pivot, then applies a real
/// Givens rotation that annihilates it. Returns unsorted eigenpairs.
pub(crate) fn jacobi<T: Real, const N: usize>(m: &Matrix<T, N>) -> ([T; N], [Ket<T, N>; N]) {
    let mut a = *m;
    let mut v = Matrix::<T, N>::identity();
    let scale = m.max_abs().max(T::min_positive_value());
    let tiny = T::epsilon() * T::epsilon() * scale * scale;
    for _sweep in 0..100 {
        let off: T = (0..N)
            .flat_map(|i| (0..N).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a.0[i][j].norm_sqr())
            .sum();
        if off <= tiny {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                let apq = a.0[p][q];
                let b = apq.norm();
                if b * b <= tiny {
                    continue;
                }
                let phase = apq / b;
                let theta = (a.0[q][q].re - a.0[p][p].re) / (b + b);
                let t = if theta == T::zero() {
                    T::one()
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let cs = T::one() / (t * t + T::one()).sqrt();
                let sn = t * cs;
                let mut j = Matrix::<T, N>::identity();
                // J = D·R with D_qq = e^{−iφ}
                let e = phase.conj();
                j.0[p][p] = re(cs);
                j.0[p][q] = re(sn);
                j.0[q][p] = e * (-sn);
                j.0[q][q] = e * cs;
                a = j.adjoint() * a * j;
                a.0[p][q] = Complex::zero();
                a.0[q][p] = Complex::zero();
                v = v * j;
            }
        }
    }
    let mut values = [T::zero(); N];
    let mut vectors = [Ket::zero(); N];
    for k in 0..N {
        values[k] = a.0[k][k].re;
        for i in 0..N {
            vectors[k].0[i] = v.0[i][k];
        }
    }
    (values, vectors)
}

fn canonicalize<T: Real, const N: usize>(values: [T; N], vectors: [Ket<T, N>; N]) -> Eigen<T, N> {
    let mut order: [usize; N] = core::array::from_fn(|i| i);
    // Stable sort keeps the index order for exact ties.
    order.sort_by(|&i, &j| {
        values[j]
            .partial_cmp(&values[i])
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let mut vals = order.map(|i| values[i]);
    let mut vecs = order.map(|i| vectors[i]);

    let scale = vals.iter().fold(T::one(), |m, v| m.max(v.abs()));
    let cluster_tol = T::ITOL * scale;
    let mut start = 0;
    while start < N {
        let mut end = start + 1;
        while end < N && (vals[end - 1] - vals[end]).abs() <= cluster_tol {
            end += 1;
        }
        if end - start > 1 {
            rebuild_cluster(&mut vecs[start..end]);
            let mean = vals[start..end].iter().copied().sum::<T>() / T::of((end - start) as f64);
            for v in &mut vals[start..end] {
                *v = mean;
            }
        }
        start = end;
    }
    for v in &mut vecs {
        fix_phase(v);
    }
    Eigen {
        values: vals,
        vectors: vecs,
    }
}

/// Replaces an orthonormal basis of a degenerate eigenspace with the
/// Gram–Schmidt orthonormalization of the projected standard basis.
fn rebuild_cluster<T: Real, const N: usize>(cluster: &mut [Ket<T, N>]) {
    let projector: Matrix<T, N> = cluster.iter().map(|v| v.projector()).sum();
    let want = cluster.len();
    let mut basis: Vec<Ket<T, N>> = Vec::with_capacity(want);
    for i in 0..N {
        if basis.len() == want {
            break;
        }
        let mut w = projector.apply(&Ket::basis(i));
        for u in &basis {
            let ov = u.inner(&w);
            w = w - u.scale(ov);
        }
        if w.norm() > T::of(1e-3) {
            basis.push(w.normalized().expect("checked norm"));
        }
    }
    if basis.len() == want {
        cluster.copy_from_slice(&basis);
    }
}

/// Makes the first non-negligible component real and positive.
fn fix_phase<T: Real, const N: usize>(v: &mut Ket<T, N>) {
    let thresh = T::of(1e-8);
    if let Some(first) = v.0.iter().copied().find(|a| a.norm() > thresh) {
        let ph = first.conj() / first.norm();
        *v = v.scale(ph);
    }
}
