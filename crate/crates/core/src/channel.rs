//! From a system–environment interaction to system-only maps.
//!
//! A fresh environment q-bit is prepared, interacts with the system through a
//! two-q-bit unitary, and is then either measured ([`conditional_instrument`])
//! or discarded ([`unconditional_channel`]).

use log::warn;

use crate::algebra::{c, re};
use crate::algebra::{env_matrix_element, Eigen, HermitianEigen, Ket, Ket2, Mat2, Mat4, Matrix};
use crate::error::{Error, Result};
use crate::gates::{pauli, pauli_rep, strong_gate, GateFamily};
use crate::measurement::{Instrument, InstrumentOutcome};
use crate::qbit::DensityMatrix;
use crate::scalar::Real;

/// Preparation of each environment q-bit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EnvPrep<T> {
    Pure(Ket2<T>),
    /// `w0 |0⟩⟨0| + w1 |1⟩⟨1|`
    Mixed {
        w0: T,
        w1: T,
    },
}

impl<T: Real> EnvPrep<T> {
    pub fn zero() -> Self {
        EnvPrep::Pure(Ket2::basis(0))
    }

    /// `(|0⟩ − i|1⟩)/√2`
    pub fn y_minus() -> Self {
        let s = T::of(0.5).sqrt();
        EnvPrep::Pure(Ket([re(s), c(T::zero(), -s)]))
    }

    pub fn pure(k: Ket2<T>) -> Result<Self> {
        if !k.is_finite() || (k.norm_sqr() - T::one()).abs() > T::ATOL {
            return Err(Error::domain("environment state must be normalized"));
        }
        Ok(EnvPrep::Pure(k))
    }

    pub fn mixed(w0: T, w1: T) -> Result<Self> {
        if !(w0 >= T::zero() && w1 >= T::zero()) || (w0 + w1 - T::one()).abs() > T::ATOL {
            return Err(Error::domain(format!(
                "environment weights ({w0}, {w1}) are not a distribution"
            )));
        }
        Ok(EnvPrep::Mixed { w0, w1 })
    }

    pub fn is_mixed(&self) -> bool {
        matches!(self, EnvPrep::Mixed { .. })
    }

    /// Pure branches `(w_i, |e_i⟩)` of the preparation, skipping empty ones.
    pub fn branches(&self) -> Vec<(T, Ket2<T>)> {
        match *self {
            EnvPrep::Pure(k) => vec![(T::one(), k)],
            EnvPrep::Mixed { w0, w1 } => [(w0, Ket2::basis(0)), (w1, Ket2::basis(1))]
                .into_iter()
                .filter(|(w, _)| *w > T::zero())
                .collect(),
        }
    }

    pub fn density(&self) -> Mat2<T> {
        self.branches()
            .iter()
            .map(|(w, k)| k.projector().scale_re(*w))
            .sum()
    }
}

/// Completely positive trace-preserving map `ρ ↦ Σ O_k ρ O_k†`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel<T> {
    operators: Vec<Mat2<T>>,
}

impl<T: Real> KrausChannel<T> {
    pub fn new(operators: Vec<Mat2<T>>) -> Result<Self> {
        let ch = KrausChannel { operators };
        let err = ch.completeness_error();
        if !(err <= T::ITOL) {
            return Err(Error::domain(format!(
                "Kraus operators complete only within {:e}",
                err.as_f64()
            )));
        }
        Ok(ch)
    }

    pub fn identity() -> Self {
        KrausChannel {
            operators: vec![Mat2::identity()],
        }
    }

    pub fn operators(&self) -> &[Mat2<T>] {
        &self.operators
    }

    pub fn completeness_error(&self) -> T {
        let s: Mat2<T> = self.operators.iter().map(|o| o.adjoint() * *o).sum();
        s.max_abs_diff(&Mat2::identity())
    }

    pub fn act(&self, rho: &Mat2<T>) -> Mat2<T> {
        self.operators.iter().map(|o| o.conjugate(rho)).sum()
    }

    pub fn apply(&self, rho: &DensityMatrix<T>) -> DensityMatrix<T> {
        apply_channel(rho, self)
    }
}

pub fn apply_channel<T: Real>(rho: &DensityMatrix<T>, ch: &KrausChannel<T>) -> DensityMatrix<T> {
    DensityMatrix::from_raw(ch.act(rho.matrix()))
}

/// `[ρ, Φ(ρ), …, Φⁿ(ρ)]`
pub fn iterate_channel<T: Real>(
    rho: &DensityMatrix<T>,
    ch: &KrausChannel<T>,
    n: usize,
) -> Vec<DensityMatrix<T>> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(*rho);
    for _ in 0..n {
        let next = apply_channel(out.last().expect("nonempty"), ch);
        out.push(next);
    }
    out
}

/// Kraus set of the interaction followed by discarding the environment.
///
/// `U` is expanded as `Σ_j A_j ⊗ σ_j` with `A_j = Σ_i R_ij σ_i`. For a pure
/// preparation `|e⟩` the matrix `M_jj' = ⟨e|σ_j' σ_j|e⟩` is diagonalized and
/// `O_k = √λ_k Σ_j (v_k)_j A_j`; a mixed preparation contributes one such
/// set per branch, weighted by `√w_i`. The result is finally reduced to an
/// orthogonal (minimal) Kraus set, so system-local unitaries give a single
/// operator.
pub fn unconditional_channel<T: Real>(u: &Mat4<T>, prep: &EnvPrep<T>) -> Result<KrausChannel<T>> {
    u.require_unitary()?;
    let r = pauli_rep(u);
    let a: [Mat2<T>; 4] =
        core::array::from_fn(|j| (0..4).map(|i| pauli(i).scale(r.get(i, j))).sum());
    let sigma: [Mat2<T>; 4] = core::array::from_fn(pauli);
    let mut ops = Vec::new();
    for (w, e) in prep.branches() {
        let mut m = Mat4::zeros();
        for j in 0..4 {
            for jp in 0..4 {
                m[(j, jp)] = (sigma[jp] * sigma[j]).sandwich(&e, &e);
            }
        }
        let Eigen { values, vectors } = m.eig_hermitian()?;
        for (lambda, v) in values.into_iter().zip(vectors) {
            if lambda > T::RANK_CUTOFF {
                let o: Mat2<T> = (0..4).map(|j| a[j].scale(v[j])).sum();
                ops.push(o.scale_re((w * lambda).sqrt()));
            }
        }
    }
    KrausChannel::new(minimal_kraus(&ops)?)
}

/// Minimal Kraus set with the same action: the operators are vectorized,
/// `C = Σ_k vec(O_k) vec(O_k)†` is diagonalized and each eigenpair above the
/// rank cutoff becomes `√μ · unvec(u)`.
fn minimal_kraus<T: Real>(ops: &[Mat2<T>]) -> Result<Vec<Mat2<T>>> {
    let vec_of = |o: &Mat2<T>| Ket([o[(0, 0)], o[(0, 1)], o[(1, 0)], o[(1, 1)]]);
    let choi: Mat4<T> = ops.iter().map(|o| vec_of(o).projector()).sum();
    let e = choi.eig_hermitian()?;
    Ok(e.values
        .into_iter()
        .zip(e.vectors)
        .filter(|(mu, _)| *mu > T::RANK_CUTOFF)
        .map(|(mu, v)| Matrix([[v[0], v[1]], [v[2], v[3]]]).scale_re(mu.sqrt()))
        .collect())
}

/// System instrument induced by measuring the environment after the
/// interaction.
///
/// Each environment outcome `n` contributes the operators
/// `√(w_i λ_l) (1 ⊗ ⟨f_l|) U (1 ⊗ |e_i⟩)`, where `E_n = Σ λ_l |f_l⟩⟨f_l|` is
/// the outcome's effect and `(w_i, |e_i⟩)` runs over the preparation.
/// Projective outcomes on a pure preparation give a single operator.
pub fn conditional_instrument<T: Real>(
    u: &Mat4<T>,
    prep: &EnvPrep<T>,
    env_instrument: &Instrument<T>,
) -> Result<Instrument<T>> {
    u.require_unitary()?;
    let branches = prep.branches();
    let mut outcomes = Vec::with_capacity(env_instrument.len());
    for o in env_instrument.outcomes() {
        let eig = o.effect().eig_hermitian()?;
        let mut ops = Vec::new();
        for (w, e) in &branches {
            for (lambda, f) in eig.values.iter().zip(eig.vectors.iter()) {
                if *lambda > T::RANK_CUTOFF {
                    ops.push(env_matrix_element(u, f, e).scale_re((*w * *lambda).sqrt()));
                }
            }
        }
        outcomes.push(InstrumentOutcome::new(o.label, ops));
    }
    Instrument::new(outcomes)
}

/// The channel as a one-outcome instrument labelled `avg`.
pub fn unconditional_instrument<T: Real>(u: &Mat4<T>, prep: &EnvPrep<T>) -> Result<Instrument<T>> {
    let ch = unconditional_channel(u, prep)?;
    Instrument::new(vec![InstrumentOutcome::new("avg", ch.operators)])
}

/// Generator `dρ/dt = −i[H, ρ] + Σ (L ρ L† − ½{L†L, ρ})`.
#[derive(Clone, Debug, PartialEq)]
pub struct LindbladGen<T> {
    pub hamiltonian: Mat2<T>,
    pub lindblad_ops: Vec<Mat2<T>>,
    pub dt: T,
}

impl<T: Real> LindbladGen<T> {
    pub fn new(hamiltonian: Mat2<T>, lindblad_ops: Vec<Mat2<T>>, dt: T) -> Result<Self> {
        let dev = hamiltonian.hermitian_deviation();
        if dev > T::ATOL {
            return Err(Error::NotHermitian {
                deviation: dev.as_f64(),
            });
        }
        if !(dt > T::zero()) {
            return Err(Error::domain(format!("time step {dt} must be positive")));
        }
        Ok(LindbladGen {
            hamiltonian,
            lindblad_ops,
            dt,
        })
    }

    /// The single Lindblad operator of a weak-gate generator.
    pub fn l(&self) -> &Mat2<T> {
        &self.lindblad_ops[0]
    }
}

/// Lindblad operator of a weak gate family, `L = √(θ²/δt) (1 ⊗ ⟨1|) U (1 ⊗ |0⟩)`
/// with `U` the strong gate. The phase correction removes the first-order
/// term, so there is no Hamiltonian part.
pub fn lindblad_from_weak<T: Real>(family: &GateFamily<T>, dt: T) -> Result<LindbladGen<T>> {
    if !(dt > T::zero()) {
        return Err(Error::domain(format!("time step {dt} must be positive")));
    }
    let theta = family.theta();
    if theta > T::of(0.3) {
        warn!("interaction angle {theta} is not small; the Lindblad limit is a poor approximation");
    }
    let g = strong_gate::<T>(family.kind);
    let l = env_matrix_element(&g, &Ket2::basis(1), &Ket2::basis(0))
        .scale_re((theta * theta / dt).sqrt());
    LindbladGen::new(Mat2::zeros(), vec![l], dt)
}

pub fn lindblad_rhs<T: Real>(rho: &DensityMatrix<T>, generator: &LindbladGen<T>) -> Mat2<T> {
    let r = *rho.matrix();
    let h = generator.hamiltonian;
    let mut out = (h * r - r * h).scale(c(T::zero(), -T::one()));
    let half = T::of(0.5);
    for l in &generator.lindblad_ops {
        let ld = l.adjoint();
        let ll = ld * *l;
        out = out + *l * r * ld - (ll * r + r * ll).scale_re(half);
    }
    out
}
