//! Measurement instruments on a single q-bit.
//!
//! An [`Instrument`] keeps the update operators of every outcome, not only
//! the effects, because the effects alone do not fix the post-measurement
//! state. Outcome `n` with operators `{A_nk}` has effect `E_n = Σ_k A_nk†A_nk`
//! and maps `ρ ↦ Σ_k A_nk ρ A_nk† / p_n`.

use crate::algebra::{re, HermitianEigen, Mat2};
use crate::error::{Error, Result};
use crate::gates::{check_unit, pauli};
use crate::qbit::{DensityMatrix, PureQbit, QState};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct InstrumentOutcome<T> {
    pub label: &'static str,
    pub operators: Vec<Mat2<T>>,
}

impl<T: Real> InstrumentOutcome<T> {
    pub fn new(label: &'static str, operators: Vec<Mat2<T>>) -> Self {
        InstrumentOutcome { label, operators }
    }

    pub fn effect(&self) -> Mat2<T> {
        self.operators.iter().map(|a| a.adjoint() * *a).sum()
    }

    /// Unnormalized update `Σ_k A_k ρ A_k†`.
    pub fn act(&self, rho: &Mat2<T>) -> Mat2<T> {
        self.operators.iter().map(|a| a.conjugate(rho)).sum()
    }
}

/// Complete set of outcomes with `Σ_n E_n = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Instrument<T> {
    outcomes: Vec<InstrumentOutcome<T>>,
}

/// Result of sampling or selecting one outcome.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementOutcome<T> {
    pub index: usize,
    pub label: &'static str,
    pub probability: T,
    pub post_state: QState<T>,
}

impl<T: Real> Instrument<T> {
    /// Checks completeness within `1e-10` and positivity of every effect.
    pub fn new(outcomes: Vec<InstrumentOutcome<T>>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::domain("instrument needs at least one outcome"));
        }
        let total: Mat2<T> = outcomes.iter().map(|o| o.effect()).sum();
        let dev = total.max_abs_diff(&Mat2::identity());
        if !(dev <= T::ITOL) {
            return Err(Error::domain(format!(
                "effects sum to identity only within {:e}",
                dev.as_f64()
            )));
        }
        for o in &outcomes {
            let e = o.effect().eig_hermitian()?;
            if e.values[1] < -T::ATOL {
                return Err(Error::domain(format!(
                    "effect `{}` is not positive",
                    o.label
                )));
            }
        }
        Ok(Instrument { outcomes })
    }

    pub fn outcomes(&self) -> &[InstrumentOutcome<T>] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn labels(&self) -> Vec<&'static str> {
        self.outcomes.iter().map(|o| o.label).collect()
    }

    pub fn effects(&self) -> Vec<Mat2<T>> {
        self.outcomes.iter().map(|o| o.effect()).collect()
    }

    /// Largest entry of `Σ E_n − 1`.
    pub fn completeness_error(&self) -> T {
        let total: Mat2<T> = self.effects().into_iter().sum();
        total.max_abs_diff(&Mat2::identity())
    }

    /// `p_n = Tr(E_n ρ)` in label order.
    pub fn probabilities(&self, state: &QState<T>) -> Vec<T> {
        match state {
            QState::Pure(p) => {
                let k = p.ket();
                self.outcomes
                    .iter()
                    .map(|o| o.operators.iter().map(|a| a.apply(&k).norm_sqr()).sum())
                    .collect()
            }
            QState::Mixed(d) => self
                .outcomes
                .iter()
                .map(|o| o.act(d.matrix()).trace().re.max(T::zero()))
                .collect(),
        }
    }

    /// Conditions `state` on outcome `index`.
    pub fn branch(&self, state: &QState<T>, index: usize) -> Result<MeasurementOutcome<T>> {
        let o = &self.outcomes[index];
        let (probability, post_state) = match state {
            QState::Pure(p) if o.operators.len() == 1 => {
                let v = o.operators[0].apply(&p.ket());
                let prob = v.norm_sqr();
                check_prob(o.label, prob)?;
                (
                    prob,
                    QState::Pure(PureQbit::from_ket_unchecked(
                        v.scale_re(T::one() / prob.sqrt()),
                    )),
                )
            }
            _ => {
                let m = o.act(state.density().matrix());
                let prob = m.trace().re;
                check_prob(o.label, prob)?;
                (prob, QState::Mixed(DensityMatrix::from_raw(m)))
            }
        };
        Ok(MeasurementOutcome {
            index,
            label: o.label,
            probability,
            post_state,
        })
    }

    /// Samples an outcome with a single uniform draw `u ∈ [0, 1)` against the
    /// cumulative probabilities in label order.
    pub fn apply(&self, state: &QState<T>, u: T) -> Result<MeasurementOutcome<T>> {
        let probs = self.probabilities(state);
        self.branch(state, select(&probs, u))
    }

    pub fn apply_pure(&self, state: &PureQbit<T>, u: T) -> Result<MeasurementOutcome<T>> {
        self.apply(&QState::Pure(*state), u)
    }

    pub fn apply_mixed(&self, state: &DensityMatrix<T>, u: T) -> Result<MeasurementOutcome<T>> {
        self.apply(&QState::Mixed(*state), u)
    }
}

fn check_prob<T: Real>(label: &'static str, p: T) -> Result<()> {
    if !(p >= T::MIN_PROB) {
        return Err(Error::ZeroProbability {
            label,
            probability: p.as_f64(),
        });
    }
    Ok(())
}

/// Index of the first cumulative sum exceeding `u`. Rounding can leave the
/// total slightly under 1; draws beyond it go to the last outcome.
pub fn select<T: Real>(probs: &[T], u: T) -> usize {
    let mut acc = T::zero();
    for (i, &p) in probs.iter().enumerate() {
        acc = acc + p;
        if u < acc {
            return i;
        }
    }
    probs
        .iter()
        .rposition(|&p| p > T::zero())
        .unwrap_or(probs.len() - 1)
}

/// Projectors `(1 ± n·σ)/2`, labelled `+` and `−` in that order.
pub fn projective_axis<T: Real>(n: [T; 3]) -> Result<Instrument<T>> {
    check_unit(n)?;
    let ns = pauli::<T>(1).scale_re(n[0]) + pauli(2).scale_re(n[1]) + pauli(3).scale_re(n[2]);
    let half = T::of(0.5);
    let plus = (Mat2::identity() + ns).scale_re(half);
    let minus = (Mat2::identity() - ns).scale_re(half);
    Instrument::new(vec![
        InstrumentOutcome::new("+", vec![plus]),
        InstrumentOutcome::new("-", vec![minus]),
    ])
}

/// Computational-basis measurement with outcomes `0` and `1`.
pub fn computational<T: Real>() -> Instrument<T> {
    let o = T::one();
    let z = T::zero();
    Instrument {
        outcomes: vec![
            InstrumentOutcome::new("0", vec![Mat2::real_diag([o, z])]),
            InstrumentOutcome::new("1", vec![Mat2::real_diag([z, o])]),
        ],
    }
}

fn check_open_unit<T: Real>(eps: T) -> Result<()> {
    if !(eps > T::zero() && eps < T::one()) {
        return Err(Error::domain(format!("strength {eps} outside (0, 1)")));
    }
    Ok(())
}

/// Rarely-firing weak measurement: `A_0 = |0⟩⟨0| + √(1−ε)|1⟩⟨1|`, `A_1 = √ε|1⟩⟨1|`.
pub fn weak_asymmetric<T: Real>(eps: T) -> Result<Instrument<T>> {
    check_open_unit(eps)?;
    let o = T::one();
    Instrument::new(vec![
        InstrumentOutcome::new("0", vec![Mat2::real_diag([o, (o - eps).sqrt()])]),
        InstrumentOutcome::new("1", vec![Mat2::real_diag([T::zero(), eps.sqrt()])]),
    ])
}

/// Nearly uninformative weak measurement with effects `(1 ∓ εσz)/2`.
pub fn weak_balanced<T: Real>(eps: T) -> Result<Instrument<T>> {
    check_open_unit(eps)?;
    let half = T::of(0.5);
    let hi = ((T::one() + eps) * half).sqrt();
    let lo = ((T::one() - eps) * half).sqrt();
    Instrument::new(vec![
        InstrumentOutcome::new("0", vec![Mat2::real_diag([hi, lo])]),
        InstrumentOutcome::new("1", vec![Mat2::real_diag([lo, hi])]),
    ])
}

/// Imperfect discrimination: `A_0 = √q|0⟩⟨0| + √(1−q)|1⟩⟨1|`, `A_1` mirrored.
pub fn discrimination_povm<T: Real>(q: T) -> Result<Instrument<T>> {
    if !(q > T::of(0.5) && q <= T::one()) {
        return Err(Error::domain(format!(
            "discrimination q = {q} outside (1/2, 1]"
        )));
    }
    let a = q.sqrt();
    let b = (T::one() - q).sqrt();
    Instrument::new(vec![
        InstrumentOutcome::new("0", vec![Mat2::real_diag([a, b])]),
        InstrumentOutcome::new("1", vec![Mat2::real_diag([b, a])]),
    ])
}

/// Detector of efficiency `q`: outcomes `0`, `1` and the null result `2`.
pub fn efficiency_povm<T: Real>(q: T) -> Result<Instrument<T>> {
    if !(q > T::zero() && q <= T::one()) {
        return Err(Error::domain(format!("efficiency q = {q} outside (0, 1]")));
    }
    let a = q.sqrt();
    let z = T::zero();
    Instrument::new(vec![
        InstrumentOutcome::new("0", vec![Mat2::real_diag([a, z])]),
        InstrumentOutcome::new("1", vec![Mat2::real_diag([z, a])]),
        InstrumentOutcome::new("2", vec![Mat2::identity().scale_re((T::one() - q).sqrt())]),
    ])
}

/// `−Σ p log₂ p` with `0 log 0 = 0`.
pub fn shannon_entropy<T: Real>(probs: &[T]) -> Result<T> {
    let mut sum = T::zero();
    for &p in probs {
        if !(p >= T::zero()) {
            return Err(Error::domain(format!("negative probability {p}")));
        }
        sum = sum + p;
    }
    if (sum - T::one()).abs() > T::ITOL {
        return Err(Error::domain(format!("probabilities sum to {sum}")));
    }
    Ok(probs
        .iter()
        .filter(|&&p| p > T::zero())
        .map(|&p| -p * p.log2())
        .sum())
}

/// Real diagonal operator on the system, used by tests and scenarios.
pub fn diag_op<T: Real>(a: T, b: T) -> Mat2<T> {
    Mat2::diag([re(a), re(b)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Ket2;
    use proptest::prelude::*;

    fn psi(a: f64, b: f64) -> QState<f64> {
        QState::Pure(PureQbit::real(a, b).unwrap())
    }

    #[test]
    fn z_axis_projectors_follow_sign_convention() {
        let m = projective_axis([0.0f64, 0.0, 1.0]).unwrap();
        let e = m.effects();
        assert!(e[0].max_abs_diff(&Ket2::basis(1).projector()) < 1e-15);
        assert!(e[1].max_abs_diff(&Ket2::basis(0).projector()) < 1e-15);
    }

    #[test]
    fn x_axis_projectors() {
        let m = projective_axis([1.0f64, 0.0, 0.0]).unwrap();
        let s = 0.5f64.sqrt();
        let plus = crate::algebra::Ket([re(s), re(s)]);
        let minus = crate::algebra::Ket([re(s), re(-s)]);
        assert!(m.effects()[0].max_abs_diff(&plus.projector()) < 1e-15);
        assert!(m.effects()[1].max_abs_diff(&minus.projector()) < 1e-15);
        assert!((m.effects()[0] * m.effects()[1]).max_abs() < 1e-15);
    }

    #[test]
    fn bad_axis_is_rejected() {
        assert!(projective_axis([0.5f64, 0.0, 0.0]).is_err());
    }

    #[test]
    fn z_measurement_on_ground_state() {
        let m = projective_axis([0.0f64, 0.0, 1.0]).unwrap();
        for u in [0.0, 0.3, 0.999] {
            let o = m.apply(&psi(1.0, 0.0), u).unwrap();
            assert_eq!(o.label, "-");
            assert!((o.probability - 1.0).abs() < 1e-15);
            assert!(o
                .post_state
                .as_pure()
                .unwrap()
                .same_ray(&PureQbit::zero(), 1e-15));
        }
    }

    #[test]
    fn weak_asymmetric_examples() {
        let m = weak_asymmetric(0.1f64).unwrap();
        let p = m.probabilities(&psi(0.6, 0.8));
        assert!((p[1] - 0.064).abs() < 1e-15);
        let one = m.branch(&psi(0.6, 0.8), 1).unwrap();
        assert!(
            one.post_state
                .as_pure()
                .unwrap()
                .phase_distance(&PureQbit::one())
                < 1e-15
        );
        let zero = m.branch(&psi(0.6, 0.8), 0).unwrap();
        let expected = PureQbit::real(0.6, 0.8 * 0.9f64.sqrt()).unwrap();
        assert!(zero.post_state.as_pure().unwrap().phase_distance(&expected) < 1e-15);
        let tiny = weak_asymmetric(1e-9f64).unwrap();
        assert!(tiny.effects()[0].max_abs_diff(&Mat2::identity()) < 1e-8);
        assert!(weak_asymmetric(0.0f64).is_err() && weak_asymmetric(1.0f64).is_err());
    }

    #[test]
    fn weak_balanced_examples() {
        let m = weak_balanced(0.2f64).unwrap();
        let p = m.probabilities(&psi(1.0, 0.0));
        assert!((p[0] - 0.6).abs() < 1e-15 && (p[1] - 0.4).abs() < 1e-15);
        let p = m.probabilities(&QState::Mixed(DensityMatrix::maximally_mixed()));
        assert_eq!(p, vec![0.5, 0.5]);
        // Exact deviation ±(ε/2)(|α|² − |β|²).
        let p = m.probabilities(&psi(0.6, 0.8));
        assert!((p[0] - (0.5 + 0.1 * (0.36 - 0.64))).abs() < 1e-15);
    }

    #[test]
    fn weak_balanced_first_order_update() {
        let (a, b) = (0.6f64, 0.8f64);
        let mut prev = f64::INFINITY;
        for eps in [0.02f64, 0.01, 0.005] {
            let m = weak_balanced(eps).unwrap();
            let post = m.branch(&psi(a, b), 0).unwrap().post_state;
            let approx =
                crate::algebra::Ket([re(a * (1.0 + eps * b * b)), re(b * (1.0 - eps * a * a))]);
            let d = (post.as_pure().unwrap().ket() - approx).norm();
            assert!(d < prev / 3.0, "second-order residual must shrink");
            prev = d;
        }
    }

    #[test]
    fn discrimination_examples() {
        let m = discrimination_povm(1.0f64).unwrap();
        let z = computational::<f64>();
        assert_eq!(m.effects(), z.effects());
        assert!(discrimination_povm(0.5f64).is_err());
        assert!(discrimination_povm(1.01f64).is_err());
    }

    #[test]
    fn efficiency_examples() {
        let m = efficiency_povm(0.7f64).unwrap();
        for s in [
            psi(0.6, 0.8),
            psi(1.0, 0.0),
            QState::Mixed(DensityMatrix::maximally_mixed()),
        ] {
            assert!((m.probabilities(&s)[2] - 0.3).abs() < 1e-15);
        }
        let s = psi(0.6, 0.8);
        let post = m.branch(&s, 2).unwrap().post_state;
        assert!(post.as_pure().unwrap().phase_distance(s.as_pure().unwrap()) < 1e-15);
        let full = efficiency_povm(1.0f64).unwrap();
        assert!(matches!(
            full.branch(&s, 2),
            Err(Error::ZeroProbability { label: "2", .. })
        ));
        assert!(efficiency_povm(0.0f64).is_err());
    }

    #[test]
    fn shannon_examples() {
        assert!((shannon_entropy(&[0.5f64, 0.5]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(shannon_entropy(&[1.0f64, 0.0]).unwrap(), 0.0);
        let h = shannon_entropy(&[0.9936213f64, 0.0063787]).unwrap();
        let oracle =
            -(0.9936213f64 * 0.9936213f64.ln() + 0.0063787 * 0.0063787f64.ln()) / 2f64.ln();
        assert!((h - oracle).abs() < 1e-15);
        assert!((h - 0.0556899).abs() < 1e-6);
        assert!(shannon_entropy(&[0.5f64, 0.6]).is_err());
        assert!(shannon_entropy(&[1.5f64, -0.5]).is_err());
    }

    #[test]
    fn information_gain_of_a_weak_readout() {
        // Exact Shannon entropy against the small-ε expansion.
        let b2 = 0.64f64;
        let mut errs = vec![];
        for eps in [0.1f64, 0.05, 0.025, 0.0125] {
            let x = eps * b2;
            let exact = shannon_entropy(&[1.0 - x, x]).unwrap();
            let approx = x * (1.0 / 2f64.ln() - x.log2());
            errs.push(((exact - approx).abs(), x));
            if eps == 0.1 {
                assert!((exact - 0.343123).abs() < 1e-6);
                assert!((approx - 0.346143).abs() < 1e-6);
            }
        }
        // Error bounded by a constant times x²|log x|.
        for (e, x) in errs {
            assert!(e <= 2.0 * x * x * (1.0 - x.log2()));
        }
    }

    #[test]
    fn projective_measurement_is_repeatable() {
        let m = projective_axis([0.0f64, 0.6, 0.8]).unwrap();
        let first = m.apply(&psi(0.6, 0.8), 0.42).unwrap();
        let second = m.branch(&first.post_state, first.index).unwrap();
        assert!((second.probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn discrimination_is_not_repeatable() {
        let m = discrimination_povm(0.8f64).unwrap();
        let s = psi(1.0, 0.0);
        let first = m.branch(&s, 0).unwrap();
        let p = m.probabilities(&first.post_state);
        assert!(p[1] > 0.1);
    }

    #[test]
    fn incomplete_instrument_is_rejected() {
        let o = vec![InstrumentOutcome::new("0", vec![diag_op(1.0f64, 0.5)])];
        assert!(Instrument::new(o).is_err());
    }

    proptest! {
        #[test]
        fn constructed_instruments_are_complete(eps in 0.001f64..0.999, q in 0.501f64..1.0) {
            let all = [
                weak_asymmetric(eps).unwrap(),
                weak_balanced(eps).unwrap(),
                discrimination_povm(q).unwrap(),
                efficiency_povm(eps).unwrap(),
                projective_axis([eps.sqrt(), 0.0, (1.0 - eps).sqrt()]).unwrap(),
            ];
            for m in all {
                prop_assert!(m.completeness_error() <= 1e-10);
                for e in m.effects() {
                    prop_assert!(e.eig_hermitian().unwrap().values[1] >= -1e-12);
                }
            }
        }

        #[test]
        fn probabilities_match_trace(a in -1.0f64..1.0, b in -1.0f64..1.0, bi in -1.0f64..1.0, eps in 0.01f64..0.99) {
            prop_assume!(a * a + b * b + bi * bi > 1e-3);
            let p = PureQbit::normalize(re(a), crate::algebra::c(b, bi)).unwrap();
            let m = weak_balanced(eps).unwrap();
            let rho = p.density();
            for (pn, e) in m.probabilities(&QState::Pure(p)).iter().zip(m.effects()) {
                prop_assert!((pn - rho.expect(&e).re).abs() <= 1e-12);
            }
        }
    }
}
