//! Exact discrete-step trajectory engine.
//!
//! A [`Scenario`] is compiled once into an [`Engine`], which holds the
//! induced system instrument. Each step draws one uniform number from the
//! counter-based stream and conditions the state on the selected outcome.
//! The continuum stochastic equations are not used for stepping; the
//! `*_residual` functions compare them against the exact update.

use rayon::prelude::*;

use crate::algebra::{Ket2, Mat2};
use crate::channel::{
    conditional_instrument, lindblad_from_weak, unconditional_instrument, EnvPrep, LindbladGen,
};
use crate::error::{Error, Result};
use crate::gates::{weak_gate, GateFamily, GateKind};
use crate::measurement::{
    computational, discrimination_povm, efficiency_povm, projective_axis, Instrument,
    MeasurementOutcome,
};
use crate::qbit::{DensityMatrix, PureQbit, QState};
use crate::rng::counter_uniform;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    Z,
    X,
}

/// What is done with each environment q-bit after the interaction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EnvMeasurement<T> {
    /// Projective measurement; `Z` has outcomes `0`/`1`, `X` has `+`/`-`.
    Basis(Axis),
    Discrimination(T),
    Efficiency(T),
    /// Environment discarded.
    None,
}

impl<T: Real> EnvMeasurement<T> {
    pub fn instrument(&self) -> Result<Option<Instrument<T>>> {
        Ok(match *self {
            EnvMeasurement::Basis(Axis::Z) => Some(computational()),
            EnvMeasurement::Basis(Axis::X) => {
                Some(projective_axis([T::one(), T::zero(), T::zero()])?)
            }
            EnvMeasurement::Discrimination(q) => Some(discrimination_povm(q)?),
            EnvMeasurement::Efficiency(q) => Some(efficiency_povm(q)?),
            EnvMeasurement::None => None,
        })
    }
}

/// Full description of a repeated-interaction experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario<T> {
    pub family: GateFamily<T>,
    pub prep: EnvPrep<T>,
    pub env_meas: EnvMeasurement<T>,
    pub init: QState<T>,
    pub steps: usize,
    pub dt: T,
}

impl<T: Real> Scenario<T> {
    /// Scenario with `dt = 1`.
    pub fn new(
        family: GateFamily<T>,
        prep: EnvPrep<T>,
        env_meas: EnvMeasurement<T>,
        init: QState<T>,
        steps: usize,
    ) -> Self {
        Scenario {
            family,
            prep,
            env_meas,
            init,
            steps,
            dt: T::one(),
        }
    }

    pub fn with_dt(mut self, dt: T) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_steps(mut self, steps: usize) -> Self {
        self.steps = steps;
        self
    }

    pub fn with_init(mut self, init: impl Into<QState<T>>) -> Self {
        self.init = init.into();
        self
    }

    /// CNOT coupling, ground-state environment, `z` measurement.
    pub fn cnot_jump(theta: T, init: impl Into<QState<T>>, steps: usize) -> Result<Self> {
        Ok(Self::new(
            GateFamily::new(GateKind::Cnot, theta)?,
            EnvPrep::zero(),
            EnvMeasurement::Basis(Axis::Z),
            init.into(),
            steps,
        ))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(Error::domain(format!(
                "time step {} must be positive",
                self.dt
            )));
        }
        self.env_meas.instrument()?;
        match self.prep {
            EnvPrep::Pure(k) => {
                EnvPrep::pure(k)?;
            }
            EnvPrep::Mixed { w0, w1 } => {
                EnvPrep::mixed(w0, w1)?;
            }
        }
        match self.init {
            QState::Pure(p) => {
                PureQbit::new(p.alpha, p.beta)?;
            }
            QState::Mixed(d) => {
                DensityMatrix::new(*d.matrix())?;
            }
        }
        Ok(())
    }

    pub fn compile(&self) -> Result<Engine<T>> {
        Engine::new(self.clone())
    }

    /// FNV-1a over the bit patterns of every parameter.
    pub fn hash(&self) -> u64 {
        let mut h = Fnv::new();
        h.byte(match self.family.kind {
            GateKind::Cnot => 1,
            GateKind::Swap => 2,
        });
        h.real(self.family.theta());
        h.real(self.dt);
        match self.prep {
            EnvPrep::Pure(k) => {
                h.byte(1);
                for a in k.0 {
                    h.real(a.re);
                    h.real(a.im);
                }
            }
            EnvPrep::Mixed { w0, w1 } => {
                h.byte(2);
                h.real(w0);
                h.real(w1);
            }
        }
        match self.env_meas {
            EnvMeasurement::Basis(Axis::Z) => h.byte(1),
            EnvMeasurement::Basis(Axis::X) => h.byte(2),
            EnvMeasurement::Discrimination(q) => {
                h.byte(3);
                h.real(q)
            }
            EnvMeasurement::Efficiency(q) => {
                h.byte(4);
                h.real(q)
            }
            EnvMeasurement::None => h.byte(5),
        }
        match self.init {
            QState::Pure(p) => {
                h.byte(1);
                for a in [p.alpha, p.beta] {
                    h.real(a.re);
                    h.real(a.im);
                }
            }
            QState::Mixed(d) => {
                h.byte(2);
                for a in d.matrix().0.iter().flatten() {
                    h.real(a.re);
                    h.real(a.im);
                }
            }
        }
        h.bytes(&(self.steps as u64).to_le_bytes());
        h.0
    }
}

struct Fnv(u64);

impl Fnv {
    fn new() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }

    fn byte(&mut self, b: u8) {
        self.0 ^= b as u64;
        self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
    }

    fn bytes(&mut self, bs: &[u8]) {
        for &b in bs {
            self.byte(b);
        }
    }

    fn real<T: Real>(&mut self, x: T) {
        self.bytes(&x.as_f64().to_bits().to_le_bytes());
    }
}

/// Which stochastic description the scenario realizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Unraveling {
    /// Ground-state environment, `z` measurement: `δN ∈ {0, 1}`.
    Jump,
    /// Ground-state environment, `x` measurement: `δW = ±√δt`.
    UnitaryDiffusion,
    /// `|y₋⟩` environment, `z` measurement: `δW = ∓√δt` and centered `δZ`.
    RealNoise,
    /// Thermal environment, `z` measurement: selector `F`.
    MixedEnvironment,
    /// Imperfect discrimination POVM: selector `F`.
    Discrimination,
    /// Finite-efficiency detector: selector `F` or a null result.
    Efficiency,
    /// Environment discarded.
    Unconditional,
    /// Any other combination; outcomes are logged without a noise variable.
    Generic,
}

/// Stochastic variable attached to one step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NoiseIncrement<T> {
    Jump { dn: u8 },
    Wiener { dw: T },
    Centered { dw: T, dz: T },
    Selector { f: u8 },
    NullResult,
    None,
}

impl<T: Real> NoiseIncrement<T> {
    /// Numeric value for logging: `δN`, `δW`, `δZ` or `F`.
    pub fn value(&self) -> Option<T> {
        match *self {
            NoiseIncrement::Jump { dn } => Some(T::of(dn as f64)),
            NoiseIncrement::Wiener { dw } => Some(dw),
            NoiseIncrement::Centered { dz, .. } => Some(dz),
            NoiseIncrement::Selector { f } => Some(T::of(f as f64)),
            NoiseIncrement::NullResult | NoiseIncrement::None => None,
        }
    }
}

/// A compiled scenario.
#[derive(Clone, Debug)]
pub struct Engine<T> {
    scenario: Scenario<T>,
    hash: u64,
    instrument: Instrument<T>,
    kind: Unraveling,
    lindblad: LindbladGen<T>,
    pure_steps: bool,
}

impl<T: Real> Engine<T> {
    pub fn new(scenario: Scenario<T>) -> Result<Self> {
        scenario.validate()?;
        let u = weak_gate(&scenario.family);
        let instrument = match scenario.env_meas.instrument()? {
            Some(env) => conditional_instrument(&u, &scenario.prep, &env)?,
            None => unconditional_instrument(&u, &scenario.prep)?,
        };
        let kind = classify(&scenario);
        let lindblad = lindblad_from_weak(&scenario.family, scenario.dt)?;
        let pure_steps = instrument.outcomes().iter().all(|o| o.operators.len() == 1);
        let hash = scenario.hash();
        Ok(Engine {
            scenario,
            hash,
            instrument,
            kind,
            lindblad,
            pure_steps,
        })
    }

    pub fn scenario(&self) -> &Scenario<T> {
        &self.scenario
    }

    pub fn instrument(&self) -> &Instrument<T> {
        &self.instrument
    }

    pub fn unraveling(&self) -> Unraveling {
        self.kind
    }

    pub fn lindblad(&self) -> &LindbladGen<T> {
        &self.lindblad
    }

    pub fn hash(&self) -> u64 {
        self.hash
    }

    /// Whether pure states stay pure under every outcome.
    pub fn keeps_purity(&self) -> bool {
        self.pure_steps
    }

    /// Initial state, promoted to a density matrix when the unraveling
    /// cannot keep it pure.
    pub fn initial_state(&self) -> QState<T> {
        match self.scenario.init {
            QState::Pure(p) if !self.pure_steps => QState::Mixed(p.density()),
            s => s,
        }
    }

    /// One exact step driven by the uniform draw `u`.
    pub fn step(
        &self,
        state: &QState<T>,
        u: T,
    ) -> Result<(MeasurementOutcome<T>, NoiseIncrement<T>)> {
        let out = self.instrument.apply(state, u)?;
        let noise = self.noise(state, &out);
        Ok((out, noise))
    }

    /// Conditions on a chosen outcome instead of sampling.
    pub fn branch(
        &self,
        state: &QState<T>,
        index: usize,
    ) -> Result<(MeasurementOutcome<T>, NoiseIncrement<T>)> {
        let out = self.instrument.branch(state, index)?;
        let noise = self.noise(state, &out);
        Ok((out, noise))
    }

    fn noise(&self, prior: &QState<T>, out: &MeasurementOutcome<T>) -> NoiseIncrement<T> {
        let sdt = self.scenario.dt.sqrt();
        match self.kind {
            Unraveling::Jump => NoiseIncrement::Jump {
                dn: out.index as u8,
            },
            // "+" rotates the relative phase by −θ, matching δW = −√δt.
            Unraveling::UnitaryDiffusion => NoiseIncrement::Wiener {
                dw: if out.index == 0 { -sdt } else { sdt },
            },
            Unraveling::RealNoise => {
                let dw = if out.index == 0 { -sdt } else { sdt };
                let l_dag = prior.density().expect(&self.lindblad.l().adjoint()).re;
                let two = T::of(2.0);
                NoiseIncrement::Centered {
                    dw,
                    dz: dw - two * l_dag * self.scenario.dt,
                }
            }
            Unraveling::MixedEnvironment | Unraveling::Discrimination => {
                NoiseIncrement::Selector { f: out.index as u8 }
            }
            Unraveling::Efficiency if out.index == 2 => NoiseIncrement::NullResult,
            Unraveling::Efficiency => NoiseIncrement::Selector { f: out.index as u8 },
            Unraveling::Unconditional | Unraveling::Generic => NoiseIncrement::None,
        }
    }

    /// Trajectory number `trajectory` of the ensemble seeded by `seed`.
    pub fn run(&self, seed: u64, trajectory: u64) -> Result<TrajectoryRecord<T>> {
        let initial = self.initial_state();
        let mut state = initial;
        let mut steps = Vec::with_capacity(self.scenario.steps);
        for k in 0..self.scenario.steps {
            let u = T::of(counter_uniform(seed, trajectory, k as u64));
            let (out, noise) = self.step(&state, u)?;
            state = out.post_state;
            steps.push(StepRecord {
                step: k + 1,
                outcome: out.index,
                label: out.label,
                probability: out.probability,
                noise,
                state,
            });
        }
        Ok(TrajectoryRecord {
            seed,
            trajectory,
            scenario_hash: self.hash,
            initial,
            steps,
        })
    }

    /// Trajectories `0..count`, computed in parallel and returned in order.
    pub fn run_ensemble(&self, seed: u64, count: usize) -> Result<Vec<TrajectoryRecord<T>>> {
        self.run_range(seed, 0..count as u64)
    }

    pub fn run_range(
        &self,
        seed: u64,
        range: core::ops::Range<u64>,
    ) -> Result<Vec<TrajectoryRecord<T>>> {
        range.into_par_iter().map(|t| self.run(seed, t)).collect()
    }
}

fn classify<T: Real>(s: &Scenario<T>) -> Unraveling {
    let zero = EnvPrep::<T>::zero();
    let y = EnvPrep::<T>::y_minus();
    let same = |p: &EnvPrep<T>, q: &EnvPrep<T>| match (p, q) {
        (EnvPrep::Pure(a), EnvPrep::Pure(b)) => a.phase_distance(b) <= T::ATOL,
        _ => false,
    };
    match s.env_meas {
        EnvMeasurement::Basis(Axis::Z) if same(&s.prep, &zero) => Unraveling::Jump,
        EnvMeasurement::Basis(Axis::X) if same(&s.prep, &zero) => Unraveling::UnitaryDiffusion,
        EnvMeasurement::Basis(Axis::Z) if same(&s.prep, &y) => Unraveling::RealNoise,
        EnvMeasurement::Basis(Axis::Z) if s.prep.is_mixed() => Unraveling::MixedEnvironment,
        EnvMeasurement::Discrimination(_) => Unraveling::Discrimination,
        EnvMeasurement::Efficiency(_) => Unraveling::Efficiency,
        EnvMeasurement::None => Unraveling::Unconditional,
        _ => Unraveling::Generic,
    }
}

/// One logged step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord<T> {
    /// Number of interactions applied so far, starting at 1.
    pub step: usize,
    /// Index of the selected outcome within the instrument.
    pub outcome: usize,
    pub label: &'static str,
    pub probability: T,
    pub noise: NoiseIncrement<T>,
    pub state: QState<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord<T> {
    pub seed: u64,
    pub trajectory: u64,
    pub scenario_hash: u64,
    pub initial: QState<T>,
    pub steps: Vec<StepRecord<T>>,
}

impl<T: Real> TrajectoryRecord<T> {
    /// Initial state followed by every post-step state.
    pub fn states(&self) -> impl Iterator<Item = &QState<T>> + '_ {
        core::iter::once(&self.initial).chain(self.steps.iter().map(|s| &s.state))
    }

    pub fn final_state(&self) -> &QState<T> {
        self.steps.last().map(|s| &s.state).unwrap_or(&self.initial)
    }

    /// Product of the selected branch probabilities.
    pub fn path_probability(&self) -> T {
        self.steps
            .iter()
            .fold(T::one(), |acc, s| acc * s.probability)
    }

    pub fn beta_sq_series(&self) -> Vec<T> {
        self.states().map(|s| s.beta_sq()).collect()
    }
}

/// Runs trajectory 0 of `scenario` with `seed`.
pub fn run_trajectory<T: Real>(scenario: &Scenario<T>, seed: u64) -> Result<TrajectoryRecord<T>> {
    scenario.compile()?.run(seed, 0)
}

/// Runs `count` trajectories in parallel, ordered by trajectory index.
pub fn run_ensemble<T: Real>(
    scenario: &Scenario<T>,
    seed: u64,
    count: usize,
) -> Result<Vec<TrajectoryRecord<T>>> {
    scenario.compile()?.run_ensemble(seed, count)
}

/// Diagnostic absorption test: `Some(0)` or `Some(1)` when `|β|²` lies
/// within `tol` of that value.
pub fn absorbed_at<T: Real>(beta_sq: T, tol: T) -> Option<u8> {
    if beta_sq <= tol {
        Some(0)
    } else if beta_sq >= T::one() - tol {
        Some(1)
    } else {
        None
    }
}

fn require_kind<T: Real>(engine: &Engine<T>, allowed: &[Unraveling]) -> Result<()> {
    if allowed.contains(&engine.kind) {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "scenario unravels as {:?}, expected one of {:?}",
            engine.kind, allowed
        )))
    }
}

fn expect_pure<T: Real>(k: &Ket2<T>, o: &Mat2<T>) -> num_complex::Complex<T> {
    k.inner(&o.apply(k))
}

/// Distance between the exact conditioned state and the jump equation's
/// prediction: the no-jump drift `−½(L†L − ⟨L†L⟩)ψ δt` for branch 0, the jump
/// `Lψ/√⟨L†L⟩` for branch 1.
pub fn jump_sse_residual<T: Real>(
    state: &PureQbit<T>,
    engine: &Engine<T>,
    branch: usize,
) -> Result<T> {
    require_kind(engine, &[Unraveling::Jump])?;
    let dt = engine.scenario.dt;
    let l = *engine.lindblad.l();
    let ll = l.adjoint() * l;
    let psi = state.ket();
    let mean_ll = expect_pure(&psi, &ll).re;
    let predicted = match branch {
        0 => psi - (ll.apply(&psi) - psi.scale_re(mean_ll)).scale_re(T::of(0.5) * dt),
        1 => {
            if mean_ll < T::MIN_PROB {
                return Err(Error::domain("jump rate ⟨L†L⟩ vanishes for this state"));
            }
            l.apply(&psi).scale_re(T::one() / mean_ll.sqrt())
        }
        _ => {
            return Err(Error::domain(format!(
                "jump branch {branch} does not exist"
            )))
        }
    };
    let exact = engine.instrument.branch(&QState::Pure(*state), branch)?;
    Ok(exact
        .post_state
        .as_pure()
        .expect("pure branch")
        .ket()
        .phase_distance(&predicted))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiffusionScheme {
    /// `δψ = i L ψ δW`
    Unitary,
    /// `δψ = (⟨L†⟩L − ½|⟨L⟩|² − ½L†L)ψ δt + (L − ⟨L⟩)ψ δZ`
    RealNoise,
}

/// Distance between the exact conditioned state and the diffusion equation
/// of `scheme` for the given outcome.
pub fn diffusion_sse_residual<T: Real>(
    state: &PureQbit<T>,
    engine: &Engine<T>,
    branch: usize,
    scheme: DiffusionScheme,
) -> Result<T> {
    let wanted = match scheme {
        DiffusionScheme::Unitary => Unraveling::UnitaryDiffusion,
        DiffusionScheme::RealNoise => Unraveling::RealNoise,
    };
    require_kind(engine, &[wanted])?;
    if branch > 1 {
        return Err(Error::domain(format!(
            "diffusion branch {branch} does not exist"
        )));
    }
    let prior = QState::Pure(*state);
    let (exact, noise) = engine.branch(&prior, branch)?;
    let dt = engine.scenario.dt;
    let l = *engine.lindblad.l();
    let psi = state.ket();
    let i = num_complex::Complex::new(T::zero(), T::one());
    let predicted = match (scheme, noise) {
        (DiffusionScheme::Unitary, NoiseIncrement::Wiener { dw }) => {
            psi + l.apply(&psi).scale(i * dw)
        }
        (DiffusionScheme::RealNoise, NoiseIncrement::Centered { dz, .. }) => {
            let mean_l = expect_pure(&psi, &l);
            let ll = l.adjoint() * l;
            let half = T::of(0.5);
            let drift = l.scale(mean_l.conj())
                - Mat2::identity().scale_re(half * mean_l.norm_sqr())
                - ll.scale_re(half);
            let kick = l - Mat2::identity().scale(mean_l);
            psi + drift.apply(&psi).scale_re(dt) + kick.apply(&psi).scale_re(dz)
        }
        _ => unreachable!("noise kind fixed by the unraveling"),
    };
    Ok(exact
        .post_state
        .as_pure()
        .expect("pure branch")
        .ket()
        .phase_distance(&predicted))
}

/// One conditioned density-matrix step with its selector `F`
/// (`None` for the efficiency detector's null result).
pub fn sme_step<T: Real>(
    rho: &DensityMatrix<T>,
    engine: &Engine<T>,
    u: T,
) -> Result<(MeasurementOutcome<T>, Option<u8>)> {
    require_kind(
        engine,
        &[
            Unraveling::MixedEnvironment,
            Unraveling::Discrimination,
            Unraveling::Efficiency,
        ],
    )?;
    let (out, noise) = engine.step(&QState::Mixed(*rho), u)?;
    let f = match noise {
        NoiseIncrement::Selector { f } => Some(f),
        _ => None,
    };
    Ok((out, f))
}

/// Max-entry distance between the exact conditioned density matrix and the
/// stochastic master equation
/// `ρ' − ρ = −½{L†L − ⟨L†L⟩, ρ} a_F δt + (LρL† − ⟨L†L⟩ρ) b_F δt`
/// with `a_0 = w0/p0`, `a_1 = w1/p1`, `b_0 = w1/p0`, `b_1 = w0/p1`. For the
/// discrimination POVM `(w0, w1)` is `(q, 1 − q)`.
pub fn sme_residual<T: Real>(
    rho: &DensityMatrix<T>,
    engine: &Engine<T>,
    branch: usize,
) -> Result<T> {
    require_kind(
        engine,
        &[Unraveling::MixedEnvironment, Unraveling::Discrimination],
    )?;
    if branch > 1 {
        return Err(Error::domain(format!(
            "selector value {branch} does not exist"
        )));
    }
    let (w0, w1) = match (engine.scenario.prep, engine.scenario.env_meas) {
        (EnvPrep::Mixed { w0, w1 }, _) => (w0, w1),
        (_, EnvMeasurement::Discrimination(q)) => (q, T::one() - q),
        _ => unreachable!("kind checked"),
    };
    let state = QState::Mixed(*rho);
    let probs = engine.instrument.probabilities(&state);
    let exact = engine.instrument.branch(&state, branch)?;
    let (a, b) = if branch == 0 {
        (w0 / probs[0], w1 / probs[0])
    } else {
        (w1 / probs[1], w0 / probs[1])
    };
    let dt = engine.scenario.dt;
    let l = *engine.lindblad.l();
    let ll = l.adjoint() * l;
    let r = *rho.matrix();
    let mean_ll = rho.expect(&ll).re;
    let shifted = ll - Mat2::identity().scale_re(mean_ll);
    let anti = (shifted * r + r * shifted).scale_re(T::of(-0.5) * a * dt);
    let jump = (l * r * l.adjoint() - r.scale_re(mean_ll)).scale_re(b * dt);
    let predicted = r + anti + jump;
    Ok(exact.post_state.density().matrix().max_abs_diff(&predicted))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::re;
    use crate::channel::unconditional_channel;

    fn cnot(t: f64) -> GateFamily<f64> {
        GateFamily::new(GateKind::Cnot, t).unwrap()
    }

    fn swap(t: f64) -> GateFamily<f64> {
        GateFamily::new(GateKind::Swap, t).unwrap()
    }

    fn init() -> QState<f64> {
        QState::Pure(PureQbit::real(0.6, 0.8).unwrap())
    }

    fn engine(f: GateFamily<f64>, prep: EnvPrep<f64>, m: EnvMeasurement<f64>) -> Engine<f64> {
        Scenario::new(f, prep, m, init(), 10).compile().unwrap()
    }

    #[test]
    fn classification() {
        let z = EnvMeasurement::Basis(Axis::Z);
        assert_eq!(
            engine(cnot(0.1), EnvPrep::zero(), z).unraveling(),
            Unraveling::Jump
        );
        assert_eq!(
            engine(cnot(0.1), EnvPrep::zero(), EnvMeasurement::Basis(Axis::X)).unraveling(),
            Unraveling::UnitaryDiffusion
        );
        assert_eq!(
            engine(cnot(0.1), EnvPrep::y_minus(), z).unraveling(),
            Unraveling::RealNoise
        );
        assert_eq!(
            engine(cnot(0.1), EnvPrep::mixed(0.7, 0.3).unwrap(), z).unraveling(),
            Unraveling::MixedEnvironment
        );
        assert_eq!(
            engine(
                cnot(0.1),
                EnvPrep::y_minus(),
                EnvMeasurement::Basis(Axis::X)
            )
            .unraveling(),
            Unraveling::Generic
        );
        assert_eq!(
            engine(swap(0.1), EnvPrep::zero(), EnvMeasurement::None).unraveling(),
            Unraveling::Unconditional
        );
    }

    #[test]
    fn jump_step_examples() {
        let e = engine(cnot(0.1), EnvPrep::zero(), EnvMeasurement::Basis(Axis::Z));
        let (o, n) = e.step(&init(), 0.5).unwrap();
        assert_eq!((o.index, n), (0, NoiseIncrement::Jump { dn: 0 }));
        let p0 = 0.36 + 0.64 * 0.1f64.cos().powi(2);
        assert!((o.probability - p0).abs() < 1e-15);
        assert!((o.probability - 0.9936213).abs() < 1e-7);
        let expected = PureQbit::real(0.6 / p0.sqrt(), 0.8 * 0.1f64.cos() / p0.sqrt()).unwrap();
        assert!(o.post_state.as_pure().unwrap().phase_distance(&expected) < 1e-13);
        let (o, n) = e.step(&init(), 0.999).unwrap();
        assert_eq!((o.index, n), (1, NoiseIncrement::Jump { dn: 1 }));
        assert!((o.probability - 0.64 * 0.1f64.sin().powi(2)).abs() < 1e-15);
        assert!(
            o.post_state
                .as_pure()
                .unwrap()
                .phase_distance(&PureQbit::one())
                < 1e-15
        );

        let e = engine(swap(0.1), EnvPrep::zero(), EnvMeasurement::Basis(Axis::Z));
        let (o, _) = e.branch(&init(), 1).unwrap();
        assert!(
            o.post_state
                .as_pure()
                .unwrap()
                .phase_distance(&PureQbit::zero())
                < 1e-15
        );
    }

    #[test]
    fn step_records_count_interactions() {
        let r = engine(cnot(0.1), EnvPrep::zero(), EnvMeasurement::Basis(Axis::Z))
            .run(3, 0)
            .unwrap();
        assert_eq!(
            r.steps.iter().map(|s| s.step).collect::<Vec<_>>(),
            (1..=10).collect::<Vec<_>>()
        );
        for s in &r.steps {
            assert_eq!(["0", "1"][s.outcome], s.label);
        }
    }

    #[test]
    fn zero_steps_keeps_only_initial_state() {
        let s = Scenario::cnot_jump(0.1, init(), 0).unwrap();
        let r = run_trajectory(&s, 9).unwrap();
        assert!(r.steps.is_empty());
        assert_eq!(*r.final_state(), init());
        assert_eq!(r.path_probability(), 1.0);
    }

    #[test]
    fn runs_are_reproducible() {
        let s = Scenario::cnot_jump(0.1, init(), 200).unwrap();
        assert_eq!(
            run_trajectory(&s, 42).unwrap(),
            run_trajectory(&s, 42).unwrap()
        );
        let e = s.compile().unwrap();
        let serial: Vec<_> = (0..64).map(|t| e.run(42, t).unwrap()).collect();
        assert_eq!(serial, e.run_ensemble(42, 64).unwrap());
    }

    #[test]
    fn record_invariants() {
        let s = Scenario::new(
            cnot(0.2),
            EnvPrep::mixed(0.8, 0.2).unwrap(),
            EnvMeasurement::Basis(Axis::Z),
            init(),
            50,
        );
        for r in run_ensemble(&s, 3, 20).unwrap() {
            let p = r.path_probability();
            assert!(p > 0.0 && p <= 1.0);
            for st in r.states() {
                let d = st.density();
                assert!(DensityMatrix::new(*d.matrix()).is_ok());
                assert!(
                    !st.is_pure(),
                    "mixed environment promotes to density matrices"
                );
            }
        }
    }

    #[test]
    fn noise_variables() {
        let e = engine(cnot(0.1), EnvPrep::zero(), EnvMeasurement::Basis(Axis::X));
        let (o, n) = e.branch(&init(), 0).unwrap();
        assert_eq!(o.label, "+");
        assert_eq!(n, NoiseIncrement::Wiener { dw: -1.0 });
        let e = Scenario::new(
            cnot(0.1),
            EnvPrep::y_minus(),
            EnvMeasurement::Basis(Axis::Z),
            init(),
            1,
        )
        .with_dt(0.25)
        .compile()
        .unwrap();
        let (_, n) = e.branch(&init(), 1).unwrap();
        match n {
            NoiseIncrement::Centered { dw, dz } => {
                assert_eq!(dw, 0.5);
                // ⟨L†⟩ = (θ/√δt)|β|²
                assert!((dz - (0.5 - 2.0 * 0.2 * 0.64 * 0.25)).abs() < 1e-15);
                assert_eq!(dw * dw, 0.25);
            }
            other => panic!("{other:?}"),
        }
        let e = engine(cnot(0.1), EnvPrep::zero(), EnvMeasurement::Efficiency(0.6));
        assert_eq!(e.branch(&init(), 2).unwrap().1, NoiseIncrement::NullResult);
    }

    #[test]
    fn real_noise_probability() {
        let e = engine(
            cnot(0.1),
            EnvPrep::y_minus(),
            EnvMeasurement::Basis(Axis::Z),
        );
        let p = e.instrument().probabilities(&init());
        let t = 0.1f64;
        assert!((p[0] - (0.5 - 0.64 * t.sin() * t.cos())).abs() < 1e-15);
        assert!((p[0] - 0.4364258).abs() < 1e-7);
    }

    #[test]
    fn unitary_diffusion_rotates_phase() {
        let t = 0.1f64;
        let e = engine(cnot(t), EnvPrep::zero(), EnvMeasurement::Basis(Axis::X));
        for (branch, sign) in [(0, -1.0), (1, 1.0)] {
            let (o, _) = e.branch(&init(), branch).unwrap();
            let p = o.post_state.as_pure().copied().unwrap();
            assert!((p.beta.norm() - 0.8).abs() < 1e-15);
            let rel = (p.beta / p.alpha).arg();
            assert!((rel - sign * t).abs() < 1e-14);
        }
    }

    #[test]
    fn fixed_points_of_real_noise() {
        let e = engine(
            cnot(0.1),
            EnvPrep::y_minus(),
            EnvMeasurement::Basis(Axis::Z),
        );
        for b in 0..2 {
            let r = diffusion_sse_residual(&PureQbit::zero(), &e, b, DiffusionScheme::RealNoise)
                .unwrap();
            assert!(r < 1e-15, "{r}");
        }
    }

    #[test]
    fn jump_branch_is_exact() {
        let e = engine(cnot(0.1), EnvPrep::zero(), EnvMeasurement::Basis(Axis::Z));
        let r = jump_sse_residual(init().as_pure().unwrap(), &e, 1).unwrap();
        assert!(r <= 1e-12);
        assert!(jump_sse_residual(&PureQbit::zero(), &e, 1).is_err());
        let wrong = engine(
            cnot(0.1),
            EnvPrep::y_minus(),
            EnvMeasurement::Basis(Axis::Z),
        );
        assert!(jump_sse_residual(&PureQbit::zero(), &wrong, 0).is_err());
    }

    #[test]
    fn balanced_mixed_environment_reduces_to_mean() {
        let f = cnot(0.1);
        let prep = EnvPrep::mixed(0.5, 0.5).unwrap();
        let e = engine(f, prep, EnvMeasurement::Basis(Axis::Z));
        let ch = unconditional_channel(&weak_gate(&f), &prep).unwrap();
        let rho = PureQbit::real(0.6, 0.8).unwrap().density();
        let mean = ch.apply(&rho);
        for b in 0..2 {
            let (o, _) = e.branch(&QState::Mixed(rho), b).unwrap();
            assert!(o.post_state.density().max_abs_diff(&mean) < 1e-12);
        }
    }

    #[test]
    fn mixed_environment_probability() {
        let e = engine(
            cnot(0.1),
            EnvPrep::mixed(0.75, 0.25).unwrap(),
            EnvMeasurement::Basis(Axis::Z),
        );
        let rho = init().density();
        let p = e.instrument().probabilities(&QState::Mixed(rho));
        let t2 = 0.1f64.sin().powi(2);
        let exact = 0.75 * (1.0 - 0.64 * t2) + 0.25 * 0.64 * t2;
        assert!((p[0] - exact).abs() < 1e-15);
        assert!((p[0] - (0.75 - 0.01 * 0.64 * 0.5)).abs() < 1e-4);
    }

    #[test]
    fn efficiency_null_result_is_the_channel() {
        let f = cnot(0.1);
        let e = engine(f, EnvPrep::zero(), EnvMeasurement::Efficiency(0.7));
        let ch = unconditional_channel(&weak_gate(&f), &EnvPrep::zero()).unwrap();
        let rho = crate::qbit::mixed_from_bloch(1.0, 0.5, 0.8).unwrap();
        let (o, f) = sme_step(&rho, &e, 0.99).unwrap();
        assert_eq!((o.label, f), ("2", None));
        assert!((o.probability - 0.3).abs() < 1e-15);
        assert!(o.post_state.density().max_abs_diff(&ch.apply(&rho)) < 1e-12);
    }

    #[test]
    fn sme_step_rejects_pure_unravelings() {
        let e = engine(cnot(0.1), EnvPrep::zero(), EnvMeasurement::Basis(Axis::Z));
        assert!(sme_step(&init().density(), &e, 0.5).is_err());
    }

    #[test]
    fn hash_distinguishes_parameters() {
        let a = Scenario::cnot_jump(0.1, init(), 10).unwrap();
        let b = Scenario::cnot_jump(0.1, init(), 11).unwrap();
        let c = Scenario::cnot_jump(0.1000001, init(), 10).unwrap();
        assert_ne!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash(), a.clone().hash());
    }

    #[test]
    fn absorption_threshold() {
        assert_eq!(absorbed_at(0.0005, 1e-3), Some(0));
        assert_eq!(absorbed_at(0.9995, 1e-3), Some(1));
        assert_eq!(absorbed_at(0.5, 1e-3), None);
    }

    #[test]
    fn invalid_scenarios_are_rejected() {
        let s = Scenario::cnot_jump(0.1, init(), 1).unwrap().with_dt(0.0);
        assert!(s.compile().is_err());
        let s = Scenario::new(
            cnot(0.1),
            EnvPrep::zero(),
            EnvMeasurement::Discrimination(0.4),
            init(),
            1,
        );
        assert!(s.compile().is_err());
        let bad = QState::Pure(PureQbit {
            alpha: re(1.0),
            beta: re(1.0),
        });
        assert!(Scenario::cnot_jump(0.1, bad, 1).unwrap().compile().is_err());
    }

    #[test]
    fn single_precision_engine() {
        let init = QState::Pure(PureQbit::<f32>::real(0.6, 0.8).unwrap());
        let s = Scenario::cnot_jump(0.1f32, init, 30).unwrap();
        let r = run_trajectory(&s, 1).unwrap();
        assert_eq!(r.steps.len(), 30);
        for st in r.states() {
            let p = st.as_pure().unwrap();
            assert!((p.ket().norm_sqr() - 1.0).abs() < 1e-5);
        }
    }
}
