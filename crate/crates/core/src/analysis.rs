//! Ensemble statistics, exact outcome enumeration and entropy bookkeeping.

use rayon::prelude::*;

use crate::algebra::{partial_trace_env, HermitianEigen, Ket4, Mat2};
use crate::error::{Error, Result};
use crate::measurement::{shannon_entropy, Instrument};
use crate::qbit::{DensityMatrix, QState};
use crate::scalar::Real;
use crate::trajectory::{absorbed_at, Engine, Scenario, TrajectoryRecord};

/// Largest number of live branches the enumerator will hold.
pub const BRANCH_BUDGET: usize = 1 << 20;

/// One outcome sequence with its probability and conditioned state.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch<T> {
    /// Outcome indices into `ExactMixture::labels`.
    pub sequence: Vec<u8>,
    pub probability: T,
    pub state: QState<T>,
}

/// Exact distribution over outcome sequences.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactMixture<T> {
    pub labels: Vec<&'static str>,
    pub branches: Vec<Branch<T>>,
    /// Total probability of branches dropped for falling below `MIN_PROB`.
    pub pruned_mass: T,
}

impl<T: Real> ExactMixture<T> {
    pub fn labels_of(&self, branch: &Branch<T>) -> Vec<&'static str> {
        branch
            .sequence
            .iter()
            .map(|&i| self.labels[i as usize])
            .collect()
    }

    pub fn total_probability(&self) -> T {
        self.branches.iter().map(|b| b.probability).sum()
    }

    /// `Σ p(ξ) ρ_ξ`
    pub fn mean(&self) -> DensityMatrix<T> {
        let m: Mat2<T> = self
            .branches
            .iter()
            .map(|b| b.state.density().matrix().scale_re(b.probability))
            .sum();
        DensityMatrix::from_raw(m)
    }
}

/// Expands every outcome sequence of the scenario, pruning branches whose
/// cumulative probability drops below `MIN_PROB`.
pub fn enumerate_outcomes<T: Real>(scenario: &Scenario<T>) -> Result<ExactMixture<T>> {
    let engine = scenario.compile()?;
    enumerate_with(&engine, scenario.steps, BRANCH_BUDGET)
}

pub fn enumerate_with<T: Real>(
    engine: &Engine<T>,
    steps: usize,
    budget: usize,
) -> Result<ExactMixture<T>> {
    let mut branches = vec![Branch {
        sequence: Vec::new(),
        probability: T::one(),
        state: engine.initial_state(),
    }];
    let mut pruned = T::zero();
    for step in 0..steps {
        // Count the survivors from probabilities alone before building states.
        let survivors: usize = branches
            .par_iter()
            .map(|b| {
                let probs = engine.instrument().probabilities(&b.state);
                probs
                    .iter()
                    .filter(|&&p| p >= T::MIN_PROB && b.probability * p >= T::MIN_PROB)
                    .count()
            })
            .sum();
        if survivors > budget {
            return Err(Error::BudgetExceeded { budget, step });
        }
        let next: Vec<(Vec<Branch<T>>, T)> = branches
            .par_iter()
            .map(|b| expand(engine, b))
            .collect::<Result<_>>()?;
        let mut merged = Vec::with_capacity(next.iter().map(|(v, _)| v.len()).sum());
        for (v, p) in next {
            merged.extend(v);
            pruned = pruned + p;
        }
        branches = merged;
    }
    let labels = engine.instrument().labels();
    Ok(ExactMixture {
        labels,
        branches,
        pruned_mass: pruned,
    })
}

fn expand<T: Real>(engine: &Engine<T>, b: &Branch<T>) -> Result<(Vec<Branch<T>>, T)> {
    let probs = engine.instrument().probabilities(&b.state);
    let mut out = Vec::with_capacity(probs.len());
    let mut pruned = T::zero();
    for (i, p) in probs.into_iter().enumerate() {
        let cumulative = b.probability * p;
        if p < T::MIN_PROB || cumulative < T::MIN_PROB {
            pruned = pruned + cumulative.max(T::zero());
            continue;
        }
        let (o, _) = engine.branch(&b.state, i)?;
        let mut sequence = b.sequence.clone();
        sequence.push(i as u8);
        out.push(Branch {
            sequence,
            probability: b.probability * o.probability,
            state: o.post_state,
        });
    }
    Ok((out, pruned))
}

/// Per-step ensemble statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct StepSummary<T> {
    pub mean: DensityMatrix<T>,
    /// Counts of `|β|²` in ten equal bins over `[0, 1]`.
    pub beta_sq_hist: [usize; 10],
    /// Trajectories with `|β|²` within `1e-3` of 0 and of 1.
    pub absorbed: [usize; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleSummary<T> {
    pub steps: Vec<StepSummary<T>>,
    pub trajectories: usize,
    pub seed: u64,
    /// Smallest and largest trajectory index.
    pub trajectory_range: (u64, u64),
}

/// Averages records that come from the same scenario and seed.
pub fn ensemble_average<T: Real>(records: &[TrajectoryRecord<T>]) -> Result<EnsembleSummary<T>> {
    let first = records
        .first()
        .ok_or_else(|| Error::domain("no records to average"))?;
    if records.iter().any(|r| {
        r.scenario_hash != first.scenario_hash
            || r.seed != first.seed
            || r.steps.len() != first.steps.len()
    }) {
        return Err(Error::MixedScenario);
    }
    let n = records.len();
    let weight = T::one() / T::of(n as f64);
    let tol = T::of(1e-3);
    let steps = (0..=first.steps.len())
        .map(|k| {
            let mut sum = Mat2::zeros();
            let mut hist = [0usize; 10];
            let mut absorbed = [0usize; 2];
            for r in records {
                let s = if k == 0 {
                    &r.initial
                } else {
                    &r.steps[k - 1].state
                };
                sum = sum + *s.density().matrix();
                let b = s.beta_sq();
                let bin = (b * T::of(10.0)).floor().to_usize().unwrap_or(0).min(9);
                hist[bin] += 1;
                if let Some(a) = absorbed_at(b, tol) {
                    absorbed[a as usize] += 1;
                }
            }
            StepSummary {
                mean: DensityMatrix::from_raw(sum.scale_re(weight)),
                beta_sq_hist: hist,
                absorbed,
            }
        })
        .collect();
    let lo = records.iter().map(|r| r.trajectory).min().unwrap_or(0);
    let hi = records.iter().map(|r| r.trajectory).max().unwrap_or(0);
    Ok(EnsembleSummary {
        steps,
        trajectories: n,
        seed: first.seed,
        trajectory_range: (lo, hi),
    })
}

fn entropy_of_spectrum<T: Real>(values: &[T]) -> T {
    values
        .iter()
        .filter(|&&l| l > T::zero())
        .map(|&l| -l * l.log2())
        .sum()
}

/// `−Tr ρ log₂ ρ`
pub fn von_neumann_entropy<T: Real>(rho: &DensityMatrix<T>) -> T {
    let e = rho
        .matrix()
        .eig_hermitian()
        .expect("density matrices are Hermitian");
    entropy_of_spectrum(&e.values).max(T::zero()).min(T::one())
}

/// Entropy of the reduced system state of a joint pure state.
pub fn entanglement_entropy<T: Real>(joint: &Ket4<T>) -> T {
    let reduced = partial_trace_env(&joint.projector());
    von_neumann_entropy(&DensityMatrix::from_raw(reduced))
}

/// Information accounting for one measurement on a prior state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InfoGain<T> {
    /// `S(ρ) − Σ p_i S(ρ_i)`
    pub delta_s: T,
    /// Shannon entropy of the outcome distribution.
    pub s_meas: T,
    /// `S_meas / ΔS`; `None` when `ΔS ≤ 1e-15`.
    pub ratio: Option<T>,
}

pub fn info_gain<T: Real>(
    rho: &DensityMatrix<T>,
    instrument: &Instrument<T>,
) -> Result<InfoGain<T>> {
    let prior = QState::Mixed(*rho);
    let probs = instrument.probabilities(&prior);
    let total: T = probs.iter().copied().sum();
    let probs: Vec<T> = probs.into_iter().map(|p| p / total).collect();
    let mut mean_post = T::zero();
    for (i, &p) in probs.iter().enumerate() {
        if p >= T::MIN_PROB {
            let o = instrument.branch(&prior, i)?;
            mean_post = mean_post + p * von_neumann_entropy(&o.post_state.density());
        }
    }
    let delta_s = von_neumann_entropy(rho) - mean_post;
    let s_meas = shannon_entropy(&probs)?;
    let ratio = if delta_s > T::MIN_PROB {
        Some(s_meas / delta_s)
    } else {
        None
    };
    Ok(InfoGain {
        delta_s,
        s_meas,
        ratio,
    })
}

/// No-jump populations after `n` steps from the exponential approximation
/// `β_n/α_n ≈ e^{−nθ²/2} β/α`.
pub fn asymptotic_no_jump<T: Real>(alpha2: T, beta2: T, theta: T, n: usize) -> (T, T) {
    let decay = (-T::of(n as f64) * theta * theta).exp();
    let z = alpha2 + beta2 * decay;
    (alpha2 / z, beta2 * decay / z)
}

/// Exact no-jump populations, `β_n/α_n = cosⁿθ β/α`.
pub fn exact_no_jump<T: Real>(alpha2: T, beta2: T, theta: T, n: usize) -> (T, T) {
    let decay = theta.cos().powi(2 * n as i32);
    let z = alpha2 + beta2 * decay;
    (alpha2 / z, beta2 * decay / z)
}

/// Probability of `n` consecutive no-jump outcomes, as the product of the
/// per-step conditional probabilities.
pub fn no_jump_survival<T: Real>(alpha2: T, beta2: T, theta: T, n: usize) -> T {
    let c2 = theta.cos().powi(2);
    let (mut a, mut b) = (alpha2, beta2);
    let mut product = T::one();
    for _ in 0..n {
        let p0 = a + b * c2;
        product = product * p0;
        a = a / p0;
        b = b * c2 / p0;
    }
    product
}
