//! Seeded Monte Carlo checks. Every bound is four binomial or sample standard
//! deviations, so the fixed seeds below pass deterministically.

use qtraj_core::algebra::Matrix;
use qtraj_core::channel::{iterate_channel, unconditional_channel};
use qtraj_core::gates::weak_gate;
use qtraj_core::measurement::{discrimination_povm, projective_axis, weak_balanced};
use qtraj_core::qbit::QState;
use qtraj_core::rng::counter_uniform;
use qtraj_core::trajectory::{absorbed_at, Axis, Engine};
use qtraj_core::{
    DensityMatrix, EnvMeasurement, EnvPrep, GateFamily, GateKind, PureQbit, Scenario,
    TrajectoryRecord, C64,
};

const SEED: u64 = 20_240_611;

fn psi() -> PureQbit {
    PureQbit::real(0.6, 0.8).unwrap()
}

fn binomial_band(p: f64, n: usize) -> f64 {
    4.0 * (p * (1.0 - p) / n as f64).sqrt()
}

fn fraction(records: &[TrajectoryRecord], pole: u8) -> f64 {
    let hits = records
        .iter()
        .filter(|r| absorbed_at(r.final_state().beta_sq(), 1e-3) == Some(pole))
        .count();
    hits as f64 / records.len() as f64
}

#[test]
fn jump_trajectories_absorb_at_one_with_born_weight() {
    let n = 10_000;
    // cos^3000(0.1) ≈ e^{-30}: every no-jump path has settled at |0⟩.
    let s = Scenario::cnot_jump(0.1, psi(), 1500).unwrap();
    let records = s.compile().unwrap().run_ensemble(SEED, n).unwrap();
    let f1 = fraction(&records, 1);
    let f0 = fraction(&records, 0);
    assert!((f1 - 0.64).abs() <= binomial_band(0.64, n), "f1 = {f1}");
    assert_eq!(records.len(), n);
    assert!((f0 + f1 - 1.0).abs() < 1e-12);
}

#[test]
fn swap_jumps_land_at_ground_and_mean_decays_geometrically() {
    let n = 10_000;
    let t = 0.1f64;
    let f = GateFamily::new(GateKind::Swap, t).unwrap();
    let s = Scenario::new(
        f,
        EnvPrep::zero(),
        EnvMeasurement::Basis(Axis::Z),
        psi().into(),
        200,
    );
    let records = s.compile().unwrap().run_ensemble(SEED, n).unwrap();
    for r in &records {
        for st in &r.steps {
            if st.label == "1" {
                assert!(st.state.beta_sq() < 1e-15);
            }
        }
    }
    for k in [1usize, 10, 50, 100, 200] {
        let xs: Vec<f64> = records.iter().map(|r| r.beta_sq_series()[k]).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let exact = 0.64 * t.cos().powi(2 * k as i32);
        assert!(
            (mean - exact).abs() <= 4.0 * (var / n as f64).sqrt() + 1e-15,
            "step {k}: {mean} vs {exact}"
        );
    }
}

#[test]
fn jump_ensemble_mean_tracks_the_channel() {
    let n = 10_000;
    let t = 0.1;
    let s = Scenario::cnot_jump(t, psi(), 50).unwrap();
    let records = s.compile().unwrap().run_ensemble(SEED, n).unwrap();
    let summary = qtraj_core::analysis::ensemble_average(&records).unwrap();
    let ch = unconditional_channel(&weak_gate(&s.family), &EnvPrep::zero()).unwrap();
    let exact = iterate_channel(&psi().density(), &ch, 50);
    let tol = 5.0 / (n as f64).sqrt();
    for k in [1usize, 10, 25, 50] {
        assert!(
            summary.steps[k].mean.max_abs_diff(&exact[k]) < tol,
            "step {k}"
        );
    }
}

#[test]
fn different_unravelings_share_one_mean() {
    let n = 10_000;
    let t = 0.1;
    let f = GateFamily::new(GateKind::Cnot, t).unwrap();
    let mean_at = |prep: EnvPrep, axis: Axis, k: usize| {
        let s = Scenario::new(f, prep, EnvMeasurement::Basis(axis), psi().into(), k);
        let records = s.compile().unwrap().run_ensemble(SEED, n).unwrap();
        qtraj_core::analysis::ensemble_average(&records)
            .unwrap()
            .steps[k]
            .mean
    };
    let jump = mean_at(EnvPrep::zero(), Axis::Z, 30);
    let unitary = mean_at(EnvPrep::zero(), Axis::X, 30);
    let real = mean_at(EnvPrep::y_minus(), Axis::Z, 30);
    // Each mean carries its own 5/√N envelope.
    let tol = 2.0 * 5.0 / (n as f64).sqrt();
    assert!(jump.max_abs_diff(&unitary) < tol);
    assert!(jump.max_abs_diff(&real) < tol);
}

#[test]
fn real_noise_diffusion_absorbs_with_born_weight() {
    let n = 4_000;
    let f = GateFamily::new(GateKind::Cnot, 0.2).unwrap();
    let s = Scenario::new(
        f,
        EnvPrep::y_minus(),
        EnvMeasurement::Basis(Axis::Z),
        psi().into(),
        3000,
    );
    let records = s.compile().unwrap().run_ensemble(SEED, n).unwrap();
    let f1 = fraction(&records, 1);
    let f0 = fraction(&records, 0);
    let open = 1.0 - f0 - f1;
    assert!(open < 0.01, "unsettled fraction {open}");
    assert!(
        (f1 - 0.64).abs() <= binomial_band(0.64, n) + open,
        "f1 = {f1}"
    );
}

#[test]
fn settled_diffusion_paths_end_at_the_pole_they_reached() {
    let n = 2_000;
    let f = GateFamily::new(GateKind::Cnot, 0.2).unwrap();
    let s = Scenario::new(
        f,
        EnvPrep::y_minus(),
        EnvMeasurement::Basis(Axis::Z),
        psi().into(),
        3000,
    );
    let records = s.compile().unwrap().run_ensemble(SEED + 1, n).unwrap();
    let mut reached = 0usize;
    let mut crossed = 0usize;
    for r in &records {
        let series = r.beta_sq_series();
        if let Some(k) = series.iter().position(|&b| b <= 1e-3) {
            reached += 1;
            if series[k..].iter().any(|&b| b >= 0.5) {
                crossed += 1;
            }
        }
    }
    // Martingale bound: from |β|² ≤ 1e-3 the chance of ever reaching 1/2 is ≤ 2e-3.
    let p = 2e-3;
    assert!(reached > 100);
    assert!((crossed as f64) <= reached as f64 * p + 4.0 * (reached as f64 * p).sqrt() + 1.0);
}

fn run_instrument(
    ins: &qtraj_core::Instrument,
    init: QState<f64>,
    steps: usize,
    traj: u64,
) -> QState<f64> {
    let mut state = init;
    for k in 0..steps {
        state = ins
            .apply(&state, counter_uniform(SEED, traj, k as u64))
            .unwrap()
            .post_state;
    }
    state
}

#[test]
fn apply_frequencies_match_born_rule() {
    let n = 100_000;
    let rho = DensityMatrix::new(Matrix([
        [C64::new(0.3, 0.0), C64::new(0.2, -0.1)],
        [C64::new(0.2, 0.1), C64::new(0.7, 0.0)],
    ]))
    .unwrap();
    let state = QState::Mixed(rho);
    for ins in [
        projective_axis([0.0, 0.0, 1.0]).unwrap(),
        projective_axis([0.6, 0.0, 0.8]).unwrap(),
        discrimination_povm(0.8).unwrap(),
        qtraj_core::measurement::efficiency_povm(0.7).unwrap(),
    ] {
        let probs = ins.probabilities(&state);
        let mut counts = vec![0usize; ins.len()];
        for k in 0..n {
            counts[ins
                .apply(&state, counter_uniform(SEED, 0, k as u64))
                .unwrap()
                .index] += 1;
        }
        for (c, p) in counts.iter().zip(&probs) {
            let f = *c as f64 / n as f64;
            assert!((f - p).abs() <= binomial_band(*p, n) + 1e-12, "{f} vs {p}");
        }
    }
}

#[test]
fn weak_balanced_measurements_drift_to_the_poles() {
    let n = 10_000;
    let ins = weak_balanced(0.3).unwrap();
    let init = QState::Pure(psi());
    let finals: Vec<f64> = (0..n as u64)
        .map(|t| run_instrument(&ins, init, 1500, t).beta_sq())
        .collect();
    let at = |pole: u8| {
        finals
            .iter()
            .filter(|&&b| absorbed_at(b, 1e-3) == Some(pole))
            .count() as f64
            / n as f64
    };
    let (f0, f1) = (at(0), at(1));
    let open = 1.0 - f0 - f1;
    assert!(open < 1e-3);
    assert!((f1 - 0.64).abs() <= binomial_band(0.64, n) + open);
    assert!((f0 - 0.36).abs() <= binomial_band(0.36, n) + open);
}

#[test]
fn ensembles_ignore_thread_count() {
    let s = Scenario::new(
        GateFamily::new(GateKind::Cnot, 0.1).unwrap(),
        EnvPrep::mixed(0.7, 0.3).unwrap(),
        EnvMeasurement::Discrimination(0.8),
        psi().into(),
        40,
    );
    let e = Engine::new(s).unwrap();
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let four = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap();
    let a = one.install(|| e.run_ensemble(SEED, 200).unwrap());
    let b = four.install(|| e.run_ensemble(SEED, 200).unwrap());
    assert_eq!(a, b);
}
