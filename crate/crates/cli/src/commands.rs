//! The four subcommands, each writing one output file.

use std::path::Path;

use qtraj_core::analysis::{enumerate_outcomes, info_gain, von_neumann_entropy};
use qtraj_core::channel::{iterate_channel, unconditional_channel};
use qtraj_core::gates::weak_gate;
use qtraj_core::qbit::QState;
use qtraj_core::trajectory::Engine;
use qtraj_core::TrajectoryRecord;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::CliError;
use crate::figures::Figure;
use crate::output::{float, to_json, write_atomic, AtomicFile, StateJson};
use crate::scenario_file::ScenarioFile;

pub const PURE_HEADER: [&str; 9] = [
    "traj", "step", "outcome", "prob", "re_a", "im_a", "re_b", "im_b", "beta_sq",
];
pub const MIXED_HEADER: [&str; 9] = [
    "traj", "step", "outcome", "prob", "rho00", "re_rho01", "im_rho01", "rho11", "purity",
];

/// Trajectories generated and formatted per batch.
const BATCH: u64 = 1024;

/// Overrides applied on top of a scenario document.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trajectories: Option<usize>,
    /// Prepend a `# qtraj <version>` comment line.
    pub version_comment: bool,
}

fn version_line() -> String {
    format!("# qtraj {}\n", env!("CARGO_PKG_VERSION"))
}

fn csv_line(fields: &[String]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(fields)
        .expect("in-memory writes cannot fail");
    w.into_inner().expect("in-memory writes cannot fail")
}

fn state_fields(state: &QState<f64>, pure_mode: bool) -> [String; 5] {
    match state {
        QState::Pure(p) if pure_mode => [
            float(p.alpha.re),
            float(p.alpha.im),
            float(p.beta.re),
            float(p.beta.im),
            float(p.beta_sq()),
        ],
        _ => {
            let d = state.density();
            [
                float(d.rho00()),
                float(d.rho01().re),
                float(d.rho01().im),
                float(d.rho11()),
                float(d.purity()),
            ]
        }
    }
}

fn record_rows(r: &TrajectoryRecord, pure_mode: bool) -> Vec<u8> {
    let mut out = Vec::new();
    let row = |step: usize, label: &str, prob: f64, state: &QState<f64>| {
        let mut f = vec![
            r.trajectory.to_string(),
            step.to_string(),
            label.to_string(),
            float(prob),
        ];
        f.extend(state_fields(state, pure_mode));
        csv_line(&f)
    };
    out.extend(row(0, "-", 1.0, &r.initial));
    for s in &r.steps {
        out.extend(row(s.step, s.label, s.probability, &s.state));
    }
    out
}

/// Streams the trajectory CSV for `count` trajectories into `sink`.
pub fn write_trajectories(
    engine: &Engine<f64>,
    seed: u64,
    count: usize,
    version_comment: bool,
    sink: &mut impl FnMut(&[u8]) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let pure_mode = engine.initial_state().is_pure();
    if version_comment {
        sink(version_line().as_bytes())?;
    }
    let header: Vec<String> = if pure_mode { PURE_HEADER } else { MIXED_HEADER }
        .iter()
        .map(|s| s.to_string())
        .collect();
    sink(&csv_line(&header))?;
    let count = count as u64;
    let mut start = 0;
    while start < count {
        let end = (start + BATCH).min(count);
        let records = engine.run_range(seed, start..end).map_err(CliError::sim)?;
        let chunks: Vec<Vec<u8>> = records
            .par_iter()
            .map(|r| record_rows(r, pure_mode))
            .collect();
        for c in chunks {
            sink(&c)?;
        }
        start = end;
    }
    Ok(())
}

pub fn cmd_run(scenario: &Path, out: &Path, o: Overrides) -> Result<(), CliError> {
    let file = ScenarioFile::load(scenario)?;
    let engine = file.scenario()?.compile().map_err(CliError::sim)?;
    let seed = o.seed.unwrap_or(file.seed);
    let count = o.trajectories.unwrap_or(file.trajectories);
    let mut f = AtomicFile::create(out)?;
    write_trajectories(&engine, seed, count, o.version_comment, &mut |b| {
        f.write_all(b)
    })?;
    f.commit()
}

#[derive(Debug, Serialize)]
pub struct BranchJson {
    pub sequence: Vec<&'static str>,
    pub probability: f64,
    pub state: StateJson,
}

#[derive(Debug, Serialize)]
pub struct EnumerationReport {
    pub steps: usize,
    pub branches: Vec<BranchJson>,
    pub total_probability: f64,
    pub pruned_mass: f64,
    pub mean_state: StateJson,
    /// Largest entry-wise distance between the mixture mean and iterated channel.
    pub max_deviation: f64,
}

pub fn enumerate_report(file: &ScenarioFile) -> Result<EnumerationReport, CliError> {
    let s = file.scenario()?;
    let m = enumerate_outcomes(&s).map_err(CliError::sim)?;
    let ch = unconditional_channel(&weak_gate(&s.family), &s.prep).map_err(CliError::sim)?;
    let exact = iterate_channel(&s.init.density(), &ch, s.steps);
    let mean = m.mean();
    Ok(EnumerationReport {
        steps: s.steps,
        total_probability: m.total_probability(),
        pruned_mass: m.pruned_mass,
        max_deviation: mean.max_abs_diff(&exact[s.steps]),
        mean_state: StateJson::from(&QState::Mixed(mean)),
        branches: m
            .branches
            .iter()
            .map(|b| BranchJson {
                sequence: m.labels_of(b),
                probability: b.probability,
                state: (&b.state).into(),
            })
            .collect(),
    })
}

pub fn cmd_enumerate(scenario: &Path, out: &Path) -> Result<(), CliError> {
    let file = ScenarioFile::load(scenario)?;
    write_atomic(out, &to_json(&enumerate_report(&file)?))
}

pub fn cmd_figure(
    name: &str,
    out: &Path,
    seed: u64,
    version_comment: bool,
) -> Result<(), CliError> {
    let fig: Figure = name.parse()?;
    let mut bytes = Vec::new();
    if version_comment {
        bytes.extend(version_line().into_bytes());
    }
    bytes.extend(fig.render(seed)?);
    write_atomic(out, &bytes)
}

#[derive(Debug, Serialize)]
pub struct InfoRow {
    pub step: usize,
    pub mean_state: StateJson,
    pub entropy: f64,
    /// Entropy reduction from the next interaction and measurement.
    pub delta_s: f64,
    pub s_meas: f64,
    /// `s_meas / delta_s`; `null` when no information is gained.
    pub ratio: Option<f64>,
}

/// One row per step `0..=steps`: the ensemble-mean state and what the next
/// measurement would reveal about it.
pub fn info_report(file: &ScenarioFile) -> Result<Vec<InfoRow>, CliError> {
    let s = file.scenario()?;
    let engine = s.compile().map_err(CliError::sim)?;
    let ch = unconditional_channel(&weak_gate(&s.family), &s.prep).map_err(CliError::sim)?;
    iterate_channel(&s.init.density(), &ch, s.steps)
        .iter()
        .enumerate()
        .map(|(step, rho)| {
            let g = info_gain(rho, engine.instrument()).map_err(CliError::sim)?;
            Ok(InfoRow {
                step,
                mean_state: StateJson::from(&QState::Mixed(*rho)),
                entropy: von_neumann_entropy(rho),
                delta_s: g.delta_s,
                s_meas: g.s_meas,
                ratio: g.ratio,
            })
        })
        .collect()
}

pub fn cmd_info(scenario: &Path, out: &Path) -> Result<(), CliError> {
    let file = ScenarioFile::load(scenario)?;
    write_atomic(out, &to_json(&info_report(&file)?))
}
