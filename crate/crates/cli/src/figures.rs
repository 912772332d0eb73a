//! Preset trajectory bundles for the jump and diffusion figures.
//!
//! The captions give no numbers, so the parameters are fixed here: θ = 0.1,
//! initial `|β|²` ∈ {0.2, 0.4, 0.6, 0.8}, 20 trajectories per initial state.

use std::fmt;
use std::str::FromStr;

use qtraj_core::qbit::PureQbit;
use qtraj_core::trajectory::Axis;
use qtraj_core::{EnvMeasurement, EnvPrep, GateFamily, GateKind, Scenario, TrajectoryRecord};
use rayon::prelude::*;

use crate::error::CliError;
use crate::output::float;

pub const HEADER: &str = "traj,init_beta_sq,step,outcome,beta_sq";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    /// CNOT coupling, ground-state bath, z readout: jumps to `|1⟩`.
    Fig3a,
    /// SWAP coupling, ground-state bath, z readout: jumps to `|0⟩`.
    Fig3b,
    /// CNOT coupling, `|y−⟩` bath, z readout: real-noise diffusion.
    Fig4,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Preset {
    pub kind: GateKind,
    pub prep: EnvPrep,
    pub theta: f64,
    pub steps: usize,
    pub per_init: usize,
    pub init_beta_sq: [f64; 4],
}

impl Figure {
    pub const ALL: [Figure; 3] = [Figure::Fig3a, Figure::Fig3b, Figure::Fig4];

    pub fn preset(self) -> Preset {
        let (kind, prep, steps) = match self {
            Figure::Fig3a => (GateKind::Cnot, EnvPrep::zero(), 150),
            Figure::Fig3b => (GateKind::Swap, EnvPrep::zero(), 150),
            Figure::Fig4 => (GateKind::Cnot, EnvPrep::y_minus(), 400),
        };
        Preset {
            kind,
            prep,
            theta: 0.1,
            steps,
            per_init: 20,
            init_beta_sq: [0.2, 0.4, 0.6, 0.8],
        }
    }

    fn describe(self) -> String {
        let p = self.preset();
        let (kind, prep) = match self {
            Figure::Fig3a => ("cnot", "zero"),
            Figure::Fig3b => ("swap", "zero"),
            Figure::Fig4 => ("cnot", "y_minus"),
        };
        let inits: Vec<String> = p.init_beta_sq.iter().map(|b| b.to_string()).collect();
        format!(
            "# {self}: interaction={kind} theta={} env_prep={prep} env_meas=z steps={} trajectories_per_init={} init_beta_sq={}\n",
            p.theta,
            p.steps,
            p.per_init,
            inits.join(" ")
        )
    }

    pub fn records(self, seed: u64) -> Result<Vec<(f64, TrajectoryRecord)>, CliError> {
        let p = self.preset();
        let family = GateFamily::new(p.kind, p.theta).map_err(CliError::sim)?;
        let engines = p
            .init_beta_sq
            .iter()
            .map(|&b| {
                let init = PureQbit::real((1.0 - b).sqrt(), b.sqrt()).map_err(CliError::sim)?;
                let s = Scenario::new(
                    family,
                    p.prep,
                    EnvMeasurement::Basis(Axis::Z),
                    init.into(),
                    p.steps,
                );
                Ok((b, s.compile().map_err(CliError::sim)?))
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let total = p.per_init * engines.len();
        (0..total)
            .into_par_iter()
            .map(|t| {
                let (b, e) = &engines[t / p.per_init];
                Ok((*b, e.run(seed, t as u64).map_err(CliError::sim)?))
            })
            .collect()
    }

    pub fn render(self, seed: u64) -> Result<Vec<u8>, CliError> {
        let mut out = self.describe().into_bytes();
        out.extend(format!("# seed={seed}\n{HEADER}\n").into_bytes());
        for (b, r) in self.records(seed)? {
            let mut row = |step: usize, label: &str, beta_sq: f64| {
                out.extend(
                    format!("{},{},{step},{label},{}\n", r.trajectory, b, float(beta_sq))
                        .into_bytes(),
                );
            };
            row(0, "-", r.initial.beta_sq());
            for s in &r.steps {
                row(s.step, s.label, s.state.beta_sq());
            }
        }
        Ok(out)
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Figure::Fig3a => "fig3a",
            Figure::Fig3b => "fig3b",
            Figure::Fig4 => "fig4",
        })
    }
}

impl FromStr for Figure {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Figure::ALL
            .into_iter()
            .find(|f| f.to_string() == s)
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown figure `{s}` (expected fig3a, fig3b or fig4)"
                ))
            })
    }
}
