//! JSON scenario documents.

use std::path::Path;

use qtraj_core::qbit::{mixed_from_bloch, PureQbit, QState};
use qtraj_core::trajectory::Axis;
use qtraj_core::{EnvMeasurement, EnvPrep, GateFamily, GateKind, Scenario, C64};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interaction {
    Cnot,
    Swap,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PrepSpec {
    Zero,
    YMinus,
    Mixed([f64; 2]),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisSpec {
    Z,
    X,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PovmKind {
    Discrimination,
    Efficiency,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoMeasurement {
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasSpec {
    Basis { basis: AxisSpec },
    Povm { povm: PovmKind, q: f64 },
    Keyword(NoMeasurement),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitSpec {
    Amplitudes { alpha: [f64; 2], beta: [f64; 2] },
    Bloch { bloch: [f64; 3] },
}

fn default_dt() -> f64 {
    1.0
}

fn default_trajectories() -> usize {
    1
}

/// One scenario document. `dt` defaults to 1, `trajectories` to 1, `seed` to 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub interaction: Interaction,
    pub theta: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub env_prep: PrepSpec,
    pub env_meas: MeasSpec,
    pub init: InitSpec,
    pub steps: usize,
    #[serde(default = "default_trajectories")]
    pub trajectories: usize,
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let parsed: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let key = e.path().to_string();
            let inner = e.into_inner();
            CliError::Parse {
                key: if key == "." { "(document)".into() } else { key },
                line: inner.line(),
                column: inner.column(),
                message: inner.to_string(),
            }
        })?;
        Ok(parsed)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario documents always serialize")
    }

    /// Builds and validates the simulation scenario.
    pub fn scenario(&self) -> Result<Scenario, CliError> {
        let kind = match self.interaction {
            Interaction::Cnot => GateKind::Cnot,
            Interaction::Swap => GateKind::Swap,
        };
        let family = GateFamily::new(kind, self.theta).map_err(|e| CliError::field("theta", e))?;
        let prep = match self.env_prep {
            PrepSpec::Zero => EnvPrep::zero(),
            PrepSpec::YMinus => EnvPrep::y_minus(),
            PrepSpec::Mixed([w0, w1]) => {
                EnvPrep::mixed(w0, w1).map_err(|e| CliError::field("env_prep", e))?
            }
        };
        let env_meas = match self.env_meas {
            MeasSpec::Basis { basis: AxisSpec::Z } => EnvMeasurement::Basis(Axis::Z),
            MeasSpec::Basis { basis: AxisSpec::X } => EnvMeasurement::Basis(Axis::X),
            MeasSpec::Povm {
                povm: PovmKind::Discrimination,
                q,
            } => EnvMeasurement::Discrimination(q),
            MeasSpec::Povm {
                povm: PovmKind::Efficiency,
                q,
            } => EnvMeasurement::Efficiency(q),
            MeasSpec::Keyword(NoMeasurement::None) => EnvMeasurement::None,
        };
        let init = match self.init {
            InitSpec::Amplitudes { alpha, beta } => QState::Pure(
                PureQbit::new(C64::new(alpha[0], alpha[1]), C64::new(beta[0], beta[1]))
                    .map_err(|e| CliError::field("init", e))?,
            ),
            InitSpec::Bloch { bloch: [t, p, r] } => {
                QState::Mixed(mixed_from_bloch(t, p, r).map_err(|e| CliError::field("init", e))?)
            }
        };
        env_meas
            .instrument()
            .map_err(|e| CliError::field("env_meas", e))?;
        let s = Scenario::new(family, prep, env_meas, init, self.steps).with_dt(self.dt);
        // Everything else has been checked, so only the time step remains.
        s.validate().map_err(|e| CliError::field("dt", e))?;
        Ok(s)
    }
}
