use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "selected outcome `{label}` has probability {probability:e}, too small to renormalize"
    )]
    ZeroProbability {
        label: &'static str,
        probability: f64,
    },

    #[error("enumeration needs more than {budget} branches at step {step}")]
    BudgetExceeded { budget: usize, step: usize },

    #[error("records come from different scenarios")]
    MixedScenario,
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<V> = core::result::Result<V, Error>;
