//! Command-line front end: scenario documents in, CSV and JSON out.
//!
//! Exit codes: 0 success, 2 parse or usage error, 3 invalid parameters,
//! 4 I/O failure, 5 enumeration budget exceeded.

pub mod commands;
pub mod error;
pub mod figures;
pub mod output;
pub mod scenario_file;

pub use error::CliError;
pub use scenario_file::ScenarioFile;
