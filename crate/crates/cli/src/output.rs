//! Deterministic text output and atomic file replacement.

use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use qtraj_core::qbit::QState;
use serde::Serialize;
use tempfile::NamedTempFile;

use crate::error::CliError;

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes into a temporary file beside the target and renames it into place
/// on `commit`, so readers never see a partial file.
pub struct AtomicFile {
    path: PathBuf,
    out: BufWriter<NamedTempFile>,
}

impl AtomicFile {
    pub fn create(path: &Path) -> Result<Self, CliError> {
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let tmp = NamedTempFile::new_in(dir).map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        })?;
        Ok(AtomicFile {
            path: path.to_owned(),
            out: BufWriter::new(tmp),
        })
    }

    pub fn write_all(&mut self, bytes: &[u8]) -> Result<(), CliError> {
        self.out.write_all(bytes).map_err(|source| CliError::Io {
            path: self.path.clone(),
            source,
        })
    }

    pub fn commit(self) -> Result<(), CliError> {
        let path = self.path;
        let tmp = self.out.into_inner().map_err(|e| CliError::Io {
            path: path.clone(),
            source: e.into_error(),
        })?;
        tmp.as_file().sync_all().map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        tmp.persist(&path).map_err(|e| CliError::Io {
            path,
            source: e.error,
        })?;
        Ok(())
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut f = AtomicFile::create(path)?;
    f.write_all(bytes)?;
    f.commit()
}

/// JSON form of a q-bit state.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum StateJson {
    Pure {
        alpha: [f64; 2],
        beta: [f64; 2],
    },
    Mixed {
        rho00: f64,
        rho01: [f64; 2],
        rho11: f64,
    },
}

impl From<&QState<f64>> for StateJson {
    fn from(s: &QState<f64>) -> Self {
        match s {
            QState::Pure(p) => StateJson::Pure {
                alpha: [p.alpha.re, p.alpha.im],
                beta: [p.beta.re, p.beta.im],
            },
            QState::Mixed(d) => StateJson::Mixed {
                rho00: d.rho00(),
                rho01: [d.rho01().re, d.rho01().im],
                rho11: d.rho11(),
            },
        }
    }
}

pub fn to_json<V: Serialize>(value: &V) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("reports always serialize");
    v.push(b'\n');
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [
            0.1,
            1.0 / 3.0,
            0.9936213,
            f64::MIN_POSITIVE,
            1e300,
            -2.5e-17,
            0.0,
        ] {
            let s = float(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(float(0.6), "5.9999999999999998e-1");
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.txt");
        write_atomic(&p, b"first").unwrap();
        write_atomic(&p, b"second").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"second");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn missing_directory_is_an_io_error() {
        let err = write_atomic(Path::new("/nonexistent/dir/out.csv"), b"x").unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }
}
