//! Atomic file output, parameter files, and machine-readable exports.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{MovdaError, Result};
use crate::fitting::FitReport;
use crate::ratings::MovdaParams;
use crate::replay::{HistoryPoint, PredictionLogEntry};

/// Write `bytes` to a temporary file beside `path`, then rename it into place.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| MovdaError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| MovdaError::io(dir, e))?;
    tmp.write_all(bytes)
        .map_err(|e| MovdaError::io(tmp.path(), e))?;
    tmp.as_file()
        .sync_all()
        .map_err(|e| MovdaError::io(tmp.path(), e))?;
    tmp.persist(path)
        .map_err(|e| MovdaError::io(path, e.error))?;
    Ok(())
}

/// Pretty JSON with full float precision.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn write_json<T: Serialize + ?Sized>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    write_atomic(path, &to_json(value)?)
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| MovdaError::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// On-disk form of a fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsFile {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub sigma2: f64,
    pub sse: f64,
    pub n: usize,
    pub converged: bool,
}

impl ParamsFile {
    pub fn params(&self) -> Result<MovdaParams> {
        MovdaParams::new(self.alpha, self.beta, self.gamma, self.delta, self.sigma2)
    }
}

impl From<&FitReport> for ParamsFile {
    fn from(r: &FitReport) -> Self {
        ParamsFile {
            alpha: r.params.alpha,
            beta: r.params.beta,
            gamma: r.params.gamma,
            delta: r.params.delta,
            sigma2: r.params.sigma2,
            sse: r.sse,
            n: r.n,
            converged: r.converged,
        }
    }
}

pub fn write_params(path: impl AsRef<Path>, params: &ParamsFile) -> Result<()> {
    write_json(path, params)
}

pub fn read_params(path: impl AsRef<Path>) -> Result<ParamsFile> {
    let file: ParamsFile = read_json(path)?;
    file.params()?;
    Ok(file)
}

/// Prediction log as CSV, one row per game.
pub fn log_to_csv(log: &[PredictionLogEntry]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for e in log {
        w.serialize(e)?;
    }
    if log.is_empty() {
        w.write_record([
            "game_id",
            "p_home_win",
            "predicted_margin_home",
            "actual_home_win",
            "actual_margin_home",
            "pre_rating_home",
            "pre_rating_away",
            "home_indicator",
        ])?;
    }
    w.into_inner()
        .map_err(|e| MovdaError::Numerical(e.to_string()))
}

/// Rating histories as CSV, one row per team-game.
pub fn history_to_csv(history: &BTreeMap<String, Vec<HistoryPoint>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["team", "game_index", "rating"])?;
    for (team, points) in history {
        for p in points {
            w.write_record([
                team.as_str(),
                &p.game_index.to_string(),
                &p.rating.to_string(),
            ])?;
        }
    }
    w.into_inner()
        .map_err(|e| MovdaError::Numerical(e.to_string()))
}
