//! Run configuration from a JSON object or `key = value` lines.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{MovdaError, Result};
use crate::replay::{ModelKind, SplitSpec};

/// Settings shared by the command-line workflows. Every field is optional so
/// a file can be layered under command-line flags.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub params: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub model: Option<ModelKind>,
    pub split: Option<SplitSpec>,
    pub lambda: Option<f64>,
    pub k: Option<f64>,
    pub c: Option<f64>,
    pub seed: Option<u64>,
    pub band: Option<f64>,
    pub stable_window: Option<usize>,
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| MovdaError::io(path, e))?;
        Self::parse(&text)
    }

    /// JSON when the text starts with `{`, otherwise `key = value` lines with
    /// `#` comments.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            return serde_json::from_str(text)
                .map_err(|e| MovdaError::Config(format!("run config: {e}")));
        }
        let mut cfg = RunConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                MovdaError::Config(format!("run config line {}: expected key = value", n + 1))
            })?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| MovdaError::Config(format!("run config line {}: {e}", n + 1)))?;
        }
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: std::str::FromStr>(v: &str) -> std::result::Result<T, String> {
            v.parse()
                .map_err(|_| format!("`{v}` is not a valid number"))
        }
        match key {
            "data" => self.data = Some(value.into()),
            "params" => self.params = Some(value.into()),
            "out" => self.out = Some(value.into()),
            "model" => self.model = Some(value.parse().map_err(|e: MovdaError| e.to_string())?),
            "split" => self.split = Some(value.parse().map_err(|e: MovdaError| e.to_string())?),
            "lambda" => self.lambda = Some(num(value)?),
            "k" => self.k = Some(num(value)?),
            "c" => self.c = Some(num(value)?),
            "seed" => self.seed = Some(num(value)?),
            "band" => self.band = Some(num(value)?),
            "stable_window" | "stable-window" => self.stable_window = Some(num(value)?),
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    /// Referenced input files exist and the split is valid.
    pub fn validate(&self) -> Result<()> {
        for p in [&self.data, &self.params].into_iter().flatten() {
            if !p.exists() {
                return Err(MovdaError::Config(format!(
                    "{} does not exist",
                    p.display()
                )));
            }
        }
        if let Some(s) = &self.split {
            s.validate()?;
        }
        Ok(())
    }
}
