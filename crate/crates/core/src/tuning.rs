//! Exhaustive grid search over model hyperparameters, scored by Brier score
//! on the tuning split after warming ratings on the training split.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MovdaError, Result};
use crate::ratings::MovdaParams;
use crate::replay::{brier, replay_model, GameRecord, ModelConfig, ModelKind};

/// Candidate values per hyperparameter. Every list is non-empty and strictly
/// ascending, so grid order is lexicographic order of the parameter tuples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub k: Vec<f64>,
    pub lambda: Vec<f64>,
    pub c_mov: Vec<f64>,
    pub k_max: Vec<f64>,
    pub glicko_tau: Vec<f64>,
    pub trueskill_beta: Vec<f64>,
    pub trueskill_tau: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            k: vec![10.0, 15.0, 20.0, 25.0, 30.0],
            // the no-margin control point, then 0.1 .. 3.0 in steps of 0.1
            lambda: (0..=30).map(|i| f64::from(i) / 10.0).collect(),
            c_mov: vec![0.05, 0.1, 0.2],
            k_max: vec![1.5, 2.0, 3.0],
            glicko_tau: vec![0.3, 0.5, 0.75, 1.0, 1.2],
            trueskill_beta: vec![2.0],
            trueskill_tau: vec![0.05, 0.1, 0.2, 0.5, 1.0],
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, list) in self.lists() {
            if list.is_empty() {
                return Err(MovdaError::Config(format!("grid for {name} is empty")));
            }
            if list.iter().any(|v| !v.is_finite()) {
                return Err(MovdaError::Config(format!(
                    "grid for {name} has a non-finite value"
                )));
            }
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(MovdaError::Config(format!(
                    "grid for {name} must be strictly ascending"
                )));
            }
        }
        Ok(())
    }

    fn lists(&self) -> [(&'static str, &Vec<f64>); 7] {
        [
            ("k", &self.k),
            ("lambda", &self.lambda),
            ("c_mov", &self.c_mov),
            ("k_max", &self.k_max),
            ("glicko_tau", &self.glicko_tau),
            ("trueskill_beta", &self.trueskill_beta),
            ("trueskill_tau", &self.trueskill_tau),
        ]
    }

    /// Names of the parameters searched for `kind`, in tuple order.
    pub fn parameter_names(kind: ModelKind) -> &'static [&'static str] {
        match kind {
            ModelKind::Elo => &["k"],
            ModelKind::Movda => &["k", "lambda"],
            ModelKind::LinearMov => &["k", "c_mov", "k_max"],
            ModelKind::Glicko2 => &["tau"],
            ModelKind::TrueSkill => &["beta", "tau"],
        }
    }

    fn axes(&self, kind: ModelKind) -> Vec<&[f64]> {
        match kind {
            ModelKind::Elo => vec![&self.k],
            ModelKind::Movda => vec![&self.k, &self.lambda],
            ModelKind::LinearMov => vec![&self.k, &self.c_mov, &self.k_max],
            ModelKind::Glicko2 => vec![&self.glicko_tau],
            ModelKind::TrueSkill => vec![&self.trueskill_beta, &self.trueskill_tau],
        }
    }

    /// Number of grid points searched for `kind`.
    pub fn size(&self, kind: ModelKind) -> usize {
        self.axes(kind).iter().map(|a| a.len()).product()
    }

    /// Every parameter tuple for `kind`, in lexicographic order.
    pub fn points(&self, kind: ModelKind) -> Vec<Vec<f64>> {
        let mut points = vec![Vec::new()];
        for axis in self.axes(kind) {
            points = points
                .into_iter()
                .flat_map(|prefix| {
                    axis.iter().map(move |&v| {
                        let mut p = prefix.clone();
                        p.push(v);
                        p
                    })
                })
                .collect();
        }
        points
    }
}

/// `base` with the searched parameters replaced by `point`.
pub fn apply_point(base: &ModelConfig, point: &[f64]) -> Result<ModelConfig> {
    let names = GridSpec::parameter_names(base.kind());
    if point.len() != names.len() {
        return Err(MovdaError::Config(format!(
            "{} expects {} tuned parameters, got {}",
            base.kind(),
            names.len(),
            point.len()
        )));
    }
    let mut cfg = *base;
    match &mut cfg {
        ModelConfig::Elo(c) => c.k = point[0],
        ModelConfig::Movda(c) => {
            c.k = point[0];
            c.lambda = point[1];
        }
        ModelConfig::LinearMov(c) => {
            c.k = point[0];
            c.c_mov = point[1];
            c.k_max = point[2];
        }
        ModelConfig::Glicko2(c) => c.tau = point[0],
        ModelConfig::TrueSkill(c) => {
            c.beta = point[0];
            c.tau = point[1];
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneRow {
    pub point: Vec<f64>,
    pub config: ModelConfig,
    pub brier: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub parameter_names: Vec<String>,
    pub best_config: ModelConfig,
    pub best_point: Vec<f64>,
    pub best_brier: f64,
    /// One row per grid point, in grid order.
    pub table: Vec<TuneRow>,
}

/// Score every grid point for `base.kind()` and keep the lowest Brier score.
/// Ties go to the earliest, i.e. lexicographically smallest, tuple.
pub fn grid_search(
    base: &ModelConfig,
    grid: &GridSpec,
    train: &[GameRecord],
    tune: &[GameRecord],
    params: Option<&MovdaParams>,
) -> Result<TuneResult> {
    search(base, grid, train, tune, params, true)
}

/// [`grid_search`] on the calling thread only.
pub fn grid_search_sequential(
    base: &ModelConfig,
    grid: &GridSpec,
    train: &[GameRecord],
    tune: &[GameRecord],
    params: Option<&MovdaParams>,
) -> Result<TuneResult> {
    search(base, grid, train, tune, params, false)
}

fn search(
    base: &ModelConfig,
    grid: &GridSpec,
    train: &[GameRecord],
    tune: &[GameRecord],
    params: Option<&MovdaParams>,
    parallel: bool,
) -> Result<TuneResult> {
    grid.validate()?;
    base.validate()?;
    if tune.is_empty() {
        return Err(MovdaError::InsufficientData(
            "the tuning split is empty".into(),
        ));
    }
    let kind = base.kind();
    let configs = grid
        .points(kind)
        .into_iter()
        .map(|p| apply_point(base, &p).map(|c| (p, c)))
        .collect::<Result<Vec<_>>>()?;

    let score = |(point, config): (Vec<f64>, ModelConfig)| -> Result<TuneRow> {
        let out = replay_model(&config, params, train, tune)?;
        Ok(TuneRow {
            point,
            config,
            brier: brier(&out.log)?,
        })
    };
    let table: Vec<TuneRow> = if parallel {
        configs.into_par_iter().map(score).collect::<Result<_>>()?
    } else {
        configs.into_iter().map(score).collect::<Result<_>>()?
    };

    let mut best = 0;
    for (i, row) in table.iter().enumerate() {
        if row.brier < table[best].brier {
            best = i;
        }
    }
    Ok(TuneResult {
        parameter_names: GridSpec::parameter_names(kind)
            .iter()
            .map(|s| s.to_string())
            .collect(),
        best_config: table[best].config,
        best_point: table[best].point.clone(),
        best_brier: table[best].brier,
        table,
    })
}
