//! Margin-of-victory aware rating engine: the MOVDA update, four baseline
//! rating systems, a fitter for the expected-margin curve, chronological
//! replay with evaluation metrics, and hyperparameter search.

pub mod baselines;
pub mod error;
pub mod fitting;
pub mod io;
pub mod pipeline;
pub mod plot;
pub mod ratings;
pub mod replay;
pub mod tuning;

pub use error::{MovdaError, Result};
pub use fitting::{fit_emov, FitOptions, FitReport, FitSample};
pub use ratings::{
    elo_update, expected_mov, expected_outcome, movda_update, EloConfig, HomeIndicator,
    MovdaParams, Outcome, Rating,
};
pub use replay::{replay_model, GameRecord, ModelConfig, ModelKind, ReplayOutput};
