//! Helpers shared by the integration tests.

#![allow(dead_code)]

use serde_json::Value;

use movda_core::baselines::{Glicko2State, TrueSkillState};
use movda_core::replay::{simulate_league, SkillSpec};
use movda_core::{GameRecord, MovdaParams};

/// Frozen values from the independent Python oracles in `tests/oracles`.
pub fn reference() -> Value {
    serde_json::from_str(include_str!("../oracles/reference.json")).expect("reference.json parses")
}

pub fn f(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

pub fn glicko(v: &Value) -> Glicko2State {
    Glicko2State {
        rating: f(&v[0]),
        deviation: f(&v[1]),
        volatility: f(&v[2]),
    }
}

pub fn trueskill(v: &Value) -> TrueSkillState {
    TrueSkillState {
        mu: f(&v[0]),
        sigma: f(&v[1]),
    }
}

/// Margin curve used to generate synthetic leagues.
pub fn truth() -> MovdaParams {
    MovdaParams::new(12.0, 0.004, 0.0, 3.0, 121.0).unwrap()
}

pub fn league(n_teams: usize, n_games: usize, seed: u64) -> Vec<GameRecord> {
    simulate_league(
        n_teams,
        n_games,
        &truth(),
        &SkillSpec::evenly_spaced(n_teams, 150.0),
        seed,
    )
    .unwrap()
    .games
}
