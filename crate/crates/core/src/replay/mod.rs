//! Chronological replay of a rating model over a game list, the evaluation
//! metrics computed from it, dataset splitting, and a synthetic league
//! generator.

pub mod games;
pub mod metrics;
pub mod models;
pub mod simulate;
pub mod split;

use std::collections::{BTreeMap, HashMap};

use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::{MovdaError, Result};
use crate::ratings::{expected_mov, MovdaParams};

pub use games::{check_chronological, GameRecord};
pub use metrics::{
    accuracy, brier, convergence_speed, games_to_converge, margin_mae, ConvergenceOptions,
    EvalReport,
};
pub use models::{ModelConfig, ModelKind, ScaleBridge};
pub use simulate::{simulate_league, SimulatedLeague, SkillSpec, StepChange};
pub use split::{split_dataset, SplitSpec, Splits};

use models::{EloModel, Glicko2Model, LinearMovModel, MovdaModel, RatingModel, TrueSkillModel};

/// The forecast made for one game from strictly pre-game state, next to what
/// happened.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionLogEntry {
    pub game_id: String,
    pub p_home_win: f64,
    /// Present when margin-model parameters were supplied to the replay.
    pub predicted_margin_home: Option<f64>,
    /// 1 for a home win, 0 for a loss, 0.5 for a draw.
    pub actual_home_win: f64,
    pub actual_margin_home: f64,
    /// Pre-game ratings on the Elo-comparable scale.
    pub pre_rating_home: f64,
    pub pre_rating_away: f64,
    pub home_indicator: i8,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryPoint {
    /// Index of the game within the logged span.
    pub game_index: usize,
    /// Post-game rating on the Elo-comparable scale.
    pub rating: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReplayOutput {
    pub log: Vec<PredictionLogEntry>,
    pub history: BTreeMap<String, Vec<HistoryPoint>>,
    /// Elo-comparable rating of every team seen, after the last game.
    pub final_ratings: BTreeMap<String, f64>,
}

impl ReplayOutput {
    /// Rating series per team, for [`convergence_speed`].
    pub fn rating_series(&self) -> BTreeMap<String, Vec<f64>> {
        self.history
            .iter()
            .map(|(team, pts)| (team.clone(), pts.iter().map(|p| p.rating).collect()))
            .collect()
    }
}

/// Replay `model` over `warmup` (state only) and then `games` (logged).
///
/// Teams start from the model's default state the first time they appear.
pub fn replay_model(
    model: &ModelConfig,
    params: Option<&MovdaParams>,
    warmup: &[GameRecord],
    games: &[GameRecord],
) -> Result<ReplayOutput> {
    replay_with_bridge(model, params, warmup, games, ScaleBridge::default())
}

pub fn replay_with_bridge(
    model: &ModelConfig,
    params: Option<&MovdaParams>,
    warmup: &[GameRecord],
    games: &[GameRecord],
    bridge: ScaleBridge,
) -> Result<ReplayOutput> {
    model.validate()?;
    if let Some(p) = params {
        p.validate()?;
    }
    match *model {
        ModelConfig::Elo(cfg) => run(&EloModel(cfg), params, warmup, games),
        ModelConfig::Movda(cfg) => {
            let p = params.ok_or_else(|| {
                MovdaError::Config("movda replay needs fitted margin parameters".into())
            })?;
            run(&MovdaModel { cfg, params: *p }, params, warmup, games)
        }
        ModelConfig::LinearMov(cfg) => run(&LinearMovModel(cfg), params, warmup, games),
        ModelConfig::Glicko2(cfg) => run(&Glicko2Model(cfg), params, warmup, games),
        ModelConfig::TrueSkill(cfg) => run(&TrueSkillModel { cfg, bridge }, params, warmup, games),
    }
}

struct Book<'g, S> {
    index: HashMap<&'g str, usize>,
    names: Vec<&'g str>,
    states: Vec<S>,
}

impl<'g, S: Clone> Book<'g, S> {
    fn slot<M: RatingModel<State = S>>(&mut self, team: &'g str, model: &M) -> usize {
        if let Some(&i) = self.index.get(team) {
            return i;
        }
        debug!("initialising unseen team {team} at the default rating");
        let i = self.states.len();
        self.index.insert(team, i);
        self.names.push(team);
        self.states.push(model.initial());
        i
    }
}

fn run<M: RatingModel>(
    model: &M,
    params: Option<&MovdaParams>,
    warmup: &[GameRecord],
    games: &[GameRecord],
) -> Result<ReplayOutput> {
    check_chronological(warmup.iter().chain(games))?;
    let mut book: Book<'_, M::State> = Book {
        index: HashMap::new(),
        names: Vec::new(),
        states: Vec::new(),
    };

    let step =
        |book: &mut Book<'_, M::State>, hi: usize, ai: usize, g: &GameRecord| -> Result<()> {
            let mut h = book.states[hi].clone();
            let mut a = book.states[ai].clone();
            model.update(&mut h, &mut a, g)?;
            book.states[hi] = h;
            book.states[ai] = a;
            Ok(())
        };

    for g in warmup {
        g.validate(true)?;
        let hi = book.slot(&g.home_team, model);
        let ai = book.slot(&g.away_team, model);
        step(&mut book, hi, ai, g)?;
    }

    let mut log = Vec::with_capacity(games.len());
    let mut history: BTreeMap<String, Vec<HistoryPoint>> = BTreeMap::new();
    for (idx, g) in games.iter().enumerate() {
        g.validate(true)?;
        let hi = book.slot(&g.home_team, model);
        let ai = book.slot(&g.away_team, model);
        let (home, away) = (&book.states[hi], &book.states[ai]);
        let pre_home = model.elo_scale(home);
        let pre_away = model.elo_scale(away);
        let i_ha = g.home_indicator();
        log.push(PredictionLogEntry {
            game_id: g.game_id.clone(),
            p_home_win: model.win_probability(home, away),
            predicted_margin_home: params.map(|p| expected_mov(pre_home - pre_away, i_ha, p)),
            actual_home_win: g.home_outcome().score(),
            actual_margin_home: g.t_mov_home() as f64,
            pre_rating_home: pre_home,
            pre_rating_away: pre_away,
            home_indicator: i_ha.value() as i8,
        });

        step(&mut book, hi, ai, g)?;
        for (team, i) in [(&g.home_team, hi), (&g.away_team, ai)] {
            history.entry(team.clone()).or_default().push(HistoryPoint {
                game_index: idx,
                rating: model.elo_scale(&book.states[i]),
            });
        }
    }

    let final_ratings = book
        .names
        .iter()
        .zip(&book.states)
        .map(|(n, s)| (n.to_string(), model.elo_scale(s)))
        .collect();
    Ok(ReplayOutput {
        log,
        history,
        final_ratings,
    })
}
