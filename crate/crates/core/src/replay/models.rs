//! The five rating systems behind one interface, plus their configuration.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{
    glicko2_update, glicko2_win_probability, linear_mov_update, trueskill_two_team_update,
    trueskill_win_probability, Glicko2Config, Glicko2State, LinearMovConfig, TrueSkillConfig,
    TrueSkillState, Winner, GLICKO2_SCALE,
};
use crate::error::{MovdaError, Result};
use crate::ratings::{
    elo_update, logistic, movda_update, EloConfig, MovdaParams, Outcome, Rating, DEFAULT_RATING,
};

use super::games::GameRecord;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Elo,
    LinearMov,
    Glicko2,
    #[serde(rename = "trueskill")]
    TrueSkill,
    Movda,
}

impl ModelKind {
    /// Table order.
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Elo,
        ModelKind::LinearMov,
        ModelKind::Glicko2,
        ModelKind::TrueSkill,
        ModelKind::Movda,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Elo => "elo",
            ModelKind::LinearMov => "linear-mov",
            ModelKind::Glicko2 => "glicko2",
            ModelKind::TrueSkill => "trueskill",
            ModelKind::Movda => "movda",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            ModelKind::Elo => "Standard ELO",
            ModelKind::LinearMov => "Linear MOV ELO",
            ModelKind::Glicko2 => "Glicko-2",
            ModelKind::TrueSkill => "TrueSkill",
            ModelKind::Movda => "MOVDA",
        }
    }

    pub fn default_config(self) -> ModelConfig {
        match self {
            ModelKind::Elo => ModelConfig::Elo(EloConfig::default()),
            ModelKind::Movda => ModelConfig::Movda(EloConfig::default()),
            ModelKind::LinearMov => ModelConfig::LinearMov(LinearMovConfig::default()),
            ModelKind::Glicko2 => ModelConfig::Glicko2(Glicko2Config::default()),
            ModelKind::TrueSkill => ModelConfig::TrueSkill(TrueSkillConfig::default()),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = MovdaError;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| MovdaError::Config(format!("unknown model `{s}`")))
    }
}

/// A model together with its hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum ModelConfig {
    Elo(EloConfig),
    Movda(EloConfig),
    LinearMov(LinearMovConfig),
    Glicko2(Glicko2Config),
    #[serde(rename = "trueskill")]
    TrueSkill(TrueSkillConfig),
}

impl ModelConfig {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelConfig::Elo(_) => ModelKind::Elo,
            ModelConfig::Movda(_) => ModelKind::Movda,
            ModelConfig::LinearMov(_) => ModelKind::LinearMov,
            ModelConfig::Glicko2(_) => ModelKind::Glicko2,
            ModelConfig::TrueSkill(_) => ModelKind::TrueSkill,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelConfig::Elo(c) | ModelConfig::Movda(c) => c.validate(),
            ModelConfig::LinearMov(c) => c.validate(),
            ModelConfig::Glicko2(c) => c.validate(),
            ModelConfig::TrueSkill(c) => c.validate(),
        }
    }

    /// Whether ratings of this model are conserved game by game.
    pub fn is_zero_sum(&self) -> bool {
        matches!(
            self,
            ModelConfig::Elo(_) | ModelConfig::Movda(_) | ModelConfig::LinearMov(_)
        )
    }
}

/// How TrueSkill means are placed on the Elo scale for margin prediction and
/// convergence bands: `1500 + (mu - mu0) * points_per_sigma0 / sigma0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleBridge {
    pub trueskill_points_per_sigma0: f64,
}

impl Default for ScaleBridge {
    fn default() -> Self {
        ScaleBridge {
            trueskill_points_per_sigma0: GLICKO2_SCALE,
        }
    }
}

pub(crate) trait RatingModel {
    type State: Clone;

    fn initial(&self) -> Self::State;
    fn win_probability(&self, home: &Self::State, away: &Self::State) -> f64;
    /// Rating on the Elo-comparable scale.
    fn elo_scale(&self, s: &Self::State) -> f64;
    fn update(
        &self,
        home: &mut Self::State,
        away: &mut Self::State,
        game: &GameRecord,
    ) -> Result<()>;
}

fn integrity(game: &GameRecord, e: MovdaError) -> MovdaError {
    match e {
        MovdaError::SignMismatch { .. } | MovdaError::InvalidArgument(_) => {
            MovdaError::DataIntegrity {
                game_id: game.game_id.clone(),
                reason: e.to_string(),
            }
        }
        other => other,
    }
}

pub(crate) struct EloModel(pub EloConfig);

impl RatingModel for EloModel {
    type State = f64;

    fn initial(&self) -> f64 {
        DEFAULT_RATING
    }

    fn win_probability(&self, home: &f64, away: &f64) -> f64 {
        logistic(home - away, self.0.c)
    }

    fn elo_scale(&self, s: &f64) -> f64 {
        *s
    }

    fn update(&self, home: &mut f64, away: &mut f64, game: &GameRecord) -> Result<()> {
        let (h, a) = elo_update(
            Rating::new(*home)?,
            Rating::new(*away)?,
            game.home_outcome(),
            &self.0,
        )
        .map_err(|e| integrity(game, e))?;
        *home = h.value();
        *away = a.value();
        Ok(())
    }
}

pub(crate) struct MovdaModel {
    pub cfg: EloConfig,
    pub params: MovdaParams,
}

impl RatingModel for MovdaModel {
    type State = f64;

    fn initial(&self) -> f64 {
        DEFAULT_RATING
    }

    fn win_probability(&self, home: &f64, away: &f64) -> f64 {
        logistic(home - away, self.cfg.c)
    }

    fn elo_scale(&self, s: &f64) -> f64 {
        *s
    }

    fn update(&self, home: &mut f64, away: &mut f64, game: &GameRecord) -> Result<()> {
        let (h, a) = movda_update(
            Rating::new(*home)?,
            Rating::new(*away)?,
            game.home_outcome(),
            game.t_mov_home() as f64,
            game.home_indicator(),
            &self.cfg,
            &self.params,
        )
        .map_err(|e| integrity(game, e))?;
        *home = h.value();
        *away = a.value();
        Ok(())
    }
}

pub(crate) struct LinearMovModel(pub LinearMovConfig);

impl RatingModel for LinearMovModel {
    type State = f64;

    fn initial(&self) -> f64 {
        DEFAULT_RATING
    }

    fn win_probability(&self, home: &f64, away: &f64) -> f64 {
        logistic(home - away, self.0.c)
    }

    fn elo_scale(&self, s: &f64) -> f64 {
        *s
    }

    fn update(&self, home: &mut f64, away: &mut f64, game: &GameRecord) -> Result<()> {
        let (h, a) = linear_mov_update(
            Rating::new(*home)?,
            Rating::new(*away)?,
            game.home_outcome(),
            game.t_mov_home() as f64,
            &self.0,
        )
        .map_err(|e| integrity(game, e))?;
        *home = h.value();
        *away = a.value();
        Ok(())
    }
}

pub(crate) struct Glicko2Model(pub Glicko2Config);

impl RatingModel for Glicko2Model {
    type State = Glicko2State;

    fn initial(&self) -> Glicko2State {
        self.0.initial_state()
    }

    fn win_probability(&self, home: &Glicko2State, away: &Glicko2State) -> f64 {
        glicko2_win_probability(home, away)
    }

    fn elo_scale(&self, s: &Glicko2State) -> f64 {
        s.rating
    }

    fn update(
        &self,
        home: &mut Glicko2State,
        away: &mut Glicko2State,
        game: &GameRecord,
    ) -> Result<()> {
        let s = game.home_outcome().score();
        let new_home = glicko2_update(home, &[(*away, s)], self.0.tau)?;
        let new_away = glicko2_update(away, &[(*home, 1.0 - s)], self.0.tau)?;
        *home = new_home;
        *away = new_away;
        Ok(())
    }
}

pub(crate) struct TrueSkillModel {
    pub cfg: TrueSkillConfig,
    pub bridge: ScaleBridge,
}

impl RatingModel for TrueSkillModel {
    type State = TrueSkillState;

    fn initial(&self) -> TrueSkillState {
        self.cfg.initial_state()
    }

    fn win_probability(&self, home: &TrueSkillState, away: &TrueSkillState) -> f64 {
        trueskill_win_probability(home, away, self.cfg.beta)
    }

    fn elo_scale(&self, s: &TrueSkillState) -> f64 {
        DEFAULT_RATING
            + (s.mu - self.cfg.mu0) * self.bridge.trueskill_points_per_sigma0 / self.cfg.sigma0
    }

    fn update(
        &self,
        home: &mut TrueSkillState,
        away: &mut TrueSkillState,
        game: &GameRecord,
    ) -> Result<()> {
        let winner = match game.home_outcome() {
            Outcome::Win => Winner::A,
            Outcome::Loss => Winner::B,
            Outcome::Draw => {
                return Err(MovdaError::DataIntegrity {
                    game_id: game.game_id.clone(),
                    reason: "trueskill is configured without draws".into(),
                })
            }
        };
        let (h, a) = trueskill_two_team_update(home, away, winner, self.cfg.beta, self.cfg.tau)?;
        *home = h;
        *away = a;
        Ok(())
    }
}
