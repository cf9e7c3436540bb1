use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{MovdaError, Result};
use crate::ratings::{HomeIndicator, Outcome};

/// One historical game. Games on the same date keep their input order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameRecord {
    pub game_id: String,
    pub date: NaiveDate,
    pub season: String,
    pub home_team: String,
    pub away_team: String,
    pub home_score: u32,
    pub away_score: u32,
    #[serde(default)]
    pub neutral_site: bool,
}

impl GameRecord {
    /// Home score minus away score.
    pub fn t_mov_home(&self) -> i64 {
        i64::from(self.home_score) - i64::from(self.away_score)
    }

    pub fn home_indicator(&self) -> HomeIndicator {
        if self.neutral_site {
            HomeIndicator::Neutral
        } else {
            HomeIndicator::Home
        }
    }

    pub fn home_outcome(&self) -> Outcome {
        Outcome::from_margin(self.t_mov_home() as f64)
    }

    /// Structural checks. `allow_ties` is false on the basketball path, where a
    /// game cannot end level.
    pub fn validate(&self, allow_ties: bool) -> Result<()> {
        let fail = |reason: String| MovdaError::DataIntegrity {
            game_id: self.game_id.clone(),
            reason,
        };
        if self.game_id.is_empty() {
            return Err(fail("empty game id".into()));
        }
        if self.home_team.is_empty() || self.away_team.is_empty() {
            return Err(fail("empty team id".into()));
        }
        if self.home_team == self.away_team {
            return Err(fail(format!("team {} plays itself", self.home_team)));
        }
        if !allow_ties && self.home_score == self.away_score {
            return Err(fail(format!(
                "tied score {}-{}",
                self.home_score, self.away_score
            )));
        }
        Ok(())
    }
}

/// Fails on the first game dated before its predecessor.
pub fn check_chronological<'a>(games: impl IntoIterator<Item = &'a GameRecord>) -> Result<()> {
    let mut last: Option<NaiveDate> = None;
    for g in games {
        if let Some(prev) = last {
            if g.date < prev {
                return Err(MovdaError::Ordering {
                    game_id: g.game_id.clone(),
                });
            }
        }
        last = Some(g.date);
    }
    Ok(())
}
