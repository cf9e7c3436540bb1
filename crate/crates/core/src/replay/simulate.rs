//! Synthetic leagues with known latent skills, for recovery and convergence
//! experiments.

use chrono::{Days, NaiveDate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{MovdaError, Result};
use crate::ratings::{expected_mov, HomeIndicator, MovdaParams, DEFAULT_RATING};

use super::games::GameRecord;

/// Points scored by a team that loses or ties; the winner adds the margin.
const BASE_SCORE: u32 = 100;
/// Redraws allowed for a rounded margin of zero before giving up.
const MAX_REDRAWS: usize = 10_000;

/// A one-off jump in one team's latent skill.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepChange {
    pub team: usize,
    /// Index of the first game played under the new skill.
    pub at_game: usize,
    pub delta: f64,
}

/// Latent skills, on the rating scale, one per team.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkillSpec {
    pub initial: Vec<f64>,
    pub step: Option<StepChange>,
    /// Standard deviation of the random-walk step each participant's skill
    /// takes after every game; zero keeps skills fixed.
    #[serde(default)]
    pub drift_sd: f64,
}

impl SkillSpec {
    /// `n_teams` skills evenly spaced over `1500 ± spread`.
    pub fn evenly_spaced(n_teams: usize, spread: f64) -> Self {
        let initial = (0..n_teams)
            .map(|i| {
                if n_teams < 2 {
                    DEFAULT_RATING
                } else {
                    DEFAULT_RATING - spread + 2.0 * spread * i as f64 / (n_teams - 1) as f64
                }
            })
            .collect();
        SkillSpec {
            initial,
            step: None,
            drift_sd: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulatedLeague {
    pub games: Vec<GameRecord>,
    /// Unrounded margin drawn for each game, home minus away.
    pub latent_margins: Vec<f64>,
    /// Noise-free expected margin of each game given the true skills.
    pub expected_margins: Vec<f64>,
    /// True skill of every team after the last game.
    pub final_skills: Vec<f64>,
}

pub fn team_name(i: usize) -> String {
    format!("T{i:02}")
}

/// Home/away pairs of one round of a circle-method round robin. An odd team
/// count gets a bye slot, shown as `None`.
fn round_pairs(n_teams: usize, round: usize) -> Vec<(usize, usize)> {
    let slots = n_teams + n_teams % 2;
    let mut order: Vec<usize> = (0..slots).collect();
    // team 0 stays fixed, the rest rotate one place per round
    order[1..].rotate_right(round % (slots - 1));
    (0..slots / 2)
        .map(|k| (order[k], order[slots - 1 - k]))
        .filter(|&(a, b)| a < n_teams && b < n_teams)
        .collect()
}

/// Play `n_games` of a repeated round robin. Each pairing alternates venue
/// between cycles. Margins are drawn from a normal around the expected margin
/// of the true skill difference and rounded to whole points, redrawing
/// zeros; without noise a zero rounds towards the expected margin's sign.
pub fn simulate_league(
    n_teams: usize,
    n_games: usize,
    true_params: &MovdaParams,
    skills: &SkillSpec,
    seed: u64,
) -> Result<SimulatedLeague> {
    true_params.validate()?;
    if n_teams < 2 {
        return Err(MovdaError::invalid(format!(
            "a league needs at least two teams, got {n_teams}"
        )));
    }
    if skills.initial.len() != n_teams {
        return Err(MovdaError::invalid(format!(
            "{} initial skills for {n_teams} teams",
            skills.initial.len()
        )));
    }
    if skills.initial.iter().any(|s| !s.is_finite()) {
        return Err(MovdaError::invalid("initial skills must be finite"));
    }
    if !(skills.drift_sd.is_finite() && skills.drift_sd >= 0.0) {
        return Err(MovdaError::invalid(format!(
            "drift must be non-negative, got {}",
            skills.drift_sd
        )));
    }
    if let Some(st) = skills.step {
        if st.team >= n_teams || !st.delta.is_finite() {
            return Err(MovdaError::invalid(format!("bad step change {st:?}")));
        }
    }

    let sigma = true_params.sigma2.sqrt();
    let noise = Normal::new(0.0, sigma).map_err(|e| MovdaError::Numerical(e.to_string()))?;
    let drift =
        Normal::new(0.0, skills.drift_sd).map_err(|e| MovdaError::Numerical(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = NaiveDate::from_ymd_opt(2001, 1, 1).expect("valid date");
    let rounds_per_cycle = n_teams + n_teams % 2 - 1;

    let mut skill = skills.initial.clone();
    let mut games = Vec::with_capacity(n_games);
    let mut latent_margins = Vec::with_capacity(n_games);
    let mut expected_margins = Vec::with_capacity(n_games);
    let mut round = 0usize;

    'outer: loop {
        let cycle = round / rounds_per_cycle;
        for (a, b) in round_pairs(n_teams, round % rounds_per_cycle) {
            if games.len() == n_games {
                break 'outer;
            }
            if let Some(st) = skills.step {
                if st.at_game == games.len() {
                    skill[st.team] += st.delta;
                }
            }
            let (home, away) = if cycle.is_multiple_of(2) {
                (a, b)
            } else {
                (b, a)
            };
            let expected =
                expected_mov(skill[home] - skill[away], HomeIndicator::Home, true_params);
            let (latent, points) = if sigma > 0.0 {
                let mut tries = 0;
                loop {
                    let m = expected + noise.sample(&mut rng);
                    let r = m.round();
                    if r != 0.0 {
                        break (m, r);
                    }
                    tries += 1;
                    if tries == MAX_REDRAWS {
                        return Err(MovdaError::Numerical(
                            "margin draws keep rounding to zero".into(),
                        ));
                    }
                }
            } else {
                let r = expected.round();
                let r = if r != 0.0 {
                    r
                } else if expected >= 0.0 {
                    1.0
                } else {
                    -1.0
                };
                (expected, r)
            };
            let points = points as i64;
            let idx = games.len();
            games.push(GameRecord {
                game_id: format!("sim-{:06}", idx + 1),
                date: start + Days::new(round as u64),
                season: format!("S{:03}", cycle / 2 + 1),
                home_team: team_name(home),
                away_team: team_name(away),
                home_score: BASE_SCORE + points.max(0) as u32,
                away_score: BASE_SCORE + (-points).max(0) as u32,
                neutral_site: false,
            });
            latent_margins.push(latent);
            expected_margins.push(expected);
            if skills.drift_sd > 0.0 {
                skill[home] += drift.sample(&mut rng);
                skill[away] += drift.sample(&mut rng);
            }
        }
        round += 1;
    }

    Ok(SimulatedLeague {
        games,
        latent_margins,
        expected_margins,
        final_skills: skill,
    })
}
