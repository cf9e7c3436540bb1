//! Accuracy, Brier score, margin MAE and convergence speed.

use std::collections::BTreeMap;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{MovdaError, Result};
use crate::fitting::CompensatedSum;
use crate::ratings::{expected_mov, HomeIndicator, MovdaParams};

use super::PredictionLogEntry;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy_pct: f64,
    pub brier: f64,
    pub margin_mae: f64,
    /// `None` when no team had enough history for the stable window.
    pub convergence_games: Option<f64>,
    pub n_games: usize,
}

fn non_empty(log: &[PredictionLogEntry], metric: &str) -> Result<()> {
    if log.is_empty() {
        Err(MovdaError::UndefinedMetric(format!(
            "{metric} of an empty prediction log"
        )))
    } else {
        Ok(())
    }
}

fn mean_of(values: impl Iterator<Item = f64>, n: usize) -> f64 {
    values.collect::<CompensatedSum>().value() / n as f64
}

/// Percentage of games won by the team with the higher pre-game rating.
/// Equal ratings, and drawn games, earn half credit.
pub fn accuracy(log: &[PredictionLogEntry]) -> Result<f64> {
    non_empty(log, "accuracy")?;
    let credit = log.iter().map(|e| {
        if e.pre_rating_home == e.pre_rating_away || e.actual_home_win == 0.5 {
            0.5
        } else if (e.pre_rating_home > e.pre_rating_away) == (e.actual_home_win == 1.0) {
            1.0
        } else {
            0.0
        }
    });
    Ok(100.0 * mean_of(credit, log.len()))
}

pub fn brier(log: &[PredictionLogEntry]) -> Result<f64> {
    non_empty(log, "brier score")?;
    Ok(mean_of(
        log.iter()
            .map(|e| (e.p_home_win - e.actual_home_win).powi(2)),
        log.len(),
    ))
}

/// Mean absolute error of the fitted expected-margin curve evaluated on the
/// logged pre-game ratings.
pub fn margin_mae(log: &[PredictionLogEntry], params: Option<&MovdaParams>) -> Result<f64> {
    let p = params
        .ok_or_else(|| MovdaError::Config("margin MAE needs fitted margin parameters".into()))?;
    non_empty(log, "margin MAE")?;
    let mut errors = Vec::with_capacity(log.len());
    for e in log {
        let venue = HomeIndicator::try_from(i32::from(e.home_indicator))?;
        let predicted = expected_mov(e.pre_rating_home - e.pre_rating_away, venue, p);
        errors.push((e.actual_margin_home - predicted).abs());
    }
    Ok(mean_of(errors.into_iter(), log.len()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceOptions {
    /// Half-width of the band around the stable rating, in rating points.
    pub band: f64,
    /// Number of final games whose mean defines the stable rating.
    pub stable_window: usize,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        ConvergenceOptions {
            band: 20.0,
            stable_window: 200,
        }
    }
}

/// 1-based index of the first game from which every later rating stays within
/// `band` of `target`. A series whose final rating is outside the band scores
/// `len + 1`.
pub fn games_to_converge(series: &[f64], target: f64, band: f64) -> usize {
    match series.iter().rposition(|r| (r - target).abs() > band) {
        Some(last_out) => last_out + 2,
        None => 1,
    }
}

/// Mean number of games each team needs to settle permanently inside the band
/// around its stable rating. Teams with fewer than `stable_window` games are
/// skipped.
pub fn convergence_speed(
    history: &BTreeMap<String, Vec<f64>>,
    opts: &ConvergenceOptions,
) -> Result<f64> {
    if opts.stable_window == 0 || opts.band.is_nan() || opts.band < 0.0 {
        return Err(MovdaError::Config(
            "stable window must be positive and band non-negative".into(),
        ));
    }
    let mut total = 0.0;
    let mut counted = 0usize;
    for (team, series) in history {
        if series.len() < opts.stable_window {
            warn!(
                "team {team} has {} games, fewer than the stable window of {}; excluded from convergence",
                series.len(),
                opts.stable_window
            );
            continue;
        }
        let tail = &series[series.len() - opts.stable_window..];
        let target = tail.iter().copied().collect::<CompensatedSum>().value() / tail.len() as f64;
        total += games_to_converge(series, target, opts.band) as f64;
        counted += 1;
    }
    if counted == 0 {
        return Err(MovdaError::UndefinedMetric(format!(
            "no team has at least {} games for the convergence window",
            opts.stable_window
        )));
    }
    Ok(total / counted as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(p: f64, won: f64, pre_h: f64, pre_a: f64, margin: f64) -> PredictionLogEntry {
        PredictionLogEntry {
            game_id: "g".into(),
            p_home_win: p,
            predicted_margin_home: None,
            actual_home_win: won,
            actual_margin_home: margin,
            pre_rating_home: pre_h,
            pre_rating_away: pre_a,
            home_indicator: 1,
        }
    }

    #[test]
    fn accuracy_examples() {
        let all_right = vec![
            entry(0.6, 1.0, 1510.0, 1500.0, 3.0),
            entry(0.4, 0.0, 1490.0, 1500.0, -3.0),
        ];
        assert_eq!(accuracy(&all_right).unwrap(), 100.0);

        let three_of_four = vec![
            entry(0.6, 1.0, 1510.0, 1500.0, 3.0),
            entry(0.6, 1.0, 1510.0, 1500.0, 3.0),
            entry(0.4, 0.0, 1490.0, 1500.0, -3.0),
            entry(0.6, 0.0, 1510.0, 1500.0, -3.0),
        ];
        assert_eq!(accuracy(&three_of_four).unwrap(), 75.0);
    }

    #[test]
    fn tied_ratings_score_half() {
        // brute force: every outcome pattern over a 6-game all-tied log
        for mask in 0u32..64 {
            let log: Vec<_> = (0..6)
                .map(|i| {
                    let won = f64::from((mask >> i) & 1);
                    entry(
                        0.5,
                        won,
                        1500.0,
                        1500.0,
                        if won == 1.0 { 4.0 } else { -4.0 },
                    )
                })
                .collect();
            assert_eq!(accuracy(&log).unwrap(), 50.0);
        }
    }

    #[test]
    fn brier_examples() {
        let flat: Vec<_> = (0..7)
            .map(|i| entry(0.5, f64::from(i % 2), 0.0, 0.0, 1.0))
            .collect();
        assert_eq!(brier(&flat).unwrap(), 0.25);
        let perfect = vec![
            entry(1.0, 1.0, 0.0, 0.0, 1.0),
            entry(0.0, 0.0, 0.0, 0.0, -1.0),
        ];
        assert_eq!(brier(&perfect).unwrap(), 0.0);
        let two = vec![
            entry(0.8, 1.0, 0.0, 0.0, 1.0),
            entry(0.6, 0.0, 0.0, 0.0, -1.0),
        ];
        assert!((brier(&two).unwrap() - 0.20).abs() < 1e-15);
    }

    #[test]
    fn empty_logs_are_undefined() {
        assert!(matches!(accuracy(&[]), Err(MovdaError::UndefinedMetric(_))));
        assert!(matches!(brier(&[]), Err(MovdaError::UndefinedMetric(_))));
        let p = MovdaParams::new(10.0, 0.005, 0.0, 0.0, 0.0).unwrap();
        assert!(matches!(
            margin_mae(&[], Some(&p)),
            Err(MovdaError::UndefinedMetric(_))
        ));
    }

    #[test]
    fn margin_mae_examples() {
        // gamma = 0, delta = 5: zero rating gap at home predicts +5
        let p = MovdaParams::new(10.0, 0.005, 0.0, 5.0, 0.0).unwrap();
        assert_eq!(
            margin_mae(&[entry(0.5, 1.0, 1500.0, 1500.0, 5.0)], Some(&p)).unwrap(),
            0.0
        );
        assert_eq!(
            margin_mae(&[entry(0.5, 1.0, 1500.0, 1500.0, 12.0)], Some(&p)).unwrap(),
            7.0
        );
        let three = vec![
            entry(0.5, 1.0, 1500.0, 1500.0, 8.0),
            entry(0.5, 1.0, 1500.0, 1500.0, 1.0),
            entry(0.5, 1.0, 1500.0, 1500.0, 13.0),
        ];
        assert_eq!(margin_mae(&three, Some(&p)).unwrap(), 5.0);
        assert!(matches!(
            margin_mae(&three, None),
            Err(MovdaError::Config(_))
        ));
    }

    fn scan_oracle(series: &[f64], target: f64, band: f64) -> usize {
        (1..=series.len() + 1)
            .find(|&g| series[g - 1..].iter().all(|r| (r - target).abs() <= band))
            .unwrap()
    }

    #[test]
    fn convergence_examples() {
        assert_eq!(games_to_converge(&[1500.0; 10], 1500.0, 20.0), 1);

        // climbs 10 points a game and holds at 1580; band 1560..1600 first reached at game 7
        let climb: Vec<f64> = (0..9)
            .map(|i| 1500.0 + 10.0 * i as f64)
            .chain(std::iter::repeat_n(1580.0, 20))
            .collect();
        assert_eq!(scan_oracle(&climb, 1580.0, 20.0), 7);
        assert_eq!(games_to_converge(&climb, 1580.0, 20.0), 7);

        let mut wobble = vec![1500.0; 5];
        wobble.extend([1590.0, 1600.0, 1610.0, 1530.0, 1600.0, 1605.0, 1500.0]);
        wobble.extend([1600.0; 10]);
        assert_eq!(scan_oracle(&wobble, 1600.0, 20.0), 13);
        assert_eq!(games_to_converge(&wobble, 1600.0, 20.0), 13);

        // leaves the band once at game 11
        let mut reenter = vec![
            1500.0, 1550.0, 1590.0, 1595.0, 1600.0, 1605.0, 1598.0, 1602.0, 1600.0, 1601.0, 1560.0,
        ];
        reenter.extend([1600.0; 12]);
        assert_eq!(scan_oracle(&reenter, 1600.0, 20.0), 12);
        assert_eq!(games_to_converge(&reenter, 1600.0, 20.0), 12);
    }

    #[test]
    fn convergence_speed_averages_and_excludes() {
        let mut h = BTreeMap::new();
        h.insert("flat".to_string(), vec![1500.0; 200]);
        h.insert("short".to_string(), vec![1500.0; 50]);
        let opts = ConvergenceOptions::default();
        assert_eq!(convergence_speed(&h, &opts).unwrap(), 1.0);

        let mut climb: Vec<f64> = (0..9).map(|i| 1500.0 + 10.0 * i as f64).collect();
        climb.extend(std::iter::repeat_n(1580.0, 200));
        h.insert("climb".to_string(), climb);
        assert_eq!(convergence_speed(&h, &opts).unwrap(), 4.0);

        let mut only_short = BTreeMap::new();
        only_short.insert("s".to_string(), vec![1500.0; 10]);
        assert!(matches!(
            convergence_speed(&only_short, &opts),
            Err(MovdaError::UndefinedMetric(_))
        ));
    }

    #[test]
    fn randomised_scan_agrees_with_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let n = rng.gen_range(1..40);
            let series: Vec<f64> = (0..n).map(|_| rng.gen_range(1450.0..1550.0)).collect();
            let target = rng.gen_range(1480.0..1520.0);
            let band = rng.gen_range(0.0..40.0);
            assert_eq!(
                games_to_converge(&series, target, band),
                scan_oracle(&series, target, band)
            );
        }
    }
}
