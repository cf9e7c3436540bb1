use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{MovdaError, Result};

use super::games::{check_chronological, GameRecord};

/// Chronological train / tune / holdout fractions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train: f64,
    pub tune: f64,
    pub holdout: f64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train: 0.7,
            tune: 0.2,
            holdout: 0.1,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let fr = [self.train, self.tune, self.holdout];
        if fr.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
            return Err(MovdaError::Config(format!(
                "split fractions must be positive, got {fr:?}"
            )));
        }
        if (fr.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(MovdaError::Config(format!(
                "split fractions must sum to 1, got {fr:?}"
            )));
        }
        Ok(())
    }

    /// Sizes `floor(train * n)`, `floor(tune * n)` and the remainder.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        // the epsilon keeps e.g. 0.7 * 10 from flooring to 6
        let floor = |f: f64| ((f * n as f64) + 1e-9).floor() as usize;
        let train = floor(self.train).min(n);
        let tune = floor(self.tune).min(n - train);
        (train, tune, n - train - tune)
    }
}

/// Parses `train,tune,holdout`, e.g. `0.7,0.2,0.1`.
impl FromStr for SplitSpec {
    type Err = MovdaError;

    fn from_str(s: &str) -> Result<Self> {
        let parts = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| {
                MovdaError::Config(format!("split `{s}` must be three comma-separated numbers"))
            })?;
        let [train, tune, holdout] = parts[..] else {
            return Err(MovdaError::Config(format!(
                "split `{s}` must have exactly three fractions"
            )));
        };
        let spec = SplitSpec {
            train,
            tune,
            holdout,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// The three chronological splits of a game list.
#[derive(Clone, Copy, Debug)]
pub struct Splits<'a> {
    pub train: &'a [GameRecord],
    pub tune: &'a [GameRecord],
    pub holdout: &'a [GameRecord],
    all: &'a [GameRecord],
}

impl<'a> Splits<'a> {
    /// Train followed by tune.
    pub fn train_and_tune(&self) -> &'a [GameRecord] {
        &self.all[..self.train.len() + self.tune.len()]
    }

    /// Tune followed by holdout.
    pub fn tune_and_holdout(&self) -> &'a [GameRecord] {
        &self.all[self.train.len()..]
    }

    pub fn all(&self) -> &'a [GameRecord] {
        self.all
    }
}

pub fn split_dataset<'a>(games: &'a [GameRecord], spec: &SplitSpec) -> Result<Splits<'a>> {
    spec.validate()?;
    if games.len() < 10 {
        return Err(MovdaError::InsufficientData(format!(
            "need at least 10 games to split, got {}",
            games.len()
        )));
    }
    check_chronological(games)?;
    let (a, b, _) = spec.sizes(games.len());
    Ok(Splits {
        train: &games[..a],
        tune: &games[a..a + b],
        holdout: &games[a + b..],
        all: games,
    })
}
