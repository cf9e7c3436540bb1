//! Elo with the K-factor scaled linearly by the absolute margin, capped.

use serde::{Deserialize, Serialize};

use crate::error::{MovdaError, Result};
use crate::ratings::{check_sign, logistic, Outcome, Rating};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearMovConfig {
    pub k: f64,
    pub c: f64,
    /// Multiplier gained per point of margin.
    pub c_mov: f64,
    /// Cap on the K multiplier, at least 1.
    pub k_max: f64,
}

impl Default for LinearMovConfig {
    fn default() -> Self {
        LinearMovConfig {
            k: crate::ratings::DEFAULT_K,
            c: crate::ratings::DEFAULT_C,
            c_mov: 0.1,
            k_max: 2.0,
        }
    }
}

impl LinearMovConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(MovdaError::invalid(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        positive("k", self.k)?;
        positive("c", self.c)?;
        positive("c_mov", self.c_mov)?;
        if !(self.k_max.is_finite() && self.k_max >= 1.0) {
            return Err(MovdaError::invalid(format!(
                "k_max must be >= 1, got {}",
                self.k_max
            )));
        }
        Ok(())
    }

    /// `max(1, min(k_max, c_mov * |t_mov|))`
    pub fn multiplier(&self, t_mov: f64) -> f64 {
        (self.c_mov * t_mov.abs()).min(self.k_max).max(1.0)
    }
}

pub fn linear_mov_update(
    r_a: Rating,
    r_b: Rating,
    s_a: Outcome,
    t_mov: f64,
    cfg: &LinearMovConfig,
) -> Result<(Rating, Rating)> {
    cfg.validate()?;
    check_sign(t_mov, s_a)?;
    let k_eff = cfg.k * cfg.multiplier(t_mov);
    let e_a = logistic(r_a.value() - r_b.value(), cfg.c);
    let change = k_eff * (s_a.score() - e_a);
    Ok((
        Rating::new(r_a.value() + change)?,
        Rating::new(r_b.value() - change)?,
    ))
}
