//! Two-player TrueSkill without draws, each team treated as one player.
//!
//! For two players the factor graph collapses to a closed form, so no message
//! passing is needed.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{MovdaError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrueSkillState {
    pub mu: f64,
    pub sigma: f64,
}

impl TrueSkillState {
    pub fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() {
            return Err(MovdaError::invalid("trueskill mu must be finite"));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(MovdaError::invalid(format!(
                "trueskill sigma must be positive, got {}",
                self.sigma
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrueSkillConfig {
    pub mu0: f64,
    pub sigma0: f64,
    /// Performance noise.
    pub beta: f64,
    /// Dynamics noise added to sigma before every game.
    pub tau: f64,
}

impl Default for TrueSkillConfig {
    fn default() -> Self {
        TrueSkillConfig {
            mu0: 25.0,
            sigma0: 8.333,
            beta: 2.0,
            tau: 0.2,
        }
    }
}

impl TrueSkillConfig {
    pub fn initial_state(&self) -> TrueSkillState {
        TrueSkillState {
            mu: self.mu0,
            sigma: self.sigma0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.initial_state().validate()?;
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(MovdaError::invalid(format!(
                "beta must be positive, got {}",
                self.beta
            )));
        }
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            return Err(MovdaError::invalid(format!(
                "tau must be non-negative, got {}",
                self.tau
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Winner {
    A,
    B,
}

pub(crate) fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Scaled complementary error function `exp(x^2) * erfc(x)` for large positive `x`.
fn erfcx_asymptotic(x: f64) -> f64 {
    let inv2 = 1.0 / (x * x);
    let series = 1.0 - 0.5 * inv2 + 0.75 * inv2 * inv2 - 1.875 * inv2.powi(3)
        + 6.5625 * inv2.powi(4)
        - 29.531_25 * inv2.powi(5);
    series / (x * PI.sqrt())
}

/// Additive correction `pdf(t) / cdf(t)` for a win with no draw margin.
fn v_win(t: f64) -> f64 {
    if t > -30.0 {
        normal_pdf(t) / normal_cdf(t)
    } else {
        // cdf underflows here; use the scaled erfc instead.
        (2.0 / PI).sqrt() / erfcx_asymptotic(-t * FRAC_1_SQRT_2)
    }
}

/// Multiplicative correction `v * (v + t)`, kept inside (0, 1).
fn w_win(t: f64) -> f64 {
    let v = v_win(t);
    (v * (v + t)).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON)
}

/// Update both players after a decisive game. Dynamics noise `tau` is applied
/// to each sigma first.
pub fn trueskill_two_team_update(
    a: &TrueSkillState,
    b: &TrueSkillState,
    winner: Winner,
    beta: f64,
    tau: f64,
) -> Result<(TrueSkillState, TrueSkillState)> {
    a.validate()?;
    b.validate()?;
    if !(beta.is_finite() && beta > 0.0) {
        return Err(MovdaError::invalid(format!(
            "beta must be positive, got {beta}"
        )));
    }
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(MovdaError::invalid(format!(
            "tau must be non-negative, got {tau}"
        )));
    }

    let (w, l) = match winner {
        Winner::A => (a, b),
        Winner::B => (b, a),
    };
    let var_w = w.sigma * w.sigma + tau * tau;
    let var_l = l.sigma * l.sigma + tau * tau;
    let c2 = 2.0 * beta * beta + var_w + var_l;
    let c = c2.sqrt();
    let t = (w.mu - l.mu) / c;
    let v = v_win(t);
    let ww = w_win(t);

    let new_w = TrueSkillState {
        mu: w.mu + var_w / c * v,
        sigma: (var_w * (1.0 - var_w / c2 * ww)).sqrt(),
    };
    let new_l = TrueSkillState {
        mu: l.mu - var_l / c * v,
        sigma: (var_l * (1.0 - var_l / c2 * ww)).sqrt(),
    };
    for s in [&new_w, &new_l] {
        s.validate().map_err(|e| {
            MovdaError::Numerical(format!("trueskill update produced an invalid state: {e}"))
        })?;
    }
    Ok(match winner {
        Winner::A => (new_w, new_l),
        Winner::B => (new_l, new_w),
    })
}

pub fn trueskill_win_probability(a: &TrueSkillState, b: &TrueSkillState, beta: f64) -> f64 {
    let denom = (2.0 * beta * beta + a.sigma * a.sigma + b.sigma * b.sigma).sqrt();
    normal_cdf((a.mu - b.mu) / denom)
}
