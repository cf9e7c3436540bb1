//! Glicko-2, following Glickman's step list.
//!
//! <http://www.glicko.net/glicko/glicko2.pdf>
//!
//! The replay harness feeds one game per rating period, so `opponents` usually
//! holds a single entry.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{MovdaError, Result};

/// Ratio between the Glicko and Glicko-2 scales.
pub const GLICKO2_SCALE: f64 = 173.7178;

const MAX_VOLATILITY_ITERATIONS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Glicko2State {
    /// Rating on the 1500-centred Glicko scale.
    pub rating: f64,
    /// Rating deviation (RD).
    pub deviation: f64,
    pub volatility: f64,
}

impl Glicko2State {
    pub fn validate(&self) -> Result<()> {
        if !self.rating.is_finite() {
            return Err(MovdaError::invalid("glicko-2 rating must be finite"));
        }
        if !(self.deviation.is_finite() && self.deviation > 0.0) {
            return Err(MovdaError::invalid(format!(
                "glicko-2 deviation must be positive, got {}",
                self.deviation
            )));
        }
        if !(self.volatility.is_finite() && self.volatility > 0.0) {
            return Err(MovdaError::invalid(format!(
                "glicko-2 volatility must be positive, got {}",
                self.volatility
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Glicko2Config {
    /// System constant bounding volatility change.
    pub tau: f64,
    pub initial_rating: f64,
    pub initial_deviation: f64,
    pub initial_volatility: f64,
}

impl Default for Glicko2Config {
    fn default() -> Self {
        Glicko2Config {
            tau: 0.5,
            initial_rating: 1500.0,
            initial_deviation: 350.0,
            initial_volatility: 0.06,
        }
    }
}

impl Glicko2Config {
    pub fn initial_state(&self) -> Glicko2State {
        Glicko2State {
            rating: self.initial_rating,
            deviation: self.initial_deviation,
            volatility: self.initial_volatility,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(MovdaError::invalid(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        self.initial_state().validate()
    }
}

fn g(phi: f64) -> f64 {
    1.0 / (1.0 + 3.0 * phi * phi / (PI * PI)).sqrt()
}

fn e(mu: f64, mu_j: f64, phi_j: f64) -> f64 {
    1.0 / (1.0 + (-g(phi_j) * (mu - mu_j)).exp())
}

/// One rating-period update of `player` against `opponents` (state, score).
pub fn glicko2_update(
    player: &Glicko2State,
    opponents: &[(Glicko2State, f64)],
    tau: f64,
) -> Result<Glicko2State> {
    player.validate()?;
    if opponents.is_empty() {
        return Err(MovdaError::invalid(
            "glicko-2 update needs at least one opponent",
        ));
    }
    if !(tau.is_finite() && tau > 0.0) {
        return Err(MovdaError::invalid(format!(
            "tau must be positive, got {tau}"
        )));
    }
    for (opp, s) in opponents {
        opp.validate()?;
        if !(*s == 0.0 || *s == 0.5 || *s == 1.0) {
            return Err(MovdaError::invalid(format!(
                "score must be 0, 0.5 or 1, got {s}"
            )));
        }
    }

    // Step 2: move to the Glicko-2 scale.
    let mu = (player.rating - 1500.0) / GLICKO2_SCALE;
    let phi = player.deviation / GLICKO2_SCALE;
    let opps: Vec<(f64, f64, f64)> = opponents
        .iter()
        .map(|(o, s)| {
            (
                (o.rating - 1500.0) / GLICKO2_SCALE,
                o.deviation / GLICKO2_SCALE,
                *s,
            )
        })
        .collect();

    // Steps 3-4: estimated variance and improvement.
    let inv_v: f64 = opps
        .iter()
        .map(|&(mu_j, phi_j, _)| {
            let e_j = e(mu, mu_j, phi_j);
            g(phi_j).powi(2) * e_j * (1.0 - e_j)
        })
        .sum();
    let v = 1.0 / inv_v;
    let score_sum: f64 = opps
        .iter()
        .map(|&(mu_j, phi_j, s)| g(phi_j) * (s - e(mu, mu_j, phi_j)))
        .sum();
    let delta = v * score_sum;

    // Step 5: new volatility by the Illinois method.
    let sigma = new_volatility(phi, player.volatility, v, delta, tau)?;

    // Steps 6-8.
    let phi_star = (phi * phi + sigma * sigma).sqrt();
    let phi_new = 1.0 / (1.0 / (phi_star * phi_star) + 1.0 / v).sqrt();
    let mu_new = mu + phi_new * phi_new * score_sum;

    let out = Glicko2State {
        rating: GLICKO2_SCALE * mu_new + 1500.0,
        deviation: GLICKO2_SCALE * phi_new,
        volatility: sigma,
    };
    out.validate().map_err(|e| {
        MovdaError::Numerical(format!("glicko-2 update produced an invalid state: {e}"))
    })?;
    Ok(out)
}

fn new_volatility(phi: f64, sigma: f64, v: f64, delta: f64, tau: f64) -> Result<f64> {
    const EPS: f64 = 1e-6;
    let a = (sigma * sigma).ln();
    let f = |x: f64| {
        let ex = x.exp();
        let denom = phi * phi + v + ex;
        ex * (delta * delta - phi * phi - v - ex) / (2.0 * denom * denom) - (x - a) / (tau * tau)
    };

    let mut big_a = a;
    let mut big_b = if delta * delta > phi * phi + v {
        (delta * delta - phi * phi - v).ln()
    } else {
        let mut k = 1.0;
        let mut bracketed = false;
        for _ in 0..MAX_VOLATILITY_ITERATIONS {
            if f(a - k * tau) >= 0.0 {
                bracketed = true;
                break;
            }
            k += 1.0;
        }
        if !bracketed {
            return Err(MovdaError::Numerical(
                "glicko-2 volatility bracket not found".into(),
            ));
        }
        a - k * tau
    };

    let mut f_a = f(big_a);
    let mut f_b = f(big_b);
    let mut iterations = 0;
    while (big_b - big_a).abs() > EPS {
        if iterations == MAX_VOLATILITY_ITERATIONS {
            return Err(MovdaError::Numerical(format!(
                "glicko-2 volatility iteration did not converge in {MAX_VOLATILITY_ITERATIONS} steps"
            )));
        }
        iterations += 1;
        let big_c = big_a + (big_a - big_b) * f_a / (f_b - f_a);
        let f_c = f(big_c);
        if f_c * f_b <= 0.0 {
            big_a = big_b;
            f_a = f_b;
        } else {
            f_a /= 2.0;
        }
        big_b = big_c;
        f_b = f_c;
    }
    Ok((big_a / 2.0).exp())
}

/// Win probability of `a` over `b`, attenuated by the combined deviation.
pub fn glicko2_win_probability(a: &Glicko2State, b: &Glicko2State) -> f64 {
    let phi = (a.deviation * a.deviation + b.deviation * b.deviation).sqrt() / GLICKO2_SCALE;
    1.0 / (1.0 + 10f64.powf(-g(phi) * (a.rating - b.rating) / 400.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn state(rating: f64, deviation: f64) -> Glicko2State {
        Glicko2State {
            rating,
            deviation,
            volatility: 0.06,
        }
    }

    #[test]
    fn glickman_worked_example() {
        let player = state(1500.0, 200.0);
        let opps = [
            (state(1400.0, 30.0), 1.0),
            (state(1550.0, 100.0), 0.0),
            (state(1700.0, 300.0), 0.0),
        ];
        let out = glicko2_update(&player, &opps, 0.5).unwrap();
        assert!((out.rating - 1464.06).abs() < 0.01, "{}", out.rating);
        assert!((out.deviation - 151.52).abs() < 0.01, "{}", out.deviation);
        assert!(
            (out.volatility - 0.05999).abs() < 1e-5,
            "{}",
            out.volatility
        );
    }

    #[test]
    fn symmetric_draw_keeps_rating() {
        let p = state(1580.0, 120.0);
        let out = glicko2_update(&p, &[(p, 0.5)], 0.5).unwrap();
        assert!((out.rating - p.rating).abs() < 1e-9);
        assert!(out.deviation < p.deviation);
    }

    #[test]
    fn rejects_empty_and_invalid() {
        let p = state(1500.0, 350.0);
        assert!(glicko2_update(&p, &[], 0.5).is_err());
        assert!(glicko2_update(&p, &[(p, 0.3)], 0.5).is_err());
        assert!(glicko2_update(&state(1500.0, 0.0), &[(p, 1.0)], 0.5).is_err());
        assert!(glicko2_update(&p, &[(p, 1.0)], 0.0).is_err());
    }

    #[test]
    fn win_probability_examples() {
        let a = state(1620.0, 80.0);
        assert_eq!(glicko2_win_probability(&a, &a), 0.5);

        let tiny_a = state(1700.0, 1e-9);
        let tiny_b = state(1500.0, 1e-9);
        let elo = crate::ratings::expected_outcome(200.0, 400.0).unwrap();
        assert!((glicko2_win_probability(&tiny_a, &tiny_b) - elo).abs() < 1e-12);

        // 40-digit reference value
        let p = glicko2_win_probability(&state(1700.0, 50.0), &state(1500.0, 50.0));
        assert!((p - 0.754_610_107_456_424_7).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn win_probability_complement(
            ra in 1000.0f64..2000.0, rb in 1000.0f64..2000.0,
            da in 30.0f64..350.0, db in 30.0f64..350.0,
        ) {
            let a = state(ra, da);
            let b = state(rb, db);
            prop_assert!((glicko2_win_probability(&a, &b) + glicko2_win_probability(&b, &a) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn deviation_shrinks_below_inflated_value(
            ra in 1000.0f64..2000.0, rb in 1000.0f64..2000.0,
            da in 30.0f64..350.0, db in 30.0f64..350.0,
            va in 0.02f64..0.1, vb in 0.02f64..0.1,
            s in prop::sample::select(vec![0.0, 0.5, 1.0]),
            tau in 0.2f64..1.2,
        ) {
            let a = Glicko2State { rating: ra, deviation: da, volatility: va };
            let b = Glicko2State { rating: rb, deviation: db, volatility: vb };
            let out = glicko2_update(&a, &[(b, s)], tau).unwrap();
            prop_assert!(out.validate().is_ok());
            let inflated = (da * da + (out.volatility * GLICKO2_SCALE).powi(2)).sqrt();
            prop_assert!(out.deviation < inflated);
        }
    }
}
