//! Elo expectation and update math, the tanh expected-margin model, and the
//! margin-differential (MOVDA) update.
//!
//! Everything here is a pure function of its arguments.

use serde::{Deserialize, Serialize};

use crate::error::{MovdaError, Result};

/// A rating in Elo points. Always finite.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Rating(f64);

impl Rating {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() {
            Ok(Rating(value))
        } else {
            Err(MovdaError::invalid(format!(
                "rating must be finite, got {value}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Rating {
    type Error = MovdaError;

    fn try_from(value: f64) -> Result<Self> {
        Rating::new(value)
    }
}

impl From<Rating> for f64 {
    fn from(r: Rating) -> f64 {
        r.0
    }
}

/// Venue of a game from the point of view of competitor A.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HomeIndicator {
    /// A plays at home (+1).
    Home,
    /// B plays at home (-1).
    Away,
    /// Neutral site (0).
    Neutral,
}

impl HomeIndicator {
    pub fn value(self) -> f64 {
        match self {
            HomeIndicator::Home => 1.0,
            HomeIndicator::Away => -1.0,
            HomeIndicator::Neutral => 0.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            HomeIndicator::Home => HomeIndicator::Away,
            HomeIndicator::Away => HomeIndicator::Home,
            HomeIndicator::Neutral => HomeIndicator::Neutral,
        }
    }
}

impl TryFrom<i32> for HomeIndicator {
    type Error = MovdaError;

    fn try_from(v: i32) -> Result<Self> {
        match v {
            1 => Ok(HomeIndicator::Home),
            -1 => Ok(HomeIndicator::Away),
            0 => Ok(HomeIndicator::Neutral),
            other => Err(MovdaError::invalid(format!(
                "home indicator must be -1, 0 or 1, got {other}"
            ))),
        }
    }
}

/// Result of a game for competitor A.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Win,
    Draw,
    Loss,
}

impl Outcome {
    /// The score S_A in {0, 0.5, 1}.
    pub fn score(self) -> f64 {
        match self {
            Outcome::Win => 1.0,
            Outcome::Draw => 0.5,
            Outcome::Loss => 0.0,
        }
    }

    pub fn from_score(s: f64) -> Result<Self> {
        if s == 1.0 {
            Ok(Outcome::Win)
        } else if s == 0.5 {
            Ok(Outcome::Draw)
        } else if s == 0.0 {
            Ok(Outcome::Loss)
        } else {
            Err(MovdaError::invalid(format!(
                "outcome score must be 0, 0.5 or 1, got {s}"
            )))
        }
    }

    /// Outcome implied by the sign of A's margin.
    pub fn from_margin(t_mov: f64) -> Self {
        if t_mov > 0.0 {
            Outcome::Win
        } else if t_mov < 0.0 {
            Outcome::Loss
        } else {
            Outcome::Draw
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Outcome::Win => Outcome::Loss,
            Outcome::Draw => Outcome::Draw,
            Outcome::Loss => Outcome::Win,
        }
    }
}

/// Parameters of the expected-margin curve
/// `alpha * tanh(beta * dr) + gamma + delta * home`, plus the residual
/// variance of observed margins around it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MovdaParams {
    /// Asymptotic skill-driven margin, in points.
    pub alpha: f64,
    /// Steepness per rating point.
    pub beta: f64,
    /// Baseline offset, in points.
    pub gamma: f64,
    /// Home-advantage magnitude, in points.
    pub delta: f64,
    /// Residual margin variance, in points squared.
    pub sigma2: f64,
}

impl MovdaParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64, sigma2: f64) -> Result<Self> {
        let p = MovdaParams {
            alpha,
            beta,
            gamma,
            delta,
            sigma2,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.alpha, self.beta, self.gamma, self.delta, self.sigma2];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(MovdaError::invalid(
                "margin-model parameters must be finite",
            ));
        }
        if self.alpha <= 0.0 || self.beta <= 0.0 {
            return Err(MovdaError::invalid(format!(
                "alpha and beta must be positive (alpha={}, beta={})",
                self.alpha, self.beta
            )));
        }
        if self.sigma2 < 0.0 {
            return Err(MovdaError::invalid("sigma2 must be non-negative"));
        }
        Ok(())
    }
}

pub const DEFAULT_K: f64 = 20.0;
pub const DEFAULT_C: f64 = 400.0;
pub const DEFAULT_RATING: f64 = 1500.0;

/// Elo step size, logistic scale, and margin-differential weight.
/// `lambda == 0` is plain Elo.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EloConfig {
    pub k: f64,
    pub c: f64,
    pub lambda: f64,
}

impl Default for EloConfig {
    fn default() -> Self {
        EloConfig {
            k: DEFAULT_K,
            c: DEFAULT_C,
            lambda: 0.0,
        }
    }
}

impl EloConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.k.is_finite() && self.k > 0.0) {
            return Err(MovdaError::invalid(format!(
                "k must be positive, got {}",
                self.k
            )));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(MovdaError::invalid(format!(
                "c must be positive, got {}",
                self.c
            )));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(MovdaError::invalid(format!(
                "lambda must be non-negative, got {}",
                self.lambda
            )));
        }
        Ok(())
    }
}

/// Logistic win probability for a rating difference `delta_r` on scale `c`.
pub fn expected_outcome(delta_r: f64, c: f64) -> Result<f64> {
    if !delta_r.is_finite() {
        return Err(MovdaError::invalid(format!(
            "rating difference must be finite, got {delta_r}"
        )));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(MovdaError::invalid(format!("c must be positive, got {c}")));
    }
    Ok(logistic(delta_r, c))
}

#[inline]
pub(crate) fn logistic(delta_r: f64, c: f64) -> f64 {
    1.0 / (1.0 + 10f64.powf(-delta_r / c))
}

/// Standard Elo update. `cfg.lambda` is ignored.
pub fn elo_update(
    r_a: Rating,
    r_b: Rating,
    s_a: Outcome,
    cfg: &EloConfig,
) -> Result<(Rating, Rating)> {
    cfg.validate()?;
    let delta_r = r_a.0 - r_b.0;
    let e_a = logistic(delta_r, cfg.c);
    let change = cfg.k * (s_a.score() - e_a);
    Ok((Rating(r_a.0 + change), Rating(r_b.0 - change)))
}

/// Expected margin for A given the rating difference and venue.
pub fn expected_mov(delta_r: f64, i_ha: HomeIndicator, p: &MovdaParams) -> f64 {
    p.alpha * (p.beta * delta_r).tanh() + p.gamma + p.delta * i_ha.value()
}

pub fn mov_differential(t_mov: f64, e_mov: f64) -> f64 {
    t_mov - e_mov
}

pub(crate) fn check_sign(t_mov: f64, s_a: Outcome) -> Result<()> {
    if !t_mov.is_finite() || Outcome::from_margin(t_mov) != s_a {
        return Err(MovdaError::SignMismatch {
            t_mov,
            score: s_a.score(),
        });
    }
    Ok(())
}

/// Margin-differential update: the Elo error term plus `lambda` times the
/// gap between the observed and the expected margin. Zero-sum.
///
/// Steps run in a fixed order (rating gap, win expectation, expected margin,
/// differential, combined change) so that `lambda == 0` reproduces
/// [`elo_update`] bit for bit.
pub fn movda_update(
    r_a: Rating,
    r_b: Rating,
    s_a: Outcome,
    t_mov: f64,
    i_ha: HomeIndicator,
    cfg: &EloConfig,
    p: &MovdaParams,
) -> Result<(Rating, Rating)> {
    cfg.validate()?;
    check_sign(t_mov, s_a)?;
    let delta_r = r_a.0 - r_b.0;
    let e_a = logistic(delta_r, cfg.c);
    let e_mov = expected_mov(delta_r, i_ha, p);
    let d_mov = mov_differential(t_mov, e_mov);
    let change = cfg.k * (s_a.score() - e_a) + cfg.lambda * d_mov;
    Ok((Rating(r_a.0 + change), Rating(r_b.0 - change)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn r(v: f64) -> Rating {
        Rating::new(v).unwrap()
    }

    fn example_params() -> MovdaParams {
        MovdaParams::new(10.0, 0.005, 0.0, 3.0, 0.0).unwrap()
    }

    #[test]
    fn expected_outcome_examples() {
        assert_eq!(expected_outcome(0.0, 400.0).unwrap(), 0.5);
        assert_relative_eq!(
            expected_outcome(400.0, 400.0).unwrap(),
            10.0 / 11.0,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            expected_outcome(-400.0, 400.0).unwrap(),
            1.0 / 11.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn expected_outcome_rejects_bad_input() {
        assert!(expected_outcome(f64::NAN, 400.0).is_err());
        assert!(expected_outcome(f64::INFINITY, 400.0).is_err());
        assert!(expected_outcome(10.0, 0.0).is_err());
        assert!(expected_outcome(10.0, -400.0).is_err());
    }

    #[test]
    fn rating_rejects_non_finite() {
        assert!(Rating::new(f64::NAN).is_err());
        assert!(Rating::new(f64::NEG_INFINITY).is_err());
    }

    #[test]
    fn elo_update_examples() {
        let cfg = EloConfig::default();
        let (a, b) = elo_update(r(1500.0), r(1500.0), Outcome::Win, &cfg).unwrap();
        assert_eq!((a.value(), b.value()), (1510.0, 1490.0));

        // E_A = 10/11 exactly, so the change is 20 * (0 - 10/11).
        let (a, b) = elo_update(r(1700.0), r(1300.0), Outcome::Loss, &cfg).unwrap();
        let change = -200.0 / 11.0;
        assert_relative_eq!(a.value(), 1700.0 + change, epsilon = 1e-9);
        assert_relative_eq!(b.value(), 1300.0 - change, epsilon = 1e-9);
        assert_relative_eq!(a.value(), 1681.818181818, epsilon = 1e-8);
    }

    #[test]
    fn elo_update_no_change_when_outcome_matches_expectation() {
        let cfg = EloConfig::default();
        let (a, b) = elo_update(r(1523.0), r(1523.0), Outcome::Draw, &cfg).unwrap();
        assert_eq!((a.value(), b.value()), (1523.0, 1523.0));
    }

    #[test]
    fn expected_mov_examples() {
        let p = MovdaParams::new(10.0, 0.005, 1.25, 3.0, 0.0).unwrap();
        assert_eq!(expected_mov(0.0, HomeIndicator::Neutral, &p), 1.25);

        // 10 * tanh(1) + 3, reference value from a 40-digit evaluation.
        let e = expected_mov(200.0, HomeIndicator::Home, &example_params());
        assert_relative_eq!(e, 10.615_941_559_557_65, epsilon = 1e-12);
    }

    #[test]
    fn mov_differential_examples() {
        assert_eq!(mov_differential(12.0, 12.0), 0.0);
        assert_eq!(mov_differential(12.0, 5.0), 7.0);
        assert_eq!(mov_differential(-4.0, 5.0), -9.0);
    }

    #[test]
    fn movda_update_hand_example() {
        let cfg = EloConfig {
            k: 20.0,
            c: 400.0,
            lambda: 0.1,
        };
        // E_A = 0.5, E_MOV = 3, differential 17, change 10 + 1.7.
        let (a, b) = movda_update(
            r(1500.0),
            r(1500.0),
            Outcome::Win,
            20.0,
            HomeIndicator::Home,
            &cfg,
            &example_params(),
        )
        .unwrap();
        assert_relative_eq!(a.value(), 1511.7, epsilon = 1e-12);
        assert_relative_eq!(b.value(), 1488.3, epsilon = 1e-12);
    }

    #[test]
    fn movda_update_rejects_sign_mismatch() {
        let cfg = EloConfig::default();
        let p = example_params();
        for (t, s) in [
            (5.0, Outcome::Loss),
            (-5.0, Outcome::Win),
            (0.0, Outcome::Win),
            (3.0, Outcome::Draw),
        ] {
            let err = movda_update(r(1500.0), r(1500.0), s, t, HomeIndicator::Home, &cfg, &p)
                .unwrap_err();
            assert!(matches!(err, MovdaError::SignMismatch { .. }));
        }
        // draws are allowed with a zero margin
        assert!(movda_update(
            r(1500.0),
            r(1400.0),
            Outcome::Draw,
            0.0,
            HomeIndicator::Neutral,
            &cfg,
            &p
        )
        .is_ok());
    }

    #[test]
    fn invalid_configs_rejected() {
        let p = example_params();
        for cfg in [
            EloConfig {
                k: 0.0,
                ..Default::default()
            },
            EloConfig {
                c: 0.0,
                ..Default::default()
            },
            EloConfig {
                lambda: -0.1,
                ..Default::default()
            },
        ] {
            assert!(movda_update(
                r(1500.0),
                r(1500.0),
                Outcome::Win,
                1.0,
                HomeIndicator::Home,
                &cfg,
                &p
            )
            .is_err());
        }
        assert!(MovdaParams::new(0.0, 0.1, 0.0, 0.0, 0.0).is_err());
        assert!(MovdaParams::new(1.0, -0.1, 0.0, 0.0, 0.0).is_err());
        assert!(MovdaParams::new(1.0, 0.1, 0.0, 0.0, -1.0).is_err());
    }

    fn outcome_strategy() -> impl Strategy<Value = (Outcome, f64)> {
        prop_oneof![
            (1.0f64..60.0).prop_map(|m| (Outcome::Win, m)),
            (-60.0f64..-1.0).prop_map(|m| (Outcome::Loss, m)),
            Just((Outcome::Draw, 0.0)),
        ]
    }

    fn home_strategy() -> impl Strategy<Value = HomeIndicator> {
        prop_oneof![
            Just(HomeIndicator::Home),
            Just(HomeIndicator::Away),
            Just(HomeIndicator::Neutral)
        ]
    }

    proptest! {
        #[test]
        fn lambda_zero_is_bitwise_elo(
            ra in 800.0f64..2200.0, rb in 800.0f64..2200.0,
            (s, t) in outcome_strategy(), h in home_strategy(),
            k in 1.0f64..60.0, c in 100.0f64..800.0,
            alpha in 1.0f64..20.0, beta in 0.0005f64..0.02, gamma in -2.0f64..2.0, delta in -5.0f64..5.0,
        ) {
            let p = MovdaParams::new(alpha, beta, gamma, delta, 0.0).unwrap();
            let cfg = EloConfig { k, c, lambda: 0.0 };
            let m = movda_update(r(ra), r(rb), s, t, h, &cfg, &p).unwrap();
            let e = elo_update(r(ra), r(rb), s, &cfg).unwrap();
            prop_assert_eq!(m.0.value().to_bits(), e.0.value().to_bits());
            prop_assert_eq!(m.1.value().to_bits(), e.1.value().to_bits());
        }

        #[test]
        fn updates_are_zero_sum(
            ra in 800.0f64..2200.0, rb in 800.0f64..2200.0,
            (s, t) in outcome_strategy(), h in home_strategy(),
            lambda in 0.0f64..3.0,
        ) {
            let p = example_params();
            let cfg = EloConfig { k: 20.0, c: 400.0, lambda };
            let (a, b) = movda_update(r(ra), r(rb), s, t, h, &cfg, &p).unwrap();
            let before = ra + rb;
            prop_assert!(((a.value() + b.value()) - before).abs() <= 4.0 * f64::EPSILON * before.abs());
            let (a, b) = elo_update(r(ra), r(rb), s, &cfg).unwrap();
            prop_assert!(((a.value() + b.value()) - before).abs() <= 4.0 * f64::EPSILON * before.abs());
        }

        #[test]
        fn expectations_strictly_increasing(x in -1500.0f64..1500.0, gap in 0.01f64..500.0, h in home_strategy()) {
            let p = MovdaParams::new(12.0, 0.004, 0.2, 2.5, 0.0).unwrap();
            prop_assert!(expected_outcome(x + gap, 400.0).unwrap() > expected_outcome(x, 400.0).unwrap());
            prop_assert!(expected_mov(x + gap, h, &p) > expected_mov(x, h, &p));
        }

        #[test]
        fn expected_mov_bounded_and_antisymmetric(
            x in -1e6f64..1e6, h in home_strategy(),
            alpha in 1.0f64..20.0, beta in 0.0005f64..0.02, gamma in -2.0f64..2.0, delta in -5.0f64..5.0,
        ) {
            let p = MovdaParams::new(alpha, beta, gamma, delta, 0.0).unwrap();
            let e = expected_mov(x, h, &p);
            // saturated tanh meets the bound exactly, up to the rounding of the offsets
            prop_assert!((e - gamma - delta * h.value()).abs() <= alpha + 1e-12 * (1.0 + gamma.abs() + delta.abs()));
            let mirrored = expected_mov(-x, h.flipped(), &p);
            prop_assert!((mirrored - (2.0 * gamma - e)).abs() < 1e-9);
        }

        #[test]
        fn expected_outcome_complement(x in -3000.0f64..3000.0, c in 50.0f64..1000.0) {
            let sum = expected_outcome(x, c).unwrap() + expected_outcome(-x, c).unwrap();
            prop_assert!((sum - 1.0).abs() < 1e-12);
        }
    }
}
