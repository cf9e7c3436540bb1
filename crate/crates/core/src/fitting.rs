//! Least-squares fit of the expected-margin curve to observed margins.
//!
//! Levenberg-Marquardt over `(ln alpha, ln beta, gamma, delta)` so the two
//! scale parameters stay positive. All sums use compensated (Neumaier)
//! accumulation, and step acceptance compares residuals pairwise so the
//! decision is not swamped by rounding in the total SSE.

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{MovdaError, Result};
use crate::ratings::{expected_mov, HomeIndicator, MovdaParams};

/// One observation: rating gap, venue and observed margin, all from the
/// point of view of the same competitor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitSample {
    pub delta_r: f64,
    pub i_ha: HomeIndicator,
    pub t_mov: f64,
}

impl FitSample {
    pub fn new(delta_r: f64, i_ha: HomeIndicator, t_mov: f64) -> Self {
        FitSample {
            delta_r,
            i_ha,
            t_mov,
        }
    }

    /// The same game seen from the other side.
    pub fn mirrored(&self) -> Self {
        FitSample {
            delta_r: -self.delta_r,
            i_ha: self.i_ha.flipped(),
            t_mov: -self.t_mov,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Bound on `max_j |sum_i J_ij r_i| / n` in the internal coordinates.
    pub grad_tol: f64,
    pub initial_guess: Option<MovdaParams>,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iter: 500,
            grad_tol: 1e-9,
            initial_guess: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub params: MovdaParams,
    pub sse: f64,
    pub n: usize,
    pub iterations: usize,
    pub converged: bool,
    pub gradient_norm: f64,
    /// SSE after every accepted step, starting from the initial guess.
    #[serde(skip)]
    pub sse_history: Vec<f64>,
}

const INITIAL_DAMPING: f64 = 1e-3;
const MAX_DAMPING: f64 = 1e20;

/// Neumaier compensated sum.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Partial derivatives of the expected margin with respect to
/// `(alpha, beta, gamma, delta)`.
pub fn emov_jacobian(sample: &FitSample, p: &MovdaParams) -> [f64; 4] {
    let x = p.beta * sample.delta_r;
    let sech = 1.0 / x.cosh();
    [
        x.tanh(),
        p.alpha * sample.delta_r * sech * sech,
        1.0,
        sample.i_ha.value(),
    ]
}

fn to_internal(p: &MovdaParams) -> Vector4<f64> {
    Vector4::new(p.alpha.ln(), p.beta.ln(), p.gamma, p.delta)
}

fn from_internal(theta: &Vector4<f64>) -> MovdaParams {
    MovdaParams {
        alpha: theta[0].exp(),
        beta: theta[1].exp(),
        gamma: theta[2],
        delta: theta[3],
        sigma2: 0.0,
    }
}

fn residuals(samples: &[FitSample], p: &MovdaParams) -> Vec<f64> {
    samples
        .iter()
        .map(|s| s.t_mov - expected_mov(s.delta_r, s.i_ha, p))
        .collect()
}

fn sse_of(res: &[f64]) -> f64 {
    res.iter()
        .map(|r| r * r)
        .collect::<CompensatedSum>()
        .value()
}

/// Normal equations `J^T J` and `J^T r` in internal coordinates.
fn normal_equations(
    samples: &[FitSample],
    p: &MovdaParams,
    res: &[f64],
) -> (Matrix4<f64>, Vector4<f64>) {
    let mut jtj = [[CompensatedSum::default(); 4]; 4];
    let mut jtr = [CompensatedSum::default(); 4];
    for (s, r) in samples.iter().zip(res) {
        let j = emov_jacobian(s, p);
        // chain rule for the log-parametrised scales
        let ji = [j[0] * p.alpha, j[1] * p.beta, j[2], j[3]];
        for a in 0..4 {
            jtr[a].add(ji[a] * r);
            for b in a..4 {
                jtj[a][b].add(ji[a] * ji[b]);
            }
        }
    }
    let mut m = Matrix4::zeros();
    let mut v = Vector4::zeros();
    for a in 0..4 {
        v[a] = jtr[a].value();
        for b in a..4 {
            m[(a, b)] = jtj[a][b].value();
            m[(b, a)] = m[(a, b)];
        }
    }
    (m, v)
}

fn check_identifiable(samples: &[FitSample]) -> Result<()> {
    if samples.len() < 4 {
        return Err(MovdaError::InsufficientData(format!(
            "margin fit needs at least 4 samples, got {}",
            samples.len()
        )));
    }
    if samples
        .iter()
        .any(|s| !s.delta_r.is_finite() || !s.t_mov.is_finite())
    {
        return Err(MovdaError::invalid("fit samples must be finite"));
    }
    let first = samples[0].delta_r;
    if samples.iter().all(|s| s.delta_r == first) {
        return Err(MovdaError::Unidentifiable {
            param: "beta",
            reason: format!("every rating difference equals {first}"),
        });
    }
    let venue = samples[0].i_ha;
    if samples.iter().all(|s| s.i_ha == venue) {
        return Err(MovdaError::Unidentifiable {
            param: "delta",
            reason: "all samples share the same home indicator".into(),
        });
    }
    Ok(())
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs.fold((CompensatedSum::default(), 0usize), |(mut s, n), x| {
        s.add(x);
        (s, n + 1)
    });
    (n > 0).then(|| sum.value() / n as f64)
}

/// Moment-matching starting point.
pub fn initial_guess(samples: &[FitSample]) -> MovdaParams {
    let margins_at =
        |h: HomeIndicator| mean(samples.iter().filter(|s| s.i_ha == h).map(|s| s.t_mov));
    let mean_t = mean(samples.iter().map(|s| s.t_mov)).unwrap_or(0.0);
    let mean_i = mean(samples.iter().map(|s| s.i_ha.value())).unwrap_or(0.0);

    let delta0 = match (
        margins_at(HomeIndicator::Home),
        margins_at(HomeIndicator::Away),
    ) {
        (Some(h), Some(a)) => (h - a) / 2.0,
        _ => {
            // only one side of the venue split: least-squares slope on the indicator
            let cov = mean(
                samples
                    .iter()
                    .map(|s| (s.i_ha.value() - mean_i) * (s.t_mov - mean_t)),
            )
            .unwrap_or(0.0);
            let var =
                mean(samples.iter().map(|s| (s.i_ha.value() - mean_i).powi(2))).unwrap_or(0.0);
            if var > 0.0 {
                cov / var
            } else {
                0.0
            }
        }
    };
    let gamma0 = mean_t - delta0 * mean_i;

    let mut dev: Vec<f64> = samples
        .iter()
        .map(|s| (s.t_mov - gamma0 - delta0 * s.i_ha.value()).abs())
        .collect();
    dev.sort_by(f64::total_cmp);
    let idx = ((dev.len() as f64 * 0.95).ceil() as usize).clamp(1, dev.len()) - 1;
    let mut alpha0 = 0.9 * dev[idx];
    if alpha0.is_nan() || alpha0 <= 0.0 {
        alpha0 = 1.0;
    }

    let mean_dr = mean(samples.iter().map(|s| s.delta_r)).unwrap_or(0.0);
    let var_dr = mean(samples.iter().map(|s| (s.delta_r - mean_dr).powi(2))).unwrap_or(0.0);
    let std_dr = var_dr.sqrt();
    let beta0 = if std_dr > 0.0 {
        1.0 / (2.0 * std_dr)
    } else {
        1e-3
    };

    MovdaParams {
        alpha: alpha0,
        beta: beta0,
        gamma: gamma0,
        delta: delta0,
        sigma2: 0.0,
    }
}

/// Whether the full Gauss-Newton step would lower the SSE by less than one
/// unit in the last place: the minimum is reached to working precision even
/// if the gradient is still above tolerance.
fn at_precision_floor(jtj: &Matrix4<f64>, jtr: &Vector4<f64>, sse: f64) -> bool {
    match jtj.lu().solve(jtr) {
        Some(step) => step.dot(jtr).abs() <= f64::EPSILON * sse,
        None => false,
    }
}

/// Fit `(alpha, beta, gamma, delta)` by minimising the sum of squared margin
/// residuals; `sigma2` is `SSE / (n - 4)`.
///
/// Running out of iterations is reported through `converged = false`, not as
/// an error.
pub fn fit_emov(samples: &[FitSample], options: &FitOptions) -> Result<FitReport> {
    check_identifiable(samples)?;
    let n = samples.len();
    let start = match &options.initial_guess {
        Some(p) => {
            p.validate()?;
            *p
        }
        None => initial_guess(samples),
    };

    let mut theta = to_internal(&start);
    let mut params = from_internal(&theta);
    let mut res = residuals(samples, &params);
    let mut sse = sse_of(&res);
    let mut history = vec![sse];
    let mut damping = INITIAL_DAMPING;
    let mut iterations = 0;
    let mut converged = false;
    let mut gradient_norm = f64::INFINITY;

    let (mut jtj, mut jtr) = normal_equations(samples, &params, &res);
    while iterations < options.max_iter {
        gradient_norm = jtr.amax() / n as f64;
        if gradient_norm <= options.grad_tol {
            converged = true;
            break;
        }
        iterations += 1;

        let mut lhs = jtj;
        for d in 0..4 {
            lhs[(d, d)] += damping * jtj[(d, d)].max(f64::MIN_POSITIVE);
        }
        let step = match lhs.lu().solve(&jtr) {
            Some(s) if s.iter().all(|v| v.is_finite()) => s,
            _ => {
                damping *= 10.0;
                if damping > MAX_DAMPING {
                    break;
                }
                continue;
            }
        };

        let cand_theta = theta + step;
        let cand = from_internal(&cand_theta);
        let cand_res = residuals(samples, &cand);
        // SSE(new) - SSE(old), summed term by term
        let change = cand_res
            .iter()
            .zip(&res)
            .map(|(a, b)| (a - b) * (a + b))
            .collect::<CompensatedSum>()
            .value();

        if change < 0.0 && cand.alpha.is_finite() && cand.beta.is_finite() && cand.beta > 0.0 {
            theta = cand_theta;
            params = cand;
            res = cand_res;
            sse = sse_of(&res);
            history.push(sse);
            damping = (damping * 0.1).max(1e-15);
            (jtj, jtr) = normal_equations(samples, &params, &res);
        } else {
            damping *= 10.0;
            if damping > MAX_DAMPING {
                // no descent direction left at working precision
                gradient_norm = jtr.amax() / n as f64;
                converged =
                    gradient_norm <= options.grad_tol || at_precision_floor(&jtj, &jtr, sse);
                break;
            }
        }
    }
    if iterations == options.max_iter && !converged {
        gradient_norm = jtr.amax() / n as f64;
        converged = gradient_norm <= options.grad_tol;
    }

    params.sigma2 = if n > 4 { sse / (n - 4) as f64 } else { 0.0 };
    Ok(FitReport {
        params,
        sse,
        n,
        iterations,
        converged,
        gradient_norm,
        sse_history: history,
    })
}
