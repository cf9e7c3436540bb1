//! Data behind the two figures: binned margins against the fitted curve, and
//! margin histograms with a kernel density estimate.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{MovdaError, Result};
use crate::fitting::FitSample;
use crate::ratings::{expected_mov, HomeIndicator, MovdaParams};
use crate::replay::GameRecord;

/// Bins with fewer samples than this are flagged as sparse.
pub const SPARSE_BIN: usize = 5;
/// Curve lattice points per bin width.
const CURVE_POINTS_PER_BIN: usize = 5;
/// Points at which the density estimate is evaluated.
const KDE_POINTS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Venue {
    Home,
    Away,
    Neutral,
}

impl From<HomeIndicator> for Venue {
    fn from(h: HomeIndicator) -> Self {
        match h {
            HomeIndicator::Home => Venue::Home,
            HomeIndicator::Away => Venue::Away,
            HomeIndicator::Neutral => Venue::Neutral,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginBin {
    pub venue: Venue,
    pub center: f64,
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation; absent for a single sample.
    pub std: Option<f64>,
    pub sparse: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub delta_r: f64,
    pub home: f64,
    pub away: f64,
    pub neutral: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitPlotData {
    pub bin_width: f64,
    pub bins: Vec<MarginBin>,
    pub curve: Vec<CurvePoint>,
}

fn mean_std(xs: &[f64]) -> (f64, Option<f64>) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let std = (xs.len() > 1)
        .then(|| (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
    (mean, std)
}

fn check_width(w: f64) -> Result<()> {
    if w.is_finite() && w > 0.0 {
        Ok(())
    } else {
        Err(MovdaError::invalid(format!(
            "bin width must be positive, got {w}"
        )))
    }
}

/// Observed margins averaged per rating-gap bin and venue, next to the fitted
/// curve on a lattice that spans the observed gaps and includes zero.
pub fn export_fit_plot_data(
    samples: &[FitSample],
    params: &MovdaParams,
    bin_width: f64,
) -> Result<FitPlotData> {
    check_width(bin_width)?;
    params.validate()?;
    if samples.is_empty() {
        return Err(MovdaError::InsufficientData("no samples to plot".into()));
    }
    let mut groups: BTreeMap<(Venue, i64), Vec<f64>> = BTreeMap::new();
    for s in samples {
        let bin = (s.delta_r / bin_width).floor() as i64;
        groups
            .entry((s.i_ha.into(), bin))
            .or_default()
            .push(s.t_mov);
    }
    let bins = groups
        .into_iter()
        .map(|((venue, bin), margins)| {
            let (mean, std) = mean_std(&margins);
            MarginBin {
                venue,
                center: (bin as f64 + 0.5) * bin_width,
                n: margins.len(),
                mean,
                std,
                sparse: margins.len() < SPARSE_BIN,
            }
        })
        .collect();

    let lo = samples.iter().map(|s| s.delta_r).fold(0.0, f64::min);
    let hi = samples.iter().map(|s| s.delta_r).fold(0.0, f64::max);
    let step = bin_width / CURVE_POINTS_PER_BIN as f64;
    let first = (lo / step).floor() as i64;
    let last = (hi / step).ceil() as i64;
    let curve = (first..=last)
        .map(|i| {
            let x = i as f64 * step;
            CurvePoint {
                delta_r: x,
                home: expected_mov(x, HomeIndicator::Home, params),
                away: expected_mov(x, HomeIndicator::Away, params),
                neutral: expected_mov(x, HomeIndicator::Neutral, params),
            }
        })
        .collect();
    Ok(FitPlotData {
        bin_width,
        bins,
        curve,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginHistogram {
    pub venue: Venue,
    pub n: usize,
    pub bins: Vec<HistogramBin>,
    pub mean: f64,
    pub std: f64,
    pub bandwidth: f64,
    /// `(margin, density)` pairs of the Gaussian kernel density estimate.
    pub density: Vec<(f64, f64)>,
}

/// Silverman's rule of thumb; falls back to half a bin when the sample has
/// no spread.
fn silverman(xs: &mut [f64], std: f64, bin_width: f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let pos = p * (xs.len() - 1) as f64;
        let (i, f) = (pos.floor() as usize, pos.fract());
        xs[i] + f * (xs[(i + 1).min(xs.len() - 1)] - xs[i])
    };
    let iqr = q(0.75) - q(0.25);
    let spread = if iqr > 0.0 { std.min(iqr / 1.34) } else { std };
    let h = 0.9 * spread * (xs.len() as f64).powf(-0.2);
    if h > 0.0 {
        h
    } else {
        bin_width / 2.0
    }
}

/// Histogram and density of margins from one side's point of view: the home
/// team's margin for [`Venue::Home`], the away team's for [`Venue::Away`].
/// Neutral-site games are left out of both.
pub fn export_margin_histogram(
    games: &[GameRecord],
    venue: Venue,
    bin_width: f64,
) -> Result<MarginHistogram> {
    check_width(bin_width)?;
    let mut margins: Vec<f64> = games
        .iter()
        .filter(|g| !g.neutral_site)
        .map(|g| g.t_mov_home() as f64)
        .map(|m| match venue {
            Venue::Home => Ok(m),
            Venue::Away => Ok(-m),
            Venue::Neutral => Err(MovdaError::invalid("histograms are per home or away side")),
        })
        .collect::<Result<_>>()?;
    if margins.is_empty() {
        return Err(MovdaError::InsufficientData("no games to histogram".into()));
    }
    let n = margins.len();
    let (mean, std) = mean_std(&margins);
    let std = std.unwrap_or(0.0);

    let first = margins
        .iter()
        .map(|m| (m / bin_width).floor() as i64)
        .min()
        .unwrap_or(0);
    let last = margins
        .iter()
        .map(|m| (m / bin_width).floor() as i64)
        .max()
        .unwrap_or(0);
    let mut counts = vec![0usize; (last - first + 1) as usize];
    for m in &margins {
        counts[((m / bin_width).floor() as i64 - first) as usize] += 1;
    }
    let bins = counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| {
            let left = (first + i as i64) as f64 * bin_width;
            HistogramBin {
                left,
                right: left + bin_width,
                count,
            }
        })
        .collect();

    let bandwidth = silverman(&mut margins, std, bin_width);
    let lo = margins[0] - 3.0 * bandwidth;
    let hi = margins[n - 1] + 3.0 * bandwidth;
    let norm = 1.0 / (n as f64 * bandwidth * (2.0 * PI).sqrt());
    let density = (0..KDE_POINTS)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / (KDE_POINTS - 1) as f64;
            let d = margins
                .iter()
                .map(|m| (-0.5 * ((x - m) / bandwidth).powi(2)).exp())
                .sum::<f64>()
                * norm;
            (x, d)
        })
        .collect();

    Ok(MarginHistogram {
        venue,
        n,
        bins,
        mean,
        std,
        bandwidth,
        density,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::replay::{simulate_league, SkillSpec};

    fn p() -> MovdaParams {
        MovdaParams::new(10.0, 0.005, 0.5, 3.0, 0.0).unwrap()
    }

    #[test]
    fn two_point_bin_statistics() {
        let s = [
            FitSample::new(3.0, HomeIndicator::Home, 5.0),
            FitSample::new(7.0, HomeIndicator::Home, 7.0),
        ];
        let d = export_fit_plot_data(&s, &p(), 25.0).unwrap();
        assert_eq!(d.bins.len(), 1);
        let b = &d.bins[0];
        assert_eq!((b.n, b.mean, b.center), (2, 6.0, 12.5));
        assert!((b.std.unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!(b.sparse);
    }

    #[test]
    fn curve_at_zero_is_offset_plus_home() {
        let s = [
            FitSample::new(60.0, HomeIndicator::Away, -1.0),
            FitSample::new(140.0, HomeIndicator::Home, 9.0),
        ];
        let d = export_fit_plot_data(&s, &p(), 25.0).unwrap();
        let zero = d.curve.iter().find(|c| c.delta_r == 0.0).unwrap();
        assert_eq!(zero.home, 3.5);
        assert_eq!(zero.away, -2.5);
        assert!(d.curve.last().unwrap().delta_r >= 140.0);
        assert!(export_fit_plot_data(&[], &p(), 25.0).is_err());
    }

    #[test]
    fn bin_means_track_the_curve() {
        let truth = MovdaParams::new(12.0, 0.004, 0.0, 3.0, 121.0).unwrap();
        let league =
            simulate_league(10, 20_000, &truth, &SkillSpec::evenly_spaced(10, 250.0), 17).unwrap();
        let skills = SkillSpec::evenly_spaced(10, 250.0).initial;
        let idx = |t: &str| t[1..].parse::<usize>().unwrap();
        let samples: Vec<FitSample> = league
            .games
            .iter()
            .map(|g| {
                let dr = skills[idx(&g.home_team)] - skills[idx(&g.away_team)];
                FitSample::new(dr, HomeIndicator::Home, g.t_mov_home() as f64)
            })
            .collect();
        let d = export_fit_plot_data(&samples, &truth, 25.0).unwrap();
        // standardised error of each bin mean against the curve at that bin's gap
        let z: Vec<f64> = d
            .bins
            .iter()
            .filter(|b| !b.sparse)
            .map(|b| {
                let gap = samples
                    .iter()
                    .find(|s| (s.delta_r / 25.0).floor() == (b.center / 25.0).floor())
                    .unwrap()
                    .delta_r;
                let e = expected_mov(gap, HomeIndicator::Home, &truth);
                (b.mean - e) / (b.std.unwrap() / (b.n as f64).sqrt())
            })
            .collect();
        assert!(z.len() > 10);
        let mean_abs = z.iter().map(|v| v.abs()).sum::<f64>() / z.len() as f64;
        assert!(mean_abs <= 1.0, "mean |z| {mean_abs}: {z:?}");
    }

    #[test]
    fn histogram_counts_partition_the_games() {
        let truth = MovdaParams::new(12.0, 0.004, 0.0, 3.0, 121.0).unwrap();
        let league =
            simulate_league(6, 3000, &truth, &SkillSpec::evenly_spaced(6, 100.0), 2).unwrap();
        let home = export_margin_histogram(&league.games, Venue::Home, 2.0).unwrap();
        let away = export_margin_histogram(&league.games, Venue::Away, 2.0).unwrap();
        assert_eq!(home.bins.iter().map(|b| b.count).sum::<usize>(), 3000);
        assert_eq!(away.n, 3000);
        assert!(home.mean > away.mean);
        // density integrates to about one over the evaluated range
        let dx = home.density[1].0 - home.density[0].0;
        let area: f64 = home.density.iter().map(|(_, d)| d * dx).sum();
        assert!((area - 1.0).abs() < 0.02, "{area}");
    }

    #[test]
    fn noiseless_single_gap_fills_one_bin() {
        let truth = MovdaParams::new(12.0, 0.004, 0.0, 3.0, 0.0).unwrap();
        let league = simulate_league(2, 50, &truth, &SkillSpec::evenly_spaced(2, 0.0), 0).unwrap();
        let h = export_margin_histogram(&league.games, Venue::Home, 2.0).unwrap();
        assert_eq!(h.bins.len(), 1);
        assert_eq!(h.bins[0].count, 50);
        assert_eq!(h.std, 0.0);
        assert!(export_margin_histogram(&[], Venue::Home, 2.0).is_err());
        assert!(export_margin_histogram(&league.games, Venue::Neutral, 2.0).is_err());
    }
}
