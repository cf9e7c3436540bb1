//! End-to-end workflows: fit the margin curve, tune every model, and report
//! the comparison and ablation tables on held-out games.

use std::fmt;
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{MovdaError, Result};
use crate::fitting::{fit_emov, FitOptions, FitReport, FitSample};
use crate::io::{markdown_table, sig6};
use crate::ratings::{EloConfig, HomeIndicator, MovdaParams, DEFAULT_C};
use crate::replay::{
    accuracy, brier, convergence_speed, margin_mae, replay_with_bridge, split_dataset,
    ConvergenceOptions, EvalReport, GameRecord, ModelConfig, ModelKind, PredictionLogEntry,
    ReplayOutput, ScaleBridge, SplitSpec, Splits,
};
use crate::tuning::{grid_search, GridSpec, TuneResult};

/// Which games a metric is computed over. Ratings are always warmed on every
/// earlier game.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Span {
    /// The final split only.
    #[default]
    Holdout,
    /// The tuning and final splits together.
    TuneHoldout,
}

impl Span {
    pub fn as_str(self) -> &'static str {
        match self {
            Span::Holdout => "holdout",
            Span::TuneHoldout => "tune-holdout",
        }
    }

    /// `(warm-up games, evaluated games)`.
    pub fn select<'a>(self, s: &Splits<'a>) -> (&'a [GameRecord], &'a [GameRecord]) {
        match self {
            Span::Holdout => (s.train_and_tune(), s.holdout),
            Span::TuneHoldout => (s.train, s.tune_and_holdout()),
        }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Span {
    type Err = MovdaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "holdout" => Ok(Span::Holdout),
            "tune-holdout" => Ok(Span::TuneHoldout),
            other => Err(MovdaError::Config(format!(
                "unknown span `{other}` (holdout, tune-holdout)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub split: SplitSpec,
    /// Games scored for accuracy, Brier and margin MAE.
    pub report_span: Span,
    /// Games over which every team restarts from the default rating for the
    /// convergence metric; the report span when unset.
    pub convergence_span: Option<Span>,
    pub convergence: ConvergenceOptions,
    pub bridge: ScaleBridge,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            split: SplitSpec::default(),
            report_span: Span::Holdout,
            convergence_span: None,
            convergence: ConvergenceOptions::default(),
            bridge: ScaleBridge::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineOptions {
    pub eval: EvalOptions,
    pub grid: GridSpec,
    pub fit: FitOptions,
    /// Fit on train-split games but with ratings from a replay of the whole
    /// dataset, instead of a replay of the train split alone.
    pub fit_on_full_replay: bool,
    /// Elo scale shared by the Elo-family models.
    pub c: f64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            eval: EvalOptions::default(),
            grid: GridSpec::default(),
            fit: FitOptions::default(),
            fit_on_full_replay: false,
            c: DEFAULT_C,
        }
    }
}

/// Both sides of every logged game, so home advantage is identifiable
/// separately from the constant offset.
pub fn fit_samples(log: &[PredictionLogEntry]) -> Result<Vec<FitSample>> {
    let mut out = Vec::with_capacity(2 * log.len());
    for e in log {
        let venue = HomeIndicator::try_from(i32::from(e.home_indicator))?;
        let s = FitSample::new(
            e.pre_rating_home - e.pre_rating_away,
            venue,
            e.actual_margin_home,
        );
        out.push(s);
        out.push(s.mirrored());
    }
    Ok(out)
}

/// Mirrored fit samples for the train-split games, with pre-game ratings
/// from a standard ELO (K = 20) replay.
pub fn train_fit_samples(games: &[GameRecord], opts: &PipelineOptions) -> Result<Vec<FitSample>> {
    let splits = split_dataset(games, &opts.eval.split)?;
    let elo = ModelConfig::Elo(EloConfig {
        c: opts.c,
        ..EloConfig::default()
    });
    let replayed = if opts.fit_on_full_replay {
        games
    } else {
        splits.train
    };
    let out = replay_with_bridge(&elo, None, &[], replayed, opts.eval.bridge)?;
    fit_samples(&out.log[..splits.train.len()])
}

/// Fit the expected-margin curve to the train split.
pub fn fit_params(games: &[GameRecord], opts: &PipelineOptions) -> Result<FitReport> {
    fit_emov(&train_fit_samples(games, opts)?, &opts.fit)
}

/// One model's metrics, with the replay behind them.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub report: EvalReport,
    pub replay: ReplayOutput,
}

/// Score `config` on the report span and measure convergence from a reset on
/// the convergence span.
pub fn evaluate_config(
    config: &ModelConfig,
    params: &MovdaParams,
    games: &[GameRecord],
    opts: &EvalOptions,
) -> Result<Evaluation> {
    let splits = split_dataset(games, &opts.split)?;
    let (warm, scored) = opts.report_span.select(&splits);
    let replay = replay_with_bridge(config, Some(params), warm, scored, opts.bridge)?;
    let log = &replay.log;

    let conv_span = opts.convergence_span.unwrap_or(opts.report_span);
    let (_, conv_games) = conv_span.select(&splits);
    let fresh = replay_with_bridge(config, Some(params), &[], conv_games, opts.bridge)?;
    let convergence_games = match convergence_speed(&fresh.rating_series(), &opts.convergence) {
        Ok(v) => Some(v),
        Err(MovdaError::UndefinedMetric(why)) => {
            warn!(
                "{}: convergence undefined on the {conv_span} span: {why}",
                config.kind()
            );
            None
        }
        Err(e) => return Err(e),
    };

    let report = EvalReport {
        accuracy_pct: accuracy(log)?,
        brier: brier(log)?,
        margin_mae: margin_mae(log, Some(params))?,
        convergence_games,
        n_games: log.len(),
    };
    Ok(Evaluation { report, replay })
}

/// Grid-search `base.kind()` on the tuning split, warmed on the train split.
pub fn tune_model(
    base: &ModelConfig,
    games: &[GameRecord],
    params: &MovdaParams,
    opts: &PipelineOptions,
) -> Result<TuneResult> {
    let splits = split_dataset(games, &opts.eval.split)?;
    grid_search(base, &opts.grid, splits.train, splits.tune, Some(params))
}

/// A model's default configuration with the shared Elo scale applied.
pub fn base_config(kind: ModelKind, c: f64) -> ModelConfig {
    match kind.default_config() {
        ModelConfig::Elo(cfg) => ModelConfig::Elo(EloConfig { c, ..cfg }),
        ModelConfig::Movda(cfg) => ModelConfig::Movda(EloConfig { c, ..cfg }),
        ModelConfig::LinearMov(cfg) => {
            ModelConfig::LinearMov(crate::baselines::LinearMovConfig { c, ..cfg })
        }
        other => other,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model: ModelKind,
    pub name: String,
    pub config: ModelConfig,
    /// Brier score of `config` on the tuning split.
    pub tune_brier: f64,
    pub report: EvalReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub params: MovdaParams,
    pub report_span: Span,
    pub convergence_span: Span,
    pub rows: Vec<ComparisonRow>,
}

fn row(
    kind: ModelKind,
    name: &str,
    config: ModelConfig,
    tune_brier: f64,
    eval: Evaluation,
) -> ComparisonRow {
    ComparisonRow {
        model: kind,
        name: name.to_string(),
        config,
        tune_brier,
        report: eval.report,
    }
}

/// Tune and score all five models against one fitted margin curve.
pub fn evaluate_all(
    games: &[GameRecord],
    params: &MovdaParams,
    opts: &PipelineOptions,
) -> Result<Comparison> {
    let mut rows = Vec::with_capacity(ModelKind::ALL.len());
    for kind in ModelKind::ALL {
        let tuned = tune_model(&base_config(kind, opts.c), games, params, opts)?;
        let eval = evaluate_config(&tuned.best_config, params, games, &opts.eval)?;
        rows.push(row(
            kind,
            kind.display_name(),
            tuned.best_config,
            tuned.best_brier,
            eval,
        ));
    }
    Ok(Comparison {
        params: *params,
        report_span: opts.eval.report_span,
        convergence_span: opts.eval.convergence_span.unwrap_or(opts.eval.report_span),
        rows,
    })
}

/// Tuned MOVDA against the same configuration with the margin term removed.
pub fn ablate(
    games: &[GameRecord],
    params: &MovdaParams,
    opts: &PipelineOptions,
) -> Result<Comparison> {
    let tuned = tune_model(&base_config(ModelKind::Movda, opts.c), games, params, opts)?;
    let full = tuned.best_config;
    let ModelConfig::Movda(cfg) = full else {
        unreachable!("movda tuning returns a movda config")
    };
    let without = ModelConfig::Movda(EloConfig { lambda: 0.0, ..cfg });
    let splits = split_dataset(games, &opts.eval.split)?;
    let without_tune = {
        let out = replay_with_bridge(
            &without,
            Some(params),
            splits.train,
            splits.tune,
            opts.eval.bridge,
        )?;
        brier(&out.log)?
    };
    let rows = vec![
        row(
            ModelKind::Movda,
            "Standard ELO (No Differential)",
            without,
            without_tune,
            evaluate_config(&without, params, games, &opts.eval)?,
        ),
        row(
            ModelKind::Movda,
            "MOVDA (Full Model)",
            full,
            tuned.best_brier,
            evaluate_config(&full, params, games, &opts.eval)?,
        ),
    ];
    Ok(Comparison {
        params: *params,
        report_span: opts.eval.report_span,
        convergence_span: opts.eval.convergence_span.unwrap_or(opts.eval.report_span),
        rows,
    })
}

/// The comparison as a markdown table, six significant digits.
pub fn comparison_markdown(c: &Comparison) -> String {
    let rows: Vec<Vec<String>> = c
        .rows
        .iter()
        .map(|r| {
            vec![
                r.name.clone(),
                sig6(r.report.accuracy_pct),
                sig6(r.report.brier),
                sig6(r.report.margin_mae),
                r.report
                    .convergence_games
                    .map_or_else(|| "n/a".to_string(), sig6),
                r.report.n_games.to_string(),
            ]
        })
        .collect();
    markdown_table(
        &[
            "Model",
            "Acc (%)",
            "Brier",
            "Margin MAE",
            "Conv (games)",
            "Games",
        ],
        &rows,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::replay::{simulate_league, SkillSpec};

    fn league() -> Vec<GameRecord> {
        let p = MovdaParams::new(12.0, 0.004, 0.0, 3.0, 121.0).unwrap();
        simulate_league(6, 3000, &p, &SkillSpec::evenly_spaced(6, 150.0), 8)
            .unwrap()
            .games
    }

    fn quick() -> PipelineOptions {
        PipelineOptions {
            grid: GridSpec {
                k: vec![10.0, 20.0],
                lambda: vec![0.0, 0.5],
                c_mov: vec![0.1],
                k_max: vec![2.0],
                glicko_tau: vec![0.5],
                trueskill_beta: vec![2.0],
                trueskill_tau: vec![0.2],
            },
            eval: EvalOptions {
                convergence_span: Some(Span::TuneHoldout),
                ..EvalOptions::default()
            },
            ..PipelineOptions::default()
        }
    }

    #[test]
    fn fitted_curve_is_sensible() {
        let r = fit_params(&league(), &quick()).unwrap();
        assert!(r.converged);
        assert_eq!(r.n, 2 * 2100);
        // mirrored samples make the offset vanish and leave home advantage to delta
        assert!(r.params.gamma.abs() < 1e-9);
        assert!((r.params.delta - 3.0).abs() < 1.0, "{:?}", r.params);
    }

    #[test]
    fn full_replay_variant_uses_same_games() {
        let opts = PipelineOptions {
            fit_on_full_replay: true,
            ..quick()
        };
        let r = fit_params(&league(), &opts).unwrap();
        assert_eq!(r.n, 2 * 2100);
    }

    #[test]
    fn comparison_rows_match_single_model_evaluations() {
        let games = league();
        let opts = quick();
        let params = fit_params(&games, &opts).unwrap().params;
        let cmp = evaluate_all(&games, &params, &opts).unwrap();
        assert_eq!(cmp.rows.len(), 5);
        for r in &cmp.rows {
            let single = evaluate_config(&r.config, &params, &games, &opts.eval).unwrap();
            assert_eq!(single.report, r.report, "{}", r.name);
            assert_eq!(r.report.n_games, 300);
            assert!(r.report.convergence_games.is_some());
        }
        let md = comparison_markdown(&cmp);
        assert_eq!(md.lines().count(), 7);
        assert!(md.contains("| MOVDA |"));
    }

    #[test]
    fn ablation_removes_only_lambda() {
        let games = league();
        let opts = quick();
        let params = fit_params(&games, &opts).unwrap().params;
        let a = ablate(&games, &params, &opts).unwrap();
        let (ModelConfig::Movda(without), ModelConfig::Movda(full)) =
            (a.rows[0].config, a.rows[1].config)
        else {
            panic!("ablation rows must be movda configs");
        };
        assert_eq!(without.lambda, 0.0);
        assert_eq!((without.k, without.c), (full.k, full.c));
        // with the margin term removed the replay is standard ELO
        let elo = evaluate_config(&ModelConfig::Elo(without), &params, &games, &opts.eval).unwrap();
        assert_eq!(elo.report, a.rows[0].report);
    }

    #[test]
    fn short_spans_leave_convergence_undefined() {
        let games = league();
        let opts = PipelineOptions::default();
        let params = fit_params(&games, &opts).unwrap().params;
        // 300 holdout games give each of six teams 100 games, under the 200-game window
        let e = evaluate_config(
            &ModelKind::Elo.default_config(),
            &params,
            &games,
            &opts.eval,
        )
        .unwrap();
        assert_eq!(e.report.convergence_games, None);
    }

    #[test]
    fn span_selection() {
        let games = league();
        let s = split_dataset(&games, &SplitSpec::default()).unwrap();
        let (w, g) = Span::Holdout.select(&s);
        assert_eq!((w.len(), g.len()), (2700, 300));
        let (w, g) = Span::TuneHoldout.select(&s);
        assert_eq!((w.len(), g.len()), (2100, 900));
        assert_eq!("tune-holdout".parse::<Span>().unwrap(), Span::TuneHoldout);
        assert!("all".parse::<Span>().is_err());
    }
}
