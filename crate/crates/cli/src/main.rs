//! `movda`: fit, tune, replay and compare rating models on a games CSV.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;

use movda_core::baselines::LinearMovConfig;
use movda_core::io::{
    games_to_csv, history_to_csv, load_games, log_to_csv, read_json, read_params, to_json,
    write_atomic, write_params, LoadOptions, ParamsFile, RunConfig,
};
use movda_core::pipeline::{
    ablate, base_config, comparison_markdown, evaluate_all, evaluate_config, fit_params,
    train_fit_samples, tune_model, Comparison, EvalOptions, PipelineOptions, Span,
};
use movda_core::plot::{export_fit_plot_data, export_margin_histogram, Venue};
use movda_core::replay::{
    simulate_league, split_dataset, ConvergenceOptions, GameRecord, ModelConfig, ModelKind,
    SkillSpec, SplitSpec, StepChange,
};
use movda_core::tuning::{GridSpec, TuneResult};
use movda_core::{EloConfig, MovdaParams};

#[derive(Parser)]
#[command(
    name = "movda",
    version,
    about = "Margin-aware rating models: fit, tune, replay and compare"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the expected-margin curve on the train split and write a params file.
    Fit(FitArgs),
    /// Grid-search one model on the tuning split and write the result.
    Tune(TuneArgs),
    /// Replay one model and write its report, prediction log and rating history.
    Replay(ReplayArgs),
    /// Tune and score all five models; write the comparison table.
    Evaluate(CompareArgs),
    /// Tuned MOVDA against the same configuration without the margin term.
    Ablate(CompareArgs),
    /// Generate a synthetic league as a games CSV.
    Simulate(SimulateArgs),
    /// Export the data behind the fitted-curve and margin-distribution figures.
    PlotData(PlotArgs),
}

/// Settings shared by the data-driven subcommands; flags override `--config`.
#[derive(Args, Clone, Default)]
struct Common {
    /// Run-config file (JSON object or `key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Games CSV.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Params file written by `fit`; fitted on the fly when absent.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Train, tune and holdout fractions.
    #[arg(long)]
    split: Option<SplitSpec>,
    /// Elo scale.
    #[arg(long)]
    c: Option<f64>,
    /// Seed for every stochastic step.
    #[arg(long)]
    seed: Option<u64>,
    /// Convergence band half-width in rating points.
    #[arg(long)]
    band: Option<f64>,
    /// Final games averaged for the stable rating.
    #[arg(long)]
    stable_window: Option<usize>,
    /// Accept drawn games in the input.
    #[arg(long)]
    allow_ties: bool,
    /// Fit on train games using ratings from a replay of the whole dataset.
    #[arg(long)]
    fit_on_full_replay: bool,
}

#[derive(Args)]
struct EvalFlags {
    /// Games scored for accuracy, Brier and margin MAE.
    #[arg(long, default_value = "holdout")]
    report_span: Span,
    /// Games over which teams restart for the convergence metric [default: report span].
    #[arg(long)]
    convergence_span: Option<Span>,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    common: Common,
    /// Params file to write.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TuneArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    model: Option<ModelKind>,
    /// Grid JSON; missing keys take the built-in grids.
    #[arg(long)]
    grid: Option<PathBuf>,
    /// Tuning result to write.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    eval: EvalFlags,
    #[arg(long)]
    model: Option<ModelKind>,
    /// Start from the best configuration of a `tune` result.
    #[arg(long)]
    tuned: Option<PathBuf>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Directory for report.json, log.csv and history.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    eval: EvalFlags,
    #[arg(long)]
    grid: Option<PathBuf>,
    /// Directory for the JSON and markdown tables.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 10)]
    teams: usize,
    #[arg(long, default_value_t = 15_000)]
    games: usize,
    /// Latent skills are evenly spaced over 1500 ± spread.
    #[arg(long, default_value_t = 150.0)]
    spread: f64,
    /// True margin curve; the flags below override individual values.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Standard deviation of the margin noise.
    #[arg(long)]
    sigma: Option<f64>,
    /// Per-game random-walk standard deviation of every skill.
    #[arg(long, default_value_t = 0.0)]
    drift_sd: f64,
    /// Team index receiving a one-off skill jump.
    #[arg(long, requires_all = ["step_at", "step_delta"])]
    step_team: Option<usize>,
    #[arg(long)]
    step_at: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    step_delta: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Games CSV to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PlotArgs {
    #[command(flatten)]
    common: Common,
    /// Rating-gap bin width for the fitted-curve data.
    #[arg(long, default_value_t = 25.0)]
    bin_width: f64,
    /// Margin bin width for the histograms.
    #[arg(long, default_value_t = 2.0)]
    margin_bin_width: f64,
    /// Directory for fit_curve.json and the two histogram files.
    #[arg(long)]
    out: PathBuf,
}

/// Command-line flags layered over the optional run-config file.
struct Resolved {
    cfg: RunConfig,
    common: Common,
}

impl Resolved {
    fn new(common: &Common) -> Result<Self> {
        let mut cfg = match &common.config {
            Some(p) => {
                RunConfig::load(p).with_context(|| format!("reading run config {}", p.display()))?
            }
            None => RunConfig::default(),
        };
        cfg.data = common.data.clone().or(cfg.data);
        cfg.params = common.params.clone().or(cfg.params);
        cfg.split = common.split.or(cfg.split);
        cfg.c = common.c.or(cfg.c);
        cfg.seed = common.seed.or(cfg.seed);
        cfg.band = common.band.or(cfg.band);
        cfg.stable_window = common.stable_window.or(cfg.stable_window);
        cfg.validate()?;
        Ok(Resolved {
            cfg,
            common: common.clone(),
        })
    }

    fn games(&self) -> Result<Vec<GameRecord>> {
        let path = self
            .cfg
            .data
            .as_ref()
            .context("no games file: pass --data or set `data` in the run config")?;
        let games = load_games(
            path,
            &LoadOptions {
                allow_ties: self.common.allow_ties,
            },
        )?;
        info!("loaded {} games from {}", games.len(), path.display());
        Ok(games)
    }

    fn pipeline(&self, eval: Option<&EvalFlags>, grid: Option<&Path>) -> Result<PipelineOptions> {
        let mut opts = PipelineOptions {
            fit_on_full_replay: self.common.fit_on_full_replay,
            ..PipelineOptions::default()
        };
        if let Some(c) = self.cfg.c {
            opts.c = c;
        }
        opts.eval = EvalOptions {
            split: self.cfg.split.unwrap_or_default(),
            convergence: ConvergenceOptions {
                band: self.cfg.band.unwrap_or(20.0),
                stable_window: self.cfg.stable_window.unwrap_or(200),
            },
            ..EvalOptions::default()
        };
        if let Some(e) = eval {
            opts.eval.report_span = e.report_span;
            opts.eval.convergence_span = e.convergence_span;
        }
        if let Some(path) = grid {
            opts.grid = read_json::<GridSpec>(path)?;
            opts.grid.validate()?;
        }
        Ok(opts)
    }

    /// The params file if given, otherwise a fresh fit on the train split.
    fn params(&self, games: &[GameRecord], opts: &PipelineOptions) -> Result<MovdaParams> {
        match &self.cfg.params {
            Some(p) => Ok(read_params(p)?.params()?),
            None => {
                info!("no params file given; fitting the margin curve on the train split");
                Ok(fit_params(games, opts)?.params)
            }
        }
    }
}

fn write_out(path: &Path, bytes: &[u8]) -> Result<()> {
    write_atomic(path, bytes)?;
    info!("wrote {}", path.display());
    Ok(())
}

fn fit(args: FitArgs) -> Result<()> {
    let r = Resolved::new(&args.common)?;
    let games = r.games()?;
    let report = fit_params(&games, &r.pipeline(None, None)?)?;
    let file = ParamsFile::from(&report);
    match args.out.or_else(|| r.cfg.out.clone()) {
        Some(out) => {
            write_params(&out, &file)?;
            info!("wrote {}", out.display());
        }
        None => print!("{}", String::from_utf8(to_json(&file)?)?),
    }
    Ok(())
}

fn tune(args: TuneArgs) -> Result<()> {
    let r = Resolved::new(&args.common)?;
    let games = r.games()?;
    let opts = r.pipeline(None, args.grid.as_deref())?;
    let params = r.params(&games, &opts)?;
    let kind = args
        .model
        .or(r.cfg.model)
        .context("pass --model to choose the model to tune")?;
    let result = tune_model(&base_config(kind, opts.c), &games, &params, &opts)?;
    let bytes = to_json(&result)?;
    match args.out.or_else(|| r.cfg.out.clone()) {
        Some(out) => write_out(&out, &bytes)?,
        None => print!("{}", String::from_utf8(bytes)?),
    }
    Ok(())
}

/// Apply `--k` / `--lambda` to a model configuration.
fn with_overrides(config: ModelConfig, k: Option<f64>, lambda: Option<f64>) -> Result<ModelConfig> {
    let out = match config {
        ModelConfig::Elo(c) => {
            if lambda.is_some_and(|l| l != 0.0) {
                bail!("--lambda applies to movda only");
            }
            ModelConfig::Elo(EloConfig {
                k: k.unwrap_or(c.k),
                ..c
            })
        }
        ModelConfig::Movda(c) => ModelConfig::Movda(EloConfig {
            k: k.unwrap_or(c.k),
            lambda: lambda.unwrap_or(c.lambda),
            ..c
        }),
        ModelConfig::LinearMov(c) => {
            if lambda.is_some() {
                bail!("--lambda applies to movda only");
            }
            ModelConfig::LinearMov(LinearMovConfig {
                k: k.unwrap_or(c.k),
                ..c
            })
        }
        other => {
            if k.is_some() || lambda.is_some() {
                bail!("--k and --lambda apply to the Elo-family models only");
            }
            other
        }
    };
    out.validate()?;
    Ok(out)
}

fn replay(args: ReplayArgs) -> Result<()> {
    let r = Resolved::new(&args.common)?;
    let games = r.games()?;
    let opts = r.pipeline(Some(&args.eval), None)?;
    let params = r.params(&games, &opts)?;
    let base = match &args.tuned {
        Some(path) => {
            let tuned: TuneResult = read_json(path)?;
            if let Some(kind) = args.model.or(r.cfg.model) {
                if kind != tuned.best_config.kind() {
                    bail!(
                        "--model {kind} does not match the {} tuning result",
                        tuned.best_config.kind()
                    );
                }
            }
            tuned.best_config
        }
        None => {
            let kind = args
                .model
                .or(r.cfg.model)
                .context("pass --model or --tuned")?;
            base_config(kind, opts.c)
        }
    };
    let config = with_overrides(base, args.k.or(r.cfg.k), args.lambda.or(r.cfg.lambda))?;
    let eval = evaluate_config(&config, &params, &games, &opts.eval)?;
    let report = to_json(&eval.report)?;
    if let Some(dir) = args.out.or_else(|| r.cfg.out.clone()) {
        write_out(&dir.join("report.json"), &report)?;
        write_out(&dir.join("log.csv"), &log_to_csv(&eval.replay.log)?)?;
        write_out(
            &dir.join("history.csv"),
            &history_to_csv(&eval.replay.history)?,
        )?;
    }
    print!("{}", String::from_utf8(report)?);
    Ok(())
}

fn compare(
    args: CompareArgs,
    name: &str,
    run: fn(&[GameRecord], &MovdaParams, &PipelineOptions) -> movda_core::Result<Comparison>,
) -> Result<()> {
    let r = Resolved::new(&args.common)?;
    let games = r.games()?;
    let opts = r.pipeline(Some(&args.eval), args.grid.as_deref())?;
    let params = r.params(&games, &opts)?;
    let table = run(&games, &params, &opts)?;
    let markdown = comparison_markdown(&table);
    if let Some(dir) = args.out.or_else(|| r.cfg.out.clone()) {
        write_out(&dir.join(format!("{name}.json")), &to_json(&table)?)?;
        write_out(&dir.join(format!("{name}.md")), markdown.as_bytes())?;
    }
    print!("{markdown}");
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let base = match &args.params {
        Some(p) => read_params(p)?.params()?,
        None => MovdaParams::new(12.0, 0.004, 0.0, 3.0, 121.0)?,
    };
    let sigma2 = args.sigma.map_or(base.sigma2, |s| s * s);
    let truth = MovdaParams::new(
        args.alpha.unwrap_or(base.alpha),
        args.beta.unwrap_or(base.beta),
        args.gamma.unwrap_or(base.gamma),
        args.delta.unwrap_or(base.delta),
        sigma2,
    )?;
    let mut skills = SkillSpec::evenly_spaced(args.teams, args.spread);
    skills.drift_sd = args.drift_sd;
    if let (Some(team), Some(at_game), Some(delta)) =
        (args.step_team, args.step_at, args.step_delta)
    {
        skills.step = Some(StepChange {
            team,
            at_game,
            delta,
        });
    }
    let league = simulate_league(args.teams, args.games, &truth, &skills, args.seed)?;
    write_out(&args.out, &games_to_csv(&league.games)?)?;
    Ok(())
}

fn plot_data(args: PlotArgs) -> Result<()> {
    let r = Resolved::new(&args.common)?;
    let games = r.games()?;
    let opts = r.pipeline(None, None)?;
    let file = match &r.cfg.params {
        Some(p) => read_params(p)?,
        None => ParamsFile::from(&fit_params(&games, &opts)?),
    };
    let params = file.params()?;
    let splits = split_dataset(&games, &opts.eval.split)?;
    let samples = train_fit_samples(&games, &opts)?;

    let curve = export_fit_plot_data(&samples, &params, args.bin_width)?;
    write_out(&args.out.join("params.json"), &to_json(&file)?)?;
    write_out(&args.out.join("fit_curve.json"), &to_json(&curve)?)?;
    for venue in [Venue::Home, Venue::Away] {
        let hist = export_margin_histogram(splits.train, venue, args.margin_bin_width)?;
        let name = format!(
            "margins_{}.json",
            if venue == Venue::Home { "home" } else { "away" }
        );
        write_out(&args.out.join(name), &to_json(&hist)?)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit(a) => fit(a),
        Command::Tune(a) => tune(a),
        Command::Replay(a) => replay(a),
        Command::Evaluate(a) => compare(a, "comparison", evaluate_all),
        Command::Ablate(a) => compare(a, "ablation", ablate),
        Command::Simulate(a) => simulate(a),
        Command::PlotData(a) => plot_data(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // clap prints usage and exits with status 2 on unknown flags or subcommands
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
