//! Command-line front end: decisions, bound verification, experiment sweeps.
//!
//! Exit codes: 0 success, 1 verification found violations, 2 usage or
//! validation error.

use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mssr::analysis::{grid_search_lambda, worst_case_ratio, ComplianceReport};
use mssr::dataio;
use mssr::experiments::{run_real, run_synthetic, ErrorModel, EvalMode, RealConfig};
use mssr::policies::BuyDay;
use mssr::{
    bdoa, bdoa_cr, decision_cost, det_multi, det_single, expected_cost, rand_multi, rand_single,
    simple_single, AlgorithmId, Decision, Error, Instance, PredictionSet, RandomizedPolicy,
};

#[derive(Parser)]
#[command(name = "mssr", version, about = "Multi-shop ski rental with ML predictions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute one algorithm's decision (or buy-day distribution).
    Decide(DecideArgs),
    /// Exhaustively check realized ratios against the theoretical bounds.
    Verify(VerifyArgs),
    /// Run a synthetic Monte Carlo sweep from a JSON config.
    Sweep(SweepArgs),
    /// Run the real-data study (x drawn from a viewership distribution).
    Real(RealArgs),
    /// Find the grid lambda minimizing the worst-case bound at a given error.
    LambdaSearch(LambdaSearchArgs),
}

#[derive(Args)]
struct DecideArgs {
    /// Market CSV with header rent,buy.
    #[arg(long)]
    market: PathBuf,
    /// bdoa | simple | det | rand | det-multi | det-multi-no-plus-one | rand-multi
    #[arg(long)]
    algo: String,
    /// Trust hyperparameter in (0,1); required except for bdoa/simple.
    #[arg(long)]
    lambda: Option<f64>,
    /// Comma-separated predictions of x; required except for bdoa.
    #[arg(long, value_delimiter = ',')]
    predictions: Vec<f64>,
    /// Actual number of skiing days; adds cost and ratio to the output.
    #[arg(long)]
    x: Option<u32>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    market: PathBuf,
    #[arg(long)]
    algo: String,
    /// Comma-separated lambdas to verify; one report each.
    #[arg(long, value_delimiter = ',')]
    lambda_grid: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    x_max: u32,
    #[arg(long, default_value_t = 1000)]
    y_max: u32,
    /// Number of predictions for the multi-prediction algorithms.
    #[arg(long)]
    m: Option<usize>,
    /// Write the compliance report(s) as JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON config (see data/configs/fig*.json).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's trial count.
    #[arg(long)]
    trials: Option<u32>,
    /// Write the results CSV here (default stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RealArgs {
    /// JSON config; or use the direct flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    market: Option<PathBuf>,
    /// Viewership CSV with header episode,viewers.
    #[arg(long)]
    viewership: Option<PathBuf>,
    /// perfect | empirical | reverse | flip
    #[arg(long)]
    model: Option<String>,
    #[arg(long, value_delimiter = ',')]
    lambda: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    algo: Vec<String>,
    #[arg(long, default_value_t = 10000)]
    trials: u32,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LambdaSearchArgs {
    #[arg(long)]
    market: PathBuf,
    /// det | rand | det-multi | rand-multi
    #[arg(long)]
    algo: String,
    /// Assumed prediction error (normalized units).
    #[arg(long)]
    zeta: f64,
    #[arg(long)]
    m: Option<usize>,
    /// Grid as start:step:end (default 0.01:0.01:0.99).
    #[arg(long, default_value = "0.01:0.01:0.99")]
    grid: String,
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    env_logger::init();
    if let Ok(threads) = std::env::var("MSSR_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> mssr::Result<ExitCode> {
    match cli.command {
        Command::Decide(args) => decide(args).map(|()| ExitCode::SUCCESS),
        Command::Verify(args) => verify(args),
        Command::Sweep(args) => sweep(args).map(|()| ExitCode::SUCCESS),
        Command::Real(args) => real(args).map(|()| ExitCode::SUCCESS),
        Command::LambdaSearch(args) => lambda_search(args).map(|()| ExitCode::SUCCESS),
    }
}

fn parse_algo(s: &str) -> mssr::Result<AlgorithmId> {
    AlgorithmId::parse(s)
        .ok_or_else(|| Error::ConfigInvalid(format!("unknown algorithm '{s}'")))
}

enum Outcome {
    Deterministic(Decision),
    Randomized(RandomizedPolicy),
}

fn decide(args: DecideArgs) -> mssr::Result<()> {
    let market = dataio::load_market(&args.market)?;
    let algo = parse_algo(&args.algo)?;
    let need_lambda = algo.needs_lambda();
    let lambda = match (need_lambda, args.lambda) {
        (true, Some(l)) => l,
        (true, None) => {
            return Err(Error::ConfigInvalid(format!("--lambda is required for {algo}")))
        }
        (false, _) => 0.0,
    };
    if algo.needs_predictions() && args.predictions.is_empty() {
        return Err(Error::ConfigInvalid(format!("--predictions is required for {algo}")));
    }
    let y = args.predictions.first().copied().unwrap_or(0.0);
    let outcome = match algo {
        AlgorithmId::Bdoa => Outcome::Deterministic(bdoa(&market)),
        AlgorithmId::Simple => Outcome::Deterministic(simple_single(&market, y)),
        AlgorithmId::Det => Outcome::Deterministic(det_single(&market, y, lambda)?),
        AlgorithmId::Rand => Outcome::Randomized(rand_single(&market, y, lambda)?),
        AlgorithmId::DetMulti | AlgorithmId::DetMultiNoPlusOne => {
            let preds = PredictionSet::new(args.predictions.clone())?;
            let plus_one = algo == AlgorithmId::DetMulti;
            Outcome::Deterministic(det_multi(&market, &preds, lambda, plus_one)?)
        }
        AlgorithmId::RandMulti => {
            let preds = PredictionSet::new(args.predictions.clone())?;
            Outcome::Randomized(rand_multi(&market, &preds, lambda)?)
        }
    };

    let mut out = serde_json::Map::new();
    out.insert("algorithm".into(), algo.as_str().into());
    let mut lines = Vec::new();
    match &outcome {
        Outcome::Deterministic(d) => {
            out.insert("shop".into(), d.shop.into());
            match d.buy_day {
                BuyDay::Day(day) => {
                    out.insert("buy_day".into(), day.into());
                    lines.push(format!("shop {}, buy day {}", d.shop, day));
                }
                BuyDay::Never => {
                    out.insert("buy_day".into(), serde_json::Value::Null);
                    lines.push(format!("shop {}, never buy", d.shop));
                }
            }
            if algo == AlgorithmId::Bdoa {
                let cr = bdoa_cr(&market);
                out.insert("worst_case_cr".into(), cr.into());
                lines.push(format!("worst-case CR {cr:.4}"));
            }
            if let Some(x) = args.x {
                let x = Instance::new(x)?;
                let cost = decision_cost(&market, d, x);
                let (opt, _) = market.offline_optimal(x);
                out.insert("cost".into(), market.denormalize(cost).into());
                out.insert("cost_normalized".into(), cost.into());
                out.insert("ratio".into(), (cost / opt).into());
                lines.push(format!(
                    "cost {} ({} normalized), ratio {:.4}",
                    market.denormalize(cost),
                    cost,
                    cost / opt
                ));
            }
        }
        Outcome::Randomized(p) => {
            out.insert("shop".into(), p.shop.into());
            out.insert("support_end".into(), p.support_end().into());
            out.insert(
                "mass".into(),
                serde_json::Value::Array(p.mass.iter().map(|&v| v.into()).collect()),
            );
            lines.push(format!(
                "shop {}, random buy day on days 1..{}",
                p.shop,
                p.support_end()
            ));
            if let Some(x) = args.x {
                let x = Instance::new(x)?;
                let cost = expected_cost(p, &market, x);
                let (opt, _) = market.offline_optimal(x);
                out.insert("expected_cost".into(), market.denormalize(cost).into());
                out.insert("expected_cost_normalized".into(), cost.into());
                out.insert("expected_ratio".into(), (cost / opt).into());
                lines.push(format!(
                    "expected cost {} ({} normalized), expected ratio {:.4}",
                    market.denormalize(cost),
                    cost,
                    cost / opt
                ));
            }
        }
    }
    if args.json {
        println!("{}", serde_json::to_string_pretty(&serde_json::Value::Object(out))?);
    } else {
        println!("{}", lines.join(", "));
    }
    Ok(())
}

fn verify(args: VerifyArgs) -> mssr::Result<ExitCode> {
    let market = dataio::load_market(&args.market)?;
    let algo = parse_algo(&args.algo)?;
    let market_id = args.market.display().to_string();
    let lambdas: Vec<Option<f64>> = if algo.needs_lambda() {
        if args.lambda_grid.is_empty() {
            return Err(Error::ConfigInvalid(format!("--lambda-grid is required for {algo}")));
        }
        args.lambda_grid.iter().map(|&l| Some(l)).collect()
    } else {
        vec![None]
    };
    let mut reports: Vec<ComplianceReport> = Vec::new();
    for lambda in lambdas {
        let report = worst_case_ratio(
            algo,
            &market,
            &market_id,
            lambda,
            args.x_max,
            args.y_max,
            args.m,
        )?;
        println!(
            "{} lambda={} max_ratio={:.6} argmax_x={} margin={:.6} violations={}",
            algo,
            lambda.map_or("-".to_string(), |l| l.to_string()),
            report.max_observed_ratio,
            report.argmax_x,
            report.max_bound_margin,
            report.violations.len()
        );
        reports.push(report);
    }
    let passed = reports.iter().all(|r| r.passed());
    if let Some(path) = args.out {
        let file = File::create(path)?;
        if reports.len() == 1 {
            dataio::write_compliance(&reports[0], file)?;
        } else {
            let mut w = std::io::BufWriter::new(file);
            serde_json::to_writer_pretty(&mut w, &reports)?;
            w.write_all(b"\n")?;
        }
    }
    Ok(if passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn write_rows(rows: &[mssr::ResultRow], out: Option<PathBuf>) -> mssr::Result<()> {
    match out {
        Some(path) => dataio::write_results(rows, File::create(path)?),
        None => dataio::write_results(rows, std::io::stdout().lock()),
    }
}

fn sweep(args: SweepArgs) -> mssr::Result<()> {
    let mut config = dataio::load_config(&args.config)?;
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if let Some(trials) = args.trials {
        config.trials = trials;
    }
    let market = dataio::load_market(std::path::Path::new(&config.market))?;
    let rows = run_synthetic(&market, &config)?;
    write_rows(&rows, args.out)
}

fn parse_model(name: &str, support_end: u32, bn: f64) -> mssr::Result<ErrorModel> {
    match name {
        "perfect" => Ok(ErrorModel::Gaussian { delta: 0.0, sigma: 0.0 }),
        "reverse" => Ok(ErrorModel::Reverse { total: support_end }),
        "flip" => Ok(ErrorModel::Flip { threshold: bn, low: 1.0, high: support_end as f64 }),
        other => Err(Error::ConfigInvalid(format!(
            "unknown model '{other}' (expected perfect | empirical | reverse | flip)"
        ))),
    }
}

fn real(args: RealArgs) -> mssr::Result<()> {
    let config: RealConfig = if let Some(path) = &args.config {
        let mut config = dataio::load_real_config(path)?;
        config.master_seed = args.seed;
        config.trials = args.trials;
        config
    } else {
        let market = args
            .market
            .as_ref()
            .ok_or_else(|| Error::ConfigInvalid("--market required without --config".into()))?;
        let viewership = args
            .viewership
            .as_ref()
            .ok_or_else(|| Error::ConfigInvalid("--viewership required without --config".into()))?;
        let model_name = args
            .model
            .as_deref()
            .ok_or_else(|| Error::ConfigInvalid("--model required without --config".into()))?;
        let algorithms = if args.algo.is_empty() {
            vec![AlgorithmId::Det]
        } else {
            args.algo.iter().map(|s| parse_algo(s)).collect::<mssr::Result<_>>()?
        };
        let dist = dataio::load_distribution(viewership)?;
        let market_loaded = dataio::load_market(market)?;
        let model = if model_name == "empirical" {
            ErrorModel::Empirical { distribution: dist.clone() }
        } else {
            parse_model(model_name, dist.support_end(), market_loaded.bn())?
        };
        RealConfig {
            market: market.display().to_string(),
            viewership: viewership.display().to_string(),
            algorithms,
            lambdas: args.lambda.clone(),
            models: vec![model],
            m_values: vec![1],
            trials: args.trials,
            master_seed: args.seed,
            randomized_eval: EvalMode::Exact,
            plus_one: true,
        }
    };
    let market = dataio::load_market(std::path::Path::new(&config.market))?;
    let dist = dataio::load_distribution(std::path::Path::new(&config.viewership))?;
    let rows = run_real(&market, &dist, &config)?;
    write_rows(&rows, args.out)
}

fn lambda_search(args: LambdaSearchArgs) -> mssr::Result<()> {
    let market = dataio::load_market(&args.market)?;
    let algo = parse_algo(&args.algo)?;
    let parts: Vec<&str> = args.grid.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::ConfigInvalid("--grid must be start:step:end".into()));
    }
    let parse = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| Error::ConfigInvalid(format!("bad grid number '{s}'")))
    };
    let (start, step, end) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
    if !(step > 0.0) || start > end {
        return Err(Error::ConfigInvalid("--grid needs step > 0 and start <= end".into()));
    }
    let mut grid = Vec::new();
    let mut i = 0u32;
    loop {
        let v = start + step * i as f64;
        if v > end + 1e-12 {
            break;
        }
        grid.push(v);
        i += 1;
    }
    let (best_lambda, best_bound) = grid_search_lambda(algo, &market, args.zeta, &grid, args.m)?;
    if args.json {
        println!(
            "{}",
            serde_json::json!({
                "algorithm": algo.as_str(),
                "zeta": args.zeta,
                "best_lambda": best_lambda,
                "bound_at_best": best_bound,
            })
        );
    } else {
        println!("best lambda {best_lambda} (bound {best_bound:.6}) at assumed error {}", args.zeta);
    }
    Ok(())
}
