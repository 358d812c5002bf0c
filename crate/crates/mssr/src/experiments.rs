//! Monte Carlo reproduction of the synthetic and real-data studies: error
//! models, x-distributions, adversarial predictors and averaged ratios.
//!
//! Every trial draws from its own RNG stream seeded by
//! (master_seed, error-model cell, trial index), so runs are bit-identical
//! regardless of thread count, and the same draws are shared across λ values
//! and algorithms (common random numbers sharpen comparisons).

use rand::distributions::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithm::AlgorithmId;
use crate::dataio::EmpiricalDistribution;
use crate::error::{Error, Result};
use crate::market::{Instance, Market};
use crate::policies::{
    bdoa, decision_cost, det_multi, det_single, expected_cost, rand_multi, rand_single,
    sample_buy_day, simple_single, BuyDay, Decision, PredictionSet,
};
use crate::util::{kahan_sum, mix_seed};

/// How a prediction is generated from the drawn `x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ErrorModel {
    /// `y = max(x + ε, 0)`, `ε ~ N(delta, sigma)`.
    Gaussian { delta: f64, sigma: f64 },
    /// `y = total - x`.
    Reverse { total: u32 },
    /// `y = low` if `x >= threshold`, else `y = high`.
    Flip { threshold: f64, low: f64, high: f64 },
    /// `y` drawn independently from an empirical distribution.
    Empirical { distribution: EmpiricalDistribution },
}

impl ErrorModel {
    fn validate(&self) -> Result<()> {
        match self {
            ErrorModel::Gaussian { sigma, .. } if *sigma < 0.0 => {
                Err(Error::ConfigInvalid("gaussian sigma must be >= 0".into()))
            }
            ErrorModel::Reverse { total: 0 } => {
                Err(Error::ConfigInvalid("reverse total must be positive".into()))
            }
            ErrorModel::Flip { threshold, low, high } => {
                if *threshold > 0.0 && *low > 0.0 && *high > 0.0 {
                    Ok(())
                } else {
                    Err(Error::ConfigInvalid("flip parameters must be positive".into()))
                }
            }
            _ => Ok(()),
        }
    }

    /// (delta, sigma) columns for the results CSV. Non-Gaussian models get
    /// sentinel sigmas so rows never collide: -1 reverse, -2 flip,
    /// -3 empirical.
    fn row_key(&self) -> (f64, f64) {
        match self {
            ErrorModel::Gaussian { delta, sigma } => (*delta, *sigma),
            ErrorModel::Reverse { total } => (*total as f64, -1.0),
            ErrorModel::Flip { threshold, .. } => (*threshold, -2.0),
            ErrorModel::Empirical { .. } => (0.0, -3.0),
        }
    }

}

/// How randomized policies are evaluated per trial.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalMode {
    /// Exact expectation over the buy-day distribution (lower variance).
    #[default]
    Exact,
    /// A single sampled buy day, the literal online protocol.
    Sampled,
}

/// Parameters of a synthetic sweep; mirrors the JSON config file
/// field-for-field.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Market id: path of the market CSV.
    pub market: String,
    pub algorithms: Vec<AlgorithmId>,
    pub lambdas: Vec<f64>,
    /// `x ~` uniform integers `{1..⌊Γ⌋}`.
    pub gamma: f64,
    pub error_models: Vec<ErrorModel>,
    /// Predictions per trial; one sweep cell per value.
    #[serde(default = "default_m_values")]
    pub m_values: Vec<usize>,
    pub trials: u32,
    pub master_seed: u64,
    #[serde(default)]
    pub randomized_eval: EvalMode,
    /// `+1` term of the multi-prediction break-even points; applies to the
    /// `det-multi` algorithm id (`det-multi-no-plus-one` ignores it).
    #[serde(default = "default_true")]
    pub plus_one: bool,
}

fn default_m_values() -> Vec<usize> {
    vec![1]
}

fn default_true() -> bool {
    true
}

/// Parameters of a real-data run: `x` comes from an empirical viewership
/// distribution instead of a uniform grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RealConfig {
    pub market: String,
    /// Path of the viewership CSV defining the x-distribution.
    pub viewership: String,
    pub algorithms: Vec<AlgorithmId>,
    pub lambdas: Vec<f64>,
    pub models: Vec<ErrorModel>,
    #[serde(default = "default_m_values")]
    pub m_values: Vec<usize>,
    pub trials: u32,
    pub master_seed: u64,
    #[serde(default)]
    pub randomized_eval: EvalMode,
    #[serde(default = "default_true")]
    pub plus_one: bool,
}

/// One averaged cell of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub algorithm: String,
    pub lambda: f64,
    pub delta: f64,
    pub sigma: f64,
    pub m: usize,
    pub gamma: f64,
    pub mean_cr: f64,
    pub stderr: f64,
    pub trials: u32,
}

enum XDist<'a> {
    UniformInt(u32),
    Empirical(&'a EmpiricalDistribution),
}

impl XDist<'_> {
    fn draw(&self, rng: &mut ChaCha8Rng) -> u32 {
        match self {
            XDist::UniformInt(hi) => Uniform::new_inclusive(1, *hi).sample(rng),
            XDist::Empirical(dist) => dist.sample(rng.gen::<f64>()),
        }
    }
}

fn validate_common(
    market: &Market,
    algorithms: &[AlgorithmId],
    lambdas: &[f64],
    m_values: &[usize],
    trials: u32,
) -> Result<()> {
    if trials == 0 {
        return Err(Error::ConfigInvalid("trials must be >= 1".into()));
    }
    if algorithms.is_empty() {
        return Err(Error::ConfigInvalid("need at least one algorithm".into()));
    }
    if lambdas.is_empty() {
        return Err(Error::ConfigInvalid("need at least one lambda".into()));
    }
    if m_values.is_empty() || m_values.contains(&0) {
        return Err(Error::ConfigInvalid("m values must be positive".into()));
    }
    for &lambda in lambdas {
        for &alg in algorithms {
            if !alg.needs_lambda() {
                continue;
            }
            let low = if alg == AlgorithmId::Rand { 1.0 / market.bn() } else { 0.0 };
            if !(lambda > low && lambda < 1.0) {
                return Err(Error::ConfigInvalid(format!(
                    "lambda {lambda} outside ({low}, 1) for algorithm {alg}"
                )));
            }
        }
    }
    Ok(())
}

/// Per-trial draws, shared by every (algorithm, λ) pair in the cell.
struct TrialDraws {
    x: Instance,
    predictions: Vec<f64>,
    /// Uniform for sampled-mode buy-day draws.
    u: f64,
}

fn draw_trial(
    master_seed: u64,
    cell: u64,
    trial: u32,
    xdist: &XDist<'_>,
    model: &ErrorModel,
    m: usize,
) -> TrialDraws {
    let seed = mix_seed(&[master_seed, cell, trial as u64]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = xdist.draw(&mut rng);
    let xf = x as f64;
    let predictions = match model {
        ErrorModel::Gaussian { delta, sigma } => {
            let normal = Normal::new(*delta, *sigma).expect("validated sigma");
            (0..m).map(|_| (xf + normal.sample(&mut rng)).max(0.0)).collect()
        }
        ErrorModel::Reverse { total } => vec![(*total as f64 - xf).max(0.0); m],
        ErrorModel::Flip { threshold, low, high } => {
            vec![if xf >= *threshold { *low } else { *high }; m]
        }
        ErrorModel::Empirical { distribution } => {
            (0..m).map(|_| distribution.sample(rng.gen::<f64>()) as f64).collect()
        }
    };
    let u = rng.gen::<f64>();
    TrialDraws { x: Instance(x), predictions, u }
}

fn realized_ratio(
    market: &Market,
    alg: AlgorithmId,
    lambda: f64,
    plus_one: bool,
    eval: EvalMode,
    draws: &TrialDraws,
    bdoa_decision: &Decision,
) -> Result<f64> {
    let (opt, _) = market.offline_optimal(draws.x);
    let y = draws.predictions[0];
    let cost = match alg {
        AlgorithmId::Bdoa => decision_cost(market, bdoa_decision, draws.x),
        AlgorithmId::Simple => decision_cost(market, &simple_single(market, y), draws.x),
        AlgorithmId::Det => decision_cost(market, &det_single(market, y, lambda)?, draws.x),
        AlgorithmId::Rand => {
            let policy = rand_single(market, y, lambda)?;
            match eval {
                EvalMode::Exact => expected_cost(&policy, market, draws.x),
                EvalMode::Sampled => {
                    let day = sample_buy_day(&policy, draws.u);
                    let d = Decision { shop: policy.shop, buy_day: BuyDay::Day(day) };
                    decision_cost(market, &d, draws.x)
                }
            }
        }
        AlgorithmId::DetMulti | AlgorithmId::DetMultiNoPlusOne => {
            let preds = PredictionSet::new(draws.predictions.clone())?;
            let plus = alg == AlgorithmId::DetMulti && plus_one;
            decision_cost(market, &det_multi(market, &preds, lambda, plus)?, draws.x)
        }
        AlgorithmId::RandMulti => {
            let preds = PredictionSet::new(draws.predictions.clone())?;
            let policy = rand_multi(market, &preds, lambda)?;
            match eval {
                EvalMode::Exact => expected_cost(&policy, market, draws.x),
                EvalMode::Sampled => {
                    let day = sample_buy_day(&policy, draws.u);
                    let d = Decision { shop: policy.shop, buy_day: BuyDay::Day(day) };
                    decision_cost(market, &d, draws.x)
                }
            }
        }
    };
    Ok(cost / opt)
}

fn mean_and_stderr(ratios: &[f64]) -> (f64, f64) {
    let n = ratios.len() as f64;
    let mean = kahan_sum(ratios.iter().copied()) / n;
    if ratios.len() < 2 {
        return (mean, 0.0);
    }
    let var = kahan_sum(ratios.iter().map(|r| (r - mean) * (r - mean))) / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[allow(clippy::too_many_arguments)]
fn run_cells(
    market: &Market,
    xdist: &XDist<'_>,
    gamma_label: f64,
    algorithms: &[AlgorithmId],
    lambdas: &[f64],
    error_models: &[ErrorModel],
    m_values: &[usize],
    trials: u32,
    master_seed: u64,
    eval: EvalMode,
    plus_one: bool,
) -> Result<Vec<ResultRow>> {
    let bdoa_decision = bdoa(market);
    let mut rows = Vec::new();
    for (e_idx, model) in error_models.iter().enumerate() {
        model.validate()?;
        let (delta, sigma) = model.row_key();
        for (m_idx, &m) in m_values.iter().enumerate() {
            let cell = mix_seed(&[e_idx as u64, m_idx as u64, m as u64]);
            // all (algorithm, lambda) pairs share the same trial draws
            let per_trial: Vec<(TrialDraws, Vec<f64>)> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let draws = draw_trial(master_seed, cell, t, xdist, model, m);
                    (draws, Vec::new())
                })
                .collect();
            for &alg in algorithms {
                let lambdas_for_alg: &[f64] =
                    if alg.needs_lambda() { lambdas } else { &[0.0] };
                for &lambda in lambdas_for_alg {
                    let ratios: Vec<f64> = per_trial
                        .par_iter()
                        .map(|(draws, _)| {
                            realized_ratio(market, alg, lambda, plus_one, eval, draws, &bdoa_decision)
                        })
                        .collect::<Result<_>>()?;
                    let (mean_cr, stderr) = mean_and_stderr(&ratios);
                    rows.push(ResultRow {
                        algorithm: alg.to_string(),
                        lambda,
                        delta,
                        sigma,
                        m,
                        gamma: gamma_label,
                        mean_cr,
                        stderr,
                        trials,
                    });
                }
            }
        }
    }
    sort_rows(&mut rows);
    rows.dedup();
    Ok(rows)
}

/// Deterministic lexicographic order by the key columns.
pub fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| {
        a.algorithm
            .cmp(&b.algorithm)
            .then(a.lambda.total_cmp(&b.lambda))
            .then(a.delta.total_cmp(&b.delta))
            .then(a.sigma.total_cmp(&b.sigma))
            .then(a.m.cmp(&b.m))
            .then(a.gamma.total_cmp(&b.gamma))
    });
}

/// Runs a synthetic sweep: `x` uniform on `{1..⌊Γ⌋}`, predictions from the
/// configured error models, one averaged row per
/// (algorithm, λ, error model, m) cell.
pub fn run_synthetic(market: &Market, config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    validate_common(market, &config.algorithms, &config.lambdas, &config.m_values, config.trials)?;
    if config.gamma < 1.0 {
        return Err(Error::ConfigInvalid("gamma must be >= 1".into()));
    }
    if config.error_models.is_empty() {
        return Err(Error::ConfigInvalid("need at least one error model".into()));
    }
    let x_hi = config.gamma.floor() as u32;
    run_cells(
        market,
        &XDist::UniformInt(x_hi),
        config.gamma,
        &config.algorithms,
        &config.lambdas,
        &config.error_models,
        &config.m_values,
        config.trials,
        config.master_seed,
        config.randomized_eval,
        config.plus_one,
    )
}

/// Runs a real-data study: `x` drawn from an empirical distribution over
/// episodes watched, predictions from one model (perfect, empirical,
/// reverse or flip). The gamma column carries the support size E.
pub fn run_real(
    market: &Market,
    viewership: &EmpiricalDistribution,
    config: &RealConfig,
) -> Result<Vec<ResultRow>> {
    validate_common(market, &config.algorithms, &config.lambdas, &config.m_values, config.trials)?;
    if config.models.is_empty() {
        return Err(Error::ConfigInvalid("need at least one prediction model".into()));
    }
    run_cells(
        market,
        &XDist::Empirical(viewership),
        viewership.support_end() as f64,
        &config.algorithms,
        &config.lambdas,
        &config.models,
        &config.m_values,
        config.trials,
        config.master_seed,
        config.randomized_eval,
        config.plus_one,
    )
}

/// Sweeps the number of predictions; a thin wrapper kept for symmetry with
/// the single-m synthetic entry point.
pub fn multi_prediction_sweep(market: &Market, config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    if !config.algorithms.iter().any(|a| a.is_multi()) {
        return Err(Error::ConfigInvalid(
            "multi-prediction sweep needs a multi-prediction algorithm".into(),
        ));
    }
    run_synthetic(market, config)
}
