//! Theoretical competitive-ratio bounds as executable formulas.
//!
//! Each learning-augmented algorithm gets a [`BoundReport`] whose
//! `error_bound(ζ, OPT)` evaluates the min-of-two-expressions CR bound; the
//! analysis module checks realized ratios against it on exhaustive grids.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::market::Market;

/// Evaluable CR bound: consistency factor (ζ = 0), robustness factor
/// (all ζ), and the full error-dependent expression.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub consistency_factor: f64,
    pub robustness_factor: f64,
    #[serde(skip)]
    form: Form,
}

#[derive(Clone, Debug)]
enum Form {
    DetSingle { rn: f64, ratio: f64, lambda: f64 },
    RandSingle { rn: f64, ratio: f64, b1: f64, bn: f64, lambda: f64 },
    DetMulti { rn: f64, ratio: f64, lambda: f64, m: usize },
    RandMulti { rn: f64, ratio: f64, b1: f64, bn: f64, lambda: f64, m: usize },
}

impl BoundReport {
    /// The CR bound as a function of the prediction error and the offline
    /// optimum. `zeta` may be infinite.
    pub fn error_bound(&self, zeta: f64, opt: f64) -> f64 {
        let rel = zeta / opt;
        match self.form {
            Form::DetSingle { rn, ratio, lambda } => {
                let first = (lambda + 1.0) * rn
                    + ratio
                    + (lambda * rn + 1.0).max(ratio / (1.0 - lambda)) * rel;
                let second = (rn + 1.0 / lambda).max(ratio * (1.0 + 1.0 / lambda));
                first.min(second)
            }
            Form::RandSingle { rn, ratio, b1, bn, lambda } => {
                let first = rn * lambda / (1.0 - (-rn * lambda).exp()) * (1.0 + rel);
                let second = ratio
                    * (rn / (1.0 - (-rn * (lambda - 1.0 / bn)).exp()))
                        .max((1.0 / lambda + 1.0 / b1) / (1.0 - (-1.0 / lambda).exp()));
                first.min(second)
            }
            Form::DetMulti { rn, ratio, lambda, m } => {
                let first = (lambda + 1.0) * rn
                    + ratio
                    + (lambda * rn + 1.0).max(1.0 / (1.0 - lambda)) * rel;
                let second = rn.max(ratio) + (m as f64 + 1.0) / lambda;
                first.min(second)
            }
            Form::RandMulti { rn, ratio, b1, bn, lambda, m } => {
                let mp1 = m as f64 + 1.0;
                let first = ratio
                    * (rn / (1.0 - (-rn * (lambda / mp1 - 1.0 / bn)).exp()))
                        .max((mp1 / lambda + 1.0 / b1) / (1.0 - (-1.0 / lambda).exp()));
                let second = rn * lambda / (1.0 - (-rn * lambda / mp1).exp()) * (1.0 + rel);
                first.min(second)
            }
        }
    }
}

fn check_lambda(lambda: f64, low: f64, high: f64) -> Result<()> {
    if !(lambda > low && lambda < high) {
        return Err(Error::LambdaOutOfRange { value: lambda, low, high });
    }
    Ok(())
}

/// CR of the best deterministic online algorithm:
/// `min_i (r_i + (b_i - r_i)/b_n)`.
pub fn bdoa_cr(market: &Market) -> f64 {
    let bn = market.bn();
    market
        .shops()
        .iter()
        .map(|s| s.rent + (s.buy - s.rent) / bn)
        .fold(f64::INFINITY, f64::min)
}

/// Additive cost bound of the simple threshold algorithm: `OPT + ζ`.
pub fn simple_bound(opt: f64, zeta: f64) -> f64 {
    opt + zeta
}

/// Deterministic single-prediction bound.
///
/// The error expression's cap `max{r_n + 1/λ, (b_1/b_n)(1 + 1/λ)}` can
/// exceed the stated robustness factor `max{r_n, b_1/b_n} + 1/λ`; both are
/// reported as stated.
pub fn det_single_bound(market: &Market, lambda: f64) -> Result<BoundReport> {
    check_lambda(lambda, 0.0, 1.0)?;
    let rn = market.rn();
    let ratio = market.b1() / market.bn();
    Ok(BoundReport {
        consistency_factor: (lambda + 1.0) * rn + ratio,
        robustness_factor: rn.max(ratio) + 1.0 / lambda,
        form: Form::DetSingle { rn, ratio, lambda },
    })
}

/// Randomized single-prediction bound. `λ ∈ (1/b_n, 1)`.
pub fn rand_single_bound(market: &Market, lambda: f64) -> Result<BoundReport> {
    check_lambda(lambda, 1.0 / market.bn(), 1.0)?;
    let rn = market.rn();
    let b1 = market.b1();
    let bn = market.bn();
    let ratio = b1 / bn;
    let robustness = ratio
        * (rn / (1.0 - (-rn * (lambda - 1.0 / bn)).exp()))
            .max((1.0 / lambda + 1.0 / b1) / (1.0 - (-1.0 / lambda).exp()));
    Ok(BoundReport {
        consistency_factor: rn * lambda / (1.0 - (-rn * lambda).exp()),
        robustness_factor: robustness,
        form: Form::RandSingle { rn, ratio, b1, bn, lambda },
    })
}

/// Deterministic multi-prediction bound.
pub fn det_multi_bound(market: &Market, lambda: f64, m: usize) -> Result<BoundReport> {
    check_lambda(lambda, 0.0, 1.0)?;
    let rn = market.rn();
    let ratio = market.b1() / market.bn();
    Ok(BoundReport {
        consistency_factor: (lambda + 1.0) * rn + ratio,
        robustness_factor: rn.max(ratio) + (m as f64 + 1.0) / lambda,
        form: Form::DetMulti { rn, ratio, lambda, m },
    })
}

/// Randomized multi-prediction bound. Requires `λ/(m+1) > 1/b_n`, otherwise
/// the robustness term's exponent is non-negative and the expression is
/// meaningless.
pub fn rand_multi_bound(market: &Market, lambda: f64, m: usize) -> Result<BoundReport> {
    check_lambda(lambda, 0.0, 1.0)?;
    let bn = market.bn();
    let mp1 = m as f64 + 1.0;
    if lambda / mp1 <= 1.0 / bn {
        return Err(Error::InfeasibleBound { value: lambda / mp1, limit: 1.0 / bn });
    }
    let rn = market.rn();
    let b1 = market.b1();
    let ratio = b1 / bn;
    let robustness = ratio
        * (rn / (1.0 - (-rn * (lambda / mp1 - 1.0 / bn)).exp()))
            .max((mp1 / lambda + 1.0 / b1) / (1.0 - (-1.0 / lambda).exp()));
    Ok(BoundReport {
        consistency_factor: rn * lambda / (1.0 - (-rn * lambda / mp1).exp()),
        robustness_factor: robustness,
        form: Form::RandMulti { rn, ratio, b1, bn, lambda, m },
    })
}
