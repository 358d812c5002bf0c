//! The six decision algorithms: the best deterministic online algorithm
//! without predictions, and deterministic/randomized algorithms using one or
//! many ML predictions.
//!
//! Deterministic algorithms emit a [`Decision`]; randomized ones emit a
//! [`RandomizedPolicy`] with an explicit probability mass over buy days, so
//! expectations can be computed exactly.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::market::{Instance, Market};
use crate::util::kahan_sum;

/// When to buy: on a given day, or never (rent forever).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BuyDay {
    Day(u64),
    Never,
}

/// A committed (shop, buy-day) choice. `shop` is a 1-based index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Decision {
    pub shop: usize,
    pub buy_day: BuyDay,
}

/// A shop plus a probability mass over buy days `{1..K}`.
///
/// The mass is geometric with ratio `b/(b-r)` for the policy's shop prices.
/// `clamped` marks the case where the computed support would have been empty
/// and was forced to `K = 1` (buy immediately).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RandomizedPolicy {
    pub shop: usize,
    pub mass: Vec<f64>,
    pub clamped: bool,
}

impl RandomizedPolicy {
    pub fn support_end(&self) -> u64 {
        self.mass.len() as u64
    }
}

/// Sorted predictions `y_1 <= ... <= y_m` from `m` ML models.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictionSet {
    values: Vec<f64>,
}

impl PredictionSet {
    /// Sorts the predictions; duplicates are accepted.
    pub fn new(mut values: Vec<f64>) -> Result<PredictionSet> {
        if values.is_empty() {
            return Err(Error::ConfigInvalid("need at least one prediction".into()));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::ConfigInvalid(
                "predictions must be finite and >= 0".into(),
            ));
        }
        values.sort_by(|a, b| a.total_cmp(b));
        Ok(PredictionSet { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `z`: how many predictions are at or above the threshold.
    pub fn count_above(&self, threshold: f64) -> usize {
        self.values.iter().filter(|&&y| y >= threshold).count()
    }

    /// `ζ = max_i |y_i - x|`.
    pub fn prediction_error(&self, x: Instance) -> f64 {
        let days = x.0 as f64;
        self.values
            .iter()
            .map(|y| (y - days).abs())
            .fold(0.0, f64::max)
    }
}

fn check_lambda(lambda: f64, low: f64, high: f64) -> Result<()> {
    if !(lambda > low && lambda < high) {
        return Err(Error::LambdaOutOfRange { value: lambda, low, high });
    }
    Ok(())
}

/// Cost of following a decision for `x` actual days, in normalized units:
/// `x·r` while renting, `(d-1)·r + b` once bought on day `d <= x`.
pub fn decision_cost(market: &Market, d: &Decision, x: Instance) -> f64 {
    let shop = market.shop(d.shop);
    let days = x.0 as f64;
    match d.buy_day {
        BuyDay::Never => days * shop.rent,
        BuyDay::Day(day) => {
            if (x.0 as u64) < day {
                days * shop.rent
            } else {
                (day - 1) as f64 * shop.rent + shop.buy
            }
        }
    }
}

/// Best deterministic online algorithm without predictions: buy on day
/// `⌈b_n⌉` at the shop minimizing `r_i + (b_i - r_i)/b_n`.
pub fn bdoa(market: &Market) -> Decision {
    let bn = market.bn();
    let mut best = 1;
    let mut best_obj = f64::INFINITY;
    for (i, shop) in market.shops().iter().enumerate() {
        let obj = shop.rent + (shop.buy - shop.rent) / bn;
        if obj < best_obj {
            best_obj = obj;
            best = i + 1;
        }
    }
    Decision { shop: best, buy_day: BuyDay::Day(bn.ceil() as u64) }
}

/// Threshold rule: buy on day 1 at shop n if `y >= b_n`, else rent at shop 1.
pub fn simple_single(market: &Market, y: f64) -> Decision {
    if y >= market.bn() {
        Decision { shop: market.n(), buy_day: BuyDay::Day(1) }
    } else {
        Decision { shop: 1, buy_day: BuyDay::Never }
    }
}

/// Deterministic algorithm with a single prediction: buy on day `⌈λ·b_n⌉`
/// at shop n if `y >= b_n`, else on day `⌈b_1/λ⌉` at shop 1.
pub fn det_single(market: &Market, y: f64, lambda: f64) -> Result<Decision> {
    check_lambda(lambda, 0.0, 1.0)?;
    if y >= market.bn() {
        let day = (lambda * market.bn()).ceil() as u64;
        Ok(Decision { shop: market.n(), buy_day: BuyDay::Day(day.max(1)) })
    } else {
        let day = (market.b1() / lambda).ceil() as u64;
        Ok(Decision { shop: 1, buy_day: BuyDay::Day(day) })
    }
}

/// Geometric buy-day distribution over `{1..k}` for a shop with prices
/// `(rent, buy)`: `p_i = ((b-r)/b)^{k-i} · r / (b(1 - (1-r/b)^k))`.
pub fn geometric_mass(rent: f64, buy: f64, k: u64) -> Vec<f64> {
    let q = (buy - rent) / buy;
    let norm = rent / (buy * (1.0 - q.powi(k as i32)));
    (1..=k).map(|i| q.powi((k - i) as i32) * norm).collect()
}

/// Randomized algorithm with a single prediction. `λ ∈ (1/b_n, 1)`.
pub fn rand_single(market: &Market, y: f64, lambda: f64) -> Result<RandomizedPolicy> {
    check_lambda(lambda, 1.0 / market.bn(), 1.0)?;
    if y >= market.bn() {
        let shop = market.shop(market.n());
        let k = (lambda * market.bn()).floor() as u64;
        Ok(RandomizedPolicy {
            shop: market.n(),
            mass: geometric_mass(shop.rent, shop.buy, k),
            clamped: false,
        })
    } else {
        let l = (market.b1() / lambda).ceil() as u64;
        Ok(RandomizedPolicy {
            shop: 1,
            mass: geometric_mass(1.0, market.b1(), l),
            clamped: false,
        })
    }
}

/// Deterministic algorithm with `m` predictions. With
/// `z = count_above(b_n)` and `c = 1` if `plus_one` (the default) else `0`:
/// majority above buys on day `⌈λ·b_n/(2z-m+c)⌉` at shop n, otherwise on day
/// `⌈(m-2z+c)·b_n/λ⌉` at shop 1. With `plus_one` off a zero denominator is
/// an error.
pub fn det_multi(
    market: &Market,
    predictions: &PredictionSet,
    lambda: f64,
    plus_one: bool,
) -> Result<Decision> {
    check_lambda(lambda, 0.0, 1.0)?;
    let m = predictions.len();
    let z = predictions.count_above(market.bn());
    let c = if plus_one { 1i64 } else { 0i64 };
    if 2 * z >= m {
        let denom = 2 * z as i64 - m as i64 + c;
        if denom == 0 {
            return Err(Error::ZeroDenominator { m, z });
        }
        let day = (lambda * market.bn() / denom as f64).ceil() as u64;
        Ok(Decision { shop: market.n(), buy_day: BuyDay::Day(day.max(1)) })
    } else {
        let factor = m as i64 - 2 * z as i64 + c;
        if factor == 0 {
            return Err(Error::ZeroDenominator { m, z });
        }
        let day = (factor as f64 * market.bn() / lambda).ceil() as u64;
        Ok(Decision { shop: 1, buy_day: BuyDay::Day(day) })
    }
}

/// Randomized algorithm with `m` predictions. The shop-1 branch uses `b_1`
/// (not `b_n`) for its support length, exactly as the algorithm is stated.
/// A majority-above support of length 0 is clamped to 1 and marked.
pub fn rand_multi(
    market: &Market,
    predictions: &PredictionSet,
    lambda: f64,
) -> Result<RandomizedPolicy> {
    check_lambda(lambda, 0.0, 1.0)?;
    let m = predictions.len();
    let z = predictions.count_above(market.bn());
    if 2 * z >= m {
        let denom = (2 * z - m + 1) as f64;
        let shop = market.shop(market.n());
        let k = (lambda * market.bn() / denom).floor() as u64;
        let (k, clamped) = if k == 0 { (1, true) } else { (k, false) };
        Ok(RandomizedPolicy {
            shop: market.n(),
            mass: geometric_mass(shop.rent, shop.buy, k),
            clamped,
        })
    } else {
        let factor = (m - 2 * z + 1) as f64;
        let l = (factor * market.b1() / lambda).ceil() as u64;
        Ok(RandomizedPolicy {
            shop: 1,
            mass: geometric_mass(1.0, market.b1(), l),
            clamped: false,
        })
    }
}

/// Exact expected cost of a randomized policy for `x` actual days:
/// `Σ_{i<=min(x,K)} (b + (i-1)r)·p_i + Σ_{i=x+1}^{K} x·r·p_i`.
pub fn expected_cost(policy: &RandomizedPolicy, market: &Market, x: Instance) -> f64 {
    let shop = market.shop(policy.shop);
    let days = x.0 as f64;
    let terms = policy.mass.iter().enumerate().map(|(idx, &p)| {
        let i = idx as u64 + 1;
        if i <= x.0 as u64 {
            (shop.buy + (i - 1) as f64 * shop.rent) * p
        } else {
            days * shop.rent * p
        }
    });
    kahan_sum(terms)
}

/// Inverse-CDF sampling of the buy day from a uniform draw `u ∈ [0,1)`.
pub fn sample_buy_day(policy: &RandomizedPolicy, u: f64) -> u64 {
    let mut cdf = 0.0;
    for (idx, &p) in policy.mass.iter().enumerate() {
        cdf += p;
        if u <= cdf {
            return idx as u64 + 1;
        }
    }
    policy.mass.len() as u64
}
