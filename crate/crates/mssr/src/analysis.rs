//! Verification harness: brute-force oracles, exhaustive worst-case ratio
//! search and bound-compliance certification.
//!
//! Randomized policies are evaluated by exact expectation here so compliance
//! checks are deterministic; Monte Carlo sampling lives in `experiments`.

use rayon::prelude::*;
use serde::Serialize;

use crate::algorithm::AlgorithmId;
use crate::bounds::{
    bdoa_cr, det_multi_bound, det_single_bound, rand_multi_bound, rand_single_bound, BoundReport,
};
use crate::error::{Error, Result};
use crate::market::{Instance, Market};
use crate::policies::{
    bdoa, decision_cost, det_multi, det_single, expected_cost, rand_multi, rand_single,
    simple_single, BuyDay, Decision, PredictionSet,
};

/// Guard for the exhaustive decision oracle.
pub const ORACLE_X_MAX: u32 = 100_000;

/// Absolute tolerance on bound margins; the proofs hold exactly, this covers
/// floating-point evaluation of the exponentials.
pub const MARGIN_TOLERANCE: f64 = 1e-9;

/// Offline optimum by exhaustive search over every (shop, buy day) decision,
/// including never buying. Independent of `Market::offline_optimal`.
pub fn brute_force_opt(market: &Market, x: Instance) -> Result<f64> {
    if x.0 > ORACLE_X_MAX {
        return Err(Error::OracleScaleExceeded { x: x.0, max: ORACLE_X_MAX });
    }
    let mut best = f64::INFINITY;
    for shop in 1..=market.n() {
        let never = Decision { shop, buy_day: BuyDay::Never };
        best = best.min(decision_cost(market, &never, x));
        for day in 1..=x.0 as u64 {
            let d = Decision { shop, buy_day: BuyDay::Day(day) };
            best = best.min(decision_cost(market, &d, x));
        }
    }
    Ok(best)
}

/// One grid cell where the realized ratio exceeded the theoretical bound.
#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub x: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predictions: Option<Vec<f64>>,
    pub realized: f64,
    pub bound: f64,
}

/// Outcome of an exhaustive worst-case search against a theoretical bound.
#[derive(Clone, Debug, Serialize)]
pub struct ComplianceReport {
    pub algorithm: AlgorithmId,
    pub market_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub x_max: u32,
    pub y_max: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    pub max_observed_ratio: f64,
    pub argmax_x: u32,
    /// Minimum over the grid of (bound - realized); nonnegative up to
    /// tolerance iff `violations` is empty.
    pub max_bound_margin: f64,
    pub violations: Vec<Violation>,
}

impl ComplianceReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Copy)]
struct CellStats {
    max_ratio: f64,
    argmax_x: u32,
    min_margin: f64,
}

impl CellStats {
    fn empty() -> CellStats {
        CellStats { max_ratio: 0.0, argmax_x: 0, min_margin: f64::INFINITY }
    }

    fn merge(self, other: CellStats) -> CellStats {
        // ties keep the smaller x so merging is order-independent
        let (max_ratio, argmax_x) = if other.max_ratio > self.max_ratio
            || (other.max_ratio == self.max_ratio && other.argmax_x < self.argmax_x)
        {
            (other.max_ratio, other.argmax_x)
        } else {
            (self.max_ratio, self.argmax_x)
        };
        CellStats { max_ratio, argmax_x, min_margin: self.min_margin.min(other.min_margin) }
    }
}

fn opt_costs(market: &Market, x_max: u32) -> Vec<f64> {
    (1..=x_max)
        .map(|x| market.offline_optimal(Instance(x)).0)
        .collect()
}

/// Evaluates realized-vs-bound over `x` for one fixed policy cost curve.
/// `bound(x, opt)` supplies the theoretical guarantee at that cell.
fn scan_x<B>(costs: &[f64], opts: &[f64], bound: B) -> (CellStats, Vec<(u32, f64, f64)>)
where
    B: Fn(u32, f64) -> f64,
{
    let mut stats = CellStats::empty();
    let mut violations = Vec::new();
    for (idx, (&cost, &opt)) in costs.iter().zip(opts).enumerate() {
        let x = idx as u32 + 1;
        let ratio = cost / opt;
        let b = bound(x, opt);
        let margin = b - ratio;
        stats = stats.merge(CellStats { max_ratio: ratio, argmax_x: x, min_margin: margin });
        if margin < -MARGIN_TOLERANCE {
            violations.push((x, ratio, b));
        }
    }
    (stats, violations)
}

fn cost_curve(market: &Market, d: &Decision, x_max: u32) -> Vec<f64> {
    (1..=x_max)
        .map(|x| decision_cost(market, d, Instance(x)))
        .collect()
}

fn expected_cost_curve(
    policy: &crate::policies::RandomizedPolicy,
    market: &Market,
    x_max: u32,
) -> Vec<f64> {
    (1..=x_max)
        .map(|x| expected_cost(policy, market, Instance(x)))
        .collect()
}

/// Deterministic prediction families for the multi-prediction grids: one set
/// per majority count `z ∈ {0..m}`, plus boundary and extreme sets.
pub fn multi_prediction_family(m: usize, bn: f64, y_max: u32) -> Vec<Vec<f64>> {
    let mut families = Vec::new();
    for z in 0..=m {
        let mut set = Vec::with_capacity(m);
        for j in 0..m - z {
            set.push((bn - (j + 1) as f64).max(0.0));
        }
        for j in 0..z {
            set.push(bn + (j + 1) as f64);
        }
        families.push(set);
    }
    families.push(vec![bn; m]); // boundary: every prediction exactly b_n
    families.push(vec![0.0; m]);
    families.push(vec![y_max as f64; m]);
    families
}

/// Exhaustively searches the (x, prediction) grid for the algorithm's
/// worst realized ratio and certifies it against the matching bound.
pub fn worst_case_ratio(
    algorithm: AlgorithmId,
    market: &Market,
    market_id: &str,
    lambda: Option<f64>,
    x_max: u32,
    y_max: u32,
    m: Option<usize>,
) -> Result<ComplianceReport> {
    if x_max == 0 {
        return Err(Error::ConfigInvalid("x_max must be >= 1".into()));
    }
    let opts = opt_costs(market, x_max);
    let report = |lambda, m, stats: CellStats, violations: Vec<Violation>| ComplianceReport {
        algorithm,
        market_id: market_id.to_string(),
        lambda,
        x_max,
        y_max,
        m,
        max_observed_ratio: stats.max_ratio,
        argmax_x: stats.argmax_x,
        max_bound_margin: stats.min_margin,
        violations,
    };

    match algorithm {
        AlgorithmId::Bdoa => {
            let d = bdoa(market);
            let cr = bdoa_cr(market);
            let costs = cost_curve(market, &d, x_max);
            let (stats, raw) = scan_x(&costs, &opts, |_, _| cr);
            let violations = raw
                .into_iter()
                .map(|(x, realized, bound)| Violation { x, y: None, predictions: None, realized, bound })
                .collect();
            Ok(report(None, None, stats, violations))
        }
        AlgorithmId::Simple => {
            // additive threshold-rule bound, expressed as a ratio: (OPT + ζ)/OPT
            let (stats, violations) = scan_single_prediction(
                market,
                &opts,
                x_max,
                y_max,
                |y| Ok(simple_single(market, y)),
                |zeta, opt| (opt + zeta) / opt,
            )?;
            Ok(report(None, None, stats, violations))
        }
        AlgorithmId::Det => {
            let lambda = require_lambda(lambda)?;
            let bound = det_single_bound(market, lambda)?;
            let (stats, violations) = scan_single_prediction(
                market,
                &opts,
                x_max,
                y_max,
                |y| det_single(market, y, lambda),
                |zeta, opt| bound.error_bound(zeta, opt),
            )?;
            Ok(report(Some(lambda), None, stats, violations))
        }
        AlgorithmId::Rand => {
            let lambda = require_lambda(lambda)?;
            let bound = rand_single_bound(market, lambda)?;
            let bn = market.bn();
            // the policy depends on y only through the branch
            let long = rand_single(market, bn, lambda)?;
            let short = rand_single(market, 0.0, lambda)?;
            let long_costs = expected_cost_curve(&long, market, x_max);
            let short_costs = expected_cost_curve(&short, market, x_max);
            let (stats, violations) = scan_branches(
                &opts,
                y_max,
                bn,
                &long_costs,
                &short_costs,
                |zeta, opt| bound.error_bound(zeta, opt),
            );
            Ok(report(Some(lambda), None, stats, violations))
        }
        AlgorithmId::DetMulti | AlgorithmId::RandMulti => {
            let lambda = require_lambda(lambda)?;
            let m = m.ok_or_else(|| Error::ConfigInvalid("m required for multi".into()))?;
            let bound: BoundReport = match algorithm {
                AlgorithmId::DetMulti => det_multi_bound(market, lambda, m)?,
                _ => rand_multi_bound(market, lambda, m)?,
            };
            let mut stats = CellStats::empty();
            let mut violations = Vec::new();
            for family in multi_prediction_family(m, market.bn(), y_max) {
                let preds = PredictionSet::new(family.clone())?;
                let costs = match algorithm {
                    AlgorithmId::DetMulti => {
                        let d = det_multi(market, &preds, lambda, true)?;
                        cost_curve(market, &d, x_max)
                    }
                    _ => {
                        let p = rand_multi(market, &preds, lambda)?;
                        expected_cost_curve(&p, market, x_max)
                    }
                };
                let (s, raw) = scan_x(&costs, &opts, |x, opt| {
                    bound.error_bound(preds.prediction_error(Instance(x)), opt)
                });
                stats = stats.merge(s);
                violations.extend(raw.into_iter().map(|(x, realized, b)| Violation {
                    x,
                    y: None,
                    predictions: Some(family.clone()),
                    realized,
                    bound: b,
                }));
            }
            Ok(report(Some(lambda), Some(m), stats, violations))
        }
        AlgorithmId::DetMultiNoPlusOne => Err(Error::ConfigInvalid(
            "no theoretical bound covers det-multi without the +1 term".into(),
        )),
    }
}

fn require_lambda(lambda: Option<f64>) -> Result<f64> {
    lambda.ok_or_else(|| Error::ConfigInvalid("lambda required for this algorithm".into()))
}

/// Scans the full (x, y) grid for a deterministic single-prediction
/// algorithm. The decision depends on y only through the branch `y >= b_n`,
/// but the decision closure is called per y for generality.
fn scan_single_prediction<D, B>(
    market: &Market,
    opts: &[f64],
    x_max: u32,
    y_max: u32,
    decide: D,
    bound: B,
) -> Result<(CellStats, Vec<Violation>)>
where
    D: Fn(f64) -> Result<Decision>,
    B: Fn(f64, f64) -> f64 + Sync,
{
    let bn = market.bn();
    let long = decide(bn)?;
    let short = decide(0.0)?;
    let long_costs = cost_curve(market, &long, x_max);
    let short_costs = cost_curve(market, &short, x_max);
    Ok(scan_branches(opts, y_max, bn, &long_costs, &short_costs, bound))
}

fn scan_branches<B>(
    opts: &[f64],
    y_max: u32,
    bn: f64,
    long_costs: &[f64],
    short_costs: &[f64],
    bound: B,
) -> (CellStats, Vec<Violation>)
where
    B: Fn(f64, f64) -> f64 + Sync,
{
    let per_y: Vec<(CellStats, Vec<Violation>)> = (1..=y_max)
        .into_par_iter()
        .map(|y| {
            let yf = y as f64;
            let costs = if yf >= bn { long_costs } else { short_costs };
            let (stats, raw) = scan_x(costs, opts, |x, opt| bound((yf - x as f64).abs(), opt));
            let violations = raw
                .into_iter()
                .map(|(x, realized, b)| Violation {
                    x,
                    y: Some(yf),
                    predictions: None,
                    realized,
                    bound: b,
                })
                .collect();
            (stats, violations)
        })
        .collect();
    let mut stats = CellStats::empty();
    let mut violations = Vec::new();
    for (s, v) in per_y {
        stats = stats.merge(s);
        violations.extend(v);
    }
    (stats, violations)
}

/// Finds the grid λ minimizing the worst-case `error_bound` at an assumed
/// prediction error (worst case over OPT is OPT = 1 in normalized units).
/// Ties break toward the smallest λ; grid points outside the algorithm's
/// valid range are skipped.
pub fn grid_search_lambda(
    algorithm: AlgorithmId,
    market: &Market,
    zeta_assumed: f64,
    lambda_grid: &[f64],
    m: Option<usize>,
) -> Result<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for &lambda in lambda_grid {
        let bound = match algorithm {
            AlgorithmId::Det => det_single_bound(market, lambda),
            AlgorithmId::Rand => rand_single_bound(market, lambda),
            AlgorithmId::DetMulti => det_multi_bound(
                market,
                lambda,
                m.ok_or_else(|| Error::ConfigInvalid("m required".into()))?,
            ),
            AlgorithmId::RandMulti => rand_multi_bound(
                market,
                lambda,
                m.ok_or_else(|| Error::ConfigInvalid("m required".into()))?,
            ),
            _ => Err(Error::ConfigInvalid(
                "lambda search applies to the learning-augmented algorithms with bounds".into(),
            )),
        };
        let bound = match bound {
            Ok(b) => b,
            Err(Error::LambdaOutOfRange { .. }) | Err(Error::InfeasibleBound { .. }) => continue,
            Err(e) => return Err(e),
        };
        let value = bound.error_bound(zeta_assumed, 1.0);
        if best.map_or(true, |(_, v)| value < v) {
            best = Some((lambda, value));
        }
    }
    best.ok_or_else(|| Error::ConfigInvalid("no grid lambda inside the valid range".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_shop() -> Market {
        Market::build(&[(1.0, 100.0), (1.25, 80.0)]).unwrap()
    }

    fn six_shop() -> Market {
        Market::build(&[
            (1.0, 100.0),
            (1.05, 95.0),
            (1.10, 90.0),
            (1.15, 85.0),
            (1.20, 80.0),
            (1.25, 75.0),
        ])
        .unwrap()
    }

    #[test]
    fn oracle_matches_offline_optimal_on_spot_checks() {
        let m = six_shop();
        assert_eq!(brute_force_opt(&m, Instance(50)).unwrap(), 50.0);
        assert_eq!(brute_force_opt(&m, Instance(200)).unwrap(), 75.0);
        assert_eq!(brute_force_opt(&m, Instance(1)).unwrap(), 1.0);
        assert!(matches!(
            brute_force_opt(&m, Instance(ORACLE_X_MAX + 1)),
            Err(Error::OracleScaleExceeded { .. })
        ));
    }

    #[test]
    fn bdoa_worst_case_at_break_even() {
        let m = two_shop();
        let r = worst_case_ratio(AlgorithmId::Bdoa, &m, "two-shop", None, 1000, 0, None).unwrap();
        assert!(r.passed());
        assert!((r.max_observed_ratio - 2.234375).abs() < 1e-12);
        assert_eq!(r.argmax_x, 80);
    }

    #[test]
    fn det_single_compliance_small_grid() {
        let m = two_shop();
        let r =
            worst_case_ratio(AlgorithmId::Det, &m, "two-shop", Some(0.5), 300, 300, None).unwrap();
        assert!(r.passed(), "margin {}", r.max_bound_margin);
        assert!(r.max_observed_ratio <= 3.75 + 1e-9);
    }

    #[test]
    fn rand_single_compliance_small_grid() {
        let m = two_shop();
        let r =
            worst_case_ratio(AlgorithmId::Rand, &m, "two-shop", Some(0.5), 300, 300, None).unwrap();
        assert!(r.passed(), "margin {}", r.max_bound_margin);
    }

    #[test]
    fn multi_compliance_small_grid() {
        let m = two_shop();
        for alg in [AlgorithmId::DetMulti, AlgorithmId::RandMulti] {
            let r = worst_case_ratio(alg, &m, "two-shop", Some(0.5), 300, 300, Some(3)).unwrap();
            assert!(r.passed(), "{alg}: margin {}", r.max_bound_margin);
        }
    }

    #[test]
    fn lambda_search_monotone_cases() {
        let m = two_shop();
        let grid: Vec<f64> = (1..=19).map(|i| i as f64 * 0.05).collect();
        let (best, _) = grid_search_lambda(AlgorithmId::Det, &m, 0.0, &grid, None).unwrap();
        assert!((best - 0.05).abs() < 1e-12);
        let (best, _) =
            grid_search_lambda(AlgorithmId::Det, &m, f64::INFINITY, &grid, None).unwrap();
        assert!((best - 0.95).abs() < 1e-12);
        let (best, _) = grid_search_lambda(AlgorithmId::Rand, &m, 0.0, &grid, None).unwrap();
        assert!((best - 0.05).abs() < 1e-12); // smallest grid point inside (1/80, 1)
    }
}
