//! The MSSR instance: shops, price normalization and the offline optimum.
//!
//! All internal computation runs in normalized units with `r_1 = 1`; the
//! original smallest rent is kept as `scale` to report costs in the input
//! currency.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single shop with a daily renting price and a one-time buying price,
/// in normalized units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Shop {
    pub rent: f64,
    pub buy: f64,
}

/// An MSSR market: shops sorted by ascending rent, rents strictly increasing,
/// buys strictly decreasing, `r_1 = 1` after normalization and `b_n > 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Market {
    shops: Vec<Shop>,
    scale: f64,
}

/// The actual number of skiing days, unknown to the online algorithms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Instance(pub u32);

/// What the offline optimum does once `x` is known.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OfflineAction {
    RentAtShop1,
    BuyDay1AtShopN,
}

impl Market {
    /// Builds a market from raw (un-normalized) prices: sorts by rent,
    /// divides every price by the smallest rent and validates the
    /// dominance-free ordering.
    pub fn build(raw_shops: &[(f64, f64)]) -> Result<Market> {
        if raw_shops.is_empty() {
            return Err(Error::EmptyMarket);
        }
        for (i, &(rent, buy)) in raw_shops.iter().enumerate() {
            if !(rent > 0.0) || !(buy > 0.0) || !rent.is_finite() || !buy.is_finite() {
                return Err(Error::NonPositivePrice { index: i + 1, rent, buy });
            }
        }
        let mut sorted: Vec<(f64, f64)> = raw_shops.to_vec();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let scale = sorted[0].0;
        let shops: Vec<Shop> = sorted
            .iter()
            .map(|&(rent, buy)| Shop { rent: rent / scale, buy: buy / scale })
            .collect();
        for i in 1..shops.len() {
            // A shop dominated in both prices is a data-entry mistake, not
            // something to prune silently.
            if shops[i].rent <= shops[i - 1].rent || shops[i].buy >= shops[i - 1].buy {
                return Err(Error::DominanceViolation { first: i, second: i + 1 });
            }
        }
        let bn = shops.last().unwrap().buy;
        if bn <= 1.0 {
            return Err(Error::DegenerateBn { bn });
        }
        Ok(Market { shops, scale })
    }

    pub fn n(&self) -> usize {
        self.shops.len()
    }

    /// Shop by 1-based index.
    pub fn shop(&self, index: usize) -> Shop {
        self.shops[index - 1]
    }

    pub fn shops(&self) -> &[Shop] {
        &self.shops
    }

    /// Normalization factor: the original `r_1`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `b_1`, the largest buying price.
    pub fn b1(&self) -> f64 {
        self.shops[0].buy
    }

    /// `b_n`, the smallest buying price (the break-even threshold).
    pub fn bn(&self) -> f64 {
        self.shops.last().unwrap().buy
    }

    /// `r_n`, the largest renting price.
    pub fn rn(&self) -> f64 {
        self.shops.last().unwrap().rent
    }

    /// Converts a normalized cost back to the input currency.
    pub fn denormalize(&self, cost: f64) -> f64 {
        cost * self.scale
    }

    /// Raw (input currency) prices, for serialization.
    pub fn raw_shops(&self) -> Vec<(f64, f64)> {
        self.shops
            .iter()
            .map(|s| (s.rent * self.scale, s.buy * self.scale))
            .collect()
    }

    /// Offline optimal cost and action with `x` known:
    /// `min{x·r_1, b_n} = min{x, b_n}` in normalized units.
    /// Ties go to renting.
    pub fn offline_optimal(&self, x: Instance) -> (f64, OfflineAction) {
        let days = x.0 as f64;
        let bn = self.bn();
        if days <= bn {
            (days, OfflineAction::RentAtShop1)
        } else {
            (bn, OfflineAction::BuyDay1AtShopN)
        }
    }
}

impl Instance {
    pub fn new(x: u32) -> Result<Instance> {
        if x == 0 {
            return Err(Error::ConfigInvalid("skiing days must be >= 1".into()));
        }
        Ok(Instance(x))
    }
}
