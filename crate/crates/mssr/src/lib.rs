//! Multi-shop ski rental: offline optimum, the best deterministic online
//! algorithm, learning-augmented deterministic and randomized policies with
//! one or many predictions, their worst-case guarantees, verification
//! harnesses and Monte Carlo experiment drivers.

pub mod algorithm;
pub mod analysis;
pub mod bounds;
pub mod dataio;
pub mod error;
pub mod experiments;
pub mod market;
pub mod policies;
pub mod util;

pub use algorithm::AlgorithmId;
pub use bounds::{
    bdoa_cr, det_multi_bound, det_single_bound, rand_multi_bound, rand_single_bound, simple_bound,
    BoundReport,
};
pub use dataio::EmpiricalDistribution;
pub use error::{Error, Result};
pub use experiments::{
    multi_prediction_sweep, run_real, run_synthetic, ErrorModel, EvalMode, ExperimentConfig,
    RealConfig, ResultRow,
};
pub use market::{Instance, Market, OfflineAction, Shop};
pub use policies::{
    bdoa, decision_cost, det_multi, det_single, expected_cost, geometric_mass, rand_multi, rand_single,
    sample_buy_day, simple_single, BuyDay, Decision, PredictionSet, RandomizedPolicy,
};
