use thiserror::Error;

/// Errors shared across the library.
#[derive(Error, Debug)]
pub enum Error {
    #[error("market must contain at least one shop")]
    EmptyMarket,
    #[error("shop {index}: prices must be positive (rent {rent}, buy {buy})")]
    NonPositivePrice { index: usize, rent: f64, buy: f64 },
    #[error("shops {first} and {second} violate dominance: rents must be strictly increasing and buys strictly decreasing")]
    DominanceViolation { first: usize, second: usize },
    #[error("b_n = {bn} after normalization; buying at shop n on day 1 dominates everything (need b_n > 1)")]
    DegenerateBn { bn: f64 },
    #[error("lambda must be in ({low}, {high}) exclusive, got {value}")]
    LambdaOutOfRange { value: f64, low: f64, high: f64 },
    #[error("2z-m = 0 with the +1 term disabled (m = {m}, z = {z}); break-even denominator is zero")]
    ZeroDenominator { m: usize, z: usize },
    #[error("bound infeasible: lambda/(m+1) = {value} must exceed 1/b_n = {limit}")]
    InfeasibleBound { value: f64, limit: f64 },
    #[error("brute-force oracle limited to x <= {max}, got {x}")]
    OracleScaleExceeded { x: u32, max: u32 },
    #[error("invalid experiment config: {0}")]
    ConfigInvalid(String),
    #[error("empirical distribution has no mass")]
    EmptyDistribution,
    #[error("all viewership counts are zero")]
    AllZeroCounts,
    #[error("episodes must form a contiguous range 1..E (row {row} has episode {episode}, expected {expected})")]
    NonContiguousEpisodes { row: usize, episode: u32, expected: u32 },
    #[error("parse error at row {row}: {message}")]
    ParseError { row: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
