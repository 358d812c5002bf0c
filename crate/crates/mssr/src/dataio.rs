//! File formats: market CSV, viewership CSV, results CSV, compliance JSON
//! and the experiment config JSON.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::ComplianceReport;
use crate::error::{Error, Result};
use crate::experiments::{ExperimentConfig, RealConfig, ResultRow};
use crate::market::Market;

/// A discrete distribution on `{1..E}` built from viewership counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    /// `mass[i]` is P(X = i+1); sums to 1.
    mass: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn new(mass: Vec<f64>) -> Result<EmpiricalDistribution> {
        if mass.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        if mass.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::ConfigInvalid("probability mass must be finite and >= 0".into()));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::ConfigInvalid(format!("probability mass sums to {total}, not 1")));
        }
        Ok(EmpiricalDistribution { mass })
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Largest supported value E.
    pub fn support_end(&self) -> u32 {
        self.mass.len() as u32
    }

    /// Inverse-CDF sampling: maps `u ∈ [0, 1)` to a value in `{1..E}`.
    pub fn sample(&self, u: f64) -> u32 {
        let mut cdf = 0.0;
        for (i, &p) in self.mass.iter().enumerate() {
            cdf += p;
            if u < cdf {
                return (i + 1) as u32;
            }
        }
        self.mass.len() as u32
    }

    pub fn mean(&self) -> f64 {
        self.mass
            .iter()
            .enumerate()
            .map(|(i, &p)| (i + 1) as f64 * p)
            .sum()
    }
}

/// Converts per-episode viewer counts into the distribution of "episodes
/// watched". A count for episode `e` is read as the number of viewers who
/// watched at least `e` episodes (a survival curve), so
/// P(X = e) ∝ count(e) − count(e+1), with count(E+1) = 0. Increases in the
/// curve are physically impossible and get clamped with a warning.
pub fn viewership_to_distribution(rows: &[(u32, f64)]) -> Result<EmpiricalDistribution> {
    if rows.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    for (i, &(episode, _)) in rows.iter().enumerate() {
        let expected = (i + 1) as u32;
        if episode != expected {
            return Err(Error::NonContiguousEpisodes { row: i + 1, episode, expected });
        }
    }
    let mut survival: Vec<f64> = rows.iter().map(|&(_, v)| v.max(0.0)).collect();
    for i in 1..survival.len() {
        if survival[i] > survival[i - 1] {
            log::warn!(
                "viewership rises from episode {} to {} ({} -> {}); clamping",
                i,
                i + 1,
                survival[i - 1],
                survival[i]
            );
            survival[i] = survival[i - 1];
        }
    }
    let total = survival[0];
    if total <= 0.0 {
        return Err(Error::AllZeroCounts);
    }
    let mut mass: Vec<f64> = Vec::with_capacity(survival.len());
    for i in 0..survival.len() {
        let next = if i + 1 < survival.len() { survival[i + 1] } else { 0.0 };
        mass.push((survival[i] - next) / total);
    }
    EmpiricalDistribution::new(mass)
}

#[derive(Debug, Deserialize)]
struct MarketRecord {
    rent: f64,
    buy: f64,
}

/// Reads a market CSV with header `rent,buy`, one shop per row.
pub fn load_market(path: &Path) -> Result<Market> {
    let mut reader = csv::Reader::from_reader(BufReader::new(File::open(path)?));
    let mut shops = Vec::new();
    for (i, record) in reader.deserialize::<MarketRecord>().enumerate() {
        let record = record.map_err(|e| Error::ParseError { row: i + 2, message: e.to_string() })?;
        shops.push((record.rent, record.buy));
    }
    Market::build(&shops)
}

/// Writes the market back in input currency, header `rent,buy`.
pub fn write_market<W: Write>(market: &Market, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["rent", "buy"])?;
    for (rent, buy) in market.raw_shops() {
        w.write_record([rent.to_string(), buy.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct ViewershipRecord {
    episode: u32,
    viewers: f64,
}

/// Reads a viewership CSV with header `episode,viewers`.
pub fn load_viewership(path: &Path) -> Result<Vec<(u32, f64)>> {
    let mut reader = csv::Reader::from_reader(BufReader::new(File::open(path)?));
    let mut rows = Vec::new();
    for (i, record) in reader.deserialize::<ViewershipRecord>().enumerate() {
        let record = record.map_err(|e| Error::ParseError { row: i + 2, message: e.to_string() })?;
        rows.push((record.episode, record.viewers));
    }
    Ok(rows)
}

/// Loads a viewership CSV straight into a distribution.
pub fn load_distribution(path: &Path) -> Result<EmpiricalDistribution> {
    viewership_to_distribution(&load_viewership(path)?)
}

/// Writes result rows with the fixed header
/// `algorithm,lambda,delta,sigma,m,gamma,mean_cr,stderr,trials`.
/// Floats use shortest round-trip formatting so output is byte-stable.
pub fn write_results<W: Write>(rows: &[ResultRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "algorithm", "lambda", "delta", "sigma", "m", "gamma", "mean_cr", "stderr", "trials",
    ])?;
    for row in rows {
        w.write_record([
            row.algorithm.clone(),
            row.lambda.to_string(),
            row.delta.to_string(),
            row.sigma.to_string(),
            row.m.to_string(),
            row.gamma.to_string(),
            row.mean_cr.to_string(),
            row.stderr.to_string(),
            row.trials.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads back a results CSV written by [`write_results`].
pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let mut reader = csv::Reader::from_reader(BufReader::new(File::open(path)?));
    let mut rows = Vec::new();
    for (i, record) in reader.deserialize::<ResultRow>().enumerate() {
        rows.push(record.map_err(|e| Error::ParseError { row: i + 2, message: e.to_string() })?);
    }
    Ok(rows)
}

/// Serializes a compliance report as pretty JSON.
pub fn write_compliance<W: Write>(report: &ComplianceReport, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    serde_json::to_writer_pretty(&mut w, report)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Loads a synthetic experiment config (JSON mirror of `ExperimentConfig`).
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    Ok(serde_json::from_str(&text)?)
}

/// Loads a real-data run config (JSON mirror of `RealConfig`).
pub fn load_real_config(path: &Path) -> Result<RealConfig> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithm::AlgorithmId;
    use std::io::Write as _;

    #[test]
    fn market_round_trip() {
        let m = Market::build(&[(1.99, 29.99), (2.99, 19.99)]).unwrap();
        let mut buf = Vec::new();
        write_market(&m, &mut buf).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("market.csv");
        std::fs::write(&path, &buf).unwrap();
        let again = load_market(&path).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn market_csv_errors_carry_row_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "rent,buy\n1.0,100\noops,80\n").unwrap();
        match load_market(&path) {
            Err(Error::ParseError { row, .. }) => assert_eq!(row, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn survival_counts_become_a_distribution() {
        // 10 viewers saw >= 1 episode, 6 saw >= 2, 1 saw all 3
        let rows = vec![(1, 10.0), (2, 6.0), (3, 1.0)];
        let d = viewership_to_distribution(&rows).unwrap();
        assert_eq!(d.support_end(), 3);
        assert!((d.mass()[0] - 0.4).abs() < 1e-12);
        assert!((d.mass()[1] - 0.5).abs() < 1e-12);
        assert!((d.mass()[2] - 0.1).abs() < 1e-12);
        assert!((d.mean() - 1.7).abs() < 1e-12);
    }

    #[test]
    fn rising_counts_are_clamped() {
        let rows = vec![(1, 10.0), (2, 12.0), (3, 4.0)];
        let d = viewership_to_distribution(&rows).unwrap();
        // clamped survival: 10, 10, 4
        assert!((d.mass()[0] - 0.0).abs() < 1e-12);
        assert!((d.mass()[1] - 0.6).abs() < 1e-12);
        assert!((d.mass()[2] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn viewership_validation() {
        assert!(matches!(
            viewership_to_distribution(&[]),
            Err(Error::EmptyDistribution)
        ));
        assert!(matches!(
            viewership_to_distribution(&[(1, 5.0), (3, 2.0)]),
            Err(Error::NonContiguousEpisodes { row: 2, episode: 3, expected: 2 })
        ));
        assert!(matches!(
            viewership_to_distribution(&[(1, 0.0), (2, 0.0)]),
            Err(Error::AllZeroCounts)
        ));
    }

    #[test]
    fn sample_covers_support() {
        let d = EmpiricalDistribution::new(vec![0.25, 0.5, 0.25]).unwrap();
        assert_eq!(d.sample(0.0), 1);
        assert_eq!(d.sample(0.249), 1);
        assert_eq!(d.sample(0.25), 2);
        assert_eq!(d.sample(0.749), 2);
        assert_eq!(d.sample(0.75), 3);
        assert_eq!(d.sample(0.999999), 3);
    }

    #[test]
    fn results_round_trip() {
        let rows = vec![ResultRow {
            algorithm: "det".into(),
            lambda: 0.5,
            delta: 0.0,
            sigma: 50.0,
            m: 1,
            gamma: 300.0,
            mean_cr: 1.2345678901234567,
            stderr: 0.01,
            trials: 10000,
        }];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("results.csv");
        let mut buf = Vec::new();
        write_results(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("algorithm,lambda,delta,sigma,m,gamma,mean_cr,stderr,trials\n"));
        std::fs::write(&path, &buf).unwrap();
        assert_eq!(read_results(&path).unwrap(), rows);
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = ExperimentConfig {
            market: "data/markets/sixshop.csv".into(),
            algorithms: vec![AlgorithmId::Det, AlgorithmId::Rand],
            lambdas: vec![0.25, 0.5],
            gamma: 300.0,
            error_models: vec![crate::experiments::ErrorModel::Gaussian {
                delta: 0.0,
                sigma: 100.0,
            }],
            m_values: vec![1],
            trials: 10000,
            master_seed: 7,
            randomized_eval: crate::experiments::EvalMode::Exact,
            plus_one: true,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        let mut f = File::create(&path).unwrap();
        f.write_all(serde_json::to_string_pretty(&cfg).unwrap().as_bytes()).unwrap();
        let loaded = load_config(&path).unwrap();
        assert_eq!(loaded.lambdas, cfg.lambdas);
        assert_eq!(loaded.algorithms, cfg.algorithms);
    }
}
