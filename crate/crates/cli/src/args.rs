//! Flag groups and value parsers shared by several commands.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use zzbwave::grid::Grid;
use zzbwave::optimizer::DesignConfig;
use zzbwave::sim::{NoiseMethod, SimConfig, TruthSampling};
use zzbwave::snr::SnrValue;

pub const SEED_ENV: &str = "ZZBWAVE_SEED";

#[derive(Debug, Clone, clap::Args, Serialize, Deserialize)]
pub struct GridArgs {
    /// Number of ACF samples.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Number of DCT-IV bins allowed to carry power.
    #[arg(long, default_value_t = 40)]
    pub b_dis: usize,
    /// Upper end of the delay prior, in samples of the normalized axis.
    #[arg(long, default_value_t = 2.0)]
    pub eps_max: f64,
}

impl GridArgs {
    pub fn grid(&self) -> Result<Grid> {
        Ok(Grid::new(self.n, self.eps_max)?)
    }
}

#[derive(Debug, Clone, clap::Args, Serialize, Deserialize)]
pub struct DesignFlags {
    /// Initial gradient step (default: scaled from the start point).
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Dykstra sweeps per projection.
    #[arg(long)]
    pub dykstra_iters: Option<usize>,
    /// Stopping tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
}

impl DesignFlags {
    pub fn config(&self, snr_d: SnrValue, b_dis: usize) -> Result<DesignConfig> {
        let mut cfg = DesignConfig::new(snr_d, b_dis);
        cfg.sigma = self.sigma;
        if let Some(v) = self.max_iters {
            cfg.max_iters = v;
        }
        if let Some(v) = self.dykstra_iters {
            cfg.projection.max_dykstra_iters = v;
        }
        if let Some(v) = self.tol {
            cfg.stop_tol = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, clap::Args, Serialize, Deserialize)]
pub struct SimFlags {
    /// Monte Carlo trials per SNR.
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    /// Master seed (falls back to $ZZBWAVE_SEED).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Noise synthesis: exact_cholesky, spectral_approx or auto.
    #[arg(long, default_value = "auto", value_parser = parse_noise)]
    pub noise: NoiseMethod,
    /// True-delay prior: on_grid or continuous.
    #[arg(long, default_value = "on_grid", value_parser = parse_truth)]
    pub truth: TruthSampling,
}

impl SimFlags {
    /// Config at `snr`; the seed must already be resolved.
    pub fn config(&self, snr: SnrValue) -> Result<SimConfig> {
        let seed = self.seed.context("no seed given")?;
        let cfg = SimConfig { noise: self.noise, truth: self.truth, ..SimConfig::new(snr, self.trials, seed) };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_snake<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.into())).map_err(|_| format!("unknown value `{s}`"))
}

fn parse_noise(s: &str) -> Result<NoiseMethod, String> {
    parse_snake(s)
}

fn parse_truth(s: &str) -> Result<TruthSampling, String> {
    parse_snake(s)
}

pub fn seed_from_env() -> Result<u64> {
    let v = std::env::var(SEED_ENV).map_err(|_| anyhow::anyhow!("--seed is required (or set {SEED_ENV})"))?;
    v.trim().parse().with_context(|| format!("{SEED_ENV}={v} is not an unsigned integer"))
}

/// `lo:step:hi`, inclusive of `hi` up to rounding.
pub fn parse_range(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>().with_context(|| format!("bad number `{p}` in range `{s}`")))
        .collect::<Result<_>>()?;
    let [lo, step, hi] = parts[..] else { bail!("range `{s}` must look like lo:step:hi") };
    if !(lo.is_finite() && hi.is_finite() && step.is_finite()) || step <= 0.0 || hi < lo {
        bail!("range `{s}` needs finite lo <= hi and step > 0");
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| lo + i as f64 * step).collect())
}

/// Comma-separated list of numbers.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = s
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<f64>().with_context(|| format!("bad number `{p}` in list `{s}`")))
        .collect::<Result<_>>()?;
    if v.is_empty() {
        bail!("list is empty");
    }
    Ok(v)
}

pub fn snrs_from_db(db: &[f64]) -> Result<Vec<SnrValue>> {
    Ok(db.iter().map(|&d| SnrValue::from_db(d)).collect::<zzbwave::Result<_>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("10:1:13").unwrap(), vec![10.0, 11.0, 12.0, 13.0]);
        assert_eq!(parse_range("0:0.1:0.3").unwrap().len(), 4);
        assert_eq!(parse_range("5:2:8").unwrap(), vec![5.0, 7.0]);
        assert_eq!(parse_range("3:1:3").unwrap(), vec![3.0]);
        for bad in ["1:0:3", "3:1:1", "1:2", "a:1:2", "1:-1:3"] {
            assert!(parse_range(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn lists_and_enums() {
        assert_eq!(parse_list("10, 13,18").unwrap(), vec![10.0, 13.0, 18.0]);
        assert!(parse_list("").is_err());
        assert!(parse_list("1,x").is_err());
        assert_eq!(parse_noise("spectral_approx").unwrap(), NoiseMethod::SpectralApprox);
        assert_eq!(parse_truth("continuous").unwrap(), TruthSampling::Continuous);
        assert!(parse_noise("fast").is_err());
    }
}
