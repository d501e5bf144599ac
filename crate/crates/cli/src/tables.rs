//! CSV schemas written and read by the commands.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// `mse.csv`: one row per (waveform, operating SNR).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseRow {
    pub snr_db: f64,
    pub waveform_id: String,
    pub mse: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub trials: usize,
    pub seed: u64,
    pub zzb: f64,
    pub crb: f64,
}

pub const MSE_COLUMNS: &[&str] = &["snr_db", "waveform_id", "mse", "ci_lo", "ci_hi", "trials", "seed", "zzb", "crb"];

/// `cdf.csv`: empirical CDF of the absolute ranging error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfRow {
    pub waveform_id: String,
    pub abs_error: f64,
    pub cum_prob: f64,
}

pub const CDF_COLUMNS: &[&str] = &["waveform_id", "abs_error", "cum_prob"];

/// `adaptive_envelope.csv`: the selected bank entry per operating SNR, with
/// the sinc reference simulated on the same draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRow {
    pub snr_db: f64,
    pub entry: usize,
    pub snr_d_db: f64,
    pub mse: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub sinc_mse: f64,
    pub sinc_ci_lo: f64,
    pub sinc_ci_hi: f64,
}

pub const ENVELOPE_COLUMNS: &[&str] =
    &["snr_db", "entry", "snr_d_db", "mse", "ci_lo", "ci_hi", "sinc_mse", "sinc_ci_lo", "sinc_ci_hi"];

pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads every row of `path`, first checking that the header carries
/// `columns`. Empty files are an error.
pub fn read_rows<T: DeserializeOwned>(path: &Path, columns: &[&str]) -> Result<Vec<T>> {
    let name = path.display();
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("cannot open {name}"))?;
    let header = rdr.headers().with_context(|| format!("{name}: unreadable header"))?.clone();
    if header.is_empty() {
        bail!("{name} is empty");
    }
    if let Some(missing) = columns.iter().find(|c| !header.iter().any(|h| h == **c)) {
        bail!("{name}: missing column `{missing}`");
    }
    let rows = rdr
        .deserialize()
        .enumerate()
        .map(|(i, r)| r.with_context(|| format!("{name}: bad record {}", i + 1)))
        .collect::<Result<Vec<T>>>()?;
    if rows.is_empty() {
        bail!("{name} has no data rows");
    }
    Ok(rows)
}
