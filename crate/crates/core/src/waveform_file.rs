//! Waveform JSON files.
//!
//! ```json
//! { "version": 1, "n": 1000, "eps_max": 2.0, "b_dis": 40, "snr_d_db": 18.0,
//!   "r": [...], "spectrum": [...],
//!   "meta": { "objective": ..., "iterations": ..., "converged": true } }
//! ```
//!
//! Floats are written with 17 significant digits so that reading a file back
//! reproduces every sample bit for bit.

use std::fs;
use std::path::Path;

use serde::ser::{Error as _, SerializeSeq};
use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::dct::Dct4;
use crate::error::{Error, Result};
use crate::grid::{AcfVector, Grid};
use crate::spectrum::check_band;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct WaveformMeta {
    #[serde(serialize_with = "ser_opt_f64")]
    pub objective: Option<f64>,
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
    /// Pre-projection step used by the design run.
    #[serde(default, skip_serializing_if = "Option::is_none", serialize_with = "ser_opt_f64")]
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveformFile {
    pub version: u32,
    pub n: usize,
    #[serde(serialize_with = "ser_f64")]
    pub eps_max: f64,
    pub b_dis: usize,
    #[serde(serialize_with = "ser_opt_f64")]
    pub snr_d_db: Option<f64>,
    #[serde(serialize_with = "ser_vec_f64")]
    pub r: Vec<f64>,
    #[serde(serialize_with = "ser_vec_f64")]
    pub spectrum: Vec<f64>,
    pub meta: WaveformMeta,
}

fn raw(v: f64) -> std::result::Result<Box<RawValue>, String> {
    if !v.is_finite() {
        return Err(format!("cannot write non-finite value {v}"));
    }
    RawValue::from_string(format!("{v:.16e}")).map_err(|e| e.to_string())
}

fn ser_f64<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    raw(*v).map_err(S::Error::custom)?.serialize(s)
}

fn ser_opt_f64<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => ser_f64(v, s),
        None => s.serialize_none(),
    }
}

fn ser_vec_f64<S: Serializer>(v: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&raw(*x).map_err(S::Error::custom)?)?;
    }
    seq.end()
}

impl WaveformFile {
    pub fn from_acf(r: &AcfVector, b_dis: usize, snr_d_db: Option<f64>, meta: WaveformMeta) -> Self {
        let grid = r.grid();
        Self {
            version: FORMAT_VERSION,
            n: grid.n(),
            eps_max: grid.eps_max(),
            b_dis,
            snr_d_db,
            r: r.values().to_vec(),
            spectrum: Dct4::new(grid.n()).apply(r.values()),
            meta,
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n, self.eps_max)
    }

    pub fn acf(&self) -> Result<AcfVector> {
        AcfVector::new(self.grid()?, self.r.clone())
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported version {}", self.version)));
        }
        let grid = self.grid()?;
        check_band(&grid, self.b_dis)?;
        for (name, v) in [("r", &self.r), ("spectrum", &self.spectrum)] {
            if v.len() != self.n {
                return Err(Error::Format(format!(
                    "`{name}` has {} entries, expected n = {}",
                    v.len(),
                    self.n
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: Self = serde_json::from_str(s)?;
        f.validate()?;
        Ok(f)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}
