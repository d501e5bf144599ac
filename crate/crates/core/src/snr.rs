use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Signal-to-noise ratio `E / N0`, stored as a linear power ratio.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct SnrValue(f64);

impl SnrValue {
    pub fn from_linear(linear: f64) -> Result<Self> {
        if linear.is_finite() && linear > 0.0 {
            Ok(Self(linear))
        } else {
            Err(invalid(format!("SNR must be positive and finite, got {linear}")))
        }
    }

    pub fn from_db(db: f64) -> Result<Self> {
        if !db.is_finite() {
            return Err(invalid(format!("SNR in dB must be finite, got {db}")));
        }
        Self::from_linear(10f64.powf(db / 10.0))
    }

    pub fn linear(self) -> f64 {
        self.0
    }

    pub fn db(self) -> f64 {
        10.0 * self.0.log10()
    }
}

impl TryFrom<f64> for SnrValue {
    type Error = crate::Error;
    fn try_from(v: f64) -> Result<Self> {
        Self::from_linear(v)
    }
}

impl From<SnrValue> for f64 {
    fn from(s: SnrValue) -> f64 {
        s.0
    }
}

impl fmt::Display for SnrValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2} dB", self.db())
    }
}
