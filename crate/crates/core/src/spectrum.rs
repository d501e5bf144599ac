//! Discrete power spectra of sampled ACFs, benchmark waveforms and the
//! Cramér-Rao bound.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dct::Dct4;
use crate::error::{invalid, Error, Result};
use crate::grid::{AcfVector, Grid};
use crate::snr::SnrValue;

/// DCT-IV coefficients of an [`AcfVector`] together with the band limit.
///
/// `b_dis` counts the in-band bins: bins `0..b_dis` may carry power, bins
/// `b_dis..n` must be zero for a feasible waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    coeffs: Vec<f64>,
    b_dis: usize,
}

impl Spectrum {
    pub fn new(grid: Grid, coeffs: Vec<f64>, b_dis: usize) -> Result<Self> {
        if coeffs.len() != grid.n() {
            return Err(Error::LengthMismatch { expected: grid.n(), found: coeffs.len() });
        }
        check_band(&grid, b_dis)?;
        Ok(Self { grid, coeffs, b_dis })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn b_dis(&self) -> usize {
        self.b_dis
    }

    /// Frequency of bin `k` (0-based) in cycles per distance unit.
    pub fn freq(&self, k: usize) -> f64 {
        self.grid.freq(k)
    }

    /// Highest in-band frequency.
    pub fn band_edge(&self) -> f64 {
        self.grid.freq(self.b_dis - 1)
    }
}

/// Moments of a discrete PSD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralStats {
    pub rms_bandwidth: f64,
    pub total_power: f64,
    pub mean_frequency: f64,
}

pub(crate) fn check_band(grid: &Grid, b_dis: usize) -> Result<()> {
    if b_dis == 0 || b_dis > grid.n() {
        return Err(invalid(format!("b_dis must be in 1..={}, got {b_dis}", grid.n())));
    }
    Ok(())
}

pub fn dct_forward(r: &AcfVector, b_dis: usize) -> Result<Spectrum> {
    let coeffs = Dct4::new(r.len()).apply(r.values());
    Spectrum::new(*r.grid(), coeffs, b_dis)
}

pub fn dct_inverse(p: &Spectrum) -> AcfVector {
    let r = Dct4::new(p.coeffs.len()).apply(&p.coeffs);
    AcfVector::new(p.grid, r).expect("transform preserves length and finiteness")
}

/// Scales a PSD so that the resulting ACF has `r_0 = 1` exactly.
fn normalized_from_psd(grid: Grid, mut psd: Vec<f64>) -> AcfVector {
    let dct = Dct4::new(grid.n());
    let mut r = dct.apply(&psd);
    let scale = r[0];
    debug_assert!(scale > 0.0);
    psd.iter_mut().for_each(|p| *p /= scale);
    r.iter_mut().for_each(|v| *v /= scale);
    r[0] = 1.0;
    AcfVector::new(grid, r).expect("finite")
}

/// ACF of the band-limited sinc pulse: flat PSD over the `b_dis` in-band
/// bins, scaled so that `r_0 = 1`.
pub fn make_sinc_acf(grid: Grid, b_dis: usize) -> Result<AcfVector> {
    check_band(&grid, b_dis)?;
    let psd = (0..grid.n()).map(|k| if k < b_dis { 1.0 } else { 0.0 }).collect();
    Ok(normalized_from_psd(grid, psd))
}

/// ACF of a pure tone at the band edge (the CRB-optimal waveform), scaled so
/// that `r_0 = 1`.
pub fn make_single_tone_acf(grid: Grid, b_dis: usize) -> Result<AcfVector> {
    check_band(&grid, b_dis)?;
    let psd = (0..grid.n()).map(|k| if k + 1 == b_dis { 1.0 } else { 0.0 }).collect();
    Ok(normalized_from_psd(grid, psd))
}

/// RMS bandwidth, total power and mean frequency of a PSD.
///
/// Negative coefficients (projection round-off) are treated as zero.
pub fn rms_bandwidth(p: &Spectrum) -> Result<SpectralStats> {
    let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for (k, &c) in p.coeffs.iter().enumerate() {
        let w = c.max(0.0);
        let f = p.freq(k);
        m0 += w;
        m1 += w * f;
        m2 += w * f * f;
    }
    if !(m0 > 0.0) {
        return Err(Error::DegenerateSpectrum);
    }
    Ok(SpectralStats {
        rms_bandwidth: (m2 / m0).sqrt(),
        total_power: m0,
        mean_frequency: m1 / m0,
    })
}

/// Cramér-Rao bound on the distance MSE, `1 / (8 pi^2 beta^2 SNR)` with unit
/// propagation speed.
pub fn crb(p: &Spectrum, snr: SnrValue) -> Result<f64> {
    let beta = rms_bandwidth(p)?.rms_bandwidth;
    crb_from_beta(beta, snr)
}

pub fn crb_from_beta(beta: f64, snr: SnrValue) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::DegenerateSpectrum);
    }
    Ok(1.0 / (8.0 * PI * PI * beta * beta * snr.linear()))
}
