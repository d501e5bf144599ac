use std::f64::consts::PI;

use crate::dct::Dct4;
use crate::error::{invalid, Error, Result};
use crate::grid::{AcfVector, Grid};

/// Bins below this fraction of the strongest bin are transform round-off.
pub const POWER_FLOOR: f64 = 1e-12;

/// Continuous normalized ACF of the waveform described by `r`.
///
/// The DCT-IV coefficients `p_k` of `r` are the power carried at the bin
/// frequencies `f_k`, so the waveform's ACF is the even cosine series
///
/// `R(x) = sum_k p_k cos(2 pi f_k x) / sum_k p_k`
///
/// over bins with `p_k` above [`POWER_FLOOR`] times the strongest one. The DCT-IV basis samples the same cosines half a
/// grid step off the lattice: `r_i = s * R(x_i + dx/2)` with
/// `s = sqrt(2/n) sum_k p_k` (see [`AcfInterpolant::half_step_scale`]).
/// Unlike `Toeplitz(r)`, the matrix `R(|x_i - x_j|)` is always positive
/// semidefinite.
#[derive(Debug, Clone)]
pub struct AcfInterpolant {
    grid: Grid,
    /// Bin indices with power above [`POWER_FLOOR`].
    bins: Vec<usize>,
    /// `2 pi f_k` per active bin.
    omega: Vec<f64>,
    /// Normalized power per active bin; sums to 1.
    weight: Vec<f64>,
    half_step_scale: f64,
}

impl AcfInterpolant {
    pub fn new(r: &AcfVector) -> Result<Self> {
        let grid = *r.grid();
        let n = grid.n();
        let coeffs = Dct4::new(n).apply(r.values());
        let peak = coeffs.iter().fold(0.0f64, |m, &v| m.max(v));
        let bins: Vec<usize> = (0..n).filter(|&k| coeffs[k] > POWER_FLOOR * peak).collect();
        let total: f64 = bins.iter().map(|&k| coeffs[k]).sum();
        if bins.is_empty() || !(total > 0.0) {
            return Err(Error::DegenerateSpectrum);
        }
        Ok(Self {
            grid,
            omega: bins.iter().map(|&k| 2.0 * PI * grid.freq(k)).collect(),
            weight: bins.iter().map(|&k| coeffs[k] / total).collect(),
            half_step_scale: (2.0 / n as f64).sqrt() * total,
            bins,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn bins(&self) -> &[usize] {
        &self.bins
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn weights(&self) -> &[f64] {
        &self.weight
    }

    /// `s` in `r_i = s * R(x_i + dx/2)`, exact when `r` has no negative
    /// spectral coefficients.
    pub fn half_step_scale(&self) -> f64 {
        self.half_step_scale
    }

    /// Evaluates without range checking.
    pub fn eval(&self, lag: f64) -> f64 {
        self.omega.iter().zip(&self.weight).map(|(w, c)| c * (w * lag).cos()).sum()
    }

    pub fn at(&self, lag: f64) -> Result<f64> {
        if !(0.0..=self.grid.eps_max()).contains(&lag) {
            return Err(invalid(format!("lag {lag} outside [0, {}]", self.grid.eps_max())));
        }
        Ok(self.eval(lag))
    }

    /// `R(x_j)` for every grid lag.
    pub fn grid_samples(&self) -> Vec<f64> {
        (0..self.grid.n()).map(|j| self.eval(self.grid.point(j))).collect()
    }
}

pub fn evaluate_acf_at(r: &AcfVector, lag: f64) -> Result<f64> {
    AcfInterpolant::new(r)?.at(lag)
}

/// Index of the first maximum of `z`.
pub fn argmax_first(z: &[f64]) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, &v) in z.iter().enumerate() {
        if v > best_v {
            best_v = v;
            best = i;
        }
    }
    best
}

/// Correlator-peak delay estimate on the grid; ties go to the smallest lag.
pub fn estimate_delay(z: &[f64], grid: &Grid) -> Result<f64> {
    if z.len() != grid.n() {
        return Err(Error::LengthMismatch { expected: grid.n(), found: z.len() });
    }
    Ok(grid.point(argmax_first(z)))
}
