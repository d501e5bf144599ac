//! Discretized Ziv-Zakai bound on the ranging MSE and its derivatives.
//!
//! For a sampled normalized ACF `r` the objective is
//!
//! ```text
//! zeta(r) = dx * sum_i x_i * Q( sqrt(SNR * (1 - r_i) / 2) )
//! ```
//!
//! which is separable in `r_i`, so the Hessian is diagonal. With
//! `u_i = SNR (1 - r_i) / 2`:
//!
//! ```text
//! d zeta / d r_i     = dx x_i (SNR/4)   e^{-u_i/2} / sqrt(2 pi u_i)
//! d2 zeta / d r_i^2  = dx x_i (SNR/4)^2 e^{-u_i/2} (u_i^{-1/2} + u_i^{-3/2}) / sqrt(2 pi)
//! ```
//!
//! Both blow up at `r_i = 1`; `u_i` is floored at [`U_FLOOR`] there. The
//! pinned coordinate `i = 0` has `x_0 = 0` and is reported as zero.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{AcfVector, Grid};
use crate::snr::SnrValue;

/// Lower bound on `u_i` used by the gradient and Hessian.
pub const U_FLOOR: f64 = 1e-12;

/// Gaussian tail probability `Q(z) = P(N(0,1) > z)`.
pub fn q_function(z: f64) -> f64 {
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

/// Objective value, gradient and Hessian diagonal at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZzbEval {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian_diag: Vec<f64>,
}

#[inline]
fn half_snr_gap(snr: f64, r: f64) -> f64 {
    0.5 * snr * (1.0 - r.min(1.0))
}

pub(crate) fn objective_slice(grid: &Grid, r: &[f64], snr: f64) -> f64 {
    let dx = grid.dx();
    let sum: f64 = r
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &ri)| grid.point(i) * q_function(half_snr_gap(snr, ri).sqrt()))
        .sum();
    dx * sum
}

pub(crate) fn gradient_into(grid: &Grid, r: &[f64], snr: f64, out: &mut [f64]) {
    let dx = grid.dx();
    let c = snr / 4.0 / (2.0 * PI).sqrt();
    out[0] = 0.0;
    for i in 1..r.len() {
        let u = half_snr_gap(snr, r[i]).max(U_FLOOR);
        out[i] = dx * grid.point(i) * c * (-0.5 * u).exp() / u.sqrt();
    }
}

fn hessian_into(grid: &Grid, r: &[f64], snr: f64, out: &mut [f64]) {
    let dx = grid.dx();
    let c = (snr / 4.0).powi(2) / (2.0 * PI).sqrt();
    out[0] = 0.0;
    for i in 1..r.len() {
        let u = half_snr_gap(snr, r[i]).max(U_FLOOR);
        let s = u.sqrt();
        out[i] = dx * grid.point(i) * c * (-0.5 * u).exp() * (1.0 / s + 1.0 / (u * s));
    }
}

/// `dx * sum_i x_i Q(sqrt(SNR (1 - r_i) / 2))`; samples above 1 are clamped.
pub fn zzb_objective(r: &AcfVector, snr: SnrValue) -> f64 {
    objective_slice(r.grid(), r.values(), snr.linear())
}

pub fn zzb_gradient(r: &AcfVector, snr: SnrValue) -> Vec<f64> {
    let mut g = vec![0.0; r.len()];
    gradient_into(r.grid(), r.values(), snr.linear(), &mut g);
    g
}

pub fn zzb_hessian_diag(r: &AcfVector, snr: SnrValue) -> Vec<f64> {
    let mut h = vec![0.0; r.len()];
    hessian_into(r.grid(), r.values(), snr.linear(), &mut h);
    h
}

pub fn zzb_eval(r: &AcfVector, snr: SnrValue) -> ZzbEval {
    ZzbEval {
        value: zzb_objective(r, snr),
        gradient: zzb_gradient(r, snr),
        hessian_diag: zzb_hessian_diag(r, snr),
    }
}

/// Objective at each SNR for a fixed waveform.
pub fn zzb_curve(r: &AcfVector, snrs: &[SnrValue]) -> Result<Vec<f64>> {
    if snrs.is_empty() {
        return Err(Error::InvalidArgument("SNR list is empty".into()));
    }
    Ok(snrs.iter().map(|&s| zzb_objective(r, s)).collect())
}

/// Value of the objective for `r = 1`, i.e. the prior-limited ceiling
/// `dx * sum_i x_i / 2`.
pub fn zzb_ceiling(grid: &Grid) -> f64 {
    0.5 * grid.dx() * (0..grid.n()).map(|i| grid.point(i)).sum::<f64>()
}
