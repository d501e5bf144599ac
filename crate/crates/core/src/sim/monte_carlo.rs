//! Monte Carlo ranging error of the correlator-peak estimator.
//!
//! Trial `t` draws everything (true distance, noise) from its own ChaCha
//! stream `(seed, t)`, and per-trial errors are reduced in trial order, so
//! results do not depend on how trials are spread over threads. Sweeping
//! several SNRs reuses each trial's unit-SNR noise draw scaled by
//! `1/sqrt(SNR)`, which makes [`monte_carlo_sweep`] agree exactly with
//! per-SNR [`monte_carlo_mse`] calls.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::estimator::{argmax_first, AcfInterpolant};
use super::noise::{NoiseMethod, NoiseSynth};
use crate::error::{invalid, Result};
use crate::grid::AcfVector;
use crate::snr::SnrValue;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// How the true distance is drawn from the uniform prior on `[0, eps_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TruthSampling {
    /// Uniform over the grid points; the clean correlator output is the
    /// ACF sampled at grid lags.
    #[default]
    OnGrid,
    /// Uniform over the interval; the ACF is evaluated off-grid through its
    /// cosine series.
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub snr: SnrValue,
    pub trials: usize,
    pub seed: u64,
    pub truth: TruthSampling,
    pub noise: NoiseMethod,
}

impl SimConfig {
    pub fn new(snr: SnrValue, trials: usize, seed: u64) -> Self {
        Self { snr, trials, seed, truth: TruthSampling::default(), noise: NoiseMethod::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub snr: SnrValue,
    pub trials: usize,
    pub seed: u64,
    pub mse: f64,
    pub mse_ci95: (f64, f64),
    /// Absolute errors, ascending.
    pub abs_errors: Vec<f64>,
}

impl SimResult {
    fn from_errors(snr: SnrValue, seed: u64, mut abs_errors: Vec<f64>) -> Self {
        let t = abs_errors.len() as f64;
        let mse = abs_errors.iter().map(|e| e * e).sum::<f64>() / t;
        let var = if abs_errors.len() > 1 {
            abs_errors.iter().map(|e| (e * e - mse).powi(2)).sum::<f64>() / (t - 1.0)
        } else {
            0.0
        };
        let half = Z95 * (var / t).sqrt();
        abs_errors.sort_by(f64::total_cmp);
        Self {
            snr,
            trials: abs_errors.len(),
            seed,
            mse,
            mse_ci95: (mse - half, mse + half),
            abs_errors,
        }
    }

    /// Half-width of the 95% confidence interval.
    pub fn ci_half_width(&self) -> f64 {
        0.5 * (self.mse_ci95.1 - self.mse_ci95.0)
    }

    /// Standard error of the MSE estimate.
    pub fn std_error(&self) -> f64 {
        self.ci_half_width() / Z95
    }

    /// Empirical CDF as `(error, P(|e| <= error))` at each distinct error.
    pub fn cdf(&self) -> Vec<(f64, f64)> {
        let t = self.abs_errors.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (i, &e) in self.abs_errors.iter().enumerate() {
            let p = (i + 1) as f64 / t;
            match out.last_mut() {
                Some(last) if last.0 == e => last.1 = p,
                _ => out.push((e, p)),
            }
        }
        out
    }

    /// `P(|e| <= x)`.
    pub fn cdf_at(&self, x: f64) -> f64 {
        let k = self.abs_errors.partition_point(|&e| e <= x);
        k as f64 / self.abs_errors.len() as f64
    }
}

/// Per-trial random stream.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

struct TrialBuffers {
    normals: Vec<f64>,
    noise: Vec<f64>,
    clean: Vec<f64>,
    z: Vec<f64>,
}

/// `cos` / `sin` of `omega_k x_j`, for evaluating `R(x_j - d)` as
/// `sum_k w_k (cos(w x_j) cos(w d) + sin(w x_j) sin(w d))`.
struct PhaseTables {
    bins: usize,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl PhaseTables {
    fn new(acf: &AcfInterpolant) -> Self {
        let grid = acf.grid();
        let bins = acf.omega().len();
        let mut cos = Vec::with_capacity(grid.n() * bins);
        let mut sin = Vec::with_capacity(grid.n() * bins);
        for j in 0..grid.n() {
            for w in acf.omega() {
                let (s, c) = (w * grid.point(j)).sin_cos();
                cos.push(c);
                sin.push(s);
            }
        }
        Self { bins, cos, sin }
    }

    fn shifted(&self, acf: &AcfInterpolant, d: f64, out: &mut [f64]) {
        let (wc, ws): (Vec<f64>, Vec<f64>) = acf
            .omega()
            .iter()
            .zip(acf.weights())
            .map(|(w, p)| {
                let (s, c) = (w * d).sin_cos();
                (p * c, p * s)
            })
            .unzip();
        let rows = self.cos.chunks_exact(self.bins).zip(self.sin.chunks_exact(self.bins));
        for (o, (rc, rs)) in out.iter_mut().zip(rows) {
            *o = rc.iter().zip(&wc).map(|(a, b)| a * b).sum::<f64>()
                + rs.iter().zip(&ws).map(|(a, b)| a * b).sum::<f64>();
        }
    }
}

/// Ranging MSE at one SNR.
pub fn monte_carlo_mse(r: &AcfVector, cfg: &SimConfig) -> Result<SimResult> {
    Ok(monte_carlo_sweep(r, &[cfg.snr], cfg)?.pop().expect("one SNR in, one result out"))
}

/// Ranging MSE at several SNRs from shared draws; `cfg.snr` is ignored.
pub fn monte_carlo_sweep(r: &AcfVector, snrs: &[SnrValue], cfg: &SimConfig) -> Result<Vec<SimResult>> {
    cfg.validate()?;
    if snrs.is_empty() {
        return Err(invalid("SNR list is empty"));
    }
    let synth = NoiseSynth::new(r, cfg.noise)?;
    let acf = AcfInterpolant::new(r)?;
    let grid = *r.grid();
    let n = grid.n();
    let samples = acf.grid_samples();
    let tables = match cfg.truth {
        TruthSampling::OnGrid => None,
        TruthSampling::Continuous => Some(PhaseTables::new(&acf)),
    };
    let inv_sqrt: Vec<f64> = snrs.iter().map(|s| s.linear().sqrt().recip()).collect();

    let per_trial: Vec<Vec<f64>> = (0..cfg.trials)
        .into_par_iter()
        .map_init(
            || TrialBuffers {
                normals: Vec::with_capacity(n),
                noise: vec![0.0; n],
                clean: vec![0.0; n],
                z: vec![0.0; n],
            },
            |buf, t| {
                let mut rng = trial_rng(cfg.seed, t as u64);
                let d = match &tables {
                    None => {
                        let j0 = rng.random_range(0..n);
                        for (j, c) in buf.clean.iter_mut().enumerate() {
                            *c = samples[j.abs_diff(j0)];
                        }
                        grid.point(j0)
                    }
                    Some(tab) => {
                        let d = rng.random::<f64>() * grid.eps_max();
                        tab.shifted(&acf, d, &mut buf.clean);
                        d
                    }
                };
                synth.sample_into(&mut rng, &mut buf.normals, &mut buf.noise);
                inv_sqrt
                    .iter()
                    .map(|&s| {
                        for ((z, c), w) in buf.z.iter_mut().zip(&buf.clean).zip(&buf.noise) {
                            *z = c + s * w;
                        }
                        (grid.point(argmax_first(&buf.z)) - d).abs()
                    })
                    .collect()
            },
        )
        .collect();

    Ok(snrs
        .iter()
        .enumerate()
        .map(|(k, &snr)| {
            let errs = per_trial.iter().map(|v| v[k]).collect();
            SimResult::from_errors(snr, cfg.seed, errs)
        })
        .collect())
}
