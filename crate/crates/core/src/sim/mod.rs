//! Matched-filter ranging simulator.

mod cdf;
mod estimator;
mod monte_carlo;
mod noise;

pub use cdf::{error_cdf_report, CdfTable, Crossover};
pub use estimator::{argmax_first, estimate_delay, evaluate_acf_at, AcfInterpolant};
pub use monte_carlo::{
    monte_carlo_mse, monte_carlo_sweep, trial_rng, SimConfig, SimResult, TruthSampling,
};
pub use noise::{synth_noise, NoiseMethod, NoiseSynth, CHOLESKY_JITTER};
