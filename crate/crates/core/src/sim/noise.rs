//! Correlated correlator-output noise.
//!
//! The matched-filter output noise is a zero-mean Gaussian process whose
//! covariance is the waveform's normalized ACF scaled by `1/SNR`:
//! `Sigma_jk = R(|x_j - x_k|) / SNR`, with `R` the cosine series of
//! [`AcfInterpolant`]. With that scaling the binary test between two
//! candidate delays `x` apart errs with probability exactly
//! `Q(sqrt(SNR (1 - R(x)) / 2))`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::estimator::AcfInterpolant;
use crate::error::{Error, Result};
use crate::grid::AcfVector;
use crate::snr::SnrValue;

/// Diagonal loading added before factorizing the covariance.
pub const CHOLESKY_JITTER: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMethod {
    /// Cholesky factor of `Sigma + jitter * I`.
    #[default]
    ExactCholesky,
    /// Random-phase synthesis `sum_k sqrt(w_k) (a_k cos(w x) + b_k sin(w x))`
    /// over the active bins. Its covariance is `Sigma` exactly; draws cost
    /// `O(n * bins)` instead of `O(n^2)`.
    SpectralApprox,
    /// `ExactCholesky`, falling back to `SpectralApprox` when the factorization
    /// breaks down numerically.
    Auto,
}

/// Lower-triangular factor, packed row by row.
#[derive(Debug, Clone)]
struct PackedLower {
    n: usize,
    data: Vec<f64>,
}

impl PackedLower {
    fn row(&self, i: usize) -> &[f64] {
        let start = i * (i + 1) / 2;
        &self.data[start..start + i + 1]
    }
}

/// Dense Cholesky of the symmetric Toeplitz matrix with first column `col`
/// plus `jitter` on the diagonal. Fails with the index of the first
/// non-positive pivot.
fn toeplitz_cholesky(col: &[f64], jitter: f64) -> Result<PackedLower> {
    let n = col.len();
    let mut data = vec![0.0; n * (n + 1) / 2];
    let off = |i: usize| i * (i + 1) / 2;
    for i in 0..n {
        for j in 0..=i {
            let a = col[i - j] + if i == j { jitter } else { 0.0 };
            let (ri, rj) = (off(i), off(j));
            let dot: f64 = data[ri..ri + j].iter().zip(&data[rj..rj + j]).map(|(x, y)| x * y).sum();
            let v = a - dot;
            if i == j {
                if !(v > 0.0) {
                    return Err(Error::Covariance { minor: i });
                }
                data[ri + i] = v.sqrt();
            } else {
                data[ri + j] = v / data[rj + j];
            }
        }
    }
    Ok(PackedLower { n, data })
}

#[derive(Debug, Clone)]
enum Kind {
    Cholesky(PackedLower),
    Spectral {
        /// `sqrt(w_k)` per active bin.
        amp: Vec<f64>,
        /// cos / sin of `omega_k x_j`, laid out `[j * bins + m]`.
        cos: Vec<f64>,
        sin: Vec<f64>,
    },
}

/// Draws unit-SNR noise vectors on the waveform's own grid.
#[derive(Debug, Clone)]
pub struct NoiseSynth {
    n: usize,
    method: NoiseMethod,
    kind: Kind,
}

fn spectral_kind(it: &AcfInterpolant) -> Kind {
    let grid = it.grid();
    let m = it.bins().len();
    let mut cos = vec![0.0; grid.n() * m];
    let mut sin = vec![0.0; grid.n() * m];
    for j in 0..grid.n() {
        let x = grid.point(j);
        for (b, w) in it.omega().iter().enumerate() {
            let (s, c) = (w * x).sin_cos();
            cos[j * m + b] = c;
            sin[j * m + b] = s;
        }
    }
    Kind::Spectral { amp: it.weights().iter().map(|w| w.sqrt()).collect(), cos, sin }
}

impl NoiseSynth {
    pub fn new(r: &AcfVector, method: NoiseMethod) -> Result<Self> {
        let it = AcfInterpolant::new(r)?;
        Self::build(&it, &it.grid_samples(), method)
    }

    fn build(it: &AcfInterpolant, col: &[f64], method: NoiseMethod) -> Result<Self> {
        let (method, kind) = match method {
            NoiseMethod::ExactCholesky => {
                (method, Kind::Cholesky(toeplitz_cholesky(col, CHOLESKY_JITTER)?))
            }
            NoiseMethod::SpectralApprox => (method, spectral_kind(it)),
            NoiseMethod::Auto => match toeplitz_cholesky(col, CHOLESKY_JITTER) {
                Ok(l) => (NoiseMethod::ExactCholesky, Kind::Cholesky(l)),
                Err(Error::Covariance { .. }) => (NoiseMethod::SpectralApprox, spectral_kind(it)),
                Err(e) => return Err(e),
            },
        };
        Ok(Self { n: col.len(), method, kind })
    }

    /// The method in use; never [`NoiseMethod::Auto`].
    pub fn method(&self) -> NoiseMethod {
        self.method
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Fills `out` with one unit-SNR draw; `normals` is scratch space.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, normals: &mut Vec<f64>, out: &mut [f64]) {
        assert_eq!(out.len(), self.n);
        match &self.kind {
            Kind::Cholesky(l) => {
                normals.clear();
                normals.extend((0..l.n).map(|_| rng.sample::<f64, _>(StandardNormal)));
                for (i, o) in out.iter_mut().enumerate() {
                    *o = l.row(i).iter().zip(normals.iter()).map(|(a, b)| a * b).sum();
                }
            }
            Kind::Spectral { amp, cos, sin } => {
                let m = amp.len();
                normals.clear();
                normals.extend((0..2 * m).map(|_| rng.sample::<f64, _>(StandardNormal)));
                let (a, b) = normals.split_at_mut(m);
                for ((x, y), w) in a.iter_mut().zip(b.iter_mut()).zip(amp) {
                    *x *= w;
                    *y *= w;
                }
                for ((o, row_c), row_s) in out.iter_mut().zip(cos.chunks_exact(m)).zip(sin.chunks_exact(m)) {
                    *o = row_c.iter().zip(a.iter()).map(|(x, y)| x * y).sum::<f64>()
                        + row_s.iter().zip(b.iter()).map(|(x, y)| x * y).sum::<f64>();
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, snr: SnrValue) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.sample_into(rng, &mut Vec::new(), &mut out);
        let s = snr.linear().sqrt().recip();
        out.iter_mut().for_each(|v| *v *= s);
        out
    }
}

/// One noise draw with covariance `Sigma / SNR`.
pub fn synth_noise<R: Rng + ?Sized>(
    r: &AcfVector,
    snr: SnrValue,
    method: NoiseMethod,
    rng: &mut R,
) -> Result<Vec<f64>> {
    Ok(NoiseSynth::new(r, method)?.sample(rng, snr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::spectrum::{make_sinc_acf, make_single_tone_acf};
    use crate::zzb::q_function;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sinc(n: usize, b: usize) -> AcfVector {
        make_sinc_acf(Grid::new(n, 2.0).unwrap(), b).unwrap()
    }

    fn check_empirical_covariance(r: &AcfVector, method: NoiseMethod, draws: usize) {
        let n = r.len();
        let sig = AcfInterpolant::new(r).unwrap().grid_samples();
        let synth = NoiseSynth::new(r, method).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut acc = vec![0.0; n * n];
        let mut buf = vec![0.0; n];
        let mut normals = Vec::new();
        for _ in 0..draws {
            synth.sample_into(&mut rng, &mut normals, &mut buf);
            for i in 0..n {
                for j in 0..n {
                    acc[i * n + j] += buf[i] * buf[j];
                }
            }
        }
        let t = draws as f64;
        let s = |i: usize, j: usize| sig[i.abs_diff(j)];
        for i in 0..n {
            for j in 0..n {
                let est = acc[i * n + j] / t;
                let se = ((s(i, i) * s(j, j) + s(i, j).powi(2)) / t).sqrt();
                assert!((est - s(i, j)).abs() < 5.0 * se, "{method:?} ({i},{j}) {est} vs {}", s(i, j));
            }
        }
    }

    #[test]
    fn empirical_covariance_matches_acf() {
        let r = sinc(8, 3);
        check_empirical_covariance(&r, NoiseMethod::ExactCholesky, 100_000);
        check_empirical_covariance(&r, NoiseMethod::SpectralApprox, 100_000);
    }

    #[test]
    fn auto_falls_back_on_factorization_failure() {
        let r = sinc(64, 6);
        let it = AcfInterpolant::new(&r).unwrap();
        assert_eq!(NoiseSynth::new(&r, NoiseMethod::Auto).unwrap().method(), NoiseMethod::ExactCholesky);
        let mut bad = it.grid_samples();
        bad[1] = 1.5;
        assert!(matches!(
            NoiseSynth::build(&it, &bad, NoiseMethod::ExactCholesky),
            Err(Error::Covariance { minor: 1 })
        ));
        assert_eq!(NoiseSynth::build(&it, &bad, NoiseMethod::Auto).unwrap().method(), NoiseMethod::SpectralApprox);
    }

    #[test]
    fn noise_vanishes_at_high_snr() {
        let r = sinc(32, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for m in [NoiseMethod::ExactCholesky, NoiseMethod::SpectralApprox, NoiseMethod::Auto] {
            let v = synth_noise(&r, SnrValue::from_linear(1e16).unwrap(), m, &mut rng).unwrap();
            assert!(v.iter().all(|x| x.abs() < 1e-6), "{m:?}");
        }
    }

    #[test]
    fn tone_noise_is_a_single_sinusoid() {
        let g = Grid::new(100, 2.0).unwrap();
        let tone = make_single_tone_acf(g, 5).unwrap();
        let synth = NoiseSynth::new(&tone, NoiseMethod::SpectralApprox).unwrap();
        let v = synth.sample(&mut ChaCha8Rng::seed_from_u64(4), SnrValue::from_linear(1.0).unwrap());
        // a cos(w x) + b sin(w x) obeys v_{j+1} + v_{j-1} = 2 cos(w dx) v_j
        let c = (2.0 * std::f64::consts::PI * g.freq(4) * g.dx()).cos();
        for j in 1..99 {
            assert!((v[j + 1] + v[j - 1] - 2.0 * c * v[j]).abs() < 1e-10);
        }
    }

    fn two_point_rate(method: NoiseMethod, target: f64, snr: f64, trials: usize) -> (f64, f64, usize) {
        let r = sinc(64, 8);
        let acf = AcfInterpolant::new(&r).unwrap().grid_samples();
        let j = acf.iter().position(|&v| v < target).unwrap();
        let rho = acf[j];
        let synth = NoiseSynth::new(&r, method).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut errors = 0;
        let mut w = vec![0.0; 64];
        let mut normals = Vec::new();
        let s = 1.0 / snr.sqrt();
        for _ in 0..trials {
            synth.sample_into(&mut rng, &mut normals, &mut w);
            // truth at lag 0: Z(0) = 1 + n_0 against Z(x_j) = R(x_j) + n_j
            if rho + s * w[j] > 1.0 + s * w[0] {
                errors += 1;
            }
        }
        (errors as f64 / trials as f64, q_function((snr * (1.0 - rho) / 2.0).sqrt()), trials)
    }

    #[test]
    fn two_point_error_matches_q() {
        for method in [NoiseMethod::ExactCholesky, NoiseMethod::SpectralApprox] {
            let (rate, p, t) = two_point_rate(method, 0.5, 10.0, 40_000);
            let half = 2.576 * (p * (1.0 - p) / t as f64).sqrt();
            assert!((rate - p).abs() < half, "{method:?}: {rate} vs {p} +- {half}");
        }
    }

    #[test]
    fn cholesky_reconstructs() {
        let col = [2.0, 0.5, 0.25, 0.0];
        let l = toeplitz_cholesky(&col, 0.0).unwrap();
        for i in 0..4 {
            for j in 0..=i {
                let v: f64 = (0..=j).map(|k| l.row(i)[k] * l.row(j)[k]).sum();
                assert!((v - col[i - j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn cholesky_reports_minor() {
        // [[1, 1, 1], [1, 1, 1], [1, 1, 1]] is singular at the second pivot
        let err = toeplitz_cholesky(&[1.0, 1.0, 1.0], 0.0).unwrap_err();
        assert!(matches!(err, Error::Covariance { minor: 1 }));
        let err = toeplitz_cholesky(&[1.0, 2.0], 0.0).unwrap_err();
        assert!(matches!(err, Error::Covariance { minor: 1 }));
    }
}
