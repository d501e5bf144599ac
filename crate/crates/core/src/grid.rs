//! Lag grid and sampled autocorrelation vectors.
//!
//! Distances are in arbitrary units with propagation speed fixed to 1, so a
//! lag and a distance error are the same quantity.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Uniform lag grid `x_i = i * dx` on `[0, eps_max]`, `i = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct Grid {
    n: usize,
    eps_max: f64,
    dx: f64,
}

#[derive(Serialize, Deserialize)]
struct GridSpec {
    n: usize,
    eps_max: f64,
}

impl TryFrom<GridSpec> for Grid {
    type Error = Error;
    fn try_from(s: GridSpec) -> Result<Self> {
        Grid::new(s.n, s.eps_max)
    }
}

impl From<Grid> for GridSpec {
    fn from(g: Grid) -> Self {
        GridSpec { n: g.n, eps_max: g.eps_max }
    }
}

impl Grid {
    pub fn new(n: usize, eps_max: f64) -> Result<Self> {
        if n < 2 {
            return Err(invalid(format!("grid needs at least 2 samples, got {n}")));
        }
        if !(eps_max.is_finite() && eps_max > 0.0) {
            return Err(invalid(format!("eps_max must be positive and finite, got {eps_max}")));
        }
        Ok(Self { n, eps_max, dx: eps_max / (n - 1) as f64 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eps_max(&self) -> f64 {
        self.eps_max
    }

    /// Lag spacing, which is also the Riemann quadrature weight.
    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Lag of sample `i` (0-based). The last sample is exactly `eps_max`.
    pub fn point(&self, i: usize) -> f64 {
        debug_assert!(i < self.n);
        if i + 1 == self.n {
            self.eps_max
        } else {
            i as f64 * self.dx
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    /// Frequency (cycles per distance unit) of DCT-IV bin `k` (0-based).
    ///
    /// Column `k` of the transform is `cos(2*pi*f_k*x + pi*(2k+1)/(4n))`
    /// sampled on the grid, with `f_k = (2k+1) / (4 n dx)`.
    pub fn freq(&self, k: usize) -> f64 {
        (2 * k + 1) as f64 / (4.0 * self.n as f64 * self.dx)
    }
}

/// Samples of a normalized autocorrelation on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct AcfVector {
    grid: Grid,
    r: Vec<f64>,
}

impl AcfVector {
    pub fn new(grid: Grid, r: Vec<f64>) -> Result<Self> {
        if r.len() != grid.n() {
            return Err(Error::LengthMismatch { expected: grid.n(), found: r.len() });
        }
        if let Some(i) = r.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("acf sample {i} is not finite")));
        }
        Ok(Self { grid, r })
    }

    /// The constant vector `r = 1`.
    pub fn ones(grid: Grid) -> Self {
        Self { grid, r: vec![1.0; grid.n()] }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.r
    }

    pub fn into_values(self) -> Vec<f64> {
        self.r
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Lag where the ACF first drops below `level`, linearly interpolated
    /// between samples. `None` if it never does.
    pub fn mainlobe_width(&self, level: f64) -> Option<f64> {
        let i = self.r.iter().position(|&v| v < level)?;
        if i == 0 {
            return Some(0.0);
        }
        let (a, b) = (self.r[i - 1], self.r[i]);
        let t = (a - level) / (a - b);
        Some(self.grid.point(i - 1) + t * self.grid.dx())
    }
}
