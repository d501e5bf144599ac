//! Euclidean projection onto the feasible ACF set `S = T ∩ F`.
//!
//! * `T = { r : r_0 = 1, r_i <= 1 }` (time domain)
//! * `F = { r : C r >= 0, (C r)_k = 0 for k >= b_dis }` (frequency domain)
//!
//! Both sub-projections are closed-form. Their intersection is handled with
//! Dykstra's alternating projections, which (unlike plain alternation)
//! converges to the nearest point of `S`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dct::{Dct4, Dct4Work};
use crate::error::{invalid, Error, Result};
use crate::spectrum::check_band;
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionConfig {
    /// Maximum number of Dykstra sweeps (one `P_T` and one `P_F` each).
    pub max_dykstra_iters: usize,
    /// Stop when successive iterates and the gap between the two
    /// sub-iterates are all below this (max-norm).
    pub residual_tol: f64,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        Self { max_dykstra_iters: 200, residual_tol: 1e-10 }
    }
}

impl ProjectionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_dykstra_iters == 0 {
            return Err(invalid("max_dykstra_iters must be positive"));
        }
        if !(self.residual_tol > 0.0) {
            return Err(invalid("residual_tol must be positive"));
        }
        Ok(())
    }
}

/// Result of [`FeasibleSet::dykstra`].
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub point: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Last value of the stopping residual.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstraintFamily {
    /// `r_0 = 1`
    Pinned,
    /// `r_i <= 1`
    UpperBound,
    /// `(C r)_k >= 0`
    NonNegativeSpectrum,
    /// `(C r)_k = 0` beyond the band
    BandLimit,
}

impl fmt::Display for ConstraintFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Pinned => "pinned r_0 = 1",
            Self::UpperBound => "upper bound r_i <= 1",
            Self::NonNegativeSpectrum => "non-negative spectrum",
            Self::BandLimit => "band limit",
        };
        f.write_str(s)
    }
}

/// Worst violation within one constraint family. `amount <= 0` means the
/// family is satisfied with slack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub family: ConstraintFamily,
    pub amount: f64,
    pub index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub tol: f64,
    pub worst: Vec<Violation>,
}

impl FeasibilityReport {
    /// Families whose worst violation exceeds the tolerance.
    pub fn violated(&self) -> impl Iterator<Item = &Violation> {
        self.worst.iter().filter(move |v| v.amount > self.tol)
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.feasible {
            return write!(f, "feasible (tol {:e})", self.tol);
        }
        write!(f, "infeasible:")?;
        for v in self.violated() {
            write!(f, " [{} by {:e}", v.family, v.amount)?;
            if let Some(i) = v.index {
                write!(f, " at {i}")?;
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}

/// The set `S` for a given length and band limit, with a planned transform.
#[derive(Debug, Clone)]
pub struct FeasibleSet {
    n: usize,
    b_dis: usize,
    dct: Dct4,
}

/// Scratch buffers for repeated projections.
#[derive(Debug, Default, Clone)]
pub struct ProjectionWork {
    dct: Dct4Work,
    coeffs: Vec<f64>,
    x: Vec<f64>,
    x_next: Vec<f64>,
    a: Vec<f64>,
    a_prev: Vec<f64>,
    p: Vec<f64>,
    q: Vec<f64>,
    tmp: Vec<f64>,
}

impl FeasibleSet {
    pub fn new(grid: &Grid, b_dis: usize) -> Result<Self> {
        check_band(grid, b_dis)?;
        Ok(Self { n: grid.n(), b_dis, dct: Dct4::new(grid.n()) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn b_dis(&self) -> usize {
        self.b_dis
    }

    pub fn dct(&self) -> &Dct4 {
        &self.dct
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, found: x.len() });
        }
        Ok(())
    }

    pub fn project_t(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        let mut o = x.to_vec();
        project_t_in_place(&mut o);
        Ok(o)
    }

    pub fn project_f(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        let mut out = vec![0.0; self.n];
        let mut coeffs = vec![0.0; self.n];
        self.project_f_into(x, &mut out, &mut coeffs, &mut Dct4Work::default());
        Ok(out)
    }

    fn project_f_into(&self, x: &[f64], out: &mut [f64], coeffs: &mut [f64], work: &mut Dct4Work) {
        self.dct.apply_with(x, coeffs, work);
        for (k, c) in coeffs.iter_mut().enumerate() {
            if k >= self.b_dis || *c < 0.0 {
                *c = 0.0;
            }
        }
        self.dct.apply_with(coeffs, out, work);
    }

    pub fn dykstra(&self, x: &[f64], cfg: &ProjectionConfig) -> Result<Projection> {
        self.check_len(x)?;
        cfg.validate()?;
        Ok(self.dykstra_with(x, cfg, &mut ProjectionWork::default()))
    }

    /// Dykstra's iteration starting from `x` with zero corrections, followed
    /// by a final `P_T` so that `r_0 = 1` and `r_i <= 1` hold exactly.
    pub fn dykstra_with(&self, x: &[f64], cfg: &ProjectionConfig, w: &mut ProjectionWork) -> Projection {
        let n = self.n;
        for buf in [&mut w.coeffs, &mut w.a, &mut w.tmp, &mut w.p, &mut w.q, &mut w.x_next] {
            buf.clear();
            buf.resize(n, 0.0);
        }
        w.x.clear();
        w.x.extend_from_slice(x);
        w.a_prev.clear();
        w.a_prev.extend_from_slice(x);

        let mut residual = f64::INFINITY;
        let mut converged = false;
        let mut iterations = 0;
        while iterations < cfg.max_dykstra_iters {
            iterations += 1;
            // a = P_T(x + p), p <- x + p - a
            for i in 0..n {
                w.tmp[i] = w.x[i] + w.p[i];
            }
            w.a.copy_from_slice(&w.tmp);
            project_t_in_place(&mut w.a);
            for i in 0..n {
                w.p[i] = w.tmp[i] - w.a[i];
            }
            // x' = P_F(a + q), q <- a + q - x'
            for i in 0..n {
                w.tmp[i] = w.a[i] + w.q[i];
            }
            self.project_f_into(&w.tmp, &mut w.x_next, &mut w.coeffs, &mut w.dct);
            // Successive x alone can stall while the corrections still move,
            // so the gap between the two sub-iterates is part of the test.
            residual = 0.0f64;
            for i in 0..n {
                w.q[i] = w.tmp[i] - w.x_next[i];
                residual = residual
                    .max((w.x_next[i] - w.x[i]).abs())
                    .max((w.a[i] - w.a_prev[i]).abs())
                    .max((w.a[i] - w.x_next[i]).abs());
            }
            std::mem::swap(&mut w.x, &mut w.x_next);
            std::mem::swap(&mut w.a, &mut w.a_prev);
            if residual < cfg.residual_tol {
                converged = true;
                break;
            }
        }
        let mut point = w.x.clone();
        project_t_in_place(&mut point);
        Projection { point, iterations, converged, residual }
    }

    /// Worst violation per constraint family.
    pub fn check(&self, r: &[f64], tol: f64) -> Result<FeasibilityReport> {
        self.check_len(r)?;
        if !(tol > 0.0) {
            return Err(invalid("feasibility tolerance must be positive"));
        }
        let coeffs = self.dct.apply(r);
        let pinned = Violation {
            family: ConstraintFamily::Pinned,
            amount: (r[0] - 1.0).abs(),
            index: Some(0),
        };
        let upper = worst(ConstraintFamily::UpperBound, r.iter().enumerate().skip(1).map(|(i, &v)| (i, v - 1.0)));
        let nonneg = worst(
            ConstraintFamily::NonNegativeSpectrum,
            coeffs.iter().enumerate().map(|(k, &c)| (k, -c)),
        );
        let band = worst(
            ConstraintFamily::BandLimit,
            coeffs.iter().enumerate().skip(self.b_dis).map(|(k, &c)| (k, c.abs())),
        );
        let worst = vec![pinned, upper, nonneg, band];
        let feasible = worst.iter().all(|v| v.amount <= tol);
        Ok(FeasibilityReport { feasible, tol, worst })
    }
}

fn worst(family: ConstraintFamily, it: impl Iterator<Item = (usize, f64)>) -> Violation {
    let mut v = Violation { family, amount: f64::NEG_INFINITY, index: None };
    for (i, a) in it {
        if a > v.amount {
            v.amount = a;
            v.index = Some(i);
        }
    }
    v
}

fn project_t_in_place(x: &mut [f64]) {
    x[0] = 1.0;
    for v in &mut x[1..] {
        if *v > 1.0 {
            *v = 1.0;
        }
    }
}

pub fn project_t(x: &[f64]) -> Vec<f64> {
    let mut o = x.to_vec();
    if !o.is_empty() {
        project_t_in_place(&mut o);
    }
    o
}

pub fn project_f(x: &[f64], b_dis: usize) -> Result<Vec<f64>> {
    let grid = Grid::new(x.len(), 1.0)?;
    FeasibleSet::new(&grid, b_dis)?.project_f(x)
}

pub fn dykstra_project(x: &[f64], b_dis: usize, cfg: &ProjectionConfig) -> Result<Projection> {
    let grid = Grid::new(x.len(), 1.0)?;
    FeasibleSet::new(&grid, b_dis)?.dykstra(x, cfg)
}

pub fn is_feasible(r: &[f64], b_dis: usize, tol: f64) -> Result<FeasibilityReport> {
    let grid = Grid::new(r.len(), 1.0)?;
    FeasibleSet::new(&grid, b_dis)?.check(r, tol)
}
