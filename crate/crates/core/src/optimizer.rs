//! Gradient projection with an Armijo line search.
//!
//! Each outer iteration forms `u = P_S(r - sigma * grad)` with Dykstra's
//! method and moves to `r + alpha (u - r)`, where `alpha` is the largest
//! `alpha_init * shrink^j` meeting the sufficient-decrease condition. The
//! objective is convex and `S` is a polytope, so every stationary point is
//! the global minimum.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{AcfVector, Grid};
use crate::projection::{FeasibleSet, Projection, ProjectionConfig, ProjectionWork};
use crate::snr::SnrValue;
use crate::zzb::{gradient_into, objective_slice};

/// Feasibility tolerance applied to iterates and to the starting point.
pub const FEASIBILITY_TOL: f64 = 1e-8;

/// Length of the relative-decrease window in the stopping test.
pub const DECREASE_WINDOW: usize = 10;

/// Step reductions tried when Dykstra's method does not converge.
const PROJECTION_RETRIES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmijoConfig {
    pub c1: f64,
    pub shrink: f64,
    pub alpha_init: f64,
    pub max_shrinks: usize,
}

impl Default for ArmijoConfig {
    fn default() -> Self {
        Self { c1: 1e-4, shrink: 0.5, alpha_init: 1.0, max_shrinks: 60 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignConfig {
    pub snr_d: SnrValue,
    pub b_dis: usize,
    /// Pre-projection step. `None` picks [`default_sigma`] at the start point.
    pub sigma: Option<f64>,
    pub step_rule: StepRule,
    pub max_iters: usize,
    pub projection: ProjectionConfig,
    pub armijo: ArmijoConfig,
    pub stop_tol: f64,
}

impl DesignConfig {
    pub fn new(snr_d: SnrValue, b_dis: usize) -> Self {
        Self {
            snr_d,
            b_dis,
            sigma: None,
            step_rule: StepRule::default(),
            max_iters: 2000,
            projection: ProjectionConfig { max_dykstra_iters: 5000, residual_tol: 1e-10 },
            armijo: ArmijoConfig::default(),
            stop_tol: 1e-9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.b_dis == 0 {
            return Err(invalid("b_dis must be positive"));
        }
        if let Some(s) = self.sigma {
            if !(s.is_finite() && s > 0.0) {
                return Err(invalid(format!("sigma must be positive, got {s}")));
            }
        }
        if self.max_iters == 0 {
            return Err(invalid("max_iters must be positive"));
        }
        self.projection.validate()?;
        let a = &self.armijo;
        if !(a.c1 > 0.0 && a.c1 < 1.0) {
            return Err(invalid("armijo c1 must lie in (0, 1)"));
        }
        if !(a.shrink > 0.0 && a.shrink < 1.0) {
            return Err(invalid("armijo shrink must lie in (0, 1)"));
        }
        if !(a.alpha_init > 0.0 && a.alpha_init <= 1.0) {
            return Err(invalid("armijo alpha_init must lie in (0, 1]"));
        }
        if !(self.stop_tol > 0.0) {
            return Err(invalid("stop_tol must be positive"));
        }
        Ok(())
    }
}

/// How the pre-projection step evolves across iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// `sigma` for every iteration.
    Fixed,
    /// Barzilai-Borwein step `<s, s> / <s, y>` from the last accepted move,
    /// starting at `sigma` and clamped to `[1e-6, 1e6] * sigma`.
    #[default]
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// `||u - r|| / sqrt(n)` fell below `stop_tol`.
    Displacement,
    /// Relative objective decrease over the window fell below `stop_tol`.
    RelativeDecrease,
    /// `u - r` is not a descent direction.
    Stationary,
    /// No step length met the Armijo condition.
    ArmijoFailure,
    /// `max_iters` reached.
    IterationBudget,
}

/// One row of the per-iteration trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub objective: f64,
    pub alpha: f64,
    pub pg_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignResult {
    pub waveform: AcfVector,
    pub objective: f64,
    /// Objective at the start point followed by one entry per accepted step.
    pub objective_trace: Vec<f64>,
    pub trace: Vec<TraceRow>,
    /// Accepted steps. A final pass that only detects convergence is not
    /// counted.
    pub iterations: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
    /// `||r - P_S(r - sigma grad)|| / sigma` at the final point.
    pub projected_gradient_norm: f64,
    pub sigma: f64,
}

/// Step size scaled so that the first gradient step moves no sample by more
/// than 10.
pub fn default_sigma(r: &AcfVector, snr: SnrValue) -> f64 {
    let mut g = vec![0.0; r.len()];
    gradient_into(r.grid(), r.values(), snr.linear(), &mut g);
    let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if gmax > 0.0 {
        10.0 / gmax
    } else {
        1.0
    }
}

struct Problem<'a> {
    grid: &'a Grid,
    set: FeasibleSet,
    snr: f64,
    cfg: &'a DesignConfig,
    work: ProjectionWork,
}

impl Problem<'_> {
    fn objective(&self, r: &[f64]) -> f64 {
        objective_slice(self.grid, r, self.snr)
    }

    /// `P_S(r - sigma g)`.
    fn gradient_step(&mut self, r: &[f64], g: &[f64], sigma: f64) -> Projection {
        let x: Vec<f64> = r.iter().zip(g).map(|(ri, gi)| ri - sigma * gi).collect();
        self.set.dykstra_with(&x, &self.cfg.projection, &mut self.work)
    }

    /// Like [`Self::gradient_step`], shrinking the step tenfold while the
    /// projection fails to converge or, through projection error, does not
    /// point downhill. Returns the step actually used; steps that stalled
    /// lower `ceiling`.
    fn safe_gradient_step(
        &mut self,
        r: &[f64],
        g: &[f64],
        mut sigma: f64,
        ceiling: &mut f64,
        iteration: usize,
    ) -> Result<(Vec<f64>, f64)> {
        let tol = self.cfg.stop_tol * (r.len() as f64).sqrt();
        let mut uphill = None;
        for _ in 0..PROJECTION_RETRIES {
            let proj = self.gradient_step(r, g, sigma);
            if proj.converged {
                let d = || proj.point.iter().zip(r).map(|(u, x)| u - x);
                let slope: f64 = d().zip(g).map(|(a, b)| a * b).sum();
                if slope < 0.0 || norm(d()) < tol {
                    return Ok((proj.point, sigma));
                }
                uphill = Some((proj.point, sigma));
            } else {
                *ceiling = ceiling.min(0.5 * sigma);
            }
            sigma *= 0.1;
        }
        uphill.ok_or(Error::ProjectionStalled { iteration })
    }
}

fn norm(v: impl Iterator<Item = f64>) -> f64 {
    v.map(|x| x * x).sum::<f64>().sqrt()
}

/// `||r - P_S(r - sigma grad)|| / sigma`; zero exactly at the optimum.
pub fn projected_gradient_norm(r: &AcfVector, cfg: &DesignConfig, sigma: f64) -> Result<f64> {
    cfg.validate()?;
    let mut p = Problem {
        grid: r.grid(),
        set: FeasibleSet::new(r.grid(), cfg.b_dis)?,
        snr: cfg.snr_d.linear(),
        cfg,
        work: ProjectionWork::default(),
    };
    let mut g = vec![0.0; r.len()];
    gradient_into(r.grid(), r.values(), p.snr, &mut g);
    let mut ceiling = f64::INFINITY;
    let (u, sigma) = p.safe_gradient_step(r.values(), &g, sigma, &mut ceiling, 0)?;
    Ok(norm(u.iter().zip(r.values()).map(|(a, b)| a - b)) / sigma)
}

/// Largest `alpha = alpha_init * shrink^j` with
/// `f(r + alpha d) <= f(r) + c1 alpha <grad, d>`. Returns `None` when the
/// condition fails for every trial step. `slope` must be negative.
pub fn armijo_step(
    f: impl Fn(&[f64]) -> f64,
    r: &[f64],
    f_r: f64,
    d: &[f64],
    slope: f64,
    cfg: &ArmijoConfig,
) -> Option<(f64, Vec<f64>, f64)> {
    debug_assert!(slope < 0.0);
    let mut alpha = cfg.alpha_init;
    let mut cand = vec![0.0; r.len()];
    for _ in 0..=cfg.max_shrinks {
        for ((c, ri), di) in cand.iter_mut().zip(r).zip(d) {
            *c = ri + alpha * di;
        }
        let f_c = f(&cand);
        if f_c <= f_r + cfg.c1 * alpha * slope {
            return Some((alpha, cand, f_c));
        }
        alpha *= cfg.shrink;
    }
    None
}

/// Minimizes the discretized ZZB at `cfg.snr_d` starting from `r0`.
///
/// An infeasible start is projected onto `S` first.
pub fn design_waveform(cfg: &DesignConfig, r0: &AcfVector) -> Result<DesignResult> {
    cfg.validate()?;
    let grid = *r0.grid();
    let mut prob = Problem {
        grid: &grid,
        set: FeasibleSet::new(&grid, cfg.b_dis)?,
        snr: cfg.snr_d.linear(),
        cfg,
        work: ProjectionWork::default(),
    };
    let n = grid.n();

    let mut r = r0.values().to_vec();
    if !prob.set.check(&r, FEASIBILITY_TOL)?.feasible {
        r = prob.set.dykstra_with(&r, &cfg.projection, &mut prob.work).point;
    }
    let start = AcfVector::new(grid, r.clone())?;
    let sigma = cfg.sigma.unwrap_or_else(|| default_sigma(&start, cfg.snr_d));

    let mut f = prob.objective(&r);
    if !f.is_finite() {
        return Err(Error::NonFinite { what: "objective", iteration: 0 });
    }
    let mut objective_trace = vec![f];
    let mut trace = Vec::new();
    let mut g = vec![0.0; n];
    let mut stop = StopReason::IterationBudget;
    let mut pass = 0;
    let mut pg_norm = f64::INFINITY;
    let mut step = sigma;
    let mut ceiling = f64::INFINITY;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;

    while pass < cfg.max_iters {
        pass += 1;
        gradient_into(&grid, &r, prob.snr, &mut g);
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "gradient", iteration: pass });
        }
        if let (StepRule::Spectral, Some((r_old, g_old))) = (cfg.step_rule, &prev) {
            let (mut ss, mut sy) = (0.0, 0.0);
            for i in 0..n {
                let s = r[i] - r_old[i];
                ss += s * s;
                sy += s * (g[i] - g_old[i]);
            }
            step = if sy > 0.0 { (ss / sy).clamp(1e-6 * sigma, 1e6 * sigma) } else { 1e6 * sigma };
        }
        let (u, used) = prob.safe_gradient_step(&r, &g, step.min(ceiling), &mut ceiling, pass)?;
        step = used;
        let d: Vec<f64> = u.iter().zip(&r).map(|(a, b)| a - b).collect();
        let dnorm = norm(d.iter().copied());
        pg_norm = dnorm / step;
        if dnorm / (n as f64).sqrt() < cfg.stop_tol {
            trace.push(TraceRow { iter: pass, objective: f, alpha: 0.0, pg_norm });
            stop = StopReason::Displacement;
            break;
        }
        let slope: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
        if slope >= 0.0 {
            trace.push(TraceRow { iter: pass, objective: f, alpha: 0.0, pg_norm });
            stop = StopReason::Stationary;
            break;
        }
        let Some((alpha, cand, f_c)) =
            armijo_step(|x| prob.objective(x), &r, f, &d, slope, &cfg.armijo)
        else {
            trace.push(TraceRow { iter: pass, objective: f, alpha: 0.0, pg_norm });
            stop = StopReason::ArmijoFailure;
            break;
        };
        if !f_c.is_finite() {
            return Err(Error::NonFinite { what: "objective", iteration: pass });
        }
        if cfg.step_rule == StepRule::Spectral {
            prev = Some((std::mem::replace(&mut r, cand), g.clone()));
        } else {
            r = cand;
        }
        f = f_c;
        objective_trace.push(f);
        trace.push(TraceRow { iter: pass, objective: f, alpha, pg_norm });

        if window_decrease_small(&objective_trace, cfg.stop_tol) {
            stop = StopReason::RelativeDecrease;
            break;
        }
    }

    let converged = match stop {
        StopReason::Displacement | StopReason::RelativeDecrease | StopReason::Stationary => true,
        StopReason::ArmijoFailure => window_decrease_small(&objective_trace, cfg.stop_tol),
        StopReason::IterationBudget => false,
    };
    let iterations = objective_trace.len() - 1;
    let waveform = AcfVector::new(grid, r)?;
    if stop != StopReason::Displacement || step != sigma {
        pg_norm = projected_gradient_norm(&waveform, cfg, sigma)?;
    }
    Ok(DesignResult {
        waveform,
        objective: f,
        objective_trace,
        trace,
        iterations,
        converged,
        stop_reason: stop,
        projected_gradient_norm: pg_norm,
        sigma,
    })
}

fn window_decrease_small(trace: &[f64], tol: f64) -> bool {
    let len = trace.len();
    if len <= DECREASE_WINDOW {
        return false;
    }
    let old = trace[len - 1 - DECREASE_WINDOW];
    let new = trace[len - 1];
    (old - new) <= tol * old.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projection::is_feasible;
    use crate::spectrum::make_sinc_acf;

    fn db(v: f64) -> SnrValue {
        SnrValue::from_db(v).unwrap()
    }

    fn small() -> (Grid, AcfVector, DesignConfig) {
        let g = Grid::new(48, 2.0).unwrap();
        (g, make_sinc_acf(g, 6).unwrap(), DesignConfig::new(db(12.0), 6))
    }

    #[test]
    fn converges_to_feasible_descent() {
        let (_, s, cfg) = small();
        let res = design_waveform(&cfg, &s).unwrap();
        assert!(res.converged, "{:?}", res.stop_reason);
        assert!(is_feasible(res.waveform.values(), 6, FEASIBILITY_TOL).unwrap().feasible);
        assert!(res.objective <= objective_slice(s.grid(), s.values(), cfg.snr_d.linear()));
        assert!(res.objective_trace.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(res.objective, *res.objective_trace.last().unwrap());
        assert_eq!(res.trace.iter().filter(|t| t.alpha > 0.0).count(), res.iterations);
        assert!(res.trace.len() <= res.iterations + 1);
        let tight = DesignConfig {
            projection: ProjectionConfig { max_dykstra_iters: 200_000, residual_tol: 1e-14 },
            ..cfg
        };
        // first-order stationarity, relative to the size of the gradient
        let pg = projected_gradient_norm(&res.waveform, &tight, res.sigma).unwrap();
        let g = crate::zzb::zzb_gradient(&res.waveform, cfg.snr_d);
        let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(pg < 1e-6 * gnorm, "{pg} vs {gnorm}");
    }

    #[test]
    fn restart_at_optimum_is_immediate() {
        let (_, s, cfg) = small();
        let first = design_waveform(&cfg, &s).unwrap();
        let again = design_waveform(&cfg, &first.waveform).unwrap();
        assert!(again.converged);
        assert!(again.iterations <= 1, "{}", again.iterations);
        assert!((again.objective - first.objective).abs() <= cfg.stop_tol * first.objective);
    }

    #[test]
    fn fixed_and_spectral_steps_agree() {
        let (_, s, mut cfg) = small();
        let spectral = design_waveform(&cfg, &s).unwrap();
        cfg.step_rule = StepRule::Fixed;
        cfg.max_iters = 5000;
        let fixed = design_waveform(&cfg, &s).unwrap();
        assert!(fixed.converged);
        let rel = (fixed.objective - spectral.objective).abs() / spectral.objective;
        assert!(rel < 1e-5, "{rel}");
    }

    #[test]
    fn infeasible_start_is_projected() {
        let (g, _, cfg) = small();
        let start = AcfVector::new(g, (0..48).map(|i| if i == 0 { 1.0 } else { 1.5 }).collect()).unwrap();
        let res = design_waveform(&cfg, &start).unwrap();
        assert!(is_feasible(res.waveform.values(), 6, FEASIBILITY_TOL).unwrap().feasible);
    }

    #[test]
    fn budget_exhaustion_is_not_convergence() {
        let (_, s, mut cfg) = small();
        cfg.max_iters = 1;
        let res = design_waveform(&cfg, &s).unwrap();
        assert!(res.iterations <= 1);
        if res.stop_reason == StopReason::IterationBudget {
            assert!(!res.converged);
        }
    }

    #[test]
    fn armijo_backtracks_on_quadratic() {
        let f = |x: &[f64]| x[0] * x[0];
        // from x = 1 along d = -2: alpha = 1 overshoots to -1, alpha = 0.5 lands on 0
        let (alpha, cand, fc) = armijo_step(f, &[1.0], 1.0, &[-2.0], -4.0, &ArmijoConfig::default()).unwrap();
        assert_eq!(alpha, 0.5);
        assert_eq!(cand, vec![0.0]);
        assert_eq!(fc, 0.0);
        // an ascent direction mislabeled as descent never satisfies the test
        let cfg = ArmijoConfig { max_shrinks: 5, ..ArmijoConfig::default() };
        assert!(armijo_step(f, &[1.0], 1.0, &[1.0], -1.0, &cfg).is_none());
    }

    #[test]
    fn config_validation() {
        let (_, s, cfg) = small();
        for bad in [
            DesignConfig { sigma: Some(0.0), ..cfg },
            DesignConfig { sigma: Some(f64::NAN), ..cfg },
            DesignConfig { max_iters: 0, ..cfg },
            DesignConfig { stop_tol: 0.0, ..cfg },
            DesignConfig { b_dis: 0, ..cfg },
            DesignConfig { armijo: ArmijoConfig { c1: 1.0, ..cfg.armijo }, ..cfg },
            DesignConfig { armijo: ArmijoConfig { shrink: 0.0, ..cfg.armijo }, ..cfg },
            DesignConfig { armijo: ArmijoConfig { alpha_init: 1.5, ..cfg.armijo }, ..cfg },
        ] {
            assert!(matches!(design_waveform(&bad, &s), Err(Error::InvalidArgument(_))));
        }
        assert!(design_waveform(&DesignConfig { b_dis: 49, ..cfg }, &s).is_err());
    }

    #[test]
    fn default_sigma_scales_inversely_with_gradient() {
        let (_, s, _) = small();
        let a = default_sigma(&s, db(10.0));
        let b = default_sigma(&s, db(20.0));
        assert!(a > 0.0 && b > 0.0);
        let mut g = vec![0.0; 48];
        gradient_into(s.grid(), s.values(), db(10.0).linear(), &mut g);
        let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((a * gmax - 10.0).abs() < 1e-12);
    }
}
