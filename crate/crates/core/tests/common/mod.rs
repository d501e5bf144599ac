#![allow(dead_code)]

use rand::Rng;
use zzbwave::dct::Dct4;
use zzbwave::grid::{AcfVector, Grid};
use zzbwave::projection::{FeasibleSet, ProjectionConfig};

pub const TIGHT: ProjectionConfig = ProjectionConfig { max_dykstra_iters: 50_000, residual_tol: 1e-13 };

/// A random point of the feasible set: random non-negative in-band spectrum,
/// normalized so that `r_0 = 1`, then projected to clear any `r_i > 1`.
pub fn random_feasible<R: Rng>(grid: Grid, b_dis: usize, rng: &mut R) -> AcfVector {
    let n = grid.n();
    let mut c = vec![0.0; n];
    for v in c.iter_mut().take(b_dis) {
        *v = rng.random::<f64>().powi(2);
    }
    let mut r = Dct4::new(n).apply(&c);
    let r0 = r[0];
    r.iter_mut().for_each(|v| *v /= r0);
    if r[1..].iter().any(|&v| v > 1.0) {
        let set = FeasibleSet::new(&grid, b_dis).unwrap();
        r = set.dykstra(&r, &TIGHT).unwrap().point;
    }
    AcfVector::new(grid, r).unwrap()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}
