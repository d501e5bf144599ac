use serde::{Deserialize, Serialize};

use super::monte_carlo::SimResult;
use crate::error::{invalid, Result};

/// Empirical CDFs of several runs on a shared set of error values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfTable {
    pub ids: Vec<String>,
    /// Union of all observed absolute errors, ascending.
    pub abscissae: Vec<f64>,
    /// `probs[w][i] = P(|e_w| <= abscissae[i])`.
    pub probs: Vec<Vec<f64>>,
    pub crossovers: Vec<Crossover>,
}

/// A sign change of `F_first - F_second`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crossover {
    pub first: usize,
    pub second: usize,
    /// First abscissa at which the new leader is ahead.
    pub error: f64,
    /// Which of the pair had the higher CDF just before the crossing.
    pub leader_before: usize,
    /// Cumulative probability of the former leader at the crossing.
    pub prob: f64,
}

pub fn error_cdf_report(results: &[(&str, &SimResult)]) -> Result<CdfTable> {
    if results.is_empty() {
        return Err(invalid("no results to tabulate"));
    }
    let mut abscissae: Vec<f64> =
        results.iter().flat_map(|(_, r)| r.abs_errors.iter().copied()).collect();
    abscissae.sort_by(f64::total_cmp);
    abscissae.dedup();
    let probs: Vec<Vec<f64>> = results
        .iter()
        .map(|(_, r)| abscissae.iter().map(|&x| r.cdf_at(x)).collect())
        .collect();

    let mut crossovers = Vec::new();
    for a in 0..results.len() {
        for b in a + 1..results.len() {
            let mut sign = 0i8;
            for (i, &x) in abscissae.iter().enumerate() {
                let diff = probs[a][i] - probs[b][i];
                let s = if diff > 0.0 {
                    1
                } else if diff < 0.0 {
                    -1
                } else {
                    0
                };
                if s != 0 && sign != 0 && s != sign {
                    let leader = if sign > 0 { a } else { b };
                    crossovers.push(Crossover {
                        first: a,
                        second: b,
                        error: x,
                        leader_before: leader,
                        prob: probs[leader][i],
                    });
                }
                if s != 0 {
                    sign = s;
                }
            }
        }
    }
    Ok(CdfTable {
        ids: results.iter().map(|(id, _)| id.to_string()).collect(),
        abscissae,
        probs,
        crossovers,
    })
}
