//! Blackwell dominance by garbling feasibility.

use crate::error::{Error, Result};
use crate::experiment::{Experiment, GarblingMatrix};
use crate::lp::find_feasible;

pub const DEFAULT_DOMINANCE_TOL: f64 = 1e-8;

/// Searches for a garbling `g` with `‖mu·g - nu‖_∞ <= tol`.
///
/// Variables are the entries `g[s][t]` followed by two slack blocks, one for
/// each side of the tolerance band:
///
/// ```text
/// Σ_t g[s][t]              = 1              for every source signal s
/// Σ_s μ_i(s) g[s][t] + u_it = ν_i(t) + tol
/// Σ_s μ_i(s) g[s][t] - w_it = ν_i(t) - tol
/// ```
pub fn find_garbling(mu: &Experiment, nu: &Experiment, tol: f64) -> Result<Option<GarblingMatrix>> {
    if mu.states() != nu.states() {
        return Err(Error::StateSpaceMismatch);
    }
    if !(tol >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance {tol} must be non-negative"
        )));
    }
    let m = mu.num_signals();
    let k = nu.num_signals();
    let n = mu.num_states();
    let band = n * k;
    let cols = m * k + 2 * band;
    let g_index = |s: usize, t: usize| s * k + t;

    let mut a = Vec::with_capacity(m + 2 * band);
    let mut b = Vec::with_capacity(m + 2 * band);
    for s in 0..m {
        let mut row = vec![0.0; cols];
        for t in 0..k {
            row[g_index(s, t)] = 1.0;
        }
        a.push(row);
        b.push(1.0);
    }
    for (side, sign) in [(0usize, 1.0), (1, -1.0)] {
        for i in 0..n {
            for t in 0..k {
                let mut row = vec![0.0; cols];
                for s in 0..m {
                    row[g_index(s, t)] = mu.row(i)[s];
                }
                row[m * k + side * band + i * k + t] = sign;
                a.push(row);
                b.push(nu.row(i)[t] + sign * tol);
            }
        }
    }
    let Some(x) = find_feasible(&a, &b)? else {
        return Ok(None);
    };
    let probs = (0..m)
        .map(|s| {
            let row: Vec<f64> = (0..k).map(|t| x[g_index(s, t)].max(0.0)).collect();
            let sum: f64 = row.iter().sum();
            row.into_iter().map(|v| v / sum).collect()
        })
        .collect();
    GarblingMatrix::new(probs).map(Some)
}

/// True iff `mu` dominates `nu` in the Blackwell order, up to `tol`.
pub fn blackwell_dominates(mu: &Experiment, nu: &Experiment, tol: f64) -> Result<bool> {
    Ok(find_garbling(mu, nu, tol)?.is_some())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{dilute, garble, StateSpace};

    #[test]
    fn reflexive() {
        let mu = Experiment::binary(0.8).unwrap();
        assert!(blackwell_dominates(&mu, &mu, DEFAULT_DOMINANCE_TOL).unwrap());
    }

    #[test]
    fn dominates_its_dilution() {
        let mu = Experiment::binary(0.8).unwrap();
        let nu = dilute(&mu, 0.5).unwrap();
        assert!(blackwell_dominates(&mu, &nu, DEFAULT_DOMINANCE_TOL).unwrap());
        assert!(!blackwell_dominates(&nu, &mu, DEFAULT_DOMINANCE_TOL).unwrap());
    }

    #[test]
    fn binary_precision_order() {
        let strong = Experiment::binary(0.8).unwrap();
        let weak = Experiment::binary(0.7).unwrap();
        let g = find_garbling(&strong, &weak, DEFAULT_DOMINANCE_TOL)
            .unwrap()
            .unwrap();
        let rebuilt = garble(&strong, &g).unwrap();
        for (r, w) in rebuilt.probs().iter().zip(weak.probs()) {
            for (x, y) in r.iter().zip(w) {
                assert!((x - y).abs() <= DEFAULT_DOMINANCE_TOL + 1e-12);
            }
        }
        assert!(!blackwell_dominates(&weak, &strong, DEFAULT_DOMINANCE_TOL).unwrap());
    }

    #[test]
    fn state_space_mismatch() {
        let mu = Experiment::binary(0.8).unwrap();
        let nu = Experiment::uninformative(StateSpace::indexed(3).unwrap(), vec![1.0]).unwrap();
        assert_eq!(
            blackwell_dominates(&mu, &nu, 1e-8),
            Err(Error::StateSpaceMismatch)
        );
    }
}
