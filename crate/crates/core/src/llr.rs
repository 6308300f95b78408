//! Distributions of log-likelihood-ratio vectors.
//!
//! For an experiment over states `0..=n`, every signal `s` maps to the vector
//! `ξ(s) = (ln μ_i(s)/μ_0(s))_{i=1..n}`. Row `i` of an [`LlrDistribution`]
//! is the law of that vector when the state is `i`. Two experiments are
//! Blackwell-equivalent exactly when these distributions coincide.

use crate::error::{Error, Result};
use crate::experiment::{Experiment, StateSpace};
use crate::numeric::{check_stochastic_row, MERGE_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct LlrDistribution {
    atoms: Vec<Vec<f64>>,
    weights: Vec<Vec<f64>>,
}

impl LlrDistribution {
    /// Validates shapes and that every weight row is a probability vector.
    /// Admissibility is not enforced here; see [`check_admissible`].
    pub fn new(atoms: Vec<Vec<f64>>, weights: Vec<Vec<f64>>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::DimensionMismatch("no atoms".into()));
        }
        let dim = atoms[0].len();
        if atoms.iter().any(|a| a.len() != dim) {
            return Err(Error::DimensionMismatch(
                "atoms of different dimensions".into(),
            ));
        }
        if weights.len() != dim + 1 {
            return Err(Error::DimensionMismatch(format!(
                "{} weight rows for atoms of dimension {dim}",
                weights.len()
            )));
        }
        for (i, row) in weights.iter().enumerate() {
            if row.len() != atoms.len() {
                return Err(Error::DimensionMismatch(format!(
                    "weight row {i} has wrong length"
                )));
            }
            check_stochastic_row(row, i)?;
        }
        Ok(Self { atoms, weights })
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    /// Dimension `n = |Θ| - 1` of the atoms.
    pub fn dim(&self) -> usize {
        self.weights.len() - 1
    }

    /// Compares atoms and weights entrywise within `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let close = |a: &[f64], b: &[f64]| {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
        };
        self.atoms.len() == other.atoms.len()
            && self.weights.len() == other.weights.len()
            && self
                .atoms
                .iter()
                .zip(&other.atoms)
                .all(|(a, b)| close(a, b))
            && self
                .weights
                .iter()
                .zip(&other.weights)
                .all(|(a, b)| close(a, b))
    }

    /// The experiment whose signals are the atoms themselves. Only atoms with
    /// positive weight in every row are kept; for an admissible distribution
    /// that is every atom with positive `σ_0` weight.
    pub fn to_experiment(&self, states: StateSpace) -> Result<Experiment> {
        let keep: Vec<usize> = (0..self.atoms.len())
            .filter(|&k| self.weights.iter().all(|row| row[k] > 0.0))
            .collect();
        let signals = keep.iter().map(|k| format!("xi{k}")).collect();
        let probs = self
            .weights
            .iter()
            .map(|row| keep.iter().map(|&k| row[k]).collect())
            .collect();
        Experiment::new(states, signals, probs)
    }
}

/// Law of the log-likelihood-ratio vector under each state. Signals whose
/// vectors agree componentwise within `1e-12` are merged, and atoms are
/// returned in lexicographic order so that Blackwell-equivalent experiments
/// produce the same distribution.
pub fn llr_distribution(mu: &Experiment) -> LlrDistribution {
    let n = mu.num_states();
    let base = mu.row(0);
    let mut atoms: Vec<Vec<f64>> = Vec::new();
    let mut weights: Vec<Vec<f64>> = vec![Vec::new(); n];
    for s in 0..mu.num_signals() {
        let xi: Vec<f64> = (1..n).map(|i| (mu.row(i)[s] / base[s]).ln()).collect();
        let existing = atoms
            .iter()
            .position(|a| a.iter().zip(&xi).all(|(x, y)| (x - y).abs() <= MERGE_TOL));
        match existing {
            Some(k) => {
                for (i, row) in weights.iter_mut().enumerate() {
                    row[k] += mu.row(i)[s];
                }
            }
            None => {
                atoms.push(xi);
                for (i, row) in weights.iter_mut().enumerate() {
                    row.push(mu.row(i)[s]);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..atoms.len()).collect();
    order.sort_by(|&a, &b| {
        atoms[a]
            .iter()
            .zip(&atoms[b])
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    LlrDistribution {
        atoms: order.iter().map(|&k| atoms[k].clone()).collect(),
        weights: weights
            .iter()
            .map(|row| order.iter().map(|&k| row[k]).collect())
            .collect(),
    }
}

/// True iff `|σ_i(ξ) - e^{ξ_i} σ_0(ξ)| <= tol` for every atom and every
/// state `i >= 1`.
pub fn check_admissible(sigma: &LlrDistribution, tol: f64) -> bool {
    let base = &sigma.weights[0];
    sigma.atoms.iter().enumerate().all(|(k, xi)| {
        xi.iter()
            .enumerate()
            .all(|(d, &x)| (sigma.weights[d + 1][k] - x.exp() * base[k]).abs() <= tol)
    })
}
