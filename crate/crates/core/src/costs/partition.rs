//! Cost of learning whether the state lies in a subset `H` of the states.

use super::beta::BetaMatrix;
use crate::error::{Error, Result};
use crate::experiment::{Experiment, StateSpace};
use crate::numeric::ExactSum;

/// A proper, non-empty subset of the states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypothesis {
    members: Vec<bool>,
}

impl Hypothesis {
    pub fn new(num_states: usize, members: &[usize]) -> Result<Self> {
        let mut mask = vec![false; num_states];
        for &i in members {
            if i >= num_states {
                return Err(Error::InvalidHypothesis(format!("state {i} out of range")));
            }
            mask[i] = true;
        }
        Self::from_mask(mask)
    }

    pub fn from_mask(members: Vec<bool>) -> Result<Self> {
        if !members.iter().any(|&m| m) {
            return Err(Error::InvalidHypothesis("hypothesis is empty".into()));
        }
        if members.iter().all(|&m| m) {
            return Err(Error::InvalidHypothesis(
                "hypothesis contains every state".into(),
            ));
        }
        Ok(Self { members })
    }

    /// States whose value satisfies `pred`.
    pub fn from_values(states: &StateSpace, pred: impl Fn(f64) -> bool) -> Result<Self> {
        let values = states.values().ok_or(Error::MissingValues)?;
        Self::from_mask(values.iter().map(|&v| pred(v)).collect())
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members[i]
    }

    pub fn num_states(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.members.len()).filter(|&i| self.members[i])
    }

    pub fn complement(&self) -> Self {
        Self {
            members: self.members.iter().map(|m| !m).collect(),
        }
    }
}

fn check_sizes(beta: &BetaMatrix, h: &Hypothesis) -> Result<()> {
    if beta.len() != h.num_states() {
        return Err(Error::DimensionMismatch(format!(
            "hypothesis over {} states, beta over {}",
            h.num_states(),
            beta.len()
        )));
    }
    Ok(())
}

/// `Σ_{i∈H, j∉H} β_ij + β_ji`.
///
/// When `beta` is an inverse-square rule over an integer grid with constant
/// spacing and `H` is a threshold set or an alternating (parity) set along
/// that grid, crossing pairs are aggregated by distance in `O(|Θ|)`.
/// Otherwise all crossing pairs are enumerated. Both paths return the
/// correctly rounded value of the same exact sum, so they agree bit for bit.
pub fn partition_coefficient(beta: &BetaMatrix, h: &Hypothesis) -> Result<f64> {
    check_sizes(beta, h)?;
    match grid_crossing_counts(beta, h) {
        Some(grid) => Ok(grid.coefficient()),
        None => partition_coefficient_enumerated(beta, h),
    }
}

/// Enumerates every crossing pair. `O(|H|·|H^c|)`.
pub fn partition_coefficient_enumerated(beta: &BetaMatrix, h: &Hypothesis) -> Result<f64> {
    check_sizes(beta, h)?;
    let inside: Vec<usize> = h.members().collect();
    let outside: Vec<usize> = h.complement().members().collect();
    let mut acc = ExactSum::new();
    for &i in &inside {
        for &j in &outside {
            acc.add(beta.get(i, j));
            acc.add(beta.get(j, i));
        }
    }
    Ok(acc.value())
}

/// Crossing pairs of a grid hypothesis grouped by their index distance.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCrossings {
    scale: f64,
    step: f64,
    /// `counts[g]` is the number of unordered crossing pairs `g` grid steps apart.
    pub counts: Vec<u64>,
}

impl GridCrossings {
    pub fn coefficient(&self) -> f64 {
        let mut acc = ExactSum::new();
        for (g, &count) in self.counts.iter().enumerate().skip(1) {
            if count > 0 {
                let d = self.step * g as f64;
                let x = self.scale / (d * d);
                acc.add_product(count as f64, 2.0 * x);
            }
        }
        acc.value()
    }
}

/// Distance histogram of crossing pairs when the fast path applies.
pub fn grid_crossing_counts(beta: &BetaMatrix, h: &Hypothesis) -> Option<GridCrossings> {
    let scale = beta.inverse_square_scale()?;
    let values = beta.states().values()?;
    let n = values.len();
    if h.num_states() != n {
        return None;
    }
    const EXACT_INT: f64 = 4_503_599_627_370_496.0; // 2^52
    if values
        .iter()
        .any(|v| v.fract() != 0.0 || v.abs() >= EXACT_INT)
    {
        return None;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let step = values[order[1]] - values[order[0]];
    if order
        .windows(2)
        .any(|w| values[w[1]] - values[w[0]] != step)
    {
        return None;
    }
    let pattern: Vec<bool> = order.iter().map(|&i| h.contains(i)).collect();
    let switches = pattern.windows(2).filter(|w| w[0] != w[1]).count();
    let mut counts = vec![0u64; n];
    if switches == 1 {
        // Grid indices [0, k) on one side, [k, n) on the other.
        let k = pattern
            .iter()
            .position(|&m| m != pattern[0])
            .expect("one switch") as i64;
        let last = n as i64 - 1;
        for (g, c) in counts.iter_mut().enumerate().skip(1) {
            let g = g as i64;
            let lo = (k - g).max(0);
            let hi = (k - 1).min(last - g);
            *c = (hi - lo + 1).max(0) as u64;
        }
    } else if switches == n - 1 {
        for (g, c) in counts.iter_mut().enumerate().skip(1) {
            if g % 2 == 1 {
                *c = (n - g) as u64;
            }
        }
    } else {
        return None;
    }
    Some(GridCrossings {
        scale,
        step,
        counts,
    })
}

/// `α ln(α/(1-α)) + (1-α) ln((1-α)/α)`, the divergence of a symmetric
/// binary signal of accuracy `α`.
pub fn binary_divergence(alpha: f64) -> f64 {
    alpha * (alpha / (1.0 - alpha)).ln() + (1.0 - alpha) * ((1.0 - alpha) / alpha).ln()
}

/// LLR cost of the signal reporting membership in `H` correctly with
/// probability `alpha` in every state.
pub fn hypothesis_test_cost(beta: &BetaMatrix, h: &Hypothesis, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    Ok(partition_coefficient(beta, h)? * binary_divergence(alpha))
}

/// The two-signal experiment behind [`hypothesis_test_cost`]:
/// `μ_i("H") = alpha` for `i ∈ H`, `1 - alpha` otherwise.
pub fn partition_experiment(states: &StateSpace, h: &Hypothesis, alpha: f64) -> Result<Experiment> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    if states.len() != h.num_states() {
        return Err(Error::DimensionMismatch(
            "hypothesis and state space differ".into(),
        ));
    }
    let probs = (0..states.len())
        .map(|i| {
            let p = if h.contains(i) { alpha } else { 1.0 - alpha };
            vec![p, 1.0 - p]
        })
        .collect();
    Experiment::new(states.clone(), vec!["H".into(), "not H".into()], probs)
}
