//! Finite Blackwell experiments and the operations that combine them.
//!
//! An [`Experiment`] assigns to every state of a finite [`StateSpace`] a
//! distribution over a common finite signal set. Every entry is strictly
//! positive, so no signal realization can rule out a state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{check_positive_row, check_stochastic_row, POSITIVITY_FLOOR};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSpace {
    labels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<f64>>,
}

impl StateSpace {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        Self::build(labels, None)
    }

    pub fn with_values(labels: Vec<String>, values: Vec<f64>) -> Result<Self> {
        Self::build(labels, Some(values))
    }

    /// States labelled by their numeric value.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let labels = values.iter().map(|v| format!("{v}")).collect();
        Self::build(labels, Some(values))
    }

    /// States labelled `0..n`.
    pub fn indexed(n: usize) -> Result<Self> {
        Self::build((0..n).map(|i| i.to_string()).collect(), None)
    }

    fn build(labels: Vec<String>, values: Option<Vec<f64>>) -> Result<Self> {
        if labels.len() < 2 {
            return Err(Error::InvalidStateSpace(format!(
                "need at least 2 states, got {}",
                labels.len()
            )));
        }
        let mut sorted: Vec<&String> = labels.iter().collect();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidStateSpace(
                "state labels are not unique".into(),
            ));
        }
        if let Some(values) = &values {
            if values.len() != labels.len() {
                return Err(Error::DimensionMismatch(format!(
                    "{} state values for {} states",
                    values.len(),
                    labels.len()
                )));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidStateSpace(
                    "state values must be finite".into(),
                ));
            }
            let mut sorted = values.clone();
            sorted.sort_by(f64::total_cmp);
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::DuplicateValues);
            }
        }
        Ok(Self { labels, values })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn values(&self) -> Option<&[f64]> {
        self.values.as_deref()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    states: StateSpace,
    signals: Vec<String>,
    probs: Vec<Vec<f64>>,
}

impl Experiment {
    /// Validating constructor. Rows must be strictly positive and sum to one.
    pub fn new(states: StateSpace, signals: Vec<String>, probs: Vec<Vec<f64>>) -> Result<Self> {
        check_shape(&states, &signals, &probs)?;
        for (i, row) in probs.iter().enumerate() {
            check_positive_row(row, i)?;
        }
        Ok(Self {
            states,
            signals,
            probs,
        })
    }

    /// Like [`Experiment::new`] but rescales every row to sum to one first.
    /// Positivity is still enforced.
    pub fn normalized(
        states: StateSpace,
        signals: Vec<String>,
        mut probs: Vec<Vec<f64>>,
    ) -> Result<Self> {
        check_shape(&states, &signals, &probs)?;
        for row in probs.iter_mut() {
            let sum: f64 = row.iter().sum();
            if sum.is_finite() && sum > 0.0 {
                row.iter_mut().for_each(|x| *x /= sum);
            }
        }
        Self::new(states, signals, probs)
    }

    /// Two-state symmetric binary experiment: state 0 emits signal 0 with
    /// probability `p`, state 1 emits signal 1 with probability `p`.
    pub fn binary(p: f64) -> Result<Self> {
        let states = StateSpace::indexed(2)?;
        Self::new(
            states,
            vec!["0".into(), "1".into()],
            vec![vec![p, 1.0 - p], vec![1.0 - p, p]],
        )
    }

    /// Experiment whose rows are all equal to `row`.
    pub fn uninformative(states: StateSpace, row: Vec<f64>) -> Result<Self> {
        let signals = (0..row.len()).map(|s| s.to_string()).collect();
        let probs = vec![row; states.len()];
        Self::new(states, signals, probs)
    }

    pub fn states(&self) -> &StateSpace {
        &self.states
    }

    pub fn signals(&self) -> &[String] {
        &self.signals
    }

    pub fn probs(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn row(&self, state: usize) -> &[f64] {
        &self.probs[state]
    }

    pub fn num_states(&self) -> usize {
        self.probs.len()
    }

    pub fn num_signals(&self) -> usize {
        self.signals.len()
    }

    /// True if every state induces the same signal distribution.
    pub fn is_uninformative(&self) -> bool {
        self.probs.iter().all(|row| row == &self.probs[0])
    }

    /// Splits signal `s` into two signals carrying fractions `fraction` and
    /// `1 - fraction` of its mass in every state. The result is
    /// Blackwell-equivalent to `self`.
    pub fn split_signal(&self, s: usize, fraction: f64) -> Result<Self> {
        if s >= self.num_signals() {
            return Err(Error::DimensionMismatch(format!(
                "no signal with index {s}"
            )));
        }
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(Error::AlphaOutOfRange(fraction));
        }
        let mut signals = self.signals.clone();
        signals.push(fresh_symbol(
            &self.signals,
            &format!("{}'", self.signals[s]),
        ));
        let probs = self
            .probs
            .iter()
            .map(|row| {
                let mut out = row.clone();
                out[s] = row[s] * fraction;
                out.push(row[s] * (1.0 - fraction));
                out
            })
            .collect();
        Self::new(self.states.clone(), signals, probs)
    }
}

fn check_shape(states: &StateSpace, signals: &[String], probs: &[Vec<f64>]) -> Result<()> {
    if probs.len() != states.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} probability rows for {} states",
            probs.len(),
            states.len()
        )));
    }
    if signals.is_empty() {
        return Err(Error::DimensionMismatch("experiment has no signals".into()));
    }
    if let Some((i, row)) = probs
        .iter()
        .enumerate()
        .find(|(_, r)| r.len() != signals.len())
    {
        return Err(Error::DimensionMismatch(format!(
            "row {i} has {} entries for {} signals",
            row.len(),
            signals.len()
        )));
    }
    Ok(())
}

/// A row-stochastic matrix mapping source signals to target signals.
#[derive(Debug, Clone, PartialEq)]
pub struct GarblingMatrix {
    probs: Vec<Vec<f64>>,
}

impl GarblingMatrix {
    pub fn new(probs: Vec<Vec<f64>>) -> Result<Self> {
        let width = probs.first().map_or(0, Vec::len);
        if probs.is_empty() || width == 0 || probs.iter().any(|r| r.len() != width) {
            return Err(Error::DimensionMismatch(
                "garbling matrix is ragged or empty".into(),
            ));
        }
        for (i, row) in probs.iter().enumerate() {
            check_stochastic_row(row, i)?;
        }
        Ok(Self { probs })
    }

    pub fn identity(n: usize) -> Self {
        let probs = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self { probs }
    }

    /// Binary symmetric channel flipping each signal with probability `t`.
    pub fn symmetric_noise(t: f64) -> Result<Self> {
        Self::new(vec![vec![1.0 - t, t], vec![t, 1.0 - t]])
    }

    pub fn probs(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn num_sources(&self) -> usize {
        self.probs.len()
    }

    pub fn num_targets(&self) -> usize {
        self.probs[0].len()
    }
}

/// Independent joint observation of two experiments. Signals are ordered
/// pairs in row-major order over `a.signals × b.signals`.
pub fn product(a: &Experiment, b: &Experiment) -> Result<Experiment> {
    if a.states != b.states {
        return Err(Error::StateSpaceMismatch);
    }
    let signals = a
        .signals
        .iter()
        .flat_map(|s| b.signals.iter().map(move |t| format!("({s},{t})")))
        .collect();
    let probs = a
        .probs
        .iter()
        .zip(&b.probs)
        .map(|(ra, rb)| {
            ra.iter()
                .flat_map(|&x| rb.iter().map(move |&y| x * y))
                .collect()
        })
        .collect();
    Experiment::new(a.states.clone(), signals, probs)
}

/// `k`-fold independent repetition of `mu`.
pub fn power(mu: &Experiment, k: usize) -> Result<Experiment> {
    if k == 0 {
        return Err(Error::InvalidParameter("power requires k >= 1".into()));
    }
    let mut out = mu.clone();
    for _ in 1..k {
        out = product(&out, mu)?;
    }
    Ok(out)
}

/// Runs `mu` with probability `alpha` and otherwise emits a fresh
/// uninformative symbol (`"o"`, suffixed with a counter on collision).
pub fn dilute(mu: &Experiment, alpha: f64) -> Result<Experiment> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    if alpha == 1.0 {
        return Ok(mu.clone());
    }
    let mut signals = mu.signals.clone();
    signals.push(fresh_symbol(&mu.signals, "o"));
    let probs = mu
        .probs
        .iter()
        .map(|row| {
            let mut out: Vec<f64> = row.iter().map(|x| alpha * x).collect();
            out.push(1.0 - alpha);
            out
        })
        .collect();
    Experiment::new(mu.states.clone(), signals, probs)
}

fn fresh_symbol(existing: &[String], base: &str) -> String {
    if !existing.iter().any(|s| s == base) {
        return base.to_string();
    }
    (1..)
        .map(|k| format!("{base}{k}"))
        .find(|cand| !existing.iter().any(|s| s == cand))
        .expect("unbounded counter")
}

/// Post-processes the signals of `mu` through `g`: `probs = mu.probs · g`.
pub fn garble(mu: &Experiment, g: &GarblingMatrix) -> Result<Experiment> {
    if g.num_sources() != mu.num_signals() {
        return Err(Error::DimensionMismatch(format!(
            "garbling has {} source rows, experiment has {} signals",
            g.num_sources(),
            mu.num_signals()
        )));
    }
    let width = g.num_targets();
    let probs: Vec<Vec<f64>> = mu
        .probs
        .iter()
        .map(|row| {
            (0..width)
                .map(|t| row.iter().zip(&g.probs).map(|(x, gr)| x * gr[t]).sum())
                .collect()
        })
        .collect();
    for (i, row) in probs.iter().enumerate() {
        if let Some((col, &value)) = row.iter().enumerate().find(|(_, &v)| v <= POSITIVITY_FLOOR) {
            return Err(Error::NonPositiveEntry { row: i, col, value });
        }
    }
    let signals = (0..width).map(|t| t.to_string()).collect();
    Experiment::new(mu.states.clone(), signals, probs)
}

/// Signal-wise mixture `w·a + (1-w)·b` of two experiments sharing the same
/// states and signal set.
pub fn mixture(a: &Experiment, b: &Experiment, w: f64) -> Result<Experiment> {
    if a.states != b.states {
        return Err(Error::StateSpaceMismatch);
    }
    if a.num_signals() != b.num_signals() {
        return Err(Error::DimensionMismatch(
            "mixture needs a common signal set".into(),
        ));
    }
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::AlphaOutOfRange(w));
    }
    let probs = a
        .probs
        .iter()
        .zip(&b.probs)
        .map(|(ra, rb)| {
            ra.iter()
                .zip(rb)
                .map(|(x, y)| w * x + (1.0 - w) * y)
                .collect()
        })
        .collect();
    Experiment::new(a.states.clone(), a.signals.clone(), probs)
}

/// Kullback-Leibler divergence `Σ p ln(p/q)` in nats.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(format!(
            "rows of length {} and {}",
            p.len(),
            q.len()
        )));
    }
    check_positive_row(p, 0)?;
    check_positive_row(q, 1)?;
    Ok(kl_unchecked(p, q))
}

pub(crate) fn kl_unchecked(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(&x, &y)| if x > 0.0 { x * (x / y).ln() } else { 0.0 })
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    pub belief: Vec<f64>,
    pub marginal: f64,
}

pub(crate) fn check_prior(prior: &[f64], n: usize) -> Result<()> {
    if prior.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "prior has {} entries for {} states",
            prior.len(),
            n
        )));
    }
    if prior.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::PriorNotFullSupport);
    }
    let sum: f64 = prior.iter().sum();
    if (sum - 1.0).abs() > crate::numeric::ROW_SUM_TOL {
        return Err(Error::RowSumViolation { row: 0, sum });
    }
    Ok(())
}

/// Posterior belief and marginal probability of every signal of `mu`.
pub fn posterior_distribution(mu: &Experiment, prior: &[f64]) -> Result<Vec<Posterior>> {
    check_prior(prior, mu.num_states())?;
    Ok((0..mu.num_signals())
        .map(|s| {
            let joint: Vec<f64> = prior
                .iter()
                .zip(&mu.probs)
                .map(|(q, row)| q * row[s])
                .collect();
            let marginal: f64 = joint.iter().sum();
            Posterior {
                belief: joint.iter().map(|x| x / marginal).collect(),
                marginal,
            }
        })
        .collect())
}
