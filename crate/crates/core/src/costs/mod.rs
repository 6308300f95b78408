//! The LLR cost of experiments and the mutual-information baseline.
//!
//! The LLR cost of `μ` is `Σ_{i≠j} β_ij D_KL(μ_i ‖ μ_j)`: a weighted sum of
//! expected log-likelihood ratios between every ordered pair of states.

mod beta;
mod partition;

pub use beta::{one_dimensional_betas, BetaMatrix};
pub use partition::{
    binary_divergence, grid_crossing_counts, hypothesis_test_cost, partition_coefficient,
    partition_coefficient_enumerated, partition_experiment, GridCrossings, Hypothesis,
};

use crate::error::{Error, Result};
use crate::experiment::{
    check_prior, kl_unchecked, posterior_distribution, Experiment, StateSpace,
};
use crate::numeric::{check_positive_row, entropy};

fn check_states(mu: &Experiment, beta: &BetaMatrix) -> Result<()> {
    if mu.states() != beta.states() {
        return Err(Error::StateSpaceMismatch);
    }
    Ok(())
}

/// One term of the LLR cost.
#[derive(Debug, Clone, PartialEq)]
pub struct PairTerm {
    pub i: usize,
    pub j: usize,
    pub beta: f64,
    pub kl: f64,
}

impl PairTerm {
    pub fn contribution(&self) -> f64 {
        self.beta * self.kl
    }
}

/// Every ordered pair `(i, j)`, `i ≠ j`, with its coefficient and divergence.
pub fn pairwise_terms(mu: &Experiment, beta: &BetaMatrix) -> Result<Vec<PairTerm>> {
    check_states(mu, beta)?;
    let n = mu.num_states();
    let mut terms = Vec::with_capacity(n * (n - 1));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                terms.push(PairTerm {
                    i,
                    j,
                    beta: beta.get(i, j),
                    kl: kl_unchecked(mu.row(i), mu.row(j)),
                });
            }
        }
    }
    Ok(terms)
}

/// `Σ_{i≠j} β_ij D_KL(μ_i ‖ μ_j)`.
pub fn llr_cost(mu: &Experiment, beta: &BetaMatrix) -> Result<f64> {
    check_states(mu, beta)?;
    let n = mu.num_states();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let b = beta.get(i, j);
            if i != j && b != 0.0 {
                total += b * kl_unchecked(mu.row(i), mu.row(j));
            }
        }
    }
    Ok(total)
}

/// Closed form for the symmetric binary signal of accuracy `p`:
/// `(β_01 + β_10)[p ln(p/(1-p)) + (1-p) ln((1-p)/p)]`.
pub fn binary_cost(p: f64, beta: &BetaMatrix) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::POutOfRange(p));
    }
    if beta.len() != 2 {
        return Err(Error::DimensionMismatch(
            "binary cost needs two states".into(),
        ));
    }
    Ok((beta.get(0, 1) + beta.get(1, 0)) * binary_divergence(p))
}

/// Cost of observing a normal signal with state-dependent mean and common
/// standard deviation `sigma`: `Σ β_ij (m_j - m_i)² / (2σ²)`.
pub fn normal_cost(means: &[f64], sigma: f64, beta: &BetaMatrix) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::SigmaNonPositive(sigma));
    }
    if means.len() != beta.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} means for {} states",
            means.len(),
            beta.len()
        )));
    }
    let n = means.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let d = means[j] - means[i];
                total += beta.get(i, j) * d * d;
            }
        }
    }
    Ok(total / (2.0 * sigma * sigma))
}

/// `λ·(H(prior) - E[H(posterior)])`, entropies in nats.
pub fn mutual_information_cost(mu: &Experiment, prior: &[f64], lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "lambda = {lambda} must be positive"
        )));
    }
    let posts = posterior_distribution(mu, prior)?;
    let expected: f64 = posts.iter().map(|p| p.marginal * entropy(&p.belief)).sum();
    Ok(lambda * (entropy(prior) - expected).max(0.0))
}

/// Potential `F(p) = Σ_{i≠j} β_ij (p_i/q_i) ln(p_i/p_j)` whose expected
/// change from prior to posterior equals the LLR cost.
pub fn posterior_separable_value(beta: &BetaMatrix, prior: &[f64], p: &[f64]) -> Result<f64> {
    check_prior(prior, beta.len())?;
    if p.len() != beta.len() {
        return Err(Error::DimensionMismatch("belief has wrong length".into()));
    }
    if check_positive_row(p, 0).is_err() {
        return Err(Error::NotFullSupport);
    }
    Ok(potential(beta, prior, p))
}

fn potential(beta: &BetaMatrix, prior: &[f64], p: &[f64]) -> f64 {
    let n = p.len();
    let mut total = 0.0;
    for i in 0..n {
        let w = p[i] / prior[i];
        for j in 0..n {
            if i != j {
                total += beta.get(i, j) * w * (p[i] / p[j]).ln();
            }
        }
    }
    total
}

/// The LLR cost recomputed as `E_π[F(p)] - F(prior)` over the distribution of
/// posteriors induced by `mu`.
pub fn llr_cost_via_posteriors(mu: &Experiment, beta: &BetaMatrix, prior: &[f64]) -> Result<f64> {
    check_states(mu, beta)?;
    let posts = posterior_distribution(mu, prior)?;
    let expected: f64 = posts
        .iter()
        .map(|p| p.marginal * potential(beta, prior, &p.belief))
        .sum();
    Ok(expected - potential(beta, prior, prior))
}

/// LLR and mutual-information costs of observing `k` independent flips of a
/// coin that shows the true state with probability `p`, over two states.
///
/// The number of heads is a sufficient statistic, so the `2^k`-signal
/// product experiment is Blackwell-equivalent to its `k + 1`-signal binomial
/// summary, and both costs are computed on the summary in log space. This
/// keeps large `k` usable even though individual outcome probabilities
/// underflow.
pub fn repeated_flip_costs(
    p: f64,
    k: usize,
    beta: &BetaMatrix,
    prior: &[f64],
    lambda: f64,
) -> Result<(f64, f64)> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::POutOfRange(p));
    }
    if beta.len() != 2 {
        return Err(Error::DimensionMismatch(
            "coin flips need two states".into(),
        ));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "lambda = {lambda} must be positive"
        )));
    }
    check_prior(prior, 2)?;
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let mut log_binom = 0.0;
    let mut llr = 0.0;
    let mut expected_entropy = 0.0;
    for h in 0..=k {
        if h > 0 {
            log_binom += ((k - h + 1) as f64 / h as f64).ln();
        }
        let (heads, tails) = (h as f64, (k - h) as f64);
        let log0 = log_binom + heads * lp + tails * lq;
        let log1 = log_binom + heads * lq + tails * lp;
        llr += beta.get(0, 1) * log0.exp() * (log0 - log1)
            + beta.get(1, 0) * log1.exp() * (log1 - log0);
        let a = prior[0].ln() + log0;
        let b = prior[1].ln() + log1;
        let top = a.max(b);
        let log_marginal = top + ((a - top).exp() + (b - top).exp()).ln();
        let post0 = (a - log_marginal).exp();
        expected_entropy += log_marginal.exp() * entropy(&[post0, 1.0 - post0]);
    }
    Ok((llr, lambda * (entropy(prior) - expected_entropy).max(0.0)))
}

/// Experiments I and II of the white-swan example over states `{a, e}`.
/// Experiment I reveals a non-white swan with probability `ε` if one exists;
/// experiment II reveals that all swans are white with probability `ε`.
pub fn swan_experiments(epsilon: f64) -> Result<(Experiment, Experiment)> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    let states = StateSpace::new(vec!["a".into(), "e".into()])?;
    let signals = vec!["s1".to_string(), "s2".to_string()];
    let e2 = epsilon * epsilon;
    let strong = vec![1.0 - e2, e2];
    let weak = vec![1.0 - epsilon, epsilon];
    let first = Experiment::new(
        states.clone(),
        signals.clone(),
        vec![strong.clone(), weak.clone()],
    )?;
    let second = Experiment::new(states, signals, vec![weak, strong])?;
    Ok((first, second))
}

/// Costs of the two swan experiments under `β_ae = kappa`, `β_ea = 0`.
pub fn verification_asymmetry(epsilon: f64, kappa: f64) -> Result<(f64, f64)> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "kappa = {kappa} must be positive"
        )));
    }
    let (first, second) = swan_experiments(epsilon)?;
    let beta = BetaMatrix::dense(
        first.states().clone(),
        vec![vec![0.0, kappa], vec![0.0, 0.0]],
    )?;
    Ok((llr_cost(&first, &beta)?, llr_cost(&second, &beta)?))
}
