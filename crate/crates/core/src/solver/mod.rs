//! Optimal information acquisition in finite decision problems.
//!
//! An agent with prior `q` chooses a state-dependent distribution over
//! actions (a [`ChoiceRule`]) to maximise expected utility minus the cost of
//! the rule viewed as an experiment whose signals are actions.

mod llr;
mod mi;
mod perception;

pub use llr::solve_llr;
pub use mi::{mi_fixed_point_residual, solve_mutual_information};
pub use perception::{perception_problem, psychometric_curve, CostKind, PsychometricPoint};

use serde::{Deserialize, Serialize};

use crate::costs::BetaMatrix;
use crate::error::{Error, Result};
use crate::experiment::{check_prior, kl_unchecked, StateSpace};
use crate::numeric::{check_stochastic_row, xlogx};

/// Actions whose probability is below this in every state are treated as
/// outside the support of a rule.
pub const SUPPORT_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionProblem {
    states: StateSpace,
    actions: Vec<String>,
    /// `utility[a][i]`.
    utility: Vec<Vec<f64>>,
    prior: Vec<f64>,
}

impl DecisionProblem {
    pub fn new(
        states: StateSpace,
        actions: Vec<String>,
        utility: Vec<Vec<f64>>,
        prior: Vec<f64>,
    ) -> Result<Self> {
        if actions.is_empty() {
            return Err(Error::DimensionMismatch("no actions".into()));
        }
        if utility.len() != actions.len() || utility.iter().any(|r| r.len() != states.len()) {
            return Err(Error::DimensionMismatch(format!(
                "utility must be {} actions × {} states",
                actions.len(),
                states.len()
            )));
        }
        if utility.iter().flatten().any(|u| !u.is_finite()) {
            return Err(Error::InvalidParameter(
                "utility entries must be finite".into(),
            ));
        }
        check_prior(&prior, states.len())?;
        Ok(Self {
            states,
            actions,
            utility,
            prior,
        })
    }

    pub fn states(&self) -> &StateSpace {
        &self.states
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn utility(&self, action: usize, state: usize) -> f64 {
        self.utility[action][state]
    }

    pub fn utility_matrix(&self) -> &[Vec<f64>] {
        &self.utility
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    /// `max_{a,i} |u(a, i)|`.
    pub fn utility_norm(&self) -> f64 {
        self.utility
            .iter()
            .flatten()
            .fold(0.0, |m, u| m.max(u.abs()))
    }

    /// Action maximising expected utility under the prior (lowest index on ties).
    pub fn prior_optimal_action(&self) -> usize {
        let value = |a: usize| -> f64 {
            self.prior
                .iter()
                .zip(&self.utility[a])
                .map(|(q, u)| q * u)
                .sum()
        };
        (0..self.num_actions()).fold(0, |best, a| if value(a) > value(best) { a } else { best })
    }
}

/// Row `i` is the distribution over actions chosen in state `i`.
/// Serialised as the bare matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct ChoiceRule {
    probs: Vec<Vec<f64>>,
}

impl TryFrom<Vec<Vec<f64>>> for ChoiceRule {
    type Error = Error;

    fn try_from(probs: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(probs)
    }
}

impl From<ChoiceRule> for Vec<Vec<f64>> {
    fn from(rule: ChoiceRule) -> Self {
        rule.probs
    }
}

impl ChoiceRule {
    pub fn new(probs: Vec<Vec<f64>>) -> Result<Self> {
        let width = probs.first().map_or(0, Vec::len);
        if probs.is_empty() || width == 0 || probs.iter().any(|r| r.len() != width) {
            return Err(Error::DimensionMismatch(
                "choice rule is ragged or empty".into(),
            ));
        }
        for (i, row) in probs.iter().enumerate() {
            check_stochastic_row(row, i)?;
        }
        Ok(Self { probs })
    }

    /// Every state uses `row`.
    pub fn uninformative(num_states: usize, row: Vec<f64>) -> Result<Self> {
        Self::new(vec![row; num_states])
    }

    pub fn probs(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn row(&self, state: usize) -> &[f64] {
        &self.probs[state]
    }

    pub fn prob(&self, state: usize, action: usize) -> f64 {
        self.probs[state][action]
    }

    pub fn num_states(&self) -> usize {
        self.probs.len()
    }

    pub fn num_actions(&self) -> usize {
        self.probs[0].len()
    }

    /// Actions played with positive probability in some state.
    pub fn support(&self) -> Vec<usize> {
        (0..self.num_actions())
            .filter(|&a| self.probs.iter().any(|row| row[a] > 0.0))
            .collect()
    }

    /// Unconditional action distribution under `prior`.
    pub fn marginal(&self, prior: &[f64]) -> Vec<f64> {
        (0..self.num_actions())
            .map(|a| {
                prior
                    .iter()
                    .zip(&self.probs)
                    .map(|(q, row)| q * row[a])
                    .sum()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub rule: ChoiceRule,
    pub objective: f64,
    pub cost: f64,
    pub expected_utility: f64,
    pub foc_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl SolveResult {
    /// Turns a non-converged result into [`Error::NotConverged`].
    pub fn into_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                iterations: self.iterations,
                residual: self.foc_residual,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 200_000,
        }
    }
}

fn check_rule(problem: &DecisionProblem, rule: &ChoiceRule) -> Result<()> {
    if rule.num_states() != problem.num_states() || rule.num_actions() != problem.num_actions() {
        return Err(Error::DimensionMismatch(format!(
            "rule is {}×{}, problem is {}×{}",
            rule.num_states(),
            rule.num_actions(),
            problem.num_states(),
            problem.num_actions()
        )));
    }
    Ok(())
}

fn check_beta(problem: &DecisionProblem, beta: &BetaMatrix) -> Result<()> {
    if beta.states() != problem.states() {
        return Err(Error::StateSpaceMismatch);
    }
    Ok(())
}

pub fn expected_utility(problem: &DecisionProblem, rule: &ChoiceRule) -> f64 {
    let mut total = 0.0;
    for (i, row) in rule.probs.iter().enumerate() {
        let inner: f64 = row
            .iter()
            .enumerate()
            .map(|(a, p)| p * problem.utility[a][i])
            .sum();
        total += problem.prior[i] * inner;
    }
    total
}

/// LLR cost of a rule. Actions outside the support contribute nothing; an
/// action played in one state but never in another makes the cost infinite.
pub fn rule_llr_cost(rule: &ChoiceRule, beta: &BetaMatrix) -> f64 {
    let n = rule.num_states();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let b = beta.get(i, j);
            if i != j && b != 0.0 {
                total += b * kl_unchecked(rule.row(i), rule.row(j));
            }
        }
    }
    total
}

/// Mutual information between state and action under `prior`, in nats.
pub fn rule_mutual_information(rule: &ChoiceRule, prior: &[f64]) -> f64 {
    let marginal = rule.marginal(prior);
    let conditional: f64 = prior
        .iter()
        .zip(&rule.probs)
        .map(|(q, row)| q * row.iter().map(|&p| xlogx(p)).sum::<f64>())
        .sum();
    let unconditional: f64 = marginal.iter().map(|&p| xlogx(p)).sum();
    (conditional - unconditional).max(0.0)
}

/// Expected utility minus the LLR cost of the rule.
pub fn objective(problem: &DecisionProblem, rule: &ChoiceRule, beta: &BetaMatrix) -> Result<f64> {
    check_rule(problem, rule)?;
    check_beta(problem, beta)?;
    Ok(expected_utility(problem, rule) - rule_llr_cost(rule, beta))
}

/// `c̃(i, a) = -Σ_{j≠i} [β_ij ln(μ_j(a)/μ_i(a)) + β_ji μ_j(a)/μ_i(a)]`.
fn marginal_cost(rule: &ChoiceRule, beta: &BetaMatrix, i: usize, a: usize) -> f64 {
    let xi = rule.probs[i][a];
    let mut total = 0.0;
    for j in 0..rule.num_states() {
        if j != i {
            let ratio = rule.probs[j][a] / xi;
            let (bij, bji) = (beta.get(i, j), beta.get(j, i));
            if bij != 0.0 {
                total += bij * ratio.ln();
            }
            total += bji * ratio;
        }
    }
    -total
}

/// Largest violation of the first-order conditions
/// `q_i [u(a1, i) - u(a2, i)] = c̃(i, a1) - c̃(i, a2)` over states and pairs
/// of supported actions.
pub fn foc_residual(
    problem: &DecisionProblem,
    beta: &BetaMatrix,
    rule: &ChoiceRule,
) -> Result<f64> {
    check_rule(problem, rule)?;
    check_beta(problem, beta)?;
    let support = rule.support();
    let mut worst: f64 = 0.0;
    for i in 0..problem.num_states() {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &a in &support {
            if rule.probs[i][a] <= 0.0 {
                return Err(Error::ZeroProbabilityOnSupport {
                    state: i,
                    action: a,
                });
            }
            let h = problem.prior[i] * problem.utility[a][i] - marginal_cost(rule, beta, i, a);
            lo = lo.min(h);
            hi = hi.max(h);
        }
        worst = worst.max(hi - lo);
    }
    Ok(worst)
}

/// Checks `|μ_i(a) - μ_j(a)| <= √‖u‖ d(i,j)^{γ/2}` with `d(i,j) = |v_i - v_j|`.
/// Returns the largest ratio of the left side to the bound and whether it is
/// at most one (up to `1e-9`).
pub fn lipschitz_check(
    rule: &ChoiceRule,
    values: &[f64],
    u_norm: f64,
    gamma: f64,
) -> Result<(f64, bool)> {
    if values.len() != rule.num_states() {
        return Err(Error::DimensionMismatch(
            "one value per state required".into(),
        ));
    }
    if !(u_norm > 0.0) || !(gamma > 0.0) {
        return Err(Error::InvalidParameter(
            "u_norm and gamma must be positive".into(),
        ));
    }
    let n = values.len();
    let mut max_ratio: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (values[i] - values[j]).abs();
            if d == 0.0 {
                return Err(Error::DuplicateValues);
            }
            let bound = u_norm.sqrt() * d.powf(gamma / 2.0);
            for a in 0..rule.num_actions() {
                let gap = (rule.probs[i][a] - rule.probs[j][a]).abs();
                max_ratio = max_ratio.max(gap / bound);
            }
        }
    }
    Ok((max_ratio, max_ratio <= 1.0 + 1e-9))
}
