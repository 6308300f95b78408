//! JSON file formats for experiments, coefficient matrices and decision
//! problems.
//!
//! ```text
//! experiment: {"states": [...], "values": [...]?, "signals": [...], "probs": [[...], ...]}
//! beta:       {"states": [...], "coef": [[...], ...]}
//!             {"rule": "one_dimensional", "kappa": k}
//!             {"rule": "inverse_square", "kappa": k}
//!             {"rule": "constant", "value": c}
//! problem:    {"states": [...], "values": [...]?, "actions": [...],
//!              "utility": [[u(a,i), ...], ...], "prior": [...]}
//! ```

use serde::{Deserialize, Serialize};

use crate::costs::{one_dimensional_betas, BetaMatrix};
use crate::error::{Error, Result};
use crate::experiment::{Experiment, StateSpace};
use crate::solver::DecisionProblem;

fn state_space(states: Vec<String>, values: Option<Vec<f64>>) -> Result<StateSpace> {
    match values {
        Some(v) => StateSpace::with_values(states, v),
        None => StateSpace::new(states),
    }
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub states: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    pub signals: Vec<String>,
    pub probs: Vec<Vec<f64>>,
}

impl ExperimentFile {
    pub fn parse(text: &str) -> Result<Self> {
        parse(text)
    }

    pub fn into_experiment(self) -> Result<Experiment> {
        Experiment::new(
            state_space(self.states, self.values)?,
            self.signals,
            self.probs,
        )
    }

    pub fn from_experiment(mu: &Experiment) -> Self {
        Self {
            states: mu.states().labels().to_vec(),
            values: mu.states().values().map(<[f64]>::to_vec),
            signals: mu.signals().to_vec(),
            probs: mu.probs().to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule", deny_unknown_fields)]
pub enum BetaRule {
    OneDimensional { kappa: f64 },
    InverseSquare { kappa: f64 },
    Constant { value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BetaSpec {
    Dense {
        states: Vec<String>,
        coef: Vec<Vec<f64>>,
    },
    Rule(BetaRule),
}

impl BetaSpec {
    pub fn parse(text: &str) -> Result<Self> {
        parse(text)
    }

    /// Builds the matrix for `states`. A dense matrix may list the states in
    /// any order; it is permuted to match.
    pub fn resolve(&self, states: &StateSpace) -> Result<BetaMatrix> {
        match self {
            BetaSpec::Dense {
                states: labels,
                coef,
            } => {
                if labels.len() != states.len() || coef.len() != labels.len() {
                    return Err(Error::StateSpaceMismatch);
                }
                let position = |label: &String| labels.iter().position(|l| l == label);
                let order: Vec<usize> = states
                    .labels()
                    .iter()
                    .map(position)
                    .collect::<Option<_>>()
                    .ok_or(Error::StateSpaceMismatch)?;
                if coef.iter().any(|row| row.len() != labels.len()) {
                    return Err(Error::DimensionMismatch(
                        "beta matrix must be square".into(),
                    ));
                }
                let permuted = order
                    .iter()
                    .map(|&i| order.iter().map(|&j| coef[i][j]).collect())
                    .collect();
                BetaMatrix::dense(states.clone(), permuted)
            }
            BetaSpec::Rule(BetaRule::OneDimensional { kappa }) => {
                one_dimensional_betas(states, *kappa)
            }
            BetaSpec::Rule(BetaRule::InverseSquare { kappa }) => {
                BetaMatrix::inverse_square(states.clone(), *kappa)
            }
            BetaSpec::Rule(BetaRule::Constant { value }) => {
                BetaMatrix::constant(states.clone(), *value)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub states: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    pub actions: Vec<String>,
    pub utility: Vec<Vec<f64>>,
    pub prior: Vec<f64>,
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self> {
        parse(text)
    }

    pub fn into_problem(self) -> Result<DecisionProblem> {
        DecisionProblem::new(
            state_space(self.states, self.values)?,
            self.actions,
            self.utility,
            self.prior,
        )
    }

    pub fn from_problem(problem: &DecisionProblem) -> Self {
        Self {
            states: problem.states().labels().to_vec(),
            values: problem.states().values().map(<[f64]>::to_vec),
            actions: problem.actions().to_vec(),
            utility: problem.utility_matrix().to_vec(),
            prior: problem.prior().to_vec(),
        }
    }
}
