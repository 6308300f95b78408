//! The dot-counting perception task.
//!
//! There are 100 dots, `i` of them blue, with `i` uniform on
//! `{50-r, …, 49, 51, …, 50+r}`. The subject guesses whether blue (`B`) or
//! red (`R`) dots are in the majority and earns 1 for a correct guess.

use serde::Serialize;

use super::{solve_llr, solve_mutual_information, DecisionProblem, SolveOptions, SolveResult};
use crate::costs::BetaMatrix;
use crate::error::{Error, Result};
use crate::experiment::StateSpace;

pub const RED: usize = 0;
pub const BLUE: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostKind {
    Llr,
    MutualInformation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsychometricPoint {
    pub state: i64,
    pub prob_blue: f64,
    pub prob_red: f64,
    /// Probability of a correct guess in this state.
    pub correct: f64,
}

/// Builds the `2r`-state, two-action problem with a uniform prior.
/// Actions are ordered `[R, B]`.
pub fn perception_problem(r: usize) -> Result<DecisionProblem> {
    if !(1..=50).contains(&r) {
        return Err(Error::InvalidParameter(format!(
            "r = {r} must lie in 1..=50"
        )));
    }
    let r = r as i64;
    let blue: Vec<i64> = (50 - r..=50 + r).filter(|&i| i != 50).collect();
    let states = StateSpace::from_values(blue.iter().map(|&i| i as f64).collect())?;
    let red_payoff = blue
        .iter()
        .map(|&i| if i < 50 { 1.0 } else { 0.0 })
        .collect();
    let blue_payoff = blue
        .iter()
        .map(|&i| if i > 50 { 1.0 } else { 0.0 })
        .collect();
    let prior = vec![1.0 / blue.len() as f64; blue.len()];
    DecisionProblem::new(
        states,
        vec!["R".into(), "B".into()],
        vec![red_payoff, blue_payoff],
        prior,
    )
}

/// Solves the perception task under the LLR cost with `β_ij = kappa/(i-j)²`
/// or under mutual information with constant `lambda`, and tabulates the
/// choice probabilities per state.
pub fn psychometric_curve(
    r: usize,
    kappa: f64,
    kind: CostKind,
    lambda: f64,
    opts: &SolveOptions,
) -> Result<(Vec<PsychometricPoint>, SolveResult)> {
    let problem = perception_problem(r)?;
    let result = match kind {
        CostKind::Llr => {
            let beta = BetaMatrix::inverse_square(problem.states().clone(), kappa)?;
            solve_llr(&problem, &beta, opts)?
        }
        CostKind::MutualInformation => solve_mutual_information(&problem, lambda, opts)?,
    };
    let values = problem
        .states()
        .values()
        .expect("perception states carry values");
    let points = values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let prob_blue = result.rule.prob(i, BLUE);
            let prob_red = result.rule.prob(i, RED);
            PsychometricPoint {
                state: v as i64,
                prob_blue,
                prob_red,
                correct: if v > 50.0 { prob_blue } else { prob_red },
            }
        })
        .collect();
    Ok((points, result))
}
