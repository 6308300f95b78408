//! Mutual-information (rational inattention) benchmark.
//!
//! At the optimum, `μ_i(a) = p̄(a) e^{u(a,i)/λ} / Σ_b p̄(b) e^{u(b,i)/λ}` where
//! `p̄` is the unconditional action distribution, and `p̄` maximises the
//! concave function `V(p̄) = λ Σ_i q_i ln Σ_a p̄(a) e^{u(a,i)/λ}` over the
//! simplex. The solver works on `p̄`: it takes Newton steps on the actions in
//! use and falls back to the damped fixed-point (Blahut-Arimoto) map
//! `p̄ ← ½ p̄ + ½ marginal(μ)` when the Newton system is unusable.

use super::{
    expected_utility, rule_mutual_information, ChoiceRule, DecisionProblem, SolveOptions,
    SolveResult,
};
use crate::error::{Error, Result};
use crate::numeric::solve_dense;

const DAMPING: f64 = 0.5;
const ARMIJO: f64 = 1e-4;
const BOUNDARY_FRACTION: f64 = 0.995;
/// Actions whose unconditional probability falls below this are dropped.
const PRUNE_FLOOR: f64 = 1e-14;
/// Actions below this whose marginal value is clearly below `λ` are also
/// dropped; the re-entry check undoes mistakes.
const LOSING_FLOOR: f64 = 1e-8;
/// Weight given to a dropped action that should be played after all.
const REENTRY_WEIGHT: f64 = 1e-3;
const STALL_LIMIT: usize = 100;
const MAX_NEWTON_DIM: usize = 800;

/// `e[i][a] = exp((u(a,i) - max_b u(b,i)) / λ)`, shifted per state so the
/// largest entry in each state is 1.
fn tilts(problem: &DecisionProblem, lambda: f64) -> Vec<Vec<f64>> {
    (0..problem.num_states())
        .map(|i| {
            let top = (0..problem.num_actions())
                .map(|a| problem.utility(a, i))
                .fold(f64::NEG_INFINITY, f64::max);
            (0..problem.num_actions())
                .map(|a| ((problem.utility(a, i) - top) / lambda).exp())
                .collect()
        })
        .collect()
}

fn logit_rows(e: &[Vec<f64>], weights: &[f64]) -> Vec<Vec<f64>> {
    e.iter()
        .map(|row| {
            let scaled: Vec<f64> = row.iter().zip(weights).map(|(x, w)| x * w).collect();
            let z: f64 = scaled.iter().sum();
            scaled.into_iter().map(|v| v / z).collect()
        })
        .collect()
}

/// `max_{i,a} |μ_i(a) - p̄(a) e^{u(a,i)/λ} / Σ_b p̄(b) e^{u(b,i)/λ}|` with `p̄`
/// the marginal of `rule` under the problem's prior.
pub fn mi_fixed_point_residual(problem: &DecisionProblem, lambda: f64, rule: &ChoiceRule) -> f64 {
    let marginal = rule.marginal(problem.prior());
    let target = logit_rows(&tilts(problem, lambda), &marginal);
    rule.probs()
        .iter()
        .zip(&target)
        .flat_map(|(r, t)| r.iter().zip(t).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}

struct Dual<'a> {
    prior: &'a [f64],
    e: Vec<Vec<f64>>,
    lambda: f64,
}

impl Dual<'_> {
    /// `V` up to the constant from the per-state shift.
    fn value(&self, w: &[f64]) -> f64 {
        self.prior
            .iter()
            .zip(&self.e)
            .map(|(q, row)| q * row.iter().zip(w).map(|(x, y)| x * y).sum::<f64>().ln())
            .sum::<f64>()
            * self.lambda
    }

    fn normalizers(&self, w: &[f64]) -> Vec<f64> {
        self.e
            .iter()
            .map(|row| row.iter().zip(w).map(|(x, y)| x * y).sum())
            .collect()
    }

    /// `∂V/∂p̄(a) = λ Σ_i q_i e[i][a] / Z_i`; equals `λ` on the support at
    /// the optimum and is at most `λ` off it.
    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let k = self.e[0].len();
        (0..k)
            .map(|a| {
                self.lambda
                    * self
                        .prior
                        .iter()
                        .zip(&self.e)
                        .zip(z)
                        .map(|((q, row), zi)| q * row[a] / zi)
                        .sum::<f64>()
            })
            .collect()
    }

    fn newton_direction(
        &self,
        w: &[f64],
        z: &[f64],
        grad: &[f64],
        acts: &[usize],
    ) -> Option<Vec<f64>> {
        let m = acts.len();
        if m + 1 > MAX_NEWTON_DIM {
            return None;
        }
        let mut h = vec![vec![0.0; m + 1]; m + 1];
        let mut rhs = vec![0.0; m + 1];
        for (p, &a) in acts.iter().enumerate() {
            for (r, &b) in acts.iter().enumerate() {
                h[p][r] = -self.lambda
                    * self
                        .prior
                        .iter()
                        .zip(&self.e)
                        .zip(z)
                        .map(|((q, row), zi)| q * row[a] * row[b] / (zi * zi))
                        .sum::<f64>();
            }
            // Keeps the system regular when action columns are collinear.
            h[p][p] -= 1e-10 * self.lambda / w[a];
            h[p][m] = 1.0;
            h[m][p] = 1.0;
            rhs[p] = -grad[a];
        }
        let sol = solve_dense(h, rhs)?;
        let mut d = vec![0.0; w.len()];
        for (p, &a) in acts.iter().enumerate() {
            d[a] = sol[p];
        }
        Some(d)
    }
}

fn newton_step(dual: &Dual, w: &[f64], v: f64, acts: &[usize]) -> Option<(Vec<f64>, f64)> {
    let z = dual.normalizers(w);
    let grad = dual.gradient(&z);
    let d = dual.newton_direction(w, &z, &grad, acts)?;
    let ascent: f64 = acts.iter().map(|&a| grad[a] * d[a]).sum();
    if !(ascent >= 0.0) {
        return None;
    }
    let mut t: f64 = 1.0;
    for &a in acts {
        if d[a] < 0.0 {
            t = t.min(BOUNDARY_FRACTION * w[a] / -d[a]);
        }
    }
    let slack = 8.0 * f64::EPSILON * (1.0 + v.abs());
    while t >= 1e-10 {
        let mut next: Vec<f64> = w
            .iter()
            .zip(&d)
            .map(|(x, y)| (x + t * y).max(0.0))
            .collect();
        for &a in acts {
            next[a] = next[a].max(f64::MIN_POSITIVE);
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        let v_new = dual.value(&next);
        if v_new.is_finite() && v_new >= v + ARMIJO * t * ascent - slack {
            return Some((next, v_new));
        }
        t *= 0.5;
    }
    None
}

fn damped_fixed_point(dual: &Dual, w: &[f64]) -> Vec<f64> {
    let rows = logit_rows(&dual.e, w);
    (0..w.len())
        .map(|a| {
            let m: f64 = dual
                .prior
                .iter()
                .zip(&rows)
                .map(|(q, row)| q * row[a])
                .sum();
            DAMPING * w[a] + (1.0 - DAMPING) * m
        })
        .collect()
}

/// Maximises expected utility minus `lambda` times the mutual information
/// between state and action. `foc_residual` in the result is the
/// fixed-point residual of [`mi_fixed_point_residual`]. Converged means that
/// residual is within `opts.tolerance` and, in utility units,
/// `|∂V/∂p̄(a) - λ| <= tolerance` for actions in use and
/// `∂V/∂p̄(a) - λ <= tolerance` for the others. The second condition matters
/// for large `λ`, where the fixed-point map is close to the identity.
pub fn solve_mutual_information(
    problem: &DecisionProblem,
    lambda: f64,
    opts: &SolveOptions,
) -> Result<SolveResult> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "lambda = {lambda} must be positive"
        )));
    }
    if !(opts.tolerance > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    let dual = Dual {
        prior: problem.prior(),
        e: tilts(problem, lambda),
        lambda,
    };
    let k = problem.num_actions();
    let mut w = vec![1.0 / k as f64; k];
    let mut v = dual.value(&w);
    let mut iterations = 0;
    let mut stalled = 0;
    let mut certified = false;

    loop {
        let rule = ChoiceRule::new(logit_rows(&dual.e, &w))?;
        let residual = mi_fixed_point_residual(problem, lambda, &rule);
        let grad = dual.gradient(&dual.normalizers(&w));
        let support_gap = (0..k)
            .filter(|&a| w[a] > 0.0)
            .map(|a| (grad[a] - lambda).abs())
            .fold(0.0, f64::max);
        if residual <= opts.tolerance && support_gap <= opts.tolerance {
            let entering = (0..k)
                .filter(|&a| w[a] == 0.0 && grad[a] - lambda > opts.tolerance)
                .max_by(|&a, &b| grad[a].total_cmp(&grad[b]));
            match entering {
                None => {
                    certified = true;
                    break;
                }
                Some(a) => {
                    w.iter_mut().for_each(|x| *x *= 1.0 - REENTRY_WEIGHT);
                    w[a] = REENTRY_WEIGHT;
                    v = dual.value(&w);
                    stalled = 0;
                }
            }
        }
        if iterations >= opts.max_iterations || stalled >= STALL_LIMIT {
            break;
        }
        iterations += 1;

        let acts: Vec<usize> = (0..k).filter(|&a| w[a] > 0.0).collect();
        let (next, v_new) = match newton_step(&dual, &w, v, &acts) {
            Some(step) => step,
            None => {
                let next = damped_fixed_point(&dual, &w);
                let v_new = dual.value(&next);
                (next, v_new)
            }
        };
        stalled = if v_new - v <= 4.0 * f64::EPSILON * (1.0 + v.abs()) {
            stalled + 1
        } else {
            0
        };
        w = next;
        v = v_new;
        let grad = dual.gradient(&dual.normalizers(&w));
        let doomed: Vec<usize> = (0..k)
            .filter(|&a| {
                w[a] > 0.0
                    && (w[a] < PRUNE_FLOOR
                        || (w[a] < LOSING_FLOOR && grad[a] - lambda < -opts.tolerance))
            })
            .collect();
        if !doomed.is_empty() && doomed.len() < acts.len() {
            doomed.iter().for_each(|&a| w[a] = 0.0);
            let total: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= total);
            v = dual.value(&w);
        }
    }

    let rule = ChoiceRule::new(logit_rows(&dual.e, &w))?;
    let residual = mi_fixed_point_residual(problem, lambda, &rule);
    let expected = expected_utility(problem, &rule);
    let cost = lambda * rule_mutual_information(&rule, problem.prior());
    Ok(SolveResult {
        rule,
        objective: expected - cost,
        cost,
        expected_utility: expected,
        foc_residual: residual,
        iterations,
        converged: certified && residual <= opts.tolerance,
    })
}
