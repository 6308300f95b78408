//! Newton and mirror-ascent steps for the LLR-cost decision problem.
//!
//! The main step is a Newton step on the supported actions with the row-sum
//! constraints enforced through the KKT system, followed by a backtracking
//! line search that keeps every probability positive. When that step is
//! unavailable (singular system, no ascent) the solver falls back to block
//! mirror ascent: each state's action distribution is updated multiplicatively,
//! `μ_i(a) ∝ μ_i(a) exp(η_i ∂f/∂μ_i(a))`, with per-state step sizes scaled by
//! the coupling `Σ_j β_ij + β_ji` and a common factor chosen by backtracking
//! on the true objective. The partial derivatives are
//! `q_i u(a,i) - c̃(i,a) - Σ_j β_ij`, so the spread of the gradient across
//! supported actions in a state is exactly that state's first-order residual.

use log::warn;

use super::{
    check_beta, expected_utility, foc_residual, rule_llr_cost, ChoiceRule, DecisionProblem,
    SolveOptions, SolveResult,
};
use crate::costs::BetaMatrix;
use crate::error::{Error, Result};

const ARMIJO: f64 = 1e-4;
const MAX_STEP: f64 = 1e4;
const MIN_STEP: f64 = 1e-16;
const MAX_LOG_CHANGE: f64 = 10.0;
/// Consecutive steps with rounding-level improvement before giving up.
const STALL_LIMIT: usize = 100;
/// Newton steps are skipped above this many KKT unknowns.
const MAX_NEWTON_DIM: usize = 800;
/// Fraction of the distance to the boundary a Newton step may cover.
const BOUNDARY_FRACTION: f64 = 0.995;
/// Mass given to the largest entry of a re-entering action column.
const REENTRY_MASS: f64 = 1e-2;
const MAX_REENTRIES: usize = 50;
/// Action columns whose largest entry falls below this are dropped; the
/// pricing check brings them back if that was premature.
const PRUNE_FLOOR: f64 = 1e-6;
const PRICING_ITERATIONS: usize = 2000;

struct Objective {
    n: usize,
    k: usize,
    /// `payoff[i][a] = q_i u(a, i)`.
    payoff: Vec<Vec<f64>>,
    beta: Vec<Vec<f64>>,
    inv_coupling: Vec<f64>,
    regularization: f64,
    /// `Σ_i max_a |q_i u(a, i)|`, the size of the terms that cancel in the
    /// objective.
    magnitude: f64,
}

impl Objective {
    fn new(problem: &DecisionProblem, beta: &BetaMatrix) -> Self {
        let n = problem.num_states();
        let k = problem.num_actions();
        let payoff: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..k)
                    .map(|a| problem.prior()[i] * problem.utility(a, i))
                    .collect()
            })
            .collect();
        let magnitude = payoff
            .iter()
            .map(|r| r.iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .sum();
        let beta = beta.to_dense();
        let inv_coupling = (0..n)
            .map(|i| {
                let c: f64 = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| beta[i][j] + beta[j][i])
                    .sum();
                1.0 / c.max(1e-12)
            })
            .collect();
        let scale = beta.iter().flatten().fold(0.0f64, |m, &b| m.max(b));
        Self {
            n,
            k,
            payoff,
            beta,
            inv_coupling,
            regularization: 1e-10 * (1.0 + scale),
            magnitude,
        }
    }

    /// Rounding noise in objective values near `f`.
    fn noise(&self, f: f64) -> f64 {
        f64::EPSILON * (1.0 + f.abs() + self.magnitude)
    }

    fn value(&self, x: &[Vec<f64>], active: &[bool]) -> f64 {
        let mut eu = 0.0;
        let mut cost = 0.0;
        for i in 0..self.n {
            for a in (0..self.k).filter(|&a| active[a]) {
                eu += self.payoff[i][a] * x[i][a];
            }
            for j in (0..self.n).filter(|&j| j != i) {
                let b = self.beta[i][j];
                if b == 0.0 {
                    continue;
                }
                for a in (0..self.k).filter(|&a| active[a]) {
                    let xi = x[i][a];
                    if xi > 0.0 {
                        cost += b * xi * (xi / x[j][a]).ln();
                    }
                }
            }
        }
        eu - cost
    }

    fn gradient(&self, x: &[Vec<f64>], active: &[bool], g: &mut [Vec<f64>]) {
        for i in 0..self.n {
            for a in (0..self.k).filter(|&a| active[a]) {
                let xi = x[i][a];
                let mut d = self.payoff[i][a];
                for j in (0..self.n).filter(|&j| j != i) {
                    let ratio = x[j][a] / xi;
                    let (bij, bji) = (self.beta[i][j], self.beta[j][i]);
                    if bij != 0.0 {
                        d -= bij * (1.0 - ratio.ln());
                    }
                    d += bji * ratio;
                }
                g[i][a] = d;
            }
        }
    }

    /// Spread of the gradient over supported actions, maximised over states.
    fn residual(&self, g: &[Vec<f64>], active: &[bool]) -> f64 {
        (0..self.n)
            .map(|i| {
                let (lo, hi) = (0..self.k)
                    .filter(|&a| active[a])
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), a| {
                        (lo.min(g[i][a]), hi.max(g[i][a]))
                    });
                hi - lo
            })
            .fold(0.0, f64::max)
    }

    /// Newton direction for the supported actions, or `None` if the KKT
    /// system is singular or the direction is not an ascent direction.
    fn newton_direction(
        &self,
        x: &[Vec<f64>],
        g: &[Vec<f64>],
        active: &[bool],
    ) -> Option<Vec<Vec<f64>>> {
        let acts: Vec<usize> = (0..self.k).filter(|&a| active[a]).collect();
        let m = acts.len();
        let vars = self.n * m;
        let dim = vars + self.n;
        if dim > MAX_NEWTON_DIM {
            return None;
        }
        let idx = |i: usize, p: usize| i * m + p;
        let mut h = vec![vec![0.0; dim]; dim];
        let mut rhs = vec![0.0; dim];
        for i in 0..self.n {
            for (p, &a) in acts.iter().enumerate() {
                rhs[idx(i, p)] = -g[i][a];
                // A small entropic term keeps directions in which the
                // objective is nearly linear (e.g. shifting mass between
                // actions equally in every state) from making the system
                // singular; such steps are then cut at the boundary.
                h[idx(i, p)][idx(i, p)] -= self.regularization / x[i][a];
                h[idx(i, p)][vars + i] = 1.0;
                h[vars + i][idx(i, p)] = 1.0;
            }
            for j in (0..self.n).filter(|&j| j != i) {
                let b = self.beta[i][j];
                if b == 0.0 {
                    continue;
                }
                for (p, &a) in acts.iter().enumerate() {
                    let (xi, xj) = (x[i][a], x[j][a]);
                    let (u, v) = (idx(i, p), idx(j, p));
                    h[u][u] -= b / xi;
                    h[u][v] += b / xj;
                    h[v][u] += b / xj;
                    h[v][v] -= b * xi / (xj * xj);
                }
            }
        }
        let sol = crate::numeric::solve_dense(h, rhs)?;
        let mut d = vec![vec![0.0; self.k]; self.n];
        for i in 0..self.n {
            for (p, &a) in acts.iter().enumerate() {
                d[i][a] = sol[idx(i, p)];
            }
        }
        Some(d)
    }

    fn step(&self, x: &[Vec<f64>], g: &[Vec<f64>], active: &[bool], s: f64, out: &mut [Vec<f64>]) {
        for i in 0..self.n {
            let (lo, top) = (0..self.k)
                .filter(|&a| active[a])
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), a| {
                    (lo.min(g[i][a]), hi.max(g[i][a]))
                });
            // No entry may shrink by more than a factor e^MAX_LOG_CHANGE.
            let eta =
                (s * self.inv_coupling[i]).min(MAX_LOG_CHANGE / (top - lo).max(f64::MIN_POSITIVE));
            let mut sum = 0.0;
            for a in 0..self.k {
                out[i][a] = if active[a] {
                    x[i][a] * (eta * (g[i][a] - top)).exp()
                } else {
                    0.0
                };
                sum += out[i][a];
            }
            out[i].iter_mut().for_each(|v| *v /= sum);
        }
    }
}

/// Damped Newton step written into `out`; returns the new objective value.
fn newton_step(
    obj: &Objective,
    x: &[Vec<f64>],
    g: &[Vec<f64>],
    active: &[bool],
    f: f64,
    out: &mut [Vec<f64>],
) -> Option<f64> {
    let d = obj.newton_direction(x, g, active)?;
    let ascent: f64 = (0..obj.n)
        .flat_map(|i| (0..obj.k).map(move |a| (i, a)))
        .map(|(i, a)| g[i][a] * d[i][a])
        .sum();
    if !(ascent >= 0.0) {
        return None;
    }
    let mut t: f64 = 1.0;
    for i in 0..obj.n {
        for a in (0..obj.k).filter(|&a| active[a]) {
            if d[i][a] < 0.0 {
                t = t.min(BOUNDARY_FRACTION * x[i][a] / -d[i][a]);
            }
        }
    }
    // Objective differences below rounding noise should not reject a step.
    let slack = 8.0 * obj.noise(f);
    while t >= 1e-10 {
        for i in 0..obj.n {
            for a in 0..obj.k {
                out[i][a] = if active[a] {
                    (x[i][a] + t * d[i][a]).max(f64::MIN_POSITIVE)
                } else {
                    0.0
                };
            }
            let sum: f64 = out[i].iter().sum();
            out[i].iter_mut().for_each(|v| *v /= sum);
        }
        let f_new = obj.value(out, active);
        if f_new.is_finite() && f_new >= f + ARMIJO * t * ascent - slack {
            return Some(f_new);
        }
        t *= 0.5;
    }
    None
}

/// Rate of improvement from moving mass `ε c_i` onto a pruned action `a` in
/// every state, taking it proportionally from the other actions:
/// `h(c) = Σ_i c_i w_i - Σ_{i≠j} β_ij c_i ln(c_i/c_j)` with
/// `w_i = q_i u(a,i) - Σ_b μ_i(b) ∂f/∂μ_i(b)`. Because the objective is
/// concave, the current point is optimal iff the support conditions hold
/// and `h <= 0` for every pruned action.
fn pricing(obj: &Objective, w: &[f64], c: &[f64]) -> f64 {
    let mut h = 0.0;
    for i in 0..obj.n {
        h += c[i] * w[i];
        for j in (0..obj.n).filter(|&j| j != i) {
            if obj.beta[i][j] != 0.0 {
                h -= obj.beta[i][j] * c[i] * (c[i] / c[j]).ln();
            }
        }
    }
    h
}

/// Maximises `h` over the simplex by exponentiated gradient and returns the
/// best value found with its direction.
fn best_direction(obj: &Objective, w: &[f64]) -> (f64, Vec<f64>) {
    let n = obj.n;
    let mut c = vec![1.0 / n as f64; n];
    let mut h = pricing(obj, w, &c);
    let mut s = 1.0;
    let mut grad = vec![0.0; n];
    let mut trial = vec![0.0; n];
    for _ in 0..PRICING_ITERATIONS {
        for i in 0..n {
            let mut d = w[i];
            for j in (0..n).filter(|&j| j != i) {
                let ratio = c[j] / c[i];
                if obj.beta[i][j] != 0.0 {
                    d -= obj.beta[i][j] * (1.0 - ratio.ln());
                }
                d += obj.beta[j][i] * ratio;
            }
            grad[i] = d;
        }
        let top = grad.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut accepted = false;
        while s >= MIN_STEP {
            for i in 0..n {
                trial[i] = c[i] * (s * obj.inv_coupling[i] * (grad[i] - top)).exp();
            }
            let z: f64 = trial.iter().sum();
            trial
                .iter_mut()
                .for_each(|v| *v = (*v / z).max(f64::MIN_POSITIVE));
            let h_new = pricing(obj, w, &trial);
            if h_new.is_finite() && h_new > h {
                let gain = h_new - h;
                h = h_new;
                std::mem::swap(&mut c, &mut trial);
                accepted = true;
                s = (s * 1.5).min(MAX_STEP);
                if gain <= 1e-15 * (1.0 + h.abs()) {
                    return (h, c);
                }
                break;
            }
            s *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (h, c)
}

/// The pruned action with the largest positive pricing value above `tol`.
fn entering_action(
    obj: &Objective,
    x: &[Vec<f64>],
    g: &[Vec<f64>],
    active: &[bool],
    tol: f64,
) -> Option<(usize, Vec<f64>)> {
    let multiplier: Vec<f64> = (0..obj.n)
        .map(|i| {
            (0..obj.k)
                .filter(|&a| active[a])
                .map(|a| x[i][a] * g[i][a])
                .sum()
        })
        .collect();
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    for a in (0..obj.k).filter(|&a| !active[a]) {
        let w: Vec<f64> = (0..obj.n)
            .map(|i| obj.payoff[i][a] - multiplier[i])
            .collect();
        let (h, c) = best_direction(obj, &w);
        if h > tol && best.as_ref().map_or(true, |(bh, _, _)| h > *bh) {
            best = Some((h, a, c));
        }
    }
    best.map(|(_, a, c)| (a, c))
}

fn reenter(x: &mut [Vec<f64>], active: &mut [bool], a: usize, c: &[f64]) {
    active[a] = true;
    let peak = c.iter().copied().fold(0.0, f64::max);
    for (row, &ci) in x.iter_mut().zip(c) {
        let mass = REENTRY_MASS * ci / peak;
        row.iter_mut().for_each(|v| *v *= 1.0 - mass);
        row[a] = mass;
    }
}

/// Mirror-ascent step with backtracking on the common factor `s`, which
/// grows after every accepted step.
fn mirror_step(
    obj: &Objective,
    x: &[Vec<f64>],
    g: &[Vec<f64>],
    active: &[bool],
    f: f64,
    s: &mut f64,
    out: &mut [Vec<f64>],
) -> Option<f64> {
    while *s >= MIN_STEP {
        obj.step(x, g, active, *s, out);
        let f_new = obj.value(out, active);
        let ascent: f64 = (0..obj.n)
            .flat_map(|i| (0..obj.k).map(move |a| (i, a)))
            .map(|(i, a)| g[i][a] * (out[i][a] - x[i][a]))
            .sum();
        if f_new.is_finite() && f_new >= f + ARMIJO * ascent {
            *s = (*s * 1.5).min(MAX_STEP);
            return Some(f_new);
        }
        *s *= 0.5;
    }
    None
}

/// Deterministic interior start `μ_i(a) ∝ exp(u(a,i) / (1 + ‖u‖))`.
fn initial_rule(problem: &DecisionProblem) -> Vec<Vec<f64>> {
    let temp = 1.0 + problem.utility_norm();
    (0..problem.num_states())
        .map(|i| {
            let w: Vec<f64> = (0..problem.num_actions())
                .map(|a| (problem.utility(a, i) / temp).exp())
                .collect();
            let z: f64 = w.iter().sum();
            w.into_iter().map(|v| v / z).collect()
        })
        .collect()
}

fn prune(x: &mut [Vec<f64>], active: &mut [bool]) -> bool {
    let mut changed = false;
    for a in 0..active.len() {
        if active[a] && active.iter().filter(|&&on| on).count() > 1 {
            let peak = x.iter().map(|row| row[a]).fold(0.0, f64::max);
            if peak < PRUNE_FLOOR {
                active[a] = false;
                changed = true;
                for row in x.iter_mut() {
                    row[a] = 0.0;
                }
            }
        }
    }
    if changed {
        for row in x.iter_mut() {
            let sum: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v /= sum);
        }
    }
    changed
}

/// Maximises expected utility minus the LLR cost over choice rules.
///
/// Converged means the first-order residual over the detected support is
/// within `opts.tolerance`, the last accepted step improved the objective by
/// at most `opts.tolerance·(1 + |objective|)`, and no dropped action could
/// re-enter at a rate above `opts.tolerance`. A run that stops for any other
/// reason (iteration budget, stalled progress, probabilities too small to
/// represent) still returns its final iterate, with `converged = false`.
pub fn solve_llr(
    problem: &DecisionProblem,
    beta: &BetaMatrix,
    opts: &SolveOptions,
) -> Result<SolveResult> {
    check_beta(problem, beta)?;
    if !(opts.tolerance > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    if beta.has_zero_off_diagonal() {
        warn!("beta has zero off-diagonal coefficients: objective is not strictly concave");
    }
    let obj = Objective::new(problem, beta);
    let (n, k) = (obj.n, obj.k);
    let mut x = initial_rule(problem);
    let mut active = vec![true; k];
    let mut g = vec![vec![0.0; k]; n];
    let mut trial = vec![vec![0.0; k]; n];
    let mut f = obj.value(&x, &active);
    let mut s = 1.0;
    let mut improvement = f64::INFINITY;
    let mut iterations = 0;
    let mut reentries = 0;
    let mut stalled = 0;
    let mut certified = false;

    loop {
        obj.gradient(&x, &active, &mut g);
        let residual = obj.residual(&g, &active);
        if residual <= opts.tolerance && improvement <= opts.tolerance * (1.0 + f.abs()) {
            match entering_action(&obj, &x, &g, &active, opts.tolerance) {
                None => {
                    certified = true;
                    break;
                }
                Some(_) if reentries >= MAX_REENTRIES => break,
                Some((a, c)) => {
                    reenter(&mut x, &mut active, a, &c);
                    reentries += 1;
                    f = obj.value(&x, &active);
                    improvement = f64::INFINITY;
                    continue;
                }
            }
        }
        if iterations >= opts.max_iterations || stalled >= STALL_LIMIT {
            break;
        }
        iterations += 1;

        let f_new = match newton_step(&obj, &x, &g, &active, f, &mut trial) {
            Some(v) => Some(v),
            None => mirror_step(&obj, &x, &g, &active, f, &mut s, &mut trial),
        };
        // No representable ascent step remains.
        let Some(f_new) = f_new else { break };
        improvement = f_new - f;
        f = f_new;
        std::mem::swap(&mut x, &mut trial);
        if improvement <= 4.0 * obj.noise(f) {
            stalled += 1;
        } else {
            stalled = 0;
        }
        if prune(&mut x, &mut active) {
            f = obj.value(&x, &active);
            improvement = f64::INFINITY;
        }
    }

    let rule = ChoiceRule::new(x)?;
    let expected = expected_utility(problem, &rule);
    let cost = rule_llr_cost(&rule, beta);
    let foc = foc_residual(problem, beta, &rule)?;
    Ok(SolveResult {
        rule,
        objective: expected - cost,
        cost,
        expected_utility: expected,
        foc_residual: foc,
        iterations,
        converged: certified && foc <= opts.tolerance,
    })
}
