use infocost_core::costs::BetaMatrix;
use infocost_core::experiment::StateSpace;
use infocost_core::random::Sampler;
use infocost_core::solver::{
    foc_residual, lipschitz_check, mi_fixed_point_residual, objective, perception_problem,
    psychometric_curve, solve_llr, solve_mutual_information, ChoiceRule, CostKind, DecisionProblem,
    SolveOptions,
};

fn matching(beta: f64) -> (DecisionProblem, BetaMatrix) {
    let states = StateSpace::indexed(2).unwrap();
    let problem = DecisionProblem::new(
        states.clone(),
        vec!["a1".into(), "a2".into()],
        vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        vec![0.5, 0.5],
    )
    .unwrap();
    (problem, BetaMatrix::constant(states, beta).unwrap())
}

/// Root of `0.5 = β (2 ln r + r - 1/r)` in `r > 1`, returned as
/// `p = r / (1 + r)`.
fn bisection_oracle(beta: f64) -> f64 {
    let h = |r: f64| beta * (2.0 * r.ln() + r - 1.0 / r) - 0.5;
    let (mut lo, mut hi) = (1.0, 2.0);
    while h(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = 0.5 * (lo + hi);
    r / (1.0 + r)
}

#[test]
fn matching_problem_agrees_with_bisection() {
    for beta in [0.05, 0.1, 0.3, 1.0] {
        let (problem, b) = matching(beta);
        let result = solve_llr(&problem, &b, &SolveOptions::default()).unwrap();
        assert!(result.converged);
        let p = bisection_oracle(beta);
        assert!((result.rule.prob(0, 0) - p).abs() < 1e-6, "beta {beta}");
        assert!((result.rule.prob(1, 1) - p).abs() < 1e-6);
        let at_oracle = ChoiceRule::new(vec![vec![p, 1.0 - p], vec![1.0 - p, p]]).unwrap();
        assert!(foc_residual(&problem, &b, &at_oracle).unwrap() < 1e-6);
    }
}

#[test]
fn two_state_grid_search() {
    let mut s = Sampler::new(11);
    for _ in 0..10 {
        let problem = s.decision_problem(2, 2).unwrap();
        let beta = s.beta(problem.states(), 0.05, 5.0);
        let result = solve_llr(&problem, &beta, &SolveOptions::default()).unwrap();
        // Search on logits so that near-deterministic rules are reachable,
        // then refine around the best cell.
        let value = |s: f64, t: f64| {
            let (a, b) = (1.0 / (1.0 + (-s).exp()), 1.0 / (1.0 + (-t).exp()));
            let rule = ChoiceRule::new(vec![vec![a, 1.0 - a], vec![b, 1.0 - b]]).unwrap();
            objective(&problem, &rule, &beta).unwrap()
        };
        let (mut best, mut at) = (f64::NEG_INFINITY, (0.0, 0.0));
        let (mut center, mut half) = ((0.0, 0.0), 25.0);
        for _ in 0..4 {
            let steps = 300;
            for x in 0..=steps {
                for y in 0..=steps {
                    let s = center.0 - half + 2.0 * half * x as f64 / steps as f64;
                    let t = center.1 - half + 2.0 * half * y as f64 / steps as f64;
                    let v = value(s, t);
                    if v > best {
                        (best, at) = (v, (s, t));
                    }
                }
            }
            center = at;
            half *= 0.05;
        }
        assert!(
            result.objective >= best - 1e-9,
            "{} < {best}",
            result.objective
        );
        assert!(result.objective - best <= 1e-4);
    }
}

#[test]
fn optimum_beats_random_rules() {
    let mut s = Sampler::new(3);
    for _ in 0..40 {
        let (n, k) = (s.int(2, 5), s.int(2, 4));
        let problem = s.decision_problem(n, k).unwrap();
        let beta = s.beta(problem.states(), 0.05, 5.0);
        let result = solve_llr(&problem, &beta, &SolveOptions::default()).unwrap();
        assert!(result.converged);
        assert!((result.objective - (result.expected_utility - result.cost)).abs() < 1e-12);
        assert!(result.foc_residual <= 1e-8);
        for _ in 0..100 {
            let rule = s.choice_rule(n, k);
            assert!(result.objective >= objective(&problem, &rule, &beta).unwrap() - 1e-7);
        }
    }
}

#[test]
fn stretched_utilities_reach_interior_optima() {
    let mut s = Sampler::new(6);
    let mut mixed = 0;
    for scale in [20.0, 100.0] {
        for _ in 0..100 {
            let (n, k) = (s.int(2, 5), s.int(2, 4));
            let base = s.decision_problem(n, k).unwrap();
            let utility = base
                .utility_matrix()
                .iter()
                .map(|r| r.iter().map(|u| u * scale).collect())
                .collect();
            let problem = DecisionProblem::new(
                base.states().clone(),
                base.actions().to_vec(),
                utility,
                base.prior().to_vec(),
            )
            .unwrap();
            let beta = s.beta(problem.states(), 0.05, 5.0);
            let result = solve_llr(&problem, &beta, &SolveOptions::default()).unwrap();
            assert!(
                result.converged,
                "scale {scale}, residual {:e}",
                result.foc_residual
            );
            if result.rule.support().len() > 1 {
                mixed += 1;
            }
        }
    }
    assert!(mixed >= 20, "{mixed}");
}

#[test]
fn solves_are_bit_identical() {
    let mut s = Sampler::new(5);
    let problem = s.decision_problem(4, 3).unwrap();
    let beta = s.beta(problem.states(), 0.05, 5.0);
    let opts = SolveOptions::default();
    assert_eq!(
        solve_llr(&problem, &beta, &opts).unwrap(),
        solve_llr(&problem, &beta, &opts).unwrap()
    );
    assert_eq!(
        solve_mutual_information(&problem, 0.7, &opts).unwrap(),
        solve_mutual_information(&problem, 0.7, &opts).unwrap()
    );
}

#[test]
fn expensive_information_is_not_acquired() {
    let mut s = Sampler::new(8);
    for _ in 0..20 {
        let states = s.int(2, 5);
        let problem = s.decision_problem(states, 3).unwrap();
        let big = 1e3 * problem.utility_norm();
        let beta = BetaMatrix::constant(problem.states().clone(), big).unwrap();
        let result = solve_llr(&problem, &beta, &SolveOptions::default()).unwrap();
        let best = problem.prior_optimal_action();
        for i in 0..problem.num_states() {
            assert!(result.rule.prob(i, best) > 1.0 - 1e-3);
        }
    }
}

#[test]
fn perception_curve_is_symmetric_and_bounded() {
    let (points, result) =
        psychometric_curve(5, 1.0, CostKind::Llr, 1.0, &SolveOptions::default()).unwrap();
    assert!(result.converged);
    assert_eq!(points.len(), 10);
    for p in &points {
        assert!(p.prob_blue > 0.0 && p.prob_blue < 1.0);
    }
    for w in points.windows(2) {
        assert!(w[1].prob_blue > w[0].prob_blue);
    }
    for d in 0..5 {
        assert!((points[d].prob_red - points[9 - d].prob_blue).abs() < 1e-6);
    }
    let problem = perception_problem(5).unwrap();
    let values = problem.states().values().unwrap();
    let (_, holds) = lipschitz_check(&result.rule, values, problem.utility_norm(), 2.0).unwrap();
    assert!(holds);
}

#[test]
fn lipschitz_bound_on_fine_grids() {
    // States 0.1 apart with β = 1/d²: nearby states are hard to tell apart.
    for n in [4, 8, 12] {
        let values: Vec<f64> = (0..n).map(|i| i as f64 * 0.1).collect();
        let states = StateSpace::from_values(values.clone()).unwrap();
        let utility = vec![
            values
                .iter()
                .map(|&v| if v < 0.55 { 1.0 } else { 0.0 })
                .collect(),
            values
                .iter()
                .map(|&v| if v > 0.55 { 1.0 } else { 0.0 })
                .collect(),
        ];
        let problem = DecisionProblem::new(
            states.clone(),
            vec!["l".into(), "r".into()],
            utility,
            vec![1.0 / n as f64; n],
        )
        .unwrap();
        let beta = BetaMatrix::inverse_square(states, 1.0).unwrap();
        let result = solve_llr(&problem, &beta, &SolveOptions::default()).unwrap();
        let (ratio, holds) =
            lipschitz_check(&result.rule, &values, problem.utility_norm(), 2.0).unwrap();
        assert!(holds, "n = {n}, ratio {ratio}");
    }
}

#[test]
fn mi_identical_columns_get_identical_rows() {
    let mut s = Sampler::new(21);
    for _ in 0..30 {
        let actions = s.int(2, 4);
        let base = s.decision_problem(3, actions).unwrap();
        // Duplicate state 0's utility column into a fourth state.
        let utility: Vec<Vec<f64>> = base
            .utility_matrix()
            .iter()
            .map(|row| {
                let mut row = row.clone();
                row.push(row[0]);
                row
            })
            .collect();
        let prior = s.simplex(4);
        let problem = DecisionProblem::new(
            StateSpace::indexed(4).unwrap(),
            base.actions().to_vec(),
            utility,
            prior,
        )
        .unwrap();
        let lambda = s.uniform(0.1, 2.0);
        let result = solve_mutual_information(&problem, lambda, &SolveOptions::default()).unwrap();
        assert!(result.converged);
        assert!(mi_fixed_point_residual(&problem, lambda, &result.rule) < 1e-6);
        for a in 0..problem.num_actions() {
            assert!((result.rule.prob(0, a) - result.rule.prob(3, a)).abs() < 1e-6);
        }
    }
}

#[test]
fn mi_perception_is_state_independent() {
    let (points, result) = psychometric_curve(
        5,
        1.0,
        CostKind::MutualInformation,
        1.0,
        &SolveOptions::default(),
    )
    .unwrap();
    assert!(result.converged);
    let correct = points[0].correct;
    for p in &points {
        assert!((p.correct - correct).abs() < 1e-4);
    }
}

#[test]
fn mi_cost_is_lambda_times_information() {
    let mut s = Sampler::new(2);
    let problem = s.decision_problem(3, 3).unwrap();
    let small = solve_mutual_information(&problem, 0.05, &SolveOptions::default()).unwrap();
    let large = solve_mutual_information(&problem, 5.0, &SolveOptions::default()).unwrap();
    // Cheaper information is acquired in larger quantity.
    assert!(small.cost / 0.05 >= large.cost / 5.0);
    assert!(small.expected_utility >= large.expected_utility);
}
