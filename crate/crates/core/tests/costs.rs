use infocost_core::costs::{
    binary_cost, hypothesis_test_cost, llr_cost, llr_cost_via_posteriors, mutual_information_cost,
    normal_cost, one_dimensional_betas, partition_coefficient, partition_coefficient_enumerated,
    partition_experiment, repeated_flip_costs, swan_experiments, verification_asymmetry,
    BetaMatrix, Hypothesis,
};
use infocost_core::dominance::{blackwell_dominates, find_garbling, DEFAULT_DOMINANCE_TOL};
use infocost_core::experiment::{dilute, garble, power, product, Experiment, StateSpace};
use infocost_core::random::Sampler;
use proptest::prelude::*;

fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs().max(1.0)
}

#[test]
fn binary_closed_form_matches_experiment() {
    let mut s = Sampler::new(1);
    let states = StateSpace::indexed(2).unwrap();
    for _ in 0..200 {
        let p = s.uniform(0.01, 0.99);
        let beta = s.beta(&states, 0.05, 5.0);
        let mu = Experiment::new(
            states.clone(),
            vec!["0".into(), "1".into()],
            vec![vec![p, 1.0 - p], vec![1.0 - p, p]],
        )
        .unwrap();
        assert!((binary_cost(p, &beta).unwrap() - llr_cost(&mu, &beta).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn unit_binary_example() {
    let beta = BetaMatrix::constant(StateSpace::indexed(2).unwrap(), 1.0).unwrap();
    let cost = llr_cost(&Experiment::binary(0.8).unwrap(), &beta).unwrap();
    // 2 (0.8 - 0.2) ln 4
    assert!((cost - 1.2 * 4f64.ln()).abs() < 1e-15);
}

#[test]
fn hypothesis_cost_matches_partition_experiment() {
    let mut s = Sampler::new(2);
    for _ in 0..200 {
        let n = s.int(2, 7);
        let states = StateSpace::indexed(n).unwrap();
        let beta = s.beta(&states, 0.05, 5.0);
        let mut mask: Vec<bool> = (0..n).map(|_| s.uniform(0.0, 1.0) < 0.5).collect();
        mask[0] = true;
        mask[n - 1] = false;
        let h = Hypothesis::from_mask(mask).unwrap();
        let alpha = s.uniform(0.01, 0.99);
        let direct = llr_cost(&partition_experiment(&states, &h, alpha).unwrap(), &beta).unwrap();
        assert!(
            (hypothesis_test_cost(&beta, &h, alpha).unwrap() - direct).abs()
                < 1e-12 * direct.max(1.0)
        );
    }
}

#[test]
fn normal_cost_closed_form() {
    let states = StateSpace::from_values(vec![0.0, 1.0]).unwrap();
    let beta = one_dimensional_betas(&states, 1.0).unwrap();
    assert_eq!(normal_cost(&[0.0, 1.0], 1.0, &beta).unwrap(), 0.5);
}

/// `∫ φ_a ln(φ_a/φ_b)` by Simpson's rule on a wide interval.
fn normal_kl_numeric(ma: f64, mb: f64, sigma: f64) -> f64 {
    let pdf = |x: f64, m: f64| (-(x - m).powi(2) / (2.0 * sigma * sigma)).exp();
    let (lo, hi) = (ma.min(mb) - 12.0 * sigma, ma.max(mb) + 12.0 * sigma);
    let steps = 20_000;
    let h = (hi - lo) / steps as f64;
    let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    // ln(φ_a/φ_b) is a polynomial, so only φ_a needs evaluating.
    let f =
        |x: f64| norm * pdf(x, ma) * ((x - mb).powi(2) - (x - ma).powi(2)) / (2.0 * sigma * sigma);
    let mut total = f(lo) + f(hi);
    for k in 1..steps {
        total += f(lo + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    total * h / 3.0
}

#[test]
fn normal_cost_matches_numeric_divergences() {
    let mut s = Sampler::new(3);
    for _ in 0..10 {
        let n = s.int(2, 4);
        let means: Vec<f64> = (0..n).map(|_| s.uniform(-2.0, 2.0)).collect();
        let sigma = s.uniform(0.5, 2.0);
        let states = StateSpace::indexed(n).unwrap();
        let beta = s.beta(&states, 0.05, 5.0);
        let mut oracle = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    oracle += beta.get(i, j) * normal_kl_numeric(means[i], means[j], sigma);
                }
            }
        }
        assert!(rel(normal_cost(&means, sigma, &beta).unwrap(), oracle) < 1e-8);
    }
}

#[test]
fn coin_flip_mutual_information() {
    let mu = Experiment::binary(0.8).unwrap();
    let mi = mutual_information_cost(&mu, &[0.5, 0.5], 1.0).unwrap();
    let h = -(0.8f64 * 0.8f64.ln() + 0.2 * 0.2f64.ln());
    assert!((mi - (2f64.ln() - h)).abs() < 1e-14);
    assert!((mi - 0.192745).abs() < 1e-6);
}

#[test]
fn repeated_flips_agree_with_products() {
    let beta = BetaMatrix::constant(StateSpace::indexed(2).unwrap(), 1.0).unwrap();
    let mu = Experiment::binary(0.8).unwrap();
    for k in 1..=8 {
        let (llr, mi) = repeated_flip_costs(0.8, k, &beta, &[0.5, 0.5], 1.0).unwrap();
        let joint = power(&mu, k).unwrap();
        assert!(rel(llr, llr_cost(&joint, &beta).unwrap()) < 1e-12);
        assert!((mi - mutual_information_cost(&joint, &[0.5, 0.5], 1.0).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn swan_costs_closed_form() {
    for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
        let (first, second) = verification_asymmetry(eps, 1.0).unwrap();
        let e2 = eps * eps;
        // β_ae = 1: KL of row a against row e.
        let kl = |p: f64, q: f64| p * (p / q).ln() + (1.0 - p) * ((1.0 - p) / (1.0 - q)).ln();
        assert!(rel(first, kl(e2, eps)) < 1e-12);
        assert!(rel(second, kl(eps, e2)) < 1e-12);
        assert!(second > first);
    }
    assert!(swan_experiments(0.5).is_err());
}

#[test]
fn grid_fast_path_equals_enumeration() {
    for (lo, hi) in [(0i64, 9), (-50, 50), (1000, 1199), (3, 4)] {
        let states = StateSpace::from_values((lo..=hi).map(|v| v as f64).collect()).unwrap();
        let beta = BetaMatrix::inverse_square(states.clone(), 1.7).unwrap();
        let mid = (lo + hi) as f64 / 2.0;
        for h in [
            Hypothesis::from_values(&states, |v| v > mid).unwrap(),
            Hypothesis::from_values(&states, |v| v % 2.0 == 0.0).unwrap(),
        ] {
            assert_eq!(
                partition_coefficient(&beta, &h).unwrap(),
                partition_coefficient_enumerated(&beta, &h).unwrap()
            );
        }
    }
}

#[test]
fn gdp_values() {
    let states = StateSpace::from_values((20_000..=80_000).map(f64::from).collect()).unwrap();
    let beta = BetaMatrix::inverse_square(states.clone(), 1.0).unwrap();
    let above = Hypothesis::from_values(&states, |v| v > 50_000.0).unwrap();
    let even = Hypothesis::from_values(&states, |v| v % 2.0 == 0.0).unwrap();
    let h1 = partition_coefficient(&beta, &above).unwrap();
    let h2 = partition_coefficient(&beta, &even).unwrap();
    assert!((21.0..=23.5).contains(&h1), "{h1}");
    assert!((147_900.0..=148_200.0).contains(&h2), "{h2}");
}

#[test]
fn posterior_representation_with_skewed_priors() {
    let mut s = Sampler::new(4);
    for _ in 0..300 {
        let n = s.int(2, 5);
        let states = StateSpace::indexed(n).unwrap();
        let signals = s.int(2, 6);
        let mu = s.experiment(&states, signals);
        let beta = s.beta(&states, 0.05, 5.0);
        let prior = s.skewed_simplex(n);
        let direct = llr_cost(&mu, &beta).unwrap();
        assert!((llr_cost_via_posteriors(&mu, &beta, &prior).unwrap() - direct).abs() <= 1e-9);
    }
}

#[test]
fn dominance_is_found_for_garblings_only() {
    let mut s = Sampler::new(5);
    for _ in 0..50 {
        let states = StateSpace::indexed(s.int(2, 4)).unwrap();
        let signals = s.int(2, 4);
        let mu = s.experiment(&states, signals);
        let targets = s.int(2, 4);
        let nu = garble(&mu, &s.garbling(signals, targets)).unwrap();
        let g = find_garbling(&mu, &nu, DEFAULT_DOMINANCE_TOL)
            .unwrap()
            .expect("garbling exists");
        let rebuilt = garble(&mu, &g).unwrap();
        for i in 0..states.len() {
            for (x, y) in rebuilt.row(i).iter().zip(nu.row(i)) {
                assert!((x - y).abs() < 1e-7);
            }
        }
    }
    // A strictly informative experiment is not a garbling of an uninformative one.
    let sharp = Experiment::binary(0.9).unwrap();
    let flat = Experiment::uninformative(sharp.states().clone(), vec![0.5, 0.5]).unwrap();
    assert!(!blackwell_dominates(&flat, &sharp, DEFAULT_DOMINANCE_TOL).unwrap());
    assert!(blackwell_dominates(&sharp, &flat, DEFAULT_DOMINANCE_TOL).unwrap());
}

fn experiment_strategy() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    (2usize..=4, 2usize..=5, 2usize..=4).prop_flat_map(|(n, m1, m2)| {
        (
            prop::collection::vec(prop::collection::vec(0.05f64..1.0, m1), n),
            prop::collection::vec(prop::collection::vec(0.05f64..1.0, m2), n),
        )
    })
}

fn normalized(rows: Vec<Vec<f64>>) -> Experiment {
    let n = rows.len();
    let m = rows[0].len();
    let probs = rows
        .into_iter()
        .map(|r| {
            let total: f64 = r.iter().sum();
            r.into_iter().map(|x| x / total).collect()
        })
        .collect();
    Experiment::new(
        StateSpace::indexed(n).unwrap(),
        (0..m).map(|k| format!("s{k}")).collect(),
        probs,
    )
    .unwrap()
}

proptest! {
    #[test]
    fn product_cost_is_additive((a, b) in experiment_strategy(), scale in 0.05f64..5.0) {
        let (mu, nu) = (normalized(a), normalized(b));
        let beta = BetaMatrix::constant(mu.states().clone(), scale).unwrap();
        let joint = llr_cost(&product(&mu, &nu).unwrap(), &beta).unwrap();
        let sum = llr_cost(&mu, &beta).unwrap() + llr_cost(&nu, &beta).unwrap();
        prop_assert!(rel(joint, sum) < 1e-10);
    }

    #[test]
    fn dilution_is_linear((a, _) in experiment_strategy(), alpha in 0.001f64..=1.0) {
        let mu = normalized(a);
        let beta = BetaMatrix::constant(mu.states().clone(), 1.0).unwrap();
        let diluted = llr_cost(&dilute(&mu, alpha).unwrap(), &beta).unwrap();
        prop_assert!(rel(diluted, alpha * llr_cost(&mu, &beta).unwrap()) < 1e-10);
    }
}
