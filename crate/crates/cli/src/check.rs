//! Seeded property suites behind `infocost check`.
//!
//! Each property draws `trials` random instances from a xoshiro256++
//! stream (see [`infocost_core::random`]) and records the largest deviation
//! from the identity or inequality it checks. A property passes when that
//! deviation is within its tolerance.

use anyhow::Result;
use clap::ValueEnum;
use infocost_core::costs::{llr_cost, llr_cost_via_posteriors, BetaMatrix};
use infocost_core::cumulants::{
    convolve, cumulants_to_moments, moments, moments_to_cumulants, FiniteDistribution,
};
use infocost_core::dominance::{blackwell_dominates, DEFAULT_DOMINANCE_TOL};
use infocost_core::experiment::{
    dilute, garble, kl_divergence, mixture, product, Experiment, StateSpace,
};
use infocost_core::llr::{check_admissible, llr_distribution};
use infocost_core::random::Sampler;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Axioms,
    Appendix,
    All,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub name: &'static str,
    pub trials: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.max_deviation <= self.tolerance
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckOptions {
    pub seed: u64,
    pub trials: usize,
    /// Test hook: negate the coefficient matrices used by the monotonicity
    /// property, which must then fail.
    pub inject_negative_beta: bool,
}

/// Scale-aware deviation `|x - y| / max(1, |y|)`.
fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs().max(1.0)
}

struct Tracker {
    name: &'static str,
    tolerance: f64,
    trials: usize,
    worst: f64,
}

impl Tracker {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            tolerance,
            trials: 0,
            worst: 0.0,
        }
    }

    fn record(&mut self, deviation: f64) {
        self.trials += 1;
        // NaN must count as a failure.
        if !(deviation <= self.worst) {
            self.worst = if deviation.is_nan() {
                f64::INFINITY
            } else {
                deviation
            };
        }
    }

    fn finish(self) -> PropertyReport {
        PropertyReport {
            name: self.name,
            trials: self.trials,
            max_deviation: self.worst,
            tolerance: self.tolerance,
        }
    }
}

struct Instance {
    states: StateSpace,
    mu: Experiment,
    beta: BetaMatrix,
}

fn instance(s: &mut Sampler) -> Result<Instance> {
    let states = StateSpace::indexed(s.int(2, 5))?;
    let signals = s.int(2, 6);
    let mu = s.experiment(&states, signals);
    let beta = s.beta(&states, 0.05, 5.0);
    Ok(Instance { states, mu, beta })
}

fn axioms(opts: &CheckOptions) -> Result<Vec<PropertyReport>> {
    let mut s = Sampler::new(opts.seed);
    let mut kl_positive = Tracker::new("kl_nonnegative", 0.0);
    let mut kl_product = Tracker::new("kl_product_additivity", 1e-10);
    let mut kl_convex = Tracker::new("kl_convexity", 1e-10);
    let mut kl_processing = Tracker::new("kl_data_processing", 1e-10);
    let mut additivity = Tracker::new("product_additivity", 1e-10);
    let mut dilution = Tracker::new("dilution_linearity", 1e-10);
    let mut monotone = Tracker::new("blackwell_monotonicity", 1e-9);
    let mut splitting = Tracker::new("signal_splitting_invariance", 1e-10);
    let mut bayes = Tracker::new("posterior_separable_representation", 1e-9);
    let mut convex = Tracker::new("mixture_convexity", 1e-10);
    let mut admissible = Tracker::new("llr_admissibility", 0.0);
    let mut dominance = Tracker::new("garbling_dominance_lp", 0.0);

    for trial in 0..opts.trials {
        let Instance { states, mu, beta } = instance(&mut s)?;
        let n = states.len();
        let m = mu.num_signals();
        let cost = llr_cost(&mu, &beta)?;

        let (p, q) = (s.simplex(m), s.simplex(m));
        kl_positive.record((-kl_divergence(&p, &q)?).max(0.0));

        let other_signals = s.int(2, 4);
        let other = s.experiment(&states, other_signals);
        let joint = product(&mu, &other)?;
        let (i, j) = (0, n - 1);
        let split = kl_divergence(joint.row(i), joint.row(j))?;
        let parts =
            kl_divergence(mu.row(i), mu.row(j))? + kl_divergence(other.row(i), other.row(j))?;
        kl_product.record(rel(split, parts));
        additivity.record(rel(
            llr_cost(&joint, &beta)?,
            cost + llr_cost(&other, &beta)?,
        ));

        let w = s.uniform(0.0, 1.0);
        let (p2, q2) = (s.simplex(m), s.simplex(m));
        let mixed_p: Vec<f64> = p
            .iter()
            .zip(&p2)
            .map(|(x, y)| w * x + (1.0 - w) * y)
            .collect();
        let mixed_q: Vec<f64> = q
            .iter()
            .zip(&q2)
            .map(|(x, y)| w * x + (1.0 - w) * y)
            .collect();
        let bound = w * kl_divergence(&p, &q)? + (1.0 - w) * kl_divergence(&p2, &q2)?;
        kl_convex.record((kl_divergence(&mixed_p, &mixed_q)? - bound).max(0.0));

        let targets = s.int(1, 5);
        let g = s.garbling(m, targets);
        let garbled = garble(&mu, &g)?;
        kl_processing.record(
            (kl_divergence(garbled.row(i), garbled.row(j))? - kl_divergence(mu.row(i), mu.row(j))?)
                .max(0.0),
        );

        let alpha = s.uniform(0.0, 1.0).max(1e-6);
        dilution.record(rel(llr_cost(&dilute(&mu, alpha)?, &beta)?, alpha * cost));

        let monotone_beta = if opts.inject_negative_beta {
            negated(&beta)
        } else {
            beta.clone()
        };
        let before = llr_cost(&mu, &monotone_beta)?;
        monotone.record((llr_cost(&garbled, &monotone_beta)? - before).max(0.0));
        if trial == 0 {
            // The fully uninformative garbling is always part of the suite.
            let flat = s.garbling(m, 1);
            monotone.record((llr_cost(&garble(&mu, &flat)?, &monotone_beta)? - before).max(0.0));
        }

        let fraction = s.uniform(0.05, 0.95);
        let signal = s.int(0, m - 1);
        splitting.record(rel(
            llr_cost(&mu.split_signal(signal, fraction)?, &beta)?,
            cost,
        ));

        let prior = s.skewed_simplex(n);
        bayes.record(rel(llr_cost_via_posteriors(&mu, &beta, &prior)?, cost));

        let nu = s.experiment(&states, m);
        let w = s.uniform(0.0, 1.0);
        let mixed_cost = llr_cost(&mixture(&mu, &nu, w)?, &beta)?;
        convex.record((mixed_cost - (w * cost + (1.0 - w) * llr_cost(&nu, &beta)?)).max(0.0));

        admissible.record(if check_admissible(&llr_distribution(&mu), 1e-9) {
            0.0
        } else {
            1.0
        });

        if trial < opts.trials.min(200) {
            let dominated = blackwell_dominates(&mu, &garbled, DEFAULT_DOMINANCE_TOL)?;
            dominance.record(if dominated { 0.0 } else { 1.0 });
        }
    }
    Ok(vec![
        kl_positive.finish(),
        kl_product.finish(),
        kl_convex.finish(),
        kl_processing.finish(),
        additivity.finish(),
        dilution.finish(),
        monotone.finish(),
        splitting.finish(),
        bayes.finish(),
        convex.finish(),
        admissible.finish(),
        dominance.finish(),
    ])
}

fn negated(beta: &BetaMatrix) -> BetaMatrix {
    let coef = beta
        .to_dense()
        .into_iter()
        .map(|row| row.into_iter().map(|b| -b).collect())
        .collect();
    BetaMatrix::dense_unchecked(beta.states().clone(), coef)
}

fn appendix(opts: &CheckOptions) -> Result<Vec<PropertyReport>> {
    let mut s = Sampler::new(opts.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut additivity = Tracker::new("cumulant_convolution_additivity", 1e-9);
    let mut round_trip = Tracker::new("moment_cumulant_round_trip", 1e-10);
    let mut scaling = Tracker::new("self_convolution_scaling", 1e-9);
    let mut llr_moments = Tracker::new("llr_moment_consistency", 1e-10);

    for _ in 0..opts.trials {
        let dim = s.int(1, 3);
        let order = s.int(1, 4) as u32;
        let (na, nb) = (s.int(1, 4), s.int(1, 4));
        let a = s.distribution(dim, na);
        let b = s.distribution(dim, nb);
        let ka = moments_to_cumulants(&moments(&a, order)?);
        let kb = moments_to_cumulants(&moments(&b, order)?);
        let kc = moments_to_cumulants(&moments(&convolve(&a, &b)?, order)?);
        let worst = kc
            .iter()
            .map(|(alpha, v)| {
                let sum = ka.get(&alpha).unwrap_or(f64::NAN) + kb.get(&alpha).unwrap_or(f64::NAN);
                rel(v, sum)
            })
            .fold(0.0, f64::max);
        additivity.record(worst);

        let m = moments(&a, order)?;
        round_trip.record(cumulants_to_moments(&moments_to_cumulants(&m)).max_relative_diff(&m));
    }

    for _ in 0..opts.trials.min(100) {
        let dim = s.int(1, 2);
        let base = s.distribution(dim, 2);
        let k = s.int(2, 6);
        let mut acc = base.clone();
        for _ in 1..k {
            acc = convolve(&acc, &base)?;
        }
        let kb = moments_to_cumulants(&moments(&base, 3)?);
        let kk = moments_to_cumulants(&moments(&acc, 3)?);
        let worst = kk
            .iter()
            .map(|(alpha, v)| rel(v, k as f64 * kb.get(&alpha).unwrap_or(f64::NAN)))
            .fold(0.0, f64::max);
        scaling.record(worst);
    }

    for _ in 0..opts.trials.min(200) {
        let states = StateSpace::indexed(s.int(2, 4))?;
        let signals = s.int(2, 5);
        let mu = s.experiment(&states, signals);
        let sigma = llr_distribution(&mu);
        let order = 3;
        for i in 0..states.len() {
            let dist = FiniteDistribution::from_llr(&sigma, i)?;
            let m = moments(&dist, order)?;
            // Direct expectation over the experiment's own signals.
            let worst = m
                .iter()
                .map(|(alpha, v)| {
                    let direct: f64 = (0..mu.num_signals())
                        .map(|sig| {
                            let llr: Vec<f64> = (1..states.len())
                                .map(|j| (mu.row(j)[sig] / mu.row(0)[sig]).ln())
                                .collect();
                            mu.row(i)[sig]
                                * alpha
                                    .components()
                                    .iter()
                                    .zip(&llr)
                                    .map(|(&e, l)| l.powi(e as i32))
                                    .product::<f64>()
                        })
                        .sum();
                    rel(v, direct)
                })
                .fold(0.0, f64::max);
            llr_moments.record(worst);
        }
    }
    Ok(vec![
        additivity.finish(),
        round_trip.finish(),
        scaling.finish(),
        llr_moments.finish(),
    ])
}

pub fn run_suite(suite: Suite, opts: &CheckOptions) -> Result<Vec<PropertyReport>> {
    let mut reports = Vec::new();
    if matches!(suite, Suite::Axioms | Suite::All) {
        reports.extend(axioms(opts)?);
    }
    if matches!(suite, Suite::Appendix | Suite::All) {
        reports.extend(appendix(opts)?);
    }
    Ok(reports)
}
