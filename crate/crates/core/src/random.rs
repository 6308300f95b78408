//! Seeded generation of random instances for property checks.
//!
//! The generator is xoshiro256++ seeded by expanding a 64-bit seed with
//! SplitMix64. Its state update is
//!
//! ```text
//! result = rotl(s0 + s3, 23) + s0
//! t  = s1 << 17
//! s2 ^= s0;  s3 ^= s1;  s1 ^= s2;  s0 ^= s3;  s2 ^= t;  s3 = rotl(s3, 45)
//! ```
//!
//! Floats are drawn from the top 53 bits of each output.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::costs::BetaMatrix;
use crate::cumulants::FiniteDistribution;
use crate::error::Result;
use crate::experiment::{Experiment, GarblingMatrix, StateSpace};
use crate::solver::{ChoiceRule, DecisionProblem};

/// Smallest weight given to any probability entry before normalisation, so
/// generated experiments have full support.
const MIN_WEIGHT: f64 = 0.02;

#[derive(Debug, Clone)]
pub struct Sampler {
    rng: Xoshiro256PlusPlus,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: Xoshiro256PlusPlus::seed_from_u64(seed),
        }
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.rng.random::<f64>()
    }

    /// Uniform integer in `lo..=hi`.
    pub fn int(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.random_range(lo..=hi)
    }

    /// A strictly positive probability vector of length `len`.
    pub fn simplex(&mut self, len: usize) -> Vec<f64> {
        let raw: Vec<f64> = (0..len).map(|_| self.uniform(MIN_WEIGHT, 1.0)).collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / total).collect()
    }

    /// A probability vector that may put (near) zero mass on some entries;
    /// every entry is still at least `1e-6` before normalisation.
    pub fn skewed_simplex(&mut self, len: usize) -> Vec<f64> {
        let raw: Vec<f64> = (0..len)
            .map(|_| self.uniform(0.0, 1.0).powi(3).max(1e-6))
            .collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / total).collect()
    }

    pub fn experiment(&mut self, states: &StateSpace, signals: usize) -> Experiment {
        let probs = (0..states.len()).map(|_| self.simplex(signals)).collect();
        Experiment::new(states.clone(), default_signals(signals), probs)
            .expect("sampled rows are positive and normalised")
    }

    pub fn garbling(&mut self, sources: usize, targets: usize) -> GarblingMatrix {
        let probs = (0..sources).map(|_| self.simplex(targets)).collect();
        GarblingMatrix::new(probs).expect("sampled rows are positive and normalised")
    }

    /// Off-diagonal coefficients uniform on `[lo, hi)`.
    pub fn beta(&mut self, states: &StateSpace, lo: f64, hi: f64) -> BetaMatrix {
        let n = states.len();
        let coef = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { 0.0 } else { self.uniform(lo, hi) })
                    .collect()
            })
            .collect();
        BetaMatrix::dense(states.clone(), coef).expect("sampled coefficients are non-negative")
    }

    /// A problem with utilities uniform on `[-1, 1)` and a random prior.
    pub fn decision_problem(&mut self, states: usize, actions: usize) -> Result<DecisionProblem> {
        let utility = (0..actions)
            .map(|_| (0..states).map(|_| self.uniform(-1.0, 1.0)).collect())
            .collect();
        let prior = self.simplex(states);
        DecisionProblem::new(
            StateSpace::indexed(states)?,
            (0..actions).map(|a| format!("a{a}")).collect(),
            utility,
            prior,
        )
    }

    pub fn choice_rule(&mut self, states: usize, actions: usize) -> ChoiceRule {
        ChoiceRule::new((0..states).map(|_| self.simplex(actions)).collect())
            .expect("sampled rows are positive and normalised")
    }

    /// A distribution on `atoms` distinct points of `[-1, 1)^dim`.
    pub fn distribution(&mut self, dim: usize, atoms: usize) -> FiniteDistribution {
        loop {
            let points = (0..atoms)
                .map(|_| (0..dim).map(|_| self.uniform(-1.0, 1.0)).collect())
                .collect();
            let weights = self.simplex(atoms);
            // Collisions are practically impossible; retry rather than fail.
            if let Ok(d) = FiniteDistribution::new(points, weights) {
                return d;
            }
        }
    }
}

fn default_signals(count: usize) -> Vec<String> {
    (0..count).map(|s| format!("s{s}")).collect()
}
