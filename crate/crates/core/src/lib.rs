//! Costs of information acquisition.
//!
//! Finite Blackwell experiments, the log-likelihood-ratio (LLR) cost family
//! with its mutual-information baseline, optimal choice rules in finite
//! decision problems, and moment/cumulant conversions for distributions of
//! log-likelihood ratios.

pub mod costs;
pub mod cumulants;
pub mod dominance;
pub mod error;
pub mod experiment;
pub mod io;
pub mod llr;
pub mod lp;
pub mod numeric;
pub mod random;
pub mod solver;

pub use error::{Error, Result};
