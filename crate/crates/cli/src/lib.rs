//! Command-line front end for `infocost`: cost reports, solver runs,
//! reproductions of the worked examples, and the property-check suites.

pub mod check;
pub mod csv;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use infocost_core::costs::{
    llr_cost, llr_cost_via_posteriors, pairwise_terms, partition_coefficient, repeated_flip_costs,
    verification_asymmetry, BetaMatrix, Hypothesis,
};
use infocost_core::experiment::StateSpace;
use infocost_core::io::{BetaSpec, ExperimentFile, ProblemFile};
use infocost_core::solver::{
    psychometric_curve, solve_llr, solve_mutual_information, CostKind, SolveOptions,
};

use check::{run_suite, CheckOptions, Suite};
use csv::{Cell, Table};

#[derive(Debug, Parser)]
#[command(
    name = "infocost",
    version,
    about = "Log-likelihood-ratio information costs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cost of an experiment with its per-pair decomposition.
    Cost(CostArgs),
    /// Optimal information acquisition for a decision problem.
    Solve(SolveArgs),
    /// Regenerate the data behind one of the worked examples.
    Reproduce(ReproduceArgs),
    /// Run the seeded property suites.
    Check(CheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct CostArgs {
    #[arg(long)]
    pub experiment: PathBuf,
    #[arg(long)]
    pub beta: PathBuf,
    /// Comma-separated prior, e.g. "0.5,0.5".
    #[arg(long)]
    pub prior: Option<String>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CostChoice {
    Llr,
    Mi,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long, value_enum)]
    pub cost: CostChoice,
    /// Coefficient matrix or rule; required for `--cost llr`.
    #[arg(long, conflicts_with = "lambda")]
    pub beta: Option<PathBuf>,
    /// Mutual-information weight; required for `--cost mi`.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 200_000)]
    pub max_iter: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Example {
    Coinflip,
    Perception,
    Gdp,
    Swans,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub name: Example,
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Half-width of the perception task.
    #[arg(long, default_value_t = 10)]
    pub r: usize,
    /// Largest number of coin flips.
    #[arg(long, default_value_t = 20)]
    pub k: usize,
    /// Single ε for the swan example instead of the default grid.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Accuracy of one coin flip.
    #[arg(long, default_value_t = 0.8)]
    pub p: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Suite,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, hide = true)]
    pub inject_negative_beta: bool,
}

/// How a successful run ended; errors map to exit code 2 in `main`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Violation,
    NotConverged,
}

impl Outcome {
    pub fn exit_code(self) -> ExitCode {
        match self {
            Outcome::Success => ExitCode::SUCCESS,
            Outcome::Violation => ExitCode::from(1),
            Outcome::NotConverged => ExitCode::from(3),
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Cost(args) => run_cost(args),
        Command::Solve(args) => run_solve(args),
        Command::Reproduce(args) => run_reproduce(args),
        Command::Check(args) => run_check(args),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_prior(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .with_context(|| format!("bad prior entry {x:?}"))
        })
        .collect()
}

#[derive(Serialize)]
struct PairRow<'a> {
    from: &'a str,
    to: &'a str,
    beta: f64,
    kl: f64,
    contribution: f64,
}

#[derive(Serialize)]
struct PosteriorCheck {
    prior: Vec<f64>,
    cost: f64,
    delta: f64,
}

#[derive(Serialize)]
struct CostReport<'a> {
    cost: f64,
    pairs: Vec<PairRow<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    via_posteriors: Option<PosteriorCheck>,
}

pub fn run_cost(args: &CostArgs) -> Result<Outcome> {
    let mu = ExperimentFile::parse(&read(&args.experiment)?)
        .and_then(ExperimentFile::into_experiment)
        .with_context(|| format!("invalid experiment {}", args.experiment.display()))?;
    let beta = BetaSpec::parse(&read(&args.beta)?)
        .and_then(|spec| spec.resolve(mu.states()))
        .with_context(|| format!("invalid beta {}", args.beta.display()))?;
    let cost = llr_cost(&mu, &beta)?;
    let labels = mu.states().labels();
    let terms = pairwise_terms(&mu, &beta)?;
    let via_posteriors = match &args.prior {
        Some(text) => {
            let prior = parse_prior(text)?;
            let value = llr_cost_via_posteriors(&mu, &beta, &prior).context("invalid prior")?;
            Some(PosteriorCheck {
                prior,
                cost: value,
                delta: (value - cost).abs(),
            })
        }
        None => None,
    };
    let report = CostReport {
        cost,
        pairs: terms
            .iter()
            .map(|t| PairRow {
                from: &labels[t.i],
                to: &labels[t.j],
                beta: t.beta,
                kl: t.kl,
                contribution: t.contribution(),
            })
            .collect(),
        via_posteriors,
    };
    let text = match args.format {
        Format::Json => serde_json::to_string_pretty(&report)? + "\n",
        Format::Csv => {
            let mut table = Table::new(&["from", "to", "beta", "kl", "contribution"]);
            for p in &report.pairs {
                table.row(&[
                    Cell::Text(p.from.into()),
                    Cell::Text(p.to.into()),
                    Cell::Num(p.beta),
                    Cell::Num(p.kl),
                    Cell::Num(p.contribution),
                ]);
            }
            let summary = |table: &mut Table, name: &str, value: f64| {
                table.row(&[
                    Cell::Text(name.into()),
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Num(value),
                ]);
            };
            summary(&mut table, "cost", report.cost);
            if let Some(check) = &report.via_posteriors {
                summary(&mut table, "via_posteriors", check.cost);
                summary(&mut table, "delta", check.delta);
            }
            table.finish()
        }
    };
    emit(args.out.as_deref(), &text)?;
    Ok(Outcome::Success)
}

pub fn run_solve(args: &SolveArgs) -> Result<Outcome> {
    let problem = ProblemFile::parse(&read(&args.problem)?)
        .and_then(ProblemFile::into_problem)
        .with_context(|| format!("invalid problem {}", args.problem.display()))?;
    let opts = SolveOptions {
        tolerance: args.tol,
        max_iterations: args.max_iter,
    };
    let result = match args.cost {
        CostChoice::Llr => {
            let Some(path) = &args.beta else {
                bail!("--cost llr needs --beta")
            };
            let beta = BetaSpec::parse(&read(path)?)
                .and_then(|spec| spec.resolve(problem.states()))
                .with_context(|| format!("invalid beta {}", path.display()))?;
            if beta.has_zero_off_diagonal() {
                eprintln!(
                    "warning: beta has a zero off-diagonal entry; non-strict concavity, \
                     the optimal rule may not be unique"
                );
            }
            solve_llr(&problem, &beta, &opts)?
        }
        CostChoice::Mi => {
            let Some(lambda) = args.lambda else {
                bail!("--cost mi needs --lambda")
            };
            solve_mutual_information(&problem, lambda, &opts)?
        }
    };
    emit(
        args.out.as_deref(),
        &(serde_json::to_string_pretty(&result)? + "\n"),
    )?;
    if result.converged {
        Ok(Outcome::Success)
    } else {
        eprintln!(
            "solver did not converge after {} iterations (residual {:e})",
            result.iterations, result.foc_residual
        );
        Ok(Outcome::NotConverged)
    }
}

const SWAN_GRID: [f64; 5] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5];

pub fn run_reproduce(args: &ReproduceArgs) -> Result<Outcome> {
    let mut outcome = Outcome::Success;
    let text = match args.name {
        Example::Coinflip => {
            let beta = BetaMatrix::constant(StateSpace::indexed(2)?, args.kappa)?;
            let mut table = Table::new(&["k", "llr_cost", "mi_cost"]);
            for k in 1..=args.k {
                let (llr, mi) = repeated_flip_costs(args.p, k, &beta, &[0.5, 0.5], args.lambda)?;
                table.row(&[Cell::Int(k as i64), Cell::Num(llr), Cell::Num(mi)]);
            }
            table.finish()
        }
        Example::Perception => {
            let opts = SolveOptions::default();
            let (llr, llr_run) =
                psychometric_curve(args.r, args.kappa, CostKind::Llr, args.lambda, &opts)?;
            let (mi, mi_run) = psychometric_curve(
                args.r,
                args.kappa,
                CostKind::MutualInformation,
                args.lambda,
                &opts,
            )?;
            if !(llr_run.converged && mi_run.converged) {
                eprintln!("warning: a perception solve did not converge");
                outcome = Outcome::NotConverged;
            }
            let mut table = Table::new(&["state", "llr_red", "mi_red"]);
            for (a, b) in llr.iter().zip(&mi) {
                table.row(&[
                    Cell::Int(a.state),
                    Cell::Num(a.prob_red),
                    Cell::Num(b.prob_red),
                ]);
            }
            table.finish()
        }
        Example::Gdp => {
            let states = StateSpace::from_values((20_000..=80_000).map(f64::from).collect())?;
            let beta = BetaMatrix::inverse_square(states.clone(), args.kappa)?;
            let above = Hypothesis::from_values(&states, |v| v > 50_000.0)?;
            let even = Hypothesis::from_values(&states, |v| v % 2.0 == 0.0)?;
            let mut table = Table::new(&["hypothesis", "coefficient"]);
            table.row(&[
                Cell::Text("H1".into()),
                Cell::Num(partition_coefficient(&beta, &above)?),
            ]);
            table.row(&[
                Cell::Text("H2".into()),
                Cell::Num(partition_coefficient(&beta, &even)?),
            ]);
            table.finish()
        }
        Example::Swans => {
            let grid = match args.epsilon {
                Some(e) => vec![e],
                None => SWAN_GRID.to_vec(),
            };
            let mut table = Table::new(&["epsilon", "cost_i", "cost_ii", "ratio"]);
            for eps in grid {
                let (first, second) = verification_asymmetry(eps, args.kappa)?;
                table.row(&[
                    Cell::Num(eps),
                    Cell::Num(first),
                    Cell::Num(second),
                    Cell::Num(second / first),
                ]);
            }
            table.finish()
        }
    };
    emit(args.out.as_deref(), &text)?;
    Ok(outcome)
}

pub fn run_check(args: &CheckArgs) -> Result<Outcome> {
    if args.trials == 0 {
        bail!("--trials must be positive");
    }
    let opts = CheckOptions {
        seed: args.seed,
        trials: args.trials,
        inject_negative_beta: args.inject_negative_beta,
    };
    let reports = run_suite(args.suite, &opts)?;
    println!(
        "{:<36} {:>7} {:>14} {:>10}  status",
        "property", "trials", "max_deviation", "tolerance"
    );
    let mut failed = Vec::new();
    for r in &reports {
        let status = if r.passed() { "ok" } else { "FAIL" };
        println!(
            "{:<36} {:>7} {:>14.3e} {:>10.1e}  {status}",
            r.name, r.trials, r.max_deviation, r.tolerance
        );
        if !r.passed() {
            failed.push(r.name);
        }
    }
    if failed.is_empty() {
        Ok(Outcome::Success)
    } else {
        eprintln!("property violated: {}", failed.join(", "));
        Ok(Outcome::Violation)
    }
}
