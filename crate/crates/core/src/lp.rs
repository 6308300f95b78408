//! Dense phase-one simplex for feasibility of `A x = b, x >= 0`.
//!
//! Pivoting follows Bland's rule (lowest eligible index enters, ties in the
//! ratio test go to the lowest basic index), which guarantees termination on
//! degenerate problems. The problems solved here have at most a few hundred
//! columns, so a dense tableau is adequate.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-12;

/// Phase-one objective values at or below this are treated as feasible.
pub const FEASIBILITY_TOL: f64 = 1e-10;

pub struct Phase1 {
    /// Number of constraint rows.
    rows: usize,
    /// Number of structural columns.
    cols: usize,
    /// `rows × (cols + rows + 1)`: structural, artificial, right-hand side.
    tableau: Vec<Vec<f64>>,
    basis: Vec<usize>,
}

impl Phase1 {
    pub fn new(a: &[Vec<f64>], b: &[f64]) -> Result<Self> {
        let rows = a.len();
        if rows != b.len() {
            return Err(Error::DimensionMismatch(
                "constraint matrix and rhs differ".into(),
            ));
        }
        let cols = a.first().map_or(0, Vec::len);
        if a.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged constraint matrix".into()));
        }
        let width = cols + rows + 1;
        let tableau = a
            .iter()
            .zip(b)
            .enumerate()
            .map(|(r, (row, &rhs))| {
                let sign = if rhs < 0.0 { -1.0 } else { 1.0 };
                let mut t = vec![0.0; width];
                for (c, &v) in row.iter().enumerate() {
                    t[c] = sign * v;
                }
                t[cols + r] = 1.0;
                t[width - 1] = sign * rhs;
                t
            })
            .collect();
        Ok(Self {
            rows,
            cols,
            tableau,
            basis: (cols..cols + rows).collect(),
        })
    }

    fn rhs(&self, r: usize) -> f64 {
        self.tableau[r][self.cols + self.rows]
    }

    /// Sum of artificial variables, the phase-one objective.
    fn infeasibility(&self) -> f64 {
        (0..self.rows)
            .filter(|&r| self.basis[r] >= self.cols)
            .map(|r| self.rhs(r))
            .sum()
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let p = self.tableau[pr][pc];
        self.tableau[pr].iter_mut().for_each(|x| *x /= p);
        let pivot_row = self.tableau[pr].clone();
        for (r, row) in self.tableau.iter_mut().enumerate() {
            if r == pr {
                continue;
            }
            let f = row[pc];
            if f != 0.0 {
                row.iter_mut()
                    .zip(&pivot_row)
                    .for_each(|(x, y)| *x -= f * y);
            }
        }
        self.basis[pr] = pc;
    }

    /// Minimises the sum of artificials. Returns `Some(x)` if the optimum is
    /// within [`FEASIBILITY_TOL`], `None` if the system is infeasible.
    pub fn solve(mut self, max_pivots: usize) -> Result<Option<Vec<f64>>> {
        let total = self.cols + self.rows;
        for _ in 0..max_pivots {
            // Reduced cost of column j: c_j - Σ_{r: basic artificial} a_rj.
            let entering = (0..total).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let cost = if j >= self.cols { 1.0 } else { 0.0 };
                let reduced = cost
                    - (0..self.rows)
                        .filter(|&r| self.basis[r] >= self.cols)
                        .map(|r| self.tableau[r][j])
                        .sum::<f64>();
                reduced < -PIVOT_TOL
            });
            let Some(pc) = entering else {
                return Ok(self.extract());
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.tableau[r][pc];
                if a > PIVOT_TOL {
                    let ratio = self.rhs(r) / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - PIVOT_TOL
                                || (ratio <= lratio + PIVOT_TOL && self.basis[r] < self.basis[lr])
                            {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            match leave {
                Some((pr, _)) => self.pivot(pr, pc),
                // The phase-one objective is bounded below by zero.
                None => return Err(Error::SolverFailure("unbounded phase-one ray".into())),
            }
        }
        Err(Error::SolverFailure(format!(
            "no convergence within {max_pivots} pivots"
        )))
    }

    fn extract(&self) -> Option<Vec<f64>> {
        if self.infeasibility() > FEASIBILITY_TOL {
            return None;
        }
        let mut x = vec![0.0; self.cols];
        for (r, &j) in self.basis.iter().enumerate() {
            if j < self.cols {
                x[j] = self.rhs(r).max(0.0);
            }
        }
        Some(x)
    }
}

/// Finds `x >= 0` with `A x = b`, or `None` if none exists.
pub fn find_feasible(a: &[Vec<f64>], b: &[f64]) -> Result<Option<Vec<f64>>> {
    let lp = Phase1::new(a, b)?;
    let budget = 50 * (lp.rows + lp.cols).max(10);
    lp.solve(budget)
}
