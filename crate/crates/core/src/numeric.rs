//! Shared numeric tolerances and an exactly rounded summation accumulator.

use crate::error::{Error, Result};

/// Row sums of probability vectors must be within this distance of 1.
pub const ROW_SUM_TOL: f64 = 1e-9;

/// Entries of an experiment must exceed this floor.
pub const POSITIVITY_FLOOR: f64 = 1e-12;

/// Componentwise tolerance used when merging support points.
pub const MERGE_TOL: f64 = 1e-12;

/// Accumulates `f64` terms without intermediate rounding and returns the
/// correctly rounded value of the exact sum.
///
/// This is Shewchuk's partials algorithm (the same one behind Python's
/// `math.fsum`). Two accumulators fed the same multiset of reals return
/// bit-identical results regardless of the order of the terms.
#[derive(Debug, Clone, Default)]
pub struct ExactSum {
    partials: Vec<f64>,
}

impl ExactSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, mut x: f64) {
        let mut i = 0;
        for j in 0..self.partials.len() {
            let mut y = self.partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        self.partials.truncate(i);
        self.partials.push(x);
    }

    /// Adds the exact product `a * b` (both factors are taken as exact reals).
    pub fn add_product(&mut self, a: f64, b: f64) {
        let p = a * b;
        let e = a.mul_add(b, -p);
        self.add(p);
        if e != 0.0 {
            self.add(e);
        }
    }

    pub fn value(&self) -> f64 {
        let p = &self.partials;
        let mut n = p.len();
        if n == 0 {
            return 0.0;
        }
        n -= 1;
        let mut hi = p[n];
        let mut lo = 0.0;
        while n > 0 {
            let x = hi;
            let y = p[n - 1];
            n -= 1;
            hi = x + y;
            let yr = hi - x;
            lo = y - yr;
            if lo != 0.0 {
                break;
            }
        }
        // Round-half-even correction when the remaining partials push the
        // exact value past the halfway point.
        if n > 0 && ((lo < 0.0 && p[n - 1] < 0.0) || (lo > 0.0 && p[n - 1] > 0.0)) {
            let y = lo * 2.0;
            let x = hi + y;
            let yr = x - hi;
            if y == yr {
                hi = x;
            }
        }
        hi
    }
}

impl FromIterator<f64> for ExactSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = ExactSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Validates a strictly positive probability row.
pub(crate) fn check_positive_row(row: &[f64], row_index: usize) -> Result<()> {
    for (col, &value) in row.iter().enumerate() {
        if !value.is_finite() || value <= POSITIVITY_FLOOR {
            return Err(Error::NonPositiveEntry {
                row: row_index,
                col,
                value,
            });
        }
    }
    check_row_sum(row, row_index)
}

/// Validates a non-negative probability row.
pub(crate) fn check_stochastic_row(row: &[f64], row_index: usize) -> Result<()> {
    for (col, &value) in row.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::NonPositiveEntry {
                row: row_index,
                col,
                value,
            });
        }
    }
    check_row_sum(row, row_index)
}

fn check_row_sum(row: &[f64], row_index: usize) -> Result<()> {
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > ROW_SUM_TOL {
        return Err(Error::RowSumViolation {
            row: row_index,
            sum,
        });
    }
    Ok(())
}

/// `x ln x` with the continuous extension `0 ln 0 = 0`.
pub(crate) fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` when a pivot falls below `1e-14` times the largest entry.
pub(crate) fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(scale > 0.0 && scale.is_finite()) {
        return None;
    }
    for col in 0..n {
        let pivot = (col..n).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))?;
        if a[pivot][col].abs() <= 1e-14 * scale {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in (col + 1)..n {
            let factor = a[r][col] / a[col][col];
            if factor != 0.0 {
                for c in col..n {
                    a[r][c] -= factor * a[col][c];
                }
                b[r] -= factor * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let tail: f64 = ((r + 1)..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - tail) / a[r][r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Shannon entropy in nats.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().map(|&x| xlogx(x)).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_solve_small_system() {
        let a = vec![
            vec![0.0, 2.0, 1.0],
            vec![1.0, 1.0, 0.0],
            vec![3.0, 0.0, 1.0],
        ];
        let x = solve_dense(a, vec![5.0, 3.0, 6.0]).unwrap();
        for (got, want) in x.iter().zip([1.4, 1.6, 1.8]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(solve_dense(vec![vec![1.0, 2.0], vec![2.0, 4.0]], vec![1.0, 2.0]).is_none());
    }

    #[test]
    fn exact_sum_cancels_catastrophic_terms() {
        let acc: ExactSum = [1e100, 1.0, -1e100, 1e-30].into_iter().collect();
        assert_eq!(acc.value(), 1.0 + 1e-30);
        let acc: ExactSum = [0.1; 10].into_iter().collect();
        assert_eq!(acc.value(), 1.0);
    }

    #[test]
    fn exact_sum_is_order_independent() {
        let terms: Vec<f64> = (1..2000).map(|k| 1.0 / (k as f64 * k as f64)).collect();
        let forward: ExactSum = terms.iter().copied().collect();
        let backward: ExactSum = terms.iter().rev().copied().collect();
        assert_eq!(forward.value().to_bits(), backward.value().to_bits());
    }

    #[test]
    fn exact_product_matches_repeated_addition() {
        let x = 1.0 / 49.0;
        let mut repeated = ExactSum::new();
        for _ in 0..37 {
            repeated.add(x);
        }
        let mut product = ExactSum::new();
        product.add_product(37.0, x);
        assert_eq!(repeated.value().to_bits(), product.value().to_bits());
    }

    #[test]
    fn row_checks() {
        assert!(check_positive_row(&[0.5, 0.5], 0).is_ok());
        assert!(matches!(
            check_positive_row(&[1.0, 0.0], 0),
            Err(Error::NonPositiveEntry { col: 1, .. })
        ));
        assert!(matches!(
            check_stochastic_row(&[0.9, 0.0], 3),
            Err(Error::RowSumViolation { row: 3, .. })
        ));
    }
}
