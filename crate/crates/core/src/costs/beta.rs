use crate::error::{Error, Result};
use crate::experiment::StateSpace;

/// Non-negative coefficients `β_ij` of the LLR cost, one per ordered pair of
/// distinct states. Diagonal entries are ignored.
///
/// Coefficients are either stored densely or generated by a rule. The rule
/// form lets one-dimensional problems with tens of thousands of states be
/// represented without an `n²` allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaMatrix {
    states: StateSpace,
    coef: Coefficients,
}

#[derive(Debug, Clone, PartialEq)]
enum Coefficients {
    Dense(Vec<Vec<f64>>),
    /// `β_ij = scale / (v_i - v_j)²`.
    InverseSquare {
        scale: f64,
    },
    Constant(f64),
}

impl BetaMatrix {
    pub fn dense(states: StateSpace, coef: Vec<Vec<f64>>) -> Result<Self> {
        let n = states.len();
        if coef.len() != n || coef.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "beta matrix must be {n}×{n}"
            )));
        }
        for (i, row) in coef.iter().enumerate() {
            for (j, &value) in row.iter().enumerate() {
                if i != j && !(value >= 0.0 && value.is_finite()) {
                    return Err(Error::InvalidBeta {
                        row: i,
                        col: j,
                        value,
                    });
                }
            }
        }
        Ok(Self {
            states,
            coef: Coefficients::Dense(coef),
        })
    }

    /// Dense coefficients without the sign and finiteness checks. Only meant
    /// for exercising the property checks with deliberately invalid input.
    #[doc(hidden)]
    pub fn dense_unchecked(states: StateSpace, coef: Vec<Vec<f64>>) -> Self {
        Self {
            states,
            coef: Coefficients::Dense(coef),
        }
    }

    pub fn constant(states: StateSpace, value: f64) -> Result<Self> {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(Error::InvalidBeta {
                row: 0,
                col: 1,
                value,
            });
        }
        Ok(Self {
            states,
            coef: Coefficients::Constant(value),
        })
    }

    /// `β_ij = kappa / (v_i - v_j)²` over the state values.
    pub fn inverse_square(states: StateSpace, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "kappa = {kappa} must be positive"
            )));
        }
        if states.values().is_none() {
            return Err(Error::MissingValues);
        }
        Ok(Self {
            states,
            coef: Coefficients::InverseSquare { scale: kappa },
        })
    }

    pub fn states(&self) -> &StateSpace {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// `β_ij`, or zero on the diagonal.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        match &self.coef {
            Coefficients::Dense(c) => c[i][j],
            Coefficients::Constant(c) => *c,
            Coefficients::InverseSquare { scale } => {
                let v = self.states.values().expect("checked at construction");
                let d = v[i] - v[j];
                scale / (d * d)
            }
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        (0..n)
            .map(|i| (0..n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// The `scale` of an inverse-square rule, if that is how `self` is stored.
    pub fn inverse_square_scale(&self) -> Option<f64> {
        match self.coef {
            Coefficients::InverseSquare { scale } => Some(scale),
            _ => None,
        }
    }

    /// True if some off-diagonal coefficient is zero (the decision problem
    /// is then not strictly concave).
    pub fn has_zero_off_diagonal(&self) -> bool {
        match &self.coef {
            Coefficients::Dense(c) => c
                .iter()
                .enumerate()
                .any(|(i, row)| row.iter().enumerate().any(|(j, &v)| i != j && v == 0.0)),
            Coefficients::Constant(c) => *c == 0.0,
            Coefficients::InverseSquare { .. } => false,
        }
    }

    /// Largest off-diagonal coefficient.
    pub fn max_coefficient(&self) -> f64 {
        let n = self.len();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| self.get(i, j))
            .fold(0.0, f64::max)
    }
}

/// Coefficients making every normal experiment with unit variance equally
/// costly regardless of the state grid:
/// `β_ij = kappa / (n(n-1)(v_i - v_j)²)`.
pub fn one_dimensional_betas(states: &StateSpace, kappa: f64) -> Result<BetaMatrix> {
    if states.values().is_none() {
        return Err(Error::MissingValues);
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "kappa = {kappa} must be positive"
        )));
    }
    let n = states.len() as f64;
    Ok(BetaMatrix {
        states: states.clone(),
        coef: Coefficients::InverseSquare {
            scale: kappa / (n * (n - 1.0)),
        },
    })
}
