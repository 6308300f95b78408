//! Mixed moments and cumulants of finite-support distributions on `R^n`.
//!
//! Both vectors are indexed by `A = {0..N}^n \ {0}`. The conversions are the
//! Leonov–Shiryaev formulas
//!
//! ```text
//! κ(α) = Σ_{(λ¹..λ^q) ∈ Λ(α)} (-1)^{q-1}/q · α!/(λ¹!…λ^q!) · Π_p m(λ^p)
//! m(α) = Σ_{(λ¹..λ^q) ∈ Λ(α)} 1/q!        · α!/(λ¹!…λ^q!) · Π_p κ(λ^p)
//! ```
//!
//! where `Λ(α)` is the set of ordered tuples of non-zero multi-indices summing
//! to `α`. `Λ(α)` is far too large to walk for the bigger boxes (it has
//! 5,592,968 elements for `α = (4,4,4)`), and the alternating sum loses most
//! of its digits to cancellation once `|α|` reaches 10 or so. Both
//! directions are therefore evaluated through the equivalent recursion
//! obtained by splitting off the block containing one fixed unit of `α`:
//!
//! ```text
//! m(α) = Σ_{0≤β≤α-e_d} C(α-e_d, β) κ(β+e_d) m(α-e_d-β)
//! ```
//!
//! with `C(γ,β) = Π_d C(γ_d, β_d)` computed in integers.
//! [`enumerate_lambda`] is still available for inspection and testing.

use std::fmt;

use crate::error::{Error, Result};
use crate::llr::LlrDistribution;
use crate::numeric::{MERGE_TOL, ROW_SUM_TOL};

/// Largest dimension and per-coordinate order accepted by [`moments`].
pub const MAX_DIM: usize = 4;
pub const MAX_ORDER: u32 = 4;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(components: Vec<u32>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidMultiIndex("no components".into()));
        }
        if components.iter().all(|&c| c == 0) {
            return Err(Error::InvalidMultiIndex("all components are zero".into()));
        }
        Ok(Self(components))
    }

    pub fn components(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|α| = Σ_d α_d`.
    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn max_component(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Every element of `{0..order}^dim` except zero, in lexicographic order.
pub fn all_indices(dim: usize, order: u32) -> Vec<MultiIndex> {
    let shape = BoxShape::new(dim, order);
    (1..shape.size())
        .map(|k| MultiIndex(shape.decode(k)))
        .collect()
}

/// Row-major layout of the box `{0..order}^dim`, last coordinate fastest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct BoxShape {
    dim: usize,
    order: u32,
}

impl BoxShape {
    fn new(dim: usize, order: u32) -> Self {
        Self { dim, order }
    }

    fn side(&self) -> usize {
        self.order as usize + 1
    }

    fn size(&self) -> usize {
        self.side().pow(self.dim as u32)
    }

    fn encode(&self, alpha: &[u32]) -> usize {
        alpha
            .iter()
            .fold(0, |acc, &c| acc * self.side() + c as usize)
    }

    fn decode(&self, mut k: usize) -> Vec<u32> {
        let mut out = vec![0; self.dim];
        for slot in out.iter_mut().rev() {
            *slot = (k % self.side()) as u32;
            k /= self.side();
        }
        out
    }

    fn contains(&self, alpha: &MultiIndex) -> bool {
        alpha.dim() == self.dim && alpha.max_component() <= self.order
    }
}

/// Values on `A = {0..N}^n \ {0}`.
#[derive(Debug, Clone, PartialEq)]
struct Table {
    shape: BoxShape,
    /// Indexed by [`BoxShape::encode`]; slot 0 is unused.
    values: Vec<f64>,
}

impl Table {
    fn from_pairs(
        dim: usize,
        order: u32,
        pairs: impl IntoIterator<Item = (MultiIndex, f64)>,
    ) -> Result<Self> {
        if dim == 0 || order == 0 {
            return Err(Error::InvalidParameter(
                "dimension and order must be at least 1".into(),
            ));
        }
        let shape = BoxShape::new(dim, order);
        let mut values = vec![f64::NAN; shape.size()];
        for (alpha, v) in pairs {
            if !shape.contains(&alpha) {
                return Err(Error::InvalidMultiIndex(format!(
                    "{alpha} is outside {{0..{order}}}^{dim}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "value at {alpha} is not finite"
                )));
            }
            values[shape.encode(alpha.components())] = v;
        }
        if let Some(k) = (1..values.len()).find(|&k| values[k].is_nan()) {
            return Err(Error::IncompleteInput(format!(
                "missing value for {}",
                MultiIndex(shape.decode(k))
            )));
        }
        values[0] = 0.0;
        Ok(Self { shape, values })
    }

    fn get(&self, alpha: &MultiIndex) -> Option<f64> {
        self.shape
            .contains(alpha)
            .then(|| self.values[self.shape.encode(alpha.components())])
    }

    fn iter(&self) -> impl Iterator<Item = (MultiIndex, f64)> + '_ {
        (1..self.values.len()).map(|k| (MultiIndex(self.shape.decode(k)), self.values[k]))
    }
}

macro_rules! indexed_vector {
    ($name:ident) => {
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name(Table);

        impl $name {
            /// Builds the vector from one value per element of
            /// `{0..order}^dim \ {0}`; missing entries are an error.
            pub fn from_pairs(
                dim: usize,
                order: u32,
                pairs: impl IntoIterator<Item = (MultiIndex, f64)>,
            ) -> Result<Self> {
                Table::from_pairs(dim, order, pairs).map(Self)
            }

            pub fn dim(&self) -> usize {
                self.0.shape.dim
            }

            pub fn order(&self) -> u32 {
                self.0.shape.order
            }

            /// `None` if `alpha` lies outside the index set.
            pub fn get(&self, alpha: &MultiIndex) -> Option<f64> {
                self.0.get(alpha)
            }

            /// Entries in lexicographic order of the index.
            pub fn iter(&self) -> impl Iterator<Item = (MultiIndex, f64)> + '_ {
                self.0.iter()
            }

            /// Largest `|x - y| / max(1, |y|)` over all indices, or infinity if
            /// the index sets differ.
            pub fn max_relative_diff(&self, other: &Self) -> f64 {
                if self.0.shape != other.0.shape {
                    return f64::INFINITY;
                }
                self.0.values[1..]
                    .iter()
                    .zip(&other.0.values[1..])
                    .map(|(x, y)| (x - y).abs() / y.abs().max(1.0))
                    .fold(0.0, f64::max)
            }
        }
    };
}

indexed_vector!(MomentVector);
indexed_vector!(CumulantVector);

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDistribution {
    atoms: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl FiniteDistribution {
    pub fn new(atoms: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != weights.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} atoms with {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        let dim = atoms[0].len();
        if dim == 0 || atoms.iter().any(|a| a.len() != dim) {
            return Err(Error::InvalidDistribution(
                "atoms must share a positive dimension".into(),
            ));
        }
        if atoms.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidDistribution(
                "atom coordinates must be finite".into(),
            ));
        }
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidDistribution(
                "weights must be non-negative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {total}"
            )));
        }
        let mut sorted: Vec<&Vec<f64>> = atoms.iter().collect();
        sorted.sort_by(|a, b| lex_cmp(a, b));
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidDistribution("atoms must be distinct".into()));
        }
        Ok(Self { atoms, weights })
    }

    pub fn point_mass(x: Vec<f64>) -> Result<Self> {
        Self::new(vec![x], vec![1.0])
    }

    /// Weight `p` on 1 and `1 - p` on 0.
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::POutOfRange(p));
        }
        Self::new(vec![vec![0.0], vec![1.0]], vec![1.0 - p, p])
    }

    /// Law of the log-likelihood-ratio vector under state `state`.
    pub fn from_llr(sigma: &LlrDistribution, state: usize) -> Result<Self> {
        let weights = sigma.weights().get(state).ok_or_else(|| {
            Error::DimensionMismatch(format!("no state {state} in LLR distribution"))
        })?;
        Self::new(sigma.atoms().to_vec(), weights.clone())
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].len()
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// `m(α) = Σ_k w_k Π_d x_k[d]^{α_d}` for every `α ∈ {0..order}^n \ {0}`.
pub fn moments(dist: &FiniteDistribution, order: u32) -> Result<MomentVector> {
    let dim = dist.dim();
    if order == 0 {
        return Err(Error::InvalidParameter("order must be at least 1".into()));
    }
    if dim > MAX_DIM || order > MAX_ORDER {
        return Err(Error::DimensionTooLarge {
            dim,
            order: order as usize,
        });
    }
    let shape = BoxShape::new(dim, order);
    let powers: Vec<Vec<Vec<f64>>> = dist
        .atoms
        .iter()
        .map(|atom| {
            atom.iter()
                .map(|&x| (0..=order).map(|e| x.powi(e as i32)).collect())
                .collect()
        })
        .collect();
    let pairs = (1..shape.size()).map(|k| {
        let alpha = shape.decode(k);
        let value = dist
            .weights
            .iter()
            .zip(&powers)
            .map(|(w, pw)| {
                w * alpha
                    .iter()
                    .enumerate()
                    .map(|(d, &e)| pw[d][e as usize])
                    .product::<f64>()
            })
            .sum();
        (MultiIndex(alpha), value)
    });
    MomentVector::from_pairs(dim, order, pairs)
}

/// Law of the sum of independent draws from `a` and `b`. Sums that agree
/// componentwise within `1e-12` are merged; atoms come out sorted.
pub fn convolve(a: &FiniteDistribution, b: &FiniteDistribution) -> Result<FiniteDistribution> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "cannot convolve dimensions {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    let mut pairs: Vec<(Vec<f64>, f64)> = Vec::with_capacity(a.atoms.len() * b.atoms.len());
    for (x, wx) in a.atoms.iter().zip(&a.weights) {
        for (y, wy) in b.atoms.iter().zip(&b.weights) {
            pairs.push((x.iter().zip(y).map(|(p, q)| p + q).collect(), wx * wy));
        }
    }
    pairs.sort_by(|p, q| lex_cmp(&p.0, &q.0));
    let mut atoms: Vec<Vec<f64>> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    for (atom, w) in pairs {
        match atoms.last() {
            Some(last)
                if last
                    .iter()
                    .zip(&atom)
                    .all(|(p, q)| (p - q).abs() <= MERGE_TOL) =>
            {
                *weights.last_mut().expect("weights track atoms") += w;
            }
            _ => {
                atoms.push(atom);
                weights.push(w);
            }
        }
    }
    FiniteDistribution::new(atoms, weights)
}

fn binomial(n: u32, k: u32) -> u64 {
    let k = k.min(n - k) as u64;
    let n = n as u64;
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Fills in whichever of `m` and `kappa` is unknown from the recursion
/// `m(α) = Σ_{0≤β≤α-e_d} C(α-e_d, β) κ(β+e_d) m(α-e_d-β)`, where `d` is the
/// first coordinate with `α_d > 0` and `m(0) = 1`. Indices are visited in
/// encoding order, so every term on the right except `κ(α)` (at `β = α-e_d`)
/// is already known.
fn recurse(shape: BoxShape, m: &mut [f64], kappa: &mut [f64], want_cumulants: bool) {
    let size = shape.size();
    let decoded: Vec<Vec<u32>> = (0..size).map(|k| shape.decode(k)).collect();
    let side = shape.side();
    m[0] = 1.0;
    for k in 1..size {
        let alpha = &decoded[k];
        let d = alpha.iter().position(|&c| c > 0).expect("non-zero index");
        let stride = side.pow((shape.dim - 1 - d) as u32);
        let g = k - stride;
        let gamma = &decoded[g];
        let mut rest = 0.0;
        for (l, beta) in decoded.iter().enumerate().take(g) {
            if beta.iter().zip(gamma).any(|(x, y)| x > y) {
                continue;
            }
            // The encoding is linear: `l + stride` encodes `β + e_d` and
            // `g - l` encodes `γ - β`.
            let coef: u64 = gamma
                .iter()
                .zip(beta)
                .map(|(&c, &b)| binomial(c, b))
                .product();
            rest += coef as f64 * kappa[l + stride] * m[g - l];
        }
        if want_cumulants {
            kappa[k] = m[k] - rest;
        } else {
            m[k] = kappa[k] + rest;
        }
    }
}

pub fn moments_to_cumulants(m: &MomentVector) -> CumulantVector {
    let shape = m.0.shape;
    let mut moments = m.0.values.clone();
    let mut values = vec![0.0; shape.size()];
    recurse(shape, &mut moments, &mut values, true);
    values[0] = 0.0;
    CumulantVector(Table { shape, values })
}

pub fn cumulants_to_moments(k: &CumulantVector) -> MomentVector {
    let shape = k.0.shape;
    let mut kappa = k.0.values.clone();
    let mut values = vec![0.0; shape.size()];
    recurse(shape, &mut values, &mut kappa, false);
    values[0] = 0.0;
    MomentVector(Table { shape, values })
}

/// Iterator over `Λ(α)`: all ordered tuples of non-zero multi-indices
/// summing to `α`.
///
/// Tuples come in order of increasing length; within one length the first
/// part runs through its admissible values in decreasing lexicographic
/// order, then the second part, and so on. For `α = (1,1)` this gives
/// `((1,1))`, `((1,0),(0,1))`, `((0,1),(1,0))`. The number of tuples grows
/// very quickly with `α`, which is why the conversions do not use it.
pub fn enumerate_lambda(alpha: &MultiIndex) -> LambdaIter {
    let mut it = LambdaIter {
        alpha: alpha.0.clone(),
        parts: Vec::new(),
        q: 1,
        done: false,
    };
    it.reset();
    it
}

#[derive(Debug, Clone)]
pub struct LambdaIter {
    alpha: Vec<u32>,
    /// Current tuple; `None` from [`Iterator::next`] once exhausted.
    parts: Vec<Vec<u32>>,
    q: usize,
    done: bool,
}

impl LambdaIter {
    fn total(&self) -> usize {
        self.alpha.iter().sum::<u32>() as usize
    }

    /// Remainder of `α` after the first `p` parts.
    fn remainder(&self, p: usize) -> Vec<u32> {
        let mut rem = self.alpha.clone();
        for part in &self.parts[..p] {
            for (r, x) in rem.iter_mut().zip(part) {
                *r -= x;
            }
        }
        rem
    }

    /// Fills parts `p..q` with their first admissible values.
    fn fill_from(&mut self, p: usize) {
        self.parts.truncate(p);
        let mut rem = self.remainder(p);
        for slot in p..self.q - 1 {
            let later = self.q - 1 - slot;
            let first = first_part(&rem, later).expect("remainder always leaves room");
            for (r, x) in rem.iter_mut().zip(&first) {
                *r -= x;
            }
            self.parts.push(first);
        }
        self.parts.push(rem);
    }

    fn reset(&mut self) {
        if self.q > self.total() {
            self.done = true;
        } else {
            self.fill_from(0);
        }
    }

    fn advance(&mut self) {
        for p in (0..self.q.saturating_sub(1)).rev() {
            let rem = self.remainder(p);
            let later = self.q - 1 - p;
            let mut candidate = self.parts[p].clone();
            while lex_predecessor(&mut candidate, &rem) {
                if admissible(&candidate, &rem, later) {
                    self.parts[p] = candidate;
                    self.fill_from(p + 1);
                    return;
                }
            }
        }
        self.q += 1;
        self.reset();
    }
}

impl Iterator for LambdaIter {
    type Item = Vec<MultiIndex>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let out = self.parts.iter().map(|p| MultiIndex(p.clone())).collect();
        self.advance();
        Some(out)
    }
}

/// A part is admissible if it is non-zero and leaves at least `later` units
/// for the remaining parts.
fn admissible(part: &[u32], rem: &[u32], later: usize) -> bool {
    let taken: u32 = part.iter().sum();
    taken > 0 && (rem.iter().sum::<u32>() - taken) as usize >= later
}

fn first_part(rem: &[u32], later: usize) -> Option<Vec<u32>> {
    let mut candidate = rem.to_vec();
    loop {
        if admissible(&candidate, rem, later) {
            return Some(candidate);
        }
        if !lex_predecessor(&mut candidate, rem) {
            return None;
        }
    }
}

/// Steps `v` to the previous element of the box `{0..bound}` in
/// lexicographic order; false if `v` was zero.
fn lex_predecessor(v: &mut [u32], bound: &[u32]) -> bool {
    let Some(d) = v.iter().rposition(|&c| c > 0) else {
        return false;
    };
    v[d] -= 1;
    for (slot, &b) in v.iter_mut().zip(bound).skip(d + 1) {
        *slot = b;
    }
    true
}
