//! Weight sequences of exchangeable Gibbs partitions, generalized Stirling
//! numbers, partial Bell polynomials, `v`-arrays and the block-count law.
//!
//! The exchangeable family is indexed by `α ∈ [-∞, 1)`. Its weights are
//! `w_j = (1-α)_{j-1↑1}` (identically one when `α = -∞`) and the generalized
//! Stirling numbers `S_α(n, k) = B_{n,k}(w)` satisfy
//!
//! ```text
//! S_α(n+1, k) = γ_{n,k} S_α(n, k) + S_α(n, k-1),   γ_{n,k} = n - αk  (or k when α = -∞)
//! ```

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::layer::LayerDistribution;
use crate::rational::{self, Rational};

/// Index of the exchangeable Gibbs family. `α = 1` (all singletons) is
/// excluded.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Alpha {
    Finite(Rational),
    NegInfinity,
}

impl Alpha {
    pub fn finite(a: Rational) -> Result<Self> {
        if a >= Rational::one() {
            return Err(Error::InvalidAlpha(rational::to_string(&a)));
        }
        Ok(Alpha::Finite(a))
    }

    /// The value grid used throughout the test and verification suites:
    /// `{-∞, -2, -1, -1/2, 0, 1/2}`.
    pub fn grid() -> Vec<Alpha> {
        vec![
            Alpha::NegInfinity,
            Alpha::Finite(rational::int(-2)),
            Alpha::Finite(rational::int(-1)),
            Alpha::Finite(rational::ratio(-1, 2)),
            Alpha::Finite(rational::int(0)),
            Alpha::Finite(rational::ratio(1, 2)),
        ]
    }

    pub fn zero() -> Self {
        Alpha::Finite(Rational::zero())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Alpha::Finite(a) if a.is_zero())
    }

    pub fn as_finite(&self) -> Option<&Rational> {
        match self {
            Alpha::Finite(a) => Some(a),
            Alpha::NegInfinity => None,
        }
    }

    /// `w_j`, for `j ≥ 1`.
    pub fn weight(&self, j: usize) -> Rational {
        assert!(j >= 1, "weights are indexed from 1");
        match self {
            Alpha::Finite(a) => rising_factorial(&(Rational::one() - a), j - 1, &Rational::one()),
            Alpha::NegInfinity => Rational::one(),
        }
    }

    /// `(w_1, …, w_n)`.
    pub fn weights(&self, n: usize) -> Vec<Rational> {
        (1..=n).map(|j| self.weight(j)).collect()
    }

    pub fn gamma(&self, n: usize, k: usize) -> Rational {
        gamma_coeff(n, k, self)
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alpha::Finite(a) => write!(f, "{a}"),
            Alpha::NegInfinity => f.write_str("-inf"),
        }
    }
}

impl FromStr for Alpha {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "-inf" | "-infinity" | "neg-inf" => Ok(Alpha::NegInfinity),
            t => Alpha::finite(rational::parse(t)?),
        }
    }
}

/// An `α` together with the optional `θ` needed for unconditioned laws.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightSystem {
    alpha: Alpha,
    theta: Option<Rational>,
}

impl WeightSystem {
    pub fn new(alpha: Alpha, theta: Option<Rational>) -> Result<Self> {
        if let Some(t) = &theta {
            match &alpha {
                Alpha::Finite(a) if *t <= -a.clone() => {
                    return Err(Error::Domain(format!(
                        "theta = {t} must exceed -alpha = {}",
                        -a
                    )))
                }
                Alpha::NegInfinity => {
                    return Err(Error::Domain(
                        "theta is not defined for alpha = -inf".into(),
                    ))
                }
                _ => {}
            }
        }
        Ok(Self { alpha, theta })
    }

    pub fn alpha(&self) -> &Alpha {
        &self.alpha
    }

    pub fn theta(&self) -> Option<&Rational> {
        self.theta.as_ref()
    }

    pub fn weight(&self, j: usize) -> Rational {
        self.alpha.weight(j)
    }

    pub fn gamma(&self, n: usize, k: usize) -> Rational {
        self.alpha.gamma(n, k)
    }

    pub fn stirling_table(&self, max_n: usize) -> StirlingTable {
        stirling_table(&self.alpha, max_n)
    }

    pub fn v_array(&self, max_n: usize) -> Result<Triangle> {
        let (a, t) = self.finite_pair()?;
        v_array(a, t, max_n)
    }

    pub fn block_count_distribution(&self, n: usize) -> Result<LayerDistribution<usize>> {
        let (a, t) = self.finite_pair()?;
        block_count_distribution(a, t, n)
    }

    fn finite_pair(&self) -> Result<(&Rational, &Rational)> {
        let a = self
            .alpha
            .as_finite()
            .ok_or_else(|| Error::Domain("v-array needs a finite alpha".into()))?;
        let t = self
            .theta
            .as_ref()
            .ok_or_else(|| Error::Domain("v-array needs theta".into()))?;
        Ok((a, t))
    }
}

/// `(x)_{m↑β} = ∏_{j=1}^{m} (x + (j-1)β)`, with the empty product equal to 1.
pub fn rising_factorial(x: &Rational, m: usize, beta: &Rational) -> Rational {
    let mut acc = Rational::one();
    let mut term = x.clone();
    for _ in 0..m {
        acc *= &term;
        term += beta;
    }
    acc
}

/// `γ_{n,k}`: `n - αk` for finite `α`, `k` for `α = -∞`.
pub fn gamma_coeff(n: usize, k: usize, alpha: &Alpha) -> Rational {
    assert!(
        k >= 1 && k <= n,
        "gamma_coeff needs 1 <= k <= n, got n={n} k={k}"
    );
    match alpha {
        Alpha::Finite(a) => rational::int(n as i64) - a * rational::int(k as i64),
        Alpha::NegInfinity => rational::int(k as i64),
    }
}

/// Lower-triangular array indexed from 1: entries `(n, k)` with `1 ≤ k ≤ n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triangle {
    rows: Vec<Vec<Rational>>,
}

impl Triangle {
    pub fn zeros(max_n: usize) -> Self {
        Self {
            rows: (1..=max_n).map(|n| vec![Rational::zero(); n]).collect(),
        }
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        if let Some((i, r)) = rows.iter().enumerate().find(|(i, r)| r.len() != i + 1) {
            return Err(Error::Malformed(format!(
                "row {} has {} entries",
                i + 1,
                r.len()
            )));
        }
        Ok(Self { rows })
    }

    pub fn max_n(&self) -> usize {
        self.rows.len()
    }

    /// Entry `(n, k)`; zero outside `1 ≤ k ≤ n`. Panics when `n` exceeds the
    /// table.
    pub fn get(&self, n: usize, k: usize) -> Rational {
        assert!(
            n <= self.max_n(),
            "row {n} beyond table size {}",
            self.max_n()
        );
        if n == 0 || k == 0 || k > n {
            return Rational::zero();
        }
        self.rows[n - 1][k - 1].clone()
    }

    pub fn entry(&self, n: usize, k: usize) -> &Rational {
        &self.rows[n - 1][k - 1]
    }

    pub fn set(&mut self, n: usize, k: usize, value: Rational) {
        self.rows[n - 1][k - 1] = value;
    }

    pub fn row(&self, n: usize) -> &[Rational] {
        &self.rows[n - 1]
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }
}

/// Result of an exact recursion check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecursionCheck {
    pub holds: bool,
    /// First `(n, k)` at which the identity or boundary condition fails.
    pub first_failure: Option<(usize, usize)>,
}

impl RecursionCheck {
    fn pass() -> Self {
        Self {
            holds: true,
            first_failure: None,
        }
    }

    fn fail(n: usize, k: usize) -> Self {
        Self {
            holds: false,
            first_failure: Some((n, k)),
        }
    }
}

/// Generalized Stirling numbers `S_α(n, k)` for `1 ≤ k ≤ n ≤ max_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StirlingTable {
    alpha: Alpha,
    entries: Triangle,
}

impl StirlingTable {
    /// Wraps an arbitrary triangle without checking it; see [`Self::check`].
    pub fn from_entries(alpha: Alpha, entries: Triangle) -> Self {
        Self { alpha, entries }
    }

    pub fn alpha(&self) -> &Alpha {
        &self.alpha
    }

    pub fn max_n(&self) -> usize {
        self.entries.max_n()
    }

    /// `S_α(n, k)`, zero for `k = 0` or `k > n`.
    pub fn get(&self, n: usize, k: usize) -> Rational {
        self.entries.get(n, k)
    }

    pub fn row(&self, n: usize) -> &[Rational] {
        self.entries.row(n)
    }

    pub fn entries(&self) -> &Triangle {
        &self.entries
    }

    /// Checks `S(1,1) = 1` and every recursion step exactly.
    pub fn check(&self) -> RecursionCheck {
        if self.max_n() == 0 {
            return RecursionCheck::pass();
        }
        if !self.entries.entry(1, 1).is_one() {
            return RecursionCheck::fail(1, 1);
        }
        for n in 1..self.max_n() {
            for k in 1..=n + 1 {
                let gamma = if k <= n {
                    self.alpha.gamma(n, k)
                } else {
                    Rational::zero()
                };
                let expected = gamma * self.get(n, k) + self.get(n, k - 1);
                if self.get(n + 1, k) != expected {
                    return RecursionCheck::fail(n + 1, k);
                }
            }
        }
        RecursionCheck::pass()
    }

    /// Smallest `(n, k)` where `γ_{n,k} S(n,k)² < γ_{n,k+1} S(n,k+1) S(n,k-1)`,
    /// if any.
    pub fn log_concavity_violation(&self) -> Option<(usize, usize)> {
        for n in 1..=self.max_n() {
            for k in 1..=n {
                let s = self.get(n, k);
                let lhs = self.alpha.gamma(n, k) * &s * &s;
                let rhs = if k < n {
                    self.alpha.gamma(n, k + 1) * self.get(n, k + 1) * self.get(n, k - 1)
                } else {
                    Rational::zero()
                };
                if lhs < rhs {
                    return Some((n, k));
                }
            }
        }
        None
    }
}

/// Builds the `S_α` triangle bottom-up from `S_α(1,1) = 1`.
pub fn stirling_table(alpha: &Alpha, max_n: usize) -> StirlingTable {
    assert!(max_n >= 1, "stirling_table needs max_n >= 1");
    let mut entries = Triangle::zeros(max_n);
    entries.set(1, 1, Rational::one());
    for n in 1..max_n {
        for k in 1..=n + 1 {
            let joined = if k <= n {
                alpha.gamma(n, k) * entries.get(n, k)
            } else {
                Rational::zero()
            };
            entries.set(n + 1, k, joined + entries.get(n, k - 1));
        }
    }
    StirlingTable {
        alpha: alpha.clone(),
        entries,
    }
}

/// Partial Bell polynomial `B_{n,k}(w)`; `w[j-1]` holds `w_j`.
///
/// Conditions on the block containing element 1:
/// `B_{n,k} = Σ_{j=1}^{n-k+1} C(n-1, j-1) w_j B_{n-j,k-1}`.
pub fn bell_polynomial(n: usize, k: usize, w: &[Rational]) -> Rational {
    assert!(k >= 1 && k <= n, "bell_polynomial needs 1 <= k <= n");
    assert!(
        w.len() > n - k,
        "need at least {} weights, got {}",
        n - k + 1,
        w.len()
    );
    let binom = binomial_rows(n);
    // table[m][j] = B_{m,j}
    let mut table = vec![vec![Rational::zero(); k + 1]; n + 1];
    table[0][0] = Rational::one();
    for j in 1..=k {
        for m in j..=j + n - k {
            let mut acc = Rational::zero();
            for size in 1..=m - j + 1 {
                let rest = &table[m - size][j - 1];
                if rest.is_zero() {
                    continue;
                }
                let c = Rational::from_integer(binom[m - 1][size - 1].clone());
                acc += c * &w[size - 1] * rest;
            }
            table[m][j] = acc;
        }
    }
    table[n][k].clone()
}

fn binomial_rows(n: usize) -> Vec<Vec<BigInt>> {
    let mut rows: Vec<Vec<BigInt>> = vec![vec![BigInt::one()]];
    for m in 1..n {
        let prev = &rows[m - 1];
        let mut row = vec![BigInt::one(); m + 1];
        for i in 1..m {
            row[i] = &prev[i - 1] + &prev[i];
        }
        rows.push(row);
    }
    rows
}

/// `v_{n,k} = (θ+α)_{(k-1)↑α} / (θ+1)_{(n-1)↑1}` for `1 ≤ k ≤ n ≤ max_n`.
///
/// For `α < 0` and `θ` not a multiple of `|α|` some entries are negative;
/// the array still solves the backward recursion.
pub fn v_array(alpha: &Rational, theta: &Rational, max_n: usize) -> Result<Triangle> {
    if *alpha >= Rational::one() {
        return Err(Error::InvalidAlpha(rational::to_string(alpha)));
    }
    if *theta <= -alpha.clone() {
        return Err(Error::Domain(format!(
            "theta = {theta} must exceed -alpha = {}",
            -alpha
        )));
    }
    let mut v = Triangle::zeros(max_n);
    let base = theta + alpha;
    let theta1 = theta + Rational::one();
    for n in 1..=max_n {
        let denom = rising_factorial(&theta1, n - 1, &Rational::one());
        for k in 1..=n {
            v.set(n, k, rising_factorial(&base, k - 1, alpha) / &denom);
        }
    }
    Ok(v)
}

/// Checks `v_{1,1} = 1` and `v_{n,k} = γ_{n,k} v_{n+1,k} + v_{n+1,k+1}` for
/// all `1 ≤ k ≤ n < max_n`.
pub fn verify_v_recursion(v: &Triangle, alpha: &Alpha, max_n: usize) -> RecursionCheck {
    assert!(v.max_n() >= max_n, "v-array has only {} rows", v.max_n());
    if max_n == 0 {
        return RecursionCheck::pass();
    }
    if !v.entry(1, 1).is_one() {
        return RecursionCheck::fail(1, 1);
    }
    for n in 1..max_n {
        for k in 1..=n {
            let rhs = alpha.gamma(n, k) * v.get(n + 1, k) + v.get(n + 1, k + 1);
            if *v.entry(n, k) != rhs {
                return RecursionCheck::fail(n, k);
            }
        }
    }
    RecursionCheck::pass()
}

/// Exact law of the block count `K_n` of an `(α, θ)` partition of `[n]`:
/// `P(K_n = k) = v_{n,k} S_α(n, k)`.
///
/// Negative `α` is accepted only with `θ = m|α|` for a positive integer `m`,
/// the range where every `v_{n,k}` is nonnegative.
pub fn block_count_distribution(
    alpha: &Rational,
    theta: &Rational,
    n: usize,
) -> Result<LayerDistribution<usize>> {
    assert!(n >= 1, "block_count_distribution needs n >= 1");
    if alpha.is_negative() {
        let m = theta / -alpha.clone();
        if !m.is_integer() || !m.is_positive() {
            return Err(Error::Domain(format!(
                "for alpha < 0, theta must be a positive multiple of |alpha|; got theta = {theta}"
            )));
        }
    }
    let v = v_array(alpha, theta, n)?;
    let s = stirling_table(&Alpha::finite(alpha.clone())?, n);
    let probs: Vec<Rational> = (1..=n).map(|k| v.get(n, k) * s.get(n, k)).collect();
    LayerDistribution::new(n, (1..=n).collect(), probs)
}
