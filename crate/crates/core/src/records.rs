//! Record vectors (indicators of block minima) and their exact laws.
//!
//! Two families of layer laws live here: independent Bernoulli indicators
//! conditioned on their sum, and the record vector of an exchangeable Gibbs
//! partition conditioned on its block count. Along a record path the weight
//! of `b` is the product of `γ_{i, k_i(b)}` over the positions `i+1` that join
//! an existing block, where `k_i(b)` counts the records among the first `i`
//! elements; normalizing by `S_α(n, k)` gives the conditioned law.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::layer::LayerDistribution;
use crate::rational::{self, Rational};
use crate::weights::{stirling_table, Alpha, StirlingTable};

/// Largest `n` representable by a [`RecordVector`].
pub const MAX_N: usize = 64;

/// Binary vector `(b_1, …, b_n)` with `b_1 = 1`, stored as a bitmask where
/// bit `i-1` holds `b_i`. Ordering within a layer is by mask value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RecordVector {
    n: u8,
    mask: u64,
}

impl RecordVector {
    pub fn from_mask(n: usize, mask: u64) -> Result<Self> {
        if n == 0 || n > MAX_N {
            return Err(Error::OutOfRange(format!(
                "record vector length {n} not in 1..={MAX_N}"
            )));
        }
        if n < 64 && mask >> n != 0 {
            return Err(Error::Malformed(format!(
                "mask {mask:#b} has bits beyond position {n}"
            )));
        }
        if mask & 1 == 0 {
            return Err(Error::Malformed("b_1 must be 1".into()));
        }
        Ok(Self { n: n as u8, mask })
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        if bits.len() > MAX_N {
            return Err(Error::OutOfRange(format!(
                "record vector length {} exceeds {MAX_N}",
                bits.len()
            )));
        }
        let mask = bits
            .iter()
            .enumerate()
            .fold(0u64, |m, (i, &b)| if b { m | 1 << i } else { m });
        Self::from_mask(bits.len(), mask)
    }

    /// Parses a bitstring such as `"1010"`.
    pub fn parse(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Parse(format!("not a bitstring: {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_bits(&bits)
    }

    /// `(1, 0, …, 0)`.
    pub fn first_only(n: usize) -> Self {
        Self::from_mask(n, 1).expect("valid length")
    }

    pub fn all_ones(n: usize) -> Self {
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        Self::from_mask(n, mask).expect("valid length")
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn ones(&self) -> usize {
        self.mask.count_ones() as usize
    }

    /// `b_i`, 1-based.
    pub fn get(&self, i: usize) -> bool {
        assert!(
            i >= 1 && i <= self.n(),
            "position {i} out of 1..={}",
            self.n
        );
        self.mask >> (i - 1) & 1 == 1
    }

    pub fn with_set(&self, i: usize) -> Self {
        assert!(i >= 1 && i <= self.n());
        Self {
            n: self.n,
            mask: self.mask | 1 << (i - 1),
        }
    }

    /// Appends `b_{n+1} = bit`.
    pub fn extended(&self, bit: bool) -> Result<Self> {
        let n = self.n() + 1;
        let mask = if bit && self.n() < 64 {
            self.mask | 1 << self.n()
        } else {
            self.mask
        };
        Self::from_mask(n, mask)
    }

    /// Positions holding a zero.
    pub fn zeros(&self) -> impl Iterator<Item = usize> + '_ {
        (2..=self.n()).filter(move |&i| !self.get(i))
    }

    /// `self ≺ other`: `other` is `self` with exactly one zero raised to one.
    pub fn is_covered_by(&self, other: &Self) -> bool {
        self.n == other.n
            && self.mask & !other.mask == 0
            && (other.mask ^ self.mask).count_ones() == 1
    }

    /// Coordinatewise `self ≤ other`.
    pub fn le_coordinatewise(&self, other: &Self) -> bool {
        self.n == other.n && self.mask & !other.mask == 0
    }

    pub fn to_bits(&self) -> Vec<bool> {
        (1..=self.n()).map(|i| self.get(i)).collect()
    }
}

impl fmt::Display for RecordVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 1..=self.n() {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// All record vectors of length `n` with `k` ones, ascending by mask.
pub fn layer_states(n: usize, k: usize) -> Vec<RecordVector> {
    assert!(
        (1..=MAX_N).contains(&n),
        "record vectors support 1 <= n <= {MAX_N}, got {n}"
    );
    if k == 0 || k > n {
        return Vec::new();
    }
    let free = n - 1;
    let pick = k - 1;
    if pick == 0 {
        return vec![RecordVector::first_only(n)];
    }
    // Gosper's hack over the n-1 free positions.
    let limit: u128 = 1u128 << free;
    let mut out = Vec::new();
    let mut x: u64 = if pick == 64 {
        u64::MAX
    } else {
        (1u64 << pick) - 1
    };
    loop {
        out.push(RecordVector {
            n: n as u8,
            mask: x << 1 | 1,
        });
        let c = x & x.wrapping_neg();
        let r = x as u128 + c as u128;
        if r >= limit {
            break;
        }
        let r = r as u64;
        x = (((r ^ x) >> 2) / c) | r;
    }
    out
}

/// `(1, 1/2, …, 1/n)`: new-table probabilities of the Chinese restaurant
/// process.
pub fn harmonic_probabilities(n: usize) -> Vec<Rational> {
    (1..=n as i64).map(|i| rational::ratio(1, i)).collect()
}

/// Exact pmf of a sum of independent Bernoulli(`p_i`) variables.
pub fn poisson_binomial_pmf(p: &[Rational]) -> Vec<Rational> {
    let mut u = vec![Rational::one()];
    for pi in p {
        assert!(
            !(*pi < Rational::zero() || *pi > Rational::one()),
            "probability {pi} outside [0,1]"
        );
        let qi = Rational::one() - pi;
        let mut next = vec![Rational::zero(); u.len() + 1];
        for (i, ui) in u.iter().enumerate() {
            next[i] += ui * &qi;
            next[i + 1] += ui * pi;
        }
        u = next;
    }
    u
}

fn check_bernoulli(p: &[Rational]) -> Result<()> {
    if p.is_empty() || p.len() > MAX_N {
        return Err(Error::OutOfRange(format!(
            "vector length {} not in 1..={MAX_N}",
            p.len()
        )));
    }
    if let Some(pi) = p
        .iter()
        .find(|pi| **pi < Rational::zero() || **pi > Rational::one())
    {
        return Err(Error::Domain(format!("probability {pi} outside [0,1]")));
    }
    if !p[0].is_one() {
        return Err(Error::LeadingProbability(rational::to_string(&p[0])));
    }
    Ok(())
}

/// Law of independent Bernoulli(`p_i`) indicators conditioned on summing to
/// `k`. Requires `p_1 = 1`; every vector with `k` ones is listed, with zero
/// mass where some `p_i ∈ {0, 1}` forbids it.
pub fn conditional_bernoulli(p: &[Rational], k: usize) -> Result<LayerDistribution<RecordVector>> {
    check_bernoulli(p)?;
    let n = p.len();
    if k == 0 || k > n {
        return Err(Error::OutOfRange(format!("k = {k} not in 1..={n}")));
    }
    let states = layer_states(n, k);
    let q: Vec<Rational> = p.iter().map(|pi| Rational::one() - pi).collect();
    let weights: Vec<Rational> = states
        .iter()
        .map(|b| {
            (1..=n).fold(Rational::one(), |acc, i| {
                acc * if b.get(i) { &p[i - 1] } else { &q[i - 1] }
            })
        })
        .collect();
    if weights.iter().all(Zero::is_zero) {
        return Err(Error::ZeroProbability(format!(
            "sum of indicators equal to {k}"
        )));
    }
    LayerDistribution::from_weights(k, states, weights)
}

/// Unnormalized record-path weight `∏ γ_{i, k_i(b)}` over positions `i+1`
/// with `b_{i+1} = 0`.
pub fn record_weight(alpha: &Alpha, b: &RecordVector) -> Rational {
    let mut weight = Rational::one();
    let mut records = 1;
    for i in 1..b.n() {
        if b.get(i + 1) {
            records += 1;
        } else {
            weight *= alpha.gamma(i, records);
        }
    }
    weight
}

/// Law of the record vector of a Gibbs(α) partition of `[n]` conditioned on
/// `k` blocks.
pub fn record_law(alpha: &Alpha, n: usize, k: usize) -> LayerDistribution<RecordVector> {
    record_law_with(&stirling_table(alpha, n), n, k)
}

/// As [`record_law`], reusing a precomputed table with `max_n ≥ n`.
pub fn record_law_with(
    table: &StirlingTable,
    n: usize,
    k: usize,
) -> LayerDistribution<RecordVector> {
    assert!(
        k >= 1 && k <= n,
        "record_law needs 1 <= k <= n, got n={n} k={k}"
    );
    let alpha = table.alpha();
    let norm = table.get(n, k);
    let states = layer_states(n, k);
    let probs = states
        .iter()
        .map(|b| record_weight(alpha, b) / &norm)
        .collect();
    LayerDistribution::new(k, states, probs).expect("record path weights sum to S(n,k)")
}

/// All record layers `k = 1..=n`.
pub fn record_layers(alpha: &Alpha, n: usize) -> Vec<LayerDistribution<RecordVector>> {
    let table = stirling_table(alpha, n);
    (1..=n).map(|k| record_law_with(&table, n, k)).collect()
}

/// Conditioned Bernoulli layers `k = 1..=n`.
pub fn bernoulli_layers(p: &[Rational]) -> Result<Vec<LayerDistribution<RecordVector>>> {
    (1..=p.len()).map(|k| conditional_bernoulli(p, k)).collect()
}

/// `P(b_n = 1 | K_n = k) = S_α(n-1, k-1) / S_α(n, k)`.
pub fn p_record_last(alpha: &Alpha, n: usize, k: usize) -> Rational {
    p_record_last_with(&stirling_table(alpha, n), n, k)
}

pub fn p_record_last_with(table: &StirlingTable, n: usize, k: usize) -> Rational {
    assert!(
        n >= 2 && k >= 1 && k <= n,
        "p_record_last needs n >= 2 and 1 <= k <= n"
    );
    table.get(n - 1, k - 1) / table.get(n, k)
}

/// Law of the level at which `{n}` first becomes a singleton:
/// `P(K ≤ k) = P(b_n = 1 | K_n = k)`. States are `1..=n`.
pub fn threshold_law(alpha: &Alpha, n: usize) -> Result<LayerDistribution<usize>> {
    threshold_law_with(&stirling_table(alpha, n), n)
}

pub fn threshold_law_with(table: &StirlingTable, n: usize) -> Result<LayerDistribution<usize>> {
    assert!(n >= 2, "threshold_law needs n >= 2");
    let mut probs = Vec::with_capacity(n);
    let mut prev = Rational::zero();
    for k in 1..=n {
        let cdf = p_record_last_with(table, n, k);
        if cdf < prev {
            return Err(Error::MonotonicityViolation { n, k: k - 1 });
        }
        probs.push(&cdf - &prev);
        prev = cdf;
    }
    LayerDistribution::new(n, (1..=n).collect(), probs)
}

/// Errors unless every member's one-step raises are members too.
pub fn check_upward_closed(n: usize, upset: &BTreeSet<RecordVector>) -> Result<()> {
    for b in upset {
        if b.n() != n {
            return Err(Error::Malformed(format!(
                "{b} has length {}, expected {n}",
                b.n()
            )));
        }
        if let Some(i) = b.zeros().find(|&i| !upset.contains(&b.with_set(i))) {
            return Err(Error::NotUpwardClosed(format!(
                "{b} is in the set but {} is not",
                b.with_set(i)
            )));
        }
    }
    Ok(())
}

/// `P(U | Σ = k) ≤ P(U | Σ = k+1)` for an upward-closed `U`, exactly.
pub fn efron_check(p: &[Rational], upset: &BTreeSet<RecordVector>, k: usize) -> Result<bool> {
    check_bernoulli(p)?;
    let n = p.len();
    if k == 0 || k >= n {
        return Err(Error::OutOfRange(format!("k = {k} not in 1..{n}")));
    }
    check_upward_closed(n, upset)?;
    let lower = conditional_bernoulli(p, k)?.mass_where(|b| upset.contains(b));
    let upper = conditional_bernoulli(p, k + 1)?.mass_where(|b| upset.contains(b));
    Ok(lower <= upper)
}

/// Up-set generated by `generators`: everything coordinatewise above one of
/// them.
pub fn upset_generated_by(n: usize, generators: &[RecordVector]) -> BTreeSet<RecordVector> {
    (1..=n)
        .flat_map(|k| layer_states(n, k))
        .filter(|b| generators.iter().any(|g| g.le_coordinatewise(b)))
        .collect()
}
