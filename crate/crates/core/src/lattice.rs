//! Brute-force ground truth over set partitions.
//!
//! Partitions are stored as restricted growth strings: element `i` carries the
//! label of its block, and labels appear in order of first use. Enumeration is
//! lexicographic in that encoding. Everything here is exhaustive, so layer
//! sizes are guarded (default 5·10^6 states, overridable through
//! `GIBBSFRAG_GUARD`).

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::coupling::{
    build_cover_graph, strassen_feasible, CoverState, Feasibility, MonotoneCoupling,
    ViolationCertificate,
};
use crate::error::{Error, Result};
use crate::layer::LayerDistribution;
use crate::rational::{self, Rational};
use crate::records::RecordVector;

pub const DEFAULT_GUARD: u128 = 5_000_000;
pub const GUARD_ENV: &str = "GIBBSFRAG_GUARD";

/// Largest layer size any enumeration will attempt.
pub fn state_guard() -> u128 {
    std::env::var(GUARD_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_GUARD)
}

/// Partition of `[n]` in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SetPartition {
    labels: Vec<u8>,
}

impl SetPartition {
    /// From a restricted growth string (0-based labels).
    pub fn from_rgs(labels: Vec<u8>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Malformed("empty partition".into()));
        }
        let mut next = 0u8;
        for &l in &labels {
            if l > next {
                return Err(Error::Malformed(format!(
                    "not a restricted growth string: {labels:?}"
                )));
            }
            if l == next {
                next = next
                    .checked_add(1)
                    .ok_or_else(|| Error::OutOfRange("too many blocks".into()))?;
            }
        }
        Ok(Self { labels })
    }

    /// From blocks of 1-based elements, in any order.
    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        if n == 0 || n > u8::MAX as usize {
            return Err(Error::OutOfRange(format!("n = {n}")));
        }
        let mut raw = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::Malformed("empty block".into()));
            }
            for &e in block {
                if e == 0 || e > n {
                    return Err(Error::Malformed(format!("element {e} outside [1, {n}]")));
                }
                if raw[e - 1] != usize::MAX {
                    return Err(Error::Malformed(format!("element {e} appears twice")));
                }
                raw[e - 1] = b;
            }
        }
        if let Some(missing) = raw.iter().position(|&l| l == usize::MAX) {
            return Err(Error::Malformed(format!("element {} missing", missing + 1)));
        }
        Ok(Self::canonical(&raw))
    }

    /// Relabels arbitrary block labels in order of first appearance.
    fn canonical<L: Copy + Ord>(raw: &[L]) -> Self {
        let mut seen: BTreeMap<L, u8> = BTreeMap::new();
        let labels = raw
            .iter()
            .map(|l| {
                let next = seen.len() as u8;
                *seen.entry(*l).or_insert(next)
            })
            .collect();
        Self { labels }
    }

    pub fn singletons(n: usize) -> Self {
        Self {
            labels: (0..n as u8).collect(),
        }
    }

    pub fn one_block(n: usize) -> Self {
        Self { labels: vec![0; n] }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.labels.iter().max().map_or(0, |&m| m as usize + 1)
    }

    pub fn rgs(&self) -> &[u8] {
        &self.labels
    }

    /// Block label of element `e` (1-based).
    pub fn block_of(&self, e: usize) -> usize {
        self.labels[e - 1] as usize
    }

    /// Blocks ordered by minimum, elements ascending, 1-based.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.num_blocks()];
        for (i, &l) in self.labels.iter().enumerate() {
            blocks[l as usize].push(i + 1);
        }
        blocks
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.num_blocks()];
        for &l in &self.labels {
            sizes[l as usize] += 1;
        }
        sizes
    }

    /// Indicator of block minima.
    pub fn record_set(&self) -> RecordVector {
        let mut next = 0u8;
        let bits: Vec<bool> = self
            .labels
            .iter()
            .map(|&l| {
                let new = l == next;
                if new {
                    next += 1;
                }
                new
            })
            .collect();
        RecordVector::from_bits(&bits).expect("element 1 always opens a block")
    }

    /// `finer` arises from `self` by splitting exactly one block in two.
    pub fn is_split_into(&self, finer: &SetPartition) -> bool {
        if finer.n() != self.n() || finer.num_blocks() != self.num_blocks() + 1 {
            return false;
        }
        let mut parent = vec![None; finer.num_blocks()];
        for (&f, &c) in finer.labels.iter().zip(&self.labels) {
            match parent[f as usize] {
                None => parent[f as usize] = Some(c),
                Some(p) if p != c => return false,
                _ => {}
            }
        }
        true
    }

    /// Every partition obtained by splitting one block into two nonempty
    /// parts.
    pub fn splits(&self) -> Vec<SetPartition> {
        let fresh = self.num_blocks() as u8;
        let mut out = Vec::new();
        for block in self.blocks() {
            // the part keeping the minimum is {min} ∪ (chosen subset of the rest)
            let rest = &block[1..];
            let m = rest.len();
            if m == 0 {
                continue;
            }
            for keep in 0..(1u64 << m) - 1 {
                let mut labels = self.labels.clone();
                for (bit, &e) in rest.iter().enumerate() {
                    if keep >> bit & 1 == 0 {
                        labels[e - 1] = fresh;
                    }
                }
                out.push(Self::canonical(&labels));
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Partition of `[n-1]` left after deleting element `n`.
    pub fn without_last(&self) -> Result<SetPartition> {
        if self.n() < 2 {
            return Err(Error::Malformed(
                "cannot delete from a partition of [1]".into(),
            ));
        }
        Ok(Self::canonical(&self.labels[..self.n() - 1]))
    }

    /// Adds element `n+1` as a singleton block.
    pub fn with_singleton(&self) -> SetPartition {
        let mut labels = self.labels.clone();
        labels.push(self.num_blocks() as u8);
        Self { labels }
    }

    /// Adds element `n+1` to the block containing `e`.
    pub fn with_joined(&self, e: usize) -> SetPartition {
        let mut labels = self.labels.clone();
        labels.push(self.labels[e - 1]);
        Self { labels }
    }

    /// `{1,2|3}` style rendering.
    pub fn block_string(&self) -> String {
        self.blocks()
            .iter()
            .map(|b| {
                b.iter()
                    .map(|e| e.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect::<Vec<_>>()
            .join("|")
    }
}

/// The restricted growth string, one base-36 digit per element.
impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.num_blocks() <= 36 {
            for &l in &self.labels {
                let c = std::char::from_digit(l as u32, 36).unwrap();
                write!(f, "{c}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.labels.iter().map(|l| l.to_string()).collect();
            f.write_str(&parts.join(","))
        }
    }
}

impl CoverState for SetPartition {
    fn size(&self) -> usize {
        self.n()
    }

    fn rank(&self) -> usize {
        self.num_blocks()
    }

    fn is_covered_by(&self, other: &Self) -> bool {
        self.is_split_into(other)
    }

    fn covering_states(&self) -> Vec<Self> {
        self.splits()
    }

    fn to_json(&self) -> Value {
        json!(self.blocks())
    }
}

/// Stirling number of the second kind, saturating at `u128::MAX`.
pub fn partition_count(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut row = vec![0u128; k + 1];
    row[0] = 1;
    for m in 1..=n {
        for j in (1..=k.min(m)).rev() {
            row[j] = (j as u128)
                .saturating_mul(row[j])
                .saturating_add(row[j - 1]);
        }
        row[0] = 0;
    }
    row[k]
}

fn check_guard(n: usize, k: usize) -> Result<()> {
    let states = partition_count(n, k);
    let limit = state_guard();
    if states > limit {
        return Err(Error::GuardExceeded { states, limit });
    }
    Ok(())
}

/// Iterator over the partitions of `[n]` with exactly `k` blocks, in
/// lexicographic restricted-growth-string order.
#[derive(Debug, Clone)]
pub struct Partitions {
    n: usize,
    k: usize,
    current: Option<Vec<u8>>,
}

/// All partitions of `[n]` into `k` blocks.
pub fn enumerate_partitions(n: usize, k: usize) -> Partitions {
    assert!(
        k >= 1 && k <= n && n <= u8::MAX as usize,
        "enumerate_partitions needs 1 <= k <= n"
    );
    let mut first = vec![0u8; n];
    fill_minimal(&mut first, 1, 1, k);
    Partitions {
        n,
        k,
        current: Some(first),
    }
}

/// Lexicographically smallest completion of `labels[from..]` reaching exactly
/// `k` blocks, given `used` blocks so far.
fn fill_minimal(labels: &mut [u8], from: usize, used: usize, k: usize) {
    let n = labels.len();
    let need = k - used;
    let zeros_until = n - need;
    for (i, l) in labels.iter_mut().enumerate().skip(from) {
        *l = if i < zeros_until {
            0
        } else {
            (used + i - zeros_until) as u8
        };
    }
}

impl Iterator for Partitions {
    type Item = SetPartition;

    fn next(&mut self) -> Option<SetPartition> {
        let labels = self.current.take()?;
        let out = SetPartition {
            labels: labels.clone(),
        };
        // prefix_max[i] = number of blocks used by labels[..=i]
        let mut used = Vec::with_capacity(self.n);
        let mut m = 0usize;
        for &l in &labels {
            m = m.max(l as usize + 1);
            used.push(m);
        }
        let mut next = labels;
        for i in (1..self.n).rev() {
            let before = used[i - 1];
            let candidate = next[i] as usize + 1;
            if candidate > before {
                continue;
            }
            let blocks = before.max(candidate + 1);
            if blocks > self.k || blocks + (self.n - 1 - i) < self.k {
                continue;
            }
            next[i] = candidate as u8;
            fill_minimal(&mut next, i + 1, blocks, self.k);
            self.current = Some(next);
            break;
        }
        Some(out)
    }
}

/// Gibbs(w) law on partitions of `[n]` with `k` blocks; `w[j-1]` holds `w_j`.
pub fn gibbs_partition_law(
    w: &[Rational],
    n: usize,
    k: usize,
) -> Result<LayerDistribution<SetPartition>> {
    assert!(k >= 1 && k <= n, "gibbs_partition_law needs 1 <= k <= n");
    if w.len() < n || w[..n].iter().any(|wj| *wj <= Rational::zero()) {
        return Err(Error::Domain(format!("need {n} positive weights")));
    }
    check_guard(n, k)?;
    let (states, weights): (Vec<_>, Vec<_>) = enumerate_partitions(n, k)
        .map(|p| {
            let weight = p
                .block_sizes()
                .iter()
                .fold(Rational::one(), |acc, &s| acc * &w[s - 1]);
            (p, weight)
        })
        .unzip();
    LayerDistribution::from_weights(k, states, weights)
}

/// Indicator of the block minima of `p`.
pub fn record_set(p: &SetPartition) -> RecordVector {
    p.record_set()
}

/// Pushforward of the Gibbs(w) layer law under [`record_set`], by full
/// enumeration.
pub fn record_law_oracle(
    w: &[Rational],
    n: usize,
    k: usize,
) -> Result<LayerDistribution<RecordVector>> {
    let law = gibbs_partition_law(w, n, k)?;
    let mut acc: BTreeMap<RecordVector, Rational> = BTreeMap::new();
    for (p, mass) in law.iter() {
        *acc.entry(p.record_set()).or_insert_with(Rational::zero) += mass;
    }
    let (states, probs) = acc.into_iter().unzip();
    LayerDistribution::new(k, states, probs)
}

/// Feasibility of one adjacent pair of partition layers.
#[derive(Debug, Clone)]
pub struct LevelReport {
    pub k: usize,
    pub cover_edge_count: usize,
    pub outcome: Feasibility<SetPartition>,
}

impl LevelReport {
    pub fn feasible(&self) -> bool {
        self.outcome.is_feasible()
    }

    pub fn coupling(&self) -> Option<&MonotoneCoupling<SetPartition>> {
        match &self.outcome {
            Feasibility::Coupled(c) => Some(c),
            Feasibility::Violated(_) => None,
        }
    }

    pub fn certificate(&self) -> Option<&ViolationCertificate<SetPartition>> {
        match &self.outcome {
            Feasibility::Violated(c) => Some(c),
            Feasibility::Coupled(_) => None,
        }
    }

    /// Edges carrying positive mass in the coupling, zero when infeasible.
    pub fn coupling_edge_count(&self) -> usize {
        self.coupling()
            .map_or(0, |c| c.joint().iter().filter(|m| !m.is_zero()).count())
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "k": self.k,
            "feasible": self.feasible(),
            "cover_edge_count": self.cover_edge_count,
            "coupling_edge_count": self.coupling_edge_count(),
        });
        if let Some(cert) = self.certificate() {
            v["certificate"] = cert.to_json(false);
        }
        v
    }
}

#[derive(Debug, Clone)]
pub struct ExploreReport {
    pub n: usize,
    pub weights: Vec<Rational>,
    pub levels: Vec<LevelReport>,
}

impl ExploreReport {
    pub fn all_feasible(&self) -> bool {
        self.levels.iter().all(LevelReport::feasible)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": "gibbsfrag.partition-explore/1",
            "n": self.n,
            "weights": self.weights.iter().map(rational::to_string).collect::<Vec<_>>(),
            "all_feasible": self.all_feasible(),
            "levels": self.levels.iter().map(LevelReport::to_json).collect::<Vec<_>>(),
        })
    }
}

/// Runs the exact feasibility solve between every pair of adjacent
/// partition layers `k → k+1` under the split cover relation.
pub fn partition_strassen_explore(w: &[Rational], n: usize) -> Result<ExploreReport> {
    assert!(n >= 1, "partition_strassen_explore needs n >= 1");
    for k in 1..=n {
        check_guard(n, k)?;
    }
    let mut levels = Vec::new();
    let mut lower = gibbs_partition_law(w, n, 1)?;
    for k in 1..n {
        let upper = gibbs_partition_law(w, n, k + 1)?;
        let graph = build_cover_graph(&lower, &upper)?;
        let outcome = strassen_feasible(&lower, &upper, &graph)?;
        levels.push(LevelReport {
            k,
            cover_edge_count: graph.edges().len(),
            outcome,
        });
        lower = upper;
    }
    Ok(ExploreReport {
        n,
        weights: w[..n].to_vec(),
        levels,
    })
}
