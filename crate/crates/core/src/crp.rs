//! Chinese restaurant seating and the fragmentation samplers built on it.
//!
//! Customer `i` either opens a new table (`b_i = 1`) or sits immediately to
//! the left of customer `C_i ∈ [1, i-1]`. Tables are cycles of the resulting
//! permutation, block minima are exactly the table openers, and raising one
//! `b_i` from 0 to 1 detaches a contiguous arc of one table. Feeding a
//! monotone chain of record vectors with a fixed `C` therefore yields a
//! fragmentation path.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::coupling::{chain_couplings_with, ChainOutcome, CouplingChoice, Kernel};
use crate::error::{Error, Result};
use crate::lattice::SetPartition;
use crate::layer::Categorical;
use crate::records::{bernoulli_layers, harmonic_probabilities, threshold_law_with, RecordVector};
use crate::weights::{stirling_table, Alpha};

/// Generator behind every sampler. Seeded from a `u64`; independent streams
/// of one seed come from [`rng_stream`].
pub type SampleRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream `stream` of `seed`; distinct streams do not overlap.
pub fn rng_stream(seed: u64, stream: u64) -> SampleRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `(C_2, …, C_n)` with `C_i ∈ [1, i-1]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SeatingChoices {
    n: usize,
    choices: Vec<usize>,
}

impl SeatingChoices {
    /// `choices[0]` is `C_2`.
    pub fn new(n: usize, choices: Vec<usize>) -> Result<Self> {
        if n == 0 || choices.len() + 1 != n {
            return Err(Error::Malformed(format!(
                "{} seating choices for n = {n}",
                choices.len()
            )));
        }
        for (idx, &c) in choices.iter().enumerate() {
            let i = idx + 2;
            if c == 0 || c >= i {
                return Err(Error::Malformed(format!(
                    "C_{i} = {c} outside [1, {}]",
                    i - 1
                )));
            }
        }
        Ok(Self { n, choices })
    }

    pub fn sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        assert!(n >= 1);
        let choices = (2..=n).map(|i| rng.gen_range(1..i)).collect();
        Self { n, choices }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `C_i` for `2 ≤ i ≤ n`.
    pub fn get(&self, i: usize) -> usize {
        self.choices[i - 2]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.choices
    }
}

/// All `(m-1)!` seating vectors on `[m]`, lexicographically.
pub fn all_seating_choices(m: usize) -> Vec<SeatingChoices> {
    let mut out = vec![Vec::new()];
    for i in 2..=m {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<usize>| {
                (1..i).map(move |c| {
                    let mut v = prefix.clone();
                    v.push(c);
                    v
                })
            })
            .collect();
    }
    out.into_iter()
        .map(|c| SeatingChoices::new(m, c).expect("choices are in range"))
        .collect()
}

/// Tables in seating order, each read left to right as a cycle.
pub fn crp_tables(b: &RecordVector, c: &SeatingChoices) -> Result<Vec<Vec<usize>>> {
    if b.n() != c.n() {
        return Err(Error::Malformed(format!(
            "record vector has n = {}, choices have n = {}",
            b.n(),
            c.n()
        )));
    }
    let mut tables: Vec<Vec<usize>> = vec![vec![1]];
    let mut table_of = vec![0usize; b.n() + 1];
    for i in 2..=b.n() {
        if b.get(i) {
            table_of[i] = tables.len();
            tables.push(vec![i]);
        } else {
            let target = c.get(i);
            let t = table_of[target];
            let pos = tables[t].iter().position(|&x| x == target).unwrap();
            tables[t].insert(pos, i);
            table_of[i] = t;
        }
    }
    Ok(tables)
}

/// Cycles of the permutation `σ(x) = ` right neighbour of `x`, each started at
/// its minimum, ordered by minimum.
pub fn crp_cycles(b: &RecordVector, c: &SeatingChoices) -> Result<Vec<Vec<usize>>> {
    let mut tables = crp_tables(b, c)?;
    for t in &mut tables {
        let start = t.iter().enumerate().min_by_key(|(_, &x)| x).unwrap().0;
        t.rotate_left(start);
    }
    tables.sort_by_key(|t| t[0]);
    Ok(tables)
}

/// The partition of `[n]` into tables.
pub fn crp_partition(b: &RecordVector, c: &SeatingChoices) -> Result<SetPartition> {
    SetPartition::from_blocks(b.n(), &crp_tables(b, c)?)
}

/// Whether raising one record bit splits exactly one table in two.
pub fn split_check(b: &RecordVector, b_next: &RecordVector, c: &SeatingChoices) -> Result<bool> {
    if !b.is_covered_by(b_next) {
        return Err(Error::Malformed(format!("{b} is not covered by {b_next}")));
    }
    Ok(crp_partition(b, c)?.is_split_into(&crp_partition(b_next, c)?))
}

/// `(Π_1, …, Π_n)` where `Π_k` has `k` blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FragmentationPath {
    n: usize,
    partitions: Vec<SetPartition>,
}

impl FragmentationPath {
    pub fn new(partitions: Vec<SetPartition>) -> Result<Self> {
        let path = Self {
            n: partitions.len(),
            partitions,
        };
        path.validate()?;
        Ok(path)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn partitions(&self) -> &[SetPartition] {
        &self.partitions
    }

    /// Level `k` partition.
    pub fn level(&self, k: usize) -> &SetPartition {
        &self.partitions[k - 1]
    }

    /// One block at level 1, singletons at level `n`, one split per step.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Malformed("empty path".into()));
        }
        for (idx, p) in self.partitions.iter().enumerate() {
            if p.n() != self.n || p.num_blocks() != idx + 1 {
                return Err(Error::Malformed(format!(
                    "level {} holds {} (n = {}, {} blocks)",
                    idx + 1,
                    p.block_string(),
                    p.n(),
                    p.num_blocks()
                )));
            }
        }
        if let Some(k) = (1..self.n).find(|&k| !self.level(k).is_split_into(self.level(k + 1))) {
            return Err(Error::Malformed(format!(
                "level {} → {} is not a single split: {} → {}",
                k,
                k + 1,
                self.level(k).block_string(),
                self.level(k + 1).block_string()
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!(self
            .partitions
            .iter()
            .map(SetPartition::blocks)
            .collect::<Vec<_>>())
    }
}

/// Rows `m = 1..=n`, row `m` a fragmentation path on `[m]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionTriangle {
    rows: Vec<FragmentationPath>,
}

impl PartitionTriangle {
    pub fn rows(&self) -> &[FragmentationPath] {
        &self.rows
    }

    pub fn row(&self, m: usize) -> &FragmentationPath {
        &self.rows[m - 1]
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    /// Every row is a valid path, and deleting `m` from row `m` at level `k`
    /// gives row `m-1` at level `k - [{m} is a singleton]`.
    pub fn validate(&self) -> Result<()> {
        for row in &self.rows {
            row.validate()?;
        }
        for m in 2..=self.n() {
            for k in 1..=m {
                let p = self.row(m).level(k);
                let singleton = p.block_sizes()[p.block_of(m)] == 1;
                let below = if singleton { k - 1 } else { k };
                if p.without_last()? != *self.row(m - 1).level(below) {
                    return Err(Error::Malformed(format!(
                        "row {m} level {k} does not restrict to row {} level {below}",
                        m - 1
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!(self
            .rows
            .iter()
            .map(FragmentationPath::to_json)
            .collect::<Vec<_>>())
    }
}

/// Builds the triangle from explicit `(K_m, C_m)` for `m = 2..=n`: at level
/// `k ≥ K_m` add `{m}` to row `m-1` level `k-1`, below that put `m` with `C_m`
/// in row `m-1` level `k`.
pub fn triangle_from_choices(steps: &[(usize, usize)]) -> Result<PartitionTriangle> {
    let mut rows = vec![FragmentationPath {
        n: 1,
        partitions: vec![SetPartition::singletons(1)],
    }];
    for (idx, &(threshold, joined)) in steps.iter().enumerate() {
        let m = idx + 2;
        if threshold < 2 || threshold > m || joined == 0 || joined >= m {
            return Err(Error::Malformed(format!(
                "step m = {m}: K = {threshold}, C = {joined}"
            )));
        }
        let prev = rows.last().unwrap();
        let partitions = (1..=m)
            .map(|k| {
                if k >= threshold {
                    prev.level(k - 1).with_singleton()
                } else {
                    prev.level(k).with_joined(joined)
                }
            })
            .collect();
        rows.push(FragmentationPath { n: m, partitions });
    }
    Ok(PartitionTriangle { rows })
}

/// Fragmentation sampler for uniform permutations via the Chinese restaurant
/// process: one seating vector `C` shared by a monotone record chain.
#[derive(Debug, Clone)]
pub struct CrpSampler {
    n: usize,
    kernels: Vec<Kernel<RecordVector>>,
}

/// One draw of [`CrpSampler`] with its ingredients.
#[derive(Debug, Clone)]
pub struct CrpSample {
    pub choices: SeatingChoices,
    pub records: Vec<RecordVector>,
    pub path: FragmentationPath,
}

impl CrpSample {
    /// Cycle lists of the permutation at every level.
    pub fn cycles(&self) -> Vec<Vec<Vec<usize>>> {
        self.records
            .iter()
            .map(|b| crp_cycles(b, &self.choices).expect("lengths match"))
            .collect()
    }
}

impl CrpSampler {
    pub fn new(n: usize, choice: CouplingChoice) -> Result<Self> {
        if n == 0 {
            return Err(Error::OutOfRange("n must be at least 1".into()));
        }
        let layers = bernoulli_layers(&harmonic_probabilities(n))?;
        let couplings = match chain_couplings_with(&layers, choice)? {
            ChainOutcome::Coupled(c) => c,
            ChainOutcome::Infeasible { lower_level, .. } => {
                return Err(Error::Infeasible(format!(
                    "record layers {lower_level} → {}",
                    lower_level + 1
                )))
            }
        };
        Ok(Self {
            n,
            kernels: couplings.iter().map(|c| c.kernel()).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sample_detailed<R: Rng + ?Sized>(&self, rng: &mut R) -> CrpSample {
        let choices = SeatingChoices::sample(self.n, rng);
        let mut records = vec![RecordVector::first_only(self.n)];
        for kernel in &self.kernels {
            let next = kernel
                .step(records.last().unwrap(), rng)
                .expect("chain stays on the support");
            records.push(next);
        }
        let partitions = records
            .iter()
            .map(|b| crp_partition(b, &choices).expect("lengths match"))
            .collect();
        CrpSample {
            path: FragmentationPath {
                n: self.n,
                partitions,
            },
            choices,
            records,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> FragmentationPath {
        self.sample_detailed(rng).path
    }
}

/// One fragmentation path of a uniform random permutation of `[n]`, using the
/// default flow couplings.
pub fn sample_fragmentation_crp(n: usize, seed: u64) -> Result<FragmentationPath> {
    let sampler = CrpSampler::new(n, CouplingChoice::Flow)?;
    Ok(sampler.sample(&mut rng_from_seed(seed)))
}

/// Recursive-in-`n` sampler: row `m` comes from row `m-1` through an
/// independent threshold `K_m` and an independent uniform `C_m`.
#[derive(Debug, Clone)]
pub struct RecursiveSampler {
    n: usize,
    thresholds: Vec<Categorical>,
}

impl RecursiveSampler {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::OutOfRange("n must be at least 1".into()));
        }
        let table = stirling_table(&Alpha::zero(), n);
        let thresholds = (2..=n)
            .map(|m| threshold_law_with(&table, m).map(|d| d.sampler()))
            .collect::<Result<_>>()?;
        Ok(Self { n, thresholds })
    }

    /// The `(K_m, C_m)` draws for `m = 2..=n`.
    pub fn sample_steps<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<(usize, usize)> {
        (2..=self.n)
            .zip(&self.thresholds)
            .map(|(m, law)| {
                let threshold = law.sample(rng) + 1;
                let joined = rng.gen_range(1..m);
                (threshold, joined)
            })
            .collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PartitionTriangle {
        triangle_from_choices(&self.sample_steps(rng)).expect("draws are in range")
    }
}

pub fn sample_fragmentation_recursive(n: usize, seed: u64) -> Result<PartitionTriangle> {
    Ok(RecursiveSampler::new(n)?.sample(&mut rng_from_seed(seed)))
}

/// Monotone record chain for Gibbs(α) partitions, built recursively in `n`:
/// the chain on `[m]` takes `(chain_{m-1}[k-1], 1)` at levels `k ≥ K_m` and
/// `(chain_{m-1}[k], 0)` below.
#[derive(Debug, Clone)]
pub struct RecordChainSampler {
    n: usize,
    thresholds: Vec<Categorical>,
}

impl RecordChainSampler {
    pub fn new(alpha: &Alpha, n: usize) -> Result<Self> {
        if n == 0 || n > crate::records::MAX_N {
            return Err(Error::OutOfRange(format!("n = {n}")));
        }
        let table = stirling_table(alpha, n);
        let thresholds = (2..=n)
            .map(|m| threshold_law_with(&table, m).map(|d| d.sampler()))
            .collect::<Result<_>>()?;
        Ok(Self { n, thresholds })
    }

    /// Record vectors at levels `1..=n`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<RecordVector> {
        let mut chain = vec![RecordVector::first_only(1)];
        for (m, law) in (2..=self.n).zip(&self.thresholds) {
            let threshold = law.sample(rng) + 1;
            chain = (1..=m)
                .map(|k| {
                    if k >= threshold {
                        chain[k - 2].extended(true)
                    } else {
                        chain[k - 1].extended(false)
                    }
                    .expect("length stays within bounds")
                })
                .collect();
        }
        chain
    }
}

pub fn sample_record_chain(alpha: &Alpha, n: usize, seed: u64) -> Result<Vec<RecordVector>> {
    Ok(RecordChainSampler::new(alpha, n)?.sample(&mut rng_from_seed(seed)))
}
