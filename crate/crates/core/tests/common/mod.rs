#![allow(dead_code)]

use std::collections::BTreeMap;

use gibbsfrag::crp::{crp_partition, triangle_from_choices, SeatingChoices};
use gibbsfrag::lattice::SetPartition;
use gibbsfrag::rational::{self, Rational};
use gibbsfrag::records::{conditional_bernoulli, harmonic_probabilities, threshold_law};
use gibbsfrag::weights::Alpha;
use gibbsfrag::LayerDistribution;
use num_traits::{One, Zero};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Pearson chi-square p-value. Cells with expected count below 5 are pooled;
/// an observation in a zero-probability cell gives 0.
pub fn chi_square_p(observed: &[u64], probs: &[f64]) -> f64 {
    assert_eq!(observed.len(), probs.len());
    let total: u64 = observed.iter().sum();
    let total = total as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        if p == 0.0 {
            if o > 0 {
                return 0.0;
            }
            continue;
        }
        let e = p * total;
        if e < 5.0 {
            pooled.0 += o as f64;
            pooled.1 += e;
        } else {
            cells.push((o as f64, e));
        }
    }
    if pooled.1 > 0.0 {
        if pooled.1 >= 5.0 || cells.is_empty() {
            cells.push(pooled);
        } else {
            let smallest = cells
                .iter_mut()
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            smallest.0 += pooled.0;
            smallest.1 += pooled.1;
        }
    }
    if cells.len() < 2 {
        return 1.0;
    }
    let stat: f64 = cells.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dist = ChiSquared::new((cells.len() - 1) as f64).unwrap();
    1.0 - dist.cdf(stat)
}

/// p-value of `counts` against `law`; states outside the law fail.
pub fn layer_p_value<S: Ord + Clone + std::fmt::Debug>(
    law: &LayerDistribution<S>,
    counts: &BTreeMap<S, u64>,
) -> f64 {
    if counts.keys().any(|s| law.index_of(s).is_none()) {
        return 0.0;
    }
    let observed: Vec<u64> = law
        .states()
        .iter()
        .map(|s| counts.get(s).copied().unwrap_or(0))
        .collect();
    let probs: Vec<f64> = law.probs().iter().map(rational::to_f64).collect();
    chi_square_p(&observed, &probs)
}

/// All seating vectors on `[n]`.
pub fn all_seatings(n: usize) -> Vec<SeatingChoices> {
    gibbsfrag::crp::all_seating_choices(n)
}

/// Exact law of the crp sampler's level-`k` partition: conditioned record
/// vector and an independent uniform seating vector.
pub fn crp_layer_law(n: usize, k: usize) -> BTreeMap<SetPartition, Rational> {
    let records = conditional_bernoulli(&harmonic_probabilities(n), k).unwrap();
    let seatings = all_seatings(n);
    let weight = Rational::one() / Rational::from_integer(seatings.len().into());
    let mut law = BTreeMap::new();
    for (b, pb) in records.iter() {
        if pb.is_zero() {
            continue;
        }
        for c in &seatings {
            let p = crp_partition(b, c).unwrap();
            *law.entry(p).or_insert_with(Rational::zero) += pb * &weight;
        }
    }
    law
}

/// Exact law of row `n` of the recursive sampler, all levels at once.
pub fn recursive_row_laws(n: usize) -> Vec<BTreeMap<SetPartition, Rational>> {
    let thresholds: Vec<LayerDistribution<usize>> = (2..=n)
        .map(|m| threshold_law(&Alpha::zero(), m).unwrap())
        .collect();
    let mut laws = vec![BTreeMap::new(); n];
    let mut steps = Vec::new();
    walk(n, 2, &thresholds, Rational::one(), &mut steps, &mut laws);
    laws
}

fn walk(
    n: usize,
    m: usize,
    thresholds: &[LayerDistribution<usize>],
    mass: Rational,
    steps: &mut Vec<(usize, usize)>,
    laws: &mut [BTreeMap<SetPartition, Rational>],
) {
    if m > n {
        let t = triangle_from_choices(steps).unwrap();
        for (k, p) in t.row(n).partitions().iter().enumerate() {
            *laws[k].entry(p.clone()).or_insert_with(Rational::zero) += &mass;
        }
        return;
    }
    let uniform = Rational::new(1.into(), ((m - 1) as i64).into());
    for (&threshold, pk) in thresholds[m - 2].iter() {
        if pk.is_zero() {
            continue;
        }
        for c in 1..m {
            steps.push((threshold, c));
            walk(n, m + 1, thresholds, &mass * pk * &uniform, steps, laws);
            steps.pop();
        }
    }
}

/// `(j-1)!` weights.
pub fn factorial_weights(n: usize) -> Vec<Rational> {
    Alpha::zero().weights(n)
}

pub fn as_map<S: Ord + Clone + std::fmt::Debug>(
    law: &LayerDistribution<S>,
) -> BTreeMap<S, Rational> {
    law.iter()
        .filter(|(_, p)| !p.is_zero())
        .map(|(s, p)| (s.clone(), p.clone()))
        .collect()
}
