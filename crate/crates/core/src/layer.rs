//! Exact probability laws over the states of one layer.

use std::fmt::Debug;

use num_bigint::{BigUint, RandBigInt};
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Exact law over the states of a single level `k` (`k` ones for record
/// vectors, `k` blocks for partitions, or the block count itself).
///
/// States are kept strictly increasing in their canonical order, which makes
/// them distinct and allows binary-search lookup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerDistribution<S> {
    level: usize,
    states: Vec<S>,
    probs: Vec<Rational>,
}

impl<S: Ord + Clone + Debug> LayerDistribution<S> {
    pub fn new(level: usize, states: Vec<S>, probs: Vec<Rational>) -> Result<Self> {
        if states.len() != probs.len() {
            return Err(Error::Malformed(format!(
                "{} states but {} probabilities",
                states.len(),
                probs.len()
            )));
        }
        if let Some(w) = states.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Malformed(format!(
                "states not strictly increasing at {:?}, {:?}",
                w[0], w[1]
            )));
        }
        if let Some(p) = probs.iter().find(|p| p.is_negative()) {
            return Err(Error::Malformed(format!("negative probability {p}")));
        }
        let total = rational::sum(&probs);
        if total != rational::int(1) {
            return Err(Error::Malformed(format!("probabilities sum to {total}")));
        }
        Ok(Self {
            level,
            states,
            probs,
        })
    }

    /// Normalizes nonnegative weights into a law.
    pub fn from_weights(level: usize, states: Vec<S>, weights: Vec<Rational>) -> Result<Self> {
        let total = rational::sum(&weights);
        if total.is_zero() {
            return Err(Error::ZeroProbability(format!(
                "level {level} has zero total weight"
            )));
        }
        let probs = weights.into_iter().map(|w| w / &total).collect();
        Self::new(level, states, probs)
    }

    pub fn point_mass(level: usize, state: S) -> Self {
        Self {
            level,
            states: vec![state],
            probs: vec![rational::int(1)],
        }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn states(&self) -> &[S] {
        &self.states
    }

    pub fn probs(&self) -> &[Rational] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, state: &S) -> Option<usize> {
        self.states.binary_search(state).ok()
    }

    /// Mass of `state`, zero if it is not listed.
    pub fn prob(&self, state: &S) -> Rational {
        self.index_of(state)
            .map(|i| self.probs[i].clone())
            .unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&S, &Rational)> {
        self.states.iter().zip(&self.probs)
    }

    /// Probability of the event `pred`.
    pub fn mass_where<F: Fn(&S) -> bool>(&self, pred: F) -> Rational {
        self.iter()
            .filter(|(s, _)| pred(s))
            .fold(Rational::zero(), |acc, (_, p)| acc + p)
    }

    pub fn sampler(&self) -> Categorical {
        Categorical::new(&self.probs)
    }
}

/// Exact sampler over finitely many outcomes with rational weights.
///
/// Weights are cleared to integers by their common denominator and an index
/// is drawn by a uniform integer below the total.
#[derive(Debug, Clone)]
pub struct Categorical {
    cumulative: Cumulative,
}

#[derive(Debug, Clone)]
enum Cumulative {
    Small(Vec<u64>),
    Big(Vec<BigUint>),
}

impl Categorical {
    /// Panics if any weight is negative or all are zero.
    pub fn new(weights: &[Rational]) -> Self {
        assert!(weights.iter().all(|w| !w.is_negative()));
        let scale = rational::common_denominator(weights);
        let mut acc = BigUint::zero();
        let mut big = Vec::with_capacity(weights.len());
        for w in weights {
            acc += rational::to_biguint(&rational::scaled(w, &scale));
            big.push(acc.clone());
        }
        assert!(!acc.is_zero(), "all weights are zero");
        let cumulative = match big.iter().map(|v| v.to_u64()).collect::<Option<Vec<_>>>() {
            Some(small) => Cumulative::Small(small),
            None => Cumulative::Big(big),
        };
        Self { cumulative }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match &self.cumulative {
            Cumulative::Small(c) => {
                let u = rng.gen_range(0..*c.last().unwrap());
                c.partition_point(|&v| v <= u)
            }
            Cumulative::Big(c) => {
                let u = rng.gen_biguint_below(c.last().unwrap());
                c.partition_point(|v| v <= &u)
            }
        }
    }
}
