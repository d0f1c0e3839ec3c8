//! Monotone couplings of adjacent layers.
//!
//! Two layer laws `p^k` and `p^{k+1}` can be coupled with support on cover
//! pairs exactly when every subset `C` of the lower layer satisfies
//! `p^k(C) ≤ p^{k+1}(N(C))`, where `N(C)` collects the upper states covering
//! some member of `C`. Both sides are decided by one max-flow: source to lower
//! states with capacity `p^k`, cover edges unbounded, upper states to sink with
//! capacity `p^{k+1}`. Capacities are cleared to integers by the common
//! denominator, so the flow is exact. A full flow is a coupling; otherwise
//! the source side of a minimum cut gives a violated subset.
//!
//! The coupling returned by [`strassen_feasible`] is whichever vertex the
//! deterministic flow reaches. It is one valid choice among a polytope of
//! couplings; [`extreme_coupling`] walks to the ends of that polytope along a
//! chosen edge.

use std::collections::BTreeSet;
use std::fmt::{Debug, Display, Write as _};
use std::hash::Hash;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::flow::FlowNetwork;
use crate::layer::{Categorical, LayerDistribution};
use crate::rational::{self, Rational};
use crate::records::RecordVector;

/// A state kind with a cover relation: record vectors (one 0 → 1 flip) or set
/// partitions (one block split).
pub trait CoverState: Clone + Ord + Hash + Debug + Display {
    /// Size of the ground set `n`.
    fn size(&self) -> usize;
    /// Level: number of ones or blocks.
    fn rank(&self) -> usize;
    fn is_covered_by(&self, other: &Self) -> bool;
    /// Every state covering `self`.
    fn covering_states(&self) -> Vec<Self>;
    fn to_json(&self) -> Value;
}

impl CoverState for RecordVector {
    fn size(&self) -> usize {
        self.n()
    }

    fn rank(&self) -> usize {
        self.ones()
    }

    fn is_covered_by(&self, other: &Self) -> bool {
        RecordVector::is_covered_by(self, other)
    }

    fn covering_states(&self) -> Vec<Self> {
        self.zeros().map(|i| self.with_set(i)).collect()
    }

    fn to_json(&self) -> Value {
        Value::String(self.to_string())
    }
}

/// Cover adjacency between two adjacent layers. Edges are sorted by
/// `(lower, upper)` index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverGraph<S> {
    lower: Vec<S>,
    upper: Vec<S>,
    edges: Vec<(usize, usize)>,
}

impl<S: CoverState> CoverGraph<S> {
    pub fn lower(&self) -> &[S] {
        &self.lower
    }

    pub fn upper(&self) -> &[S] {
        &self.upper
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_index(&self, lower: usize, upper: usize) -> Option<usize> {
        self.edges.binary_search(&(lower, upper)).ok()
    }

    /// Index of the edge between two states, if they are cover-related.
    pub fn find_edge(&self, from: &S, to: &S) -> Option<usize> {
        let i = self.lower.binary_search(from).ok()?;
        let j = self.upper.binary_search(to).ok()?;
        self.edge_index(i, j)
    }

    /// Upper states covering some member of `subset` (indices into lower).
    pub fn neighbourhood(&self, subset: &[usize]) -> Vec<usize> {
        let set: BTreeSet<usize> = subset.iter().copied().collect();
        let hits: BTreeSet<usize> = self
            .edges
            .iter()
            .filter(|(i, _)| set.contains(i))
            .map(|&(_, j)| j)
            .collect();
        hits.into_iter().collect()
    }
}

/// Builds the cover adjacency from `lower` (level `k`) to `upper` (level
/// `k+1`).
pub fn build_cover_graph<S: CoverState>(
    lower: &LayerDistribution<S>,
    upper: &LayerDistribution<S>,
) -> Result<CoverGraph<S>> {
    if lower.is_empty() || upper.is_empty() {
        return Err(Error::Malformed("empty layer".into()));
    }
    if upper.level() != lower.level() + 1 {
        return Err(Error::NonAdjacentLayers(format!(
            "levels {} and {}",
            lower.level(),
            upper.level()
        )));
    }
    let n = lower.states()[0].size();
    for (s, level) in lower
        .states()
        .iter()
        .map(|s| (s, lower.level()))
        .chain(upper.states().iter().map(|s| (s, upper.level())))
    {
        if s.size() != n {
            return Err(Error::NonAdjacentLayers(format!(
                "state {s} has size {}, expected {n}",
                s.size()
            )));
        }
        if s.rank() != level {
            return Err(Error::Malformed(format!(
                "state {s} has rank {} in level {level}",
                s.rank()
            )));
        }
    }
    let mut edges = Vec::new();
    for (i, s) in lower.states().iter().enumerate() {
        let mut targets: Vec<usize> = s
            .covering_states()
            .iter()
            .filter_map(|t| upper.index_of(t))
            .collect();
        targets.sort_unstable();
        targets.dedup();
        edges.extend(targets.into_iter().map(|j| (i, j)));
    }
    Ok(CoverGraph {
        lower: lower.states().to_vec(),
        upper: upper.states().to_vec(),
        edges,
    })
}

/// Exact joint law of two adjacent layers supported on cover edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotoneCoupling<S> {
    graph: CoverGraph<S>,
    joint: Vec<Rational>,
    lower_probs: Vec<Rational>,
    upper_probs: Vec<Rational>,
}

impl<S: CoverState> MonotoneCoupling<S> {
    pub fn graph(&self) -> &CoverGraph<S> {
        &self.graph
    }

    /// Mass per edge, parallel to `graph().edges()`.
    pub fn joint(&self) -> &[Rational] {
        &self.joint
    }

    pub fn lower_probs(&self) -> &[Rational] {
        &self.lower_probs
    }

    pub fn upper_probs(&self) -> &[Rational] {
        &self.upper_probs
    }

    /// Joint mass of `(from, to)`, zero when not an edge.
    pub fn mass(&self, from: &S, to: &S) -> Rational {
        self.graph
            .find_edge(from, to)
            .map(|e| self.joint[e].clone())
            .unwrap_or_else(Rational::zero)
    }

    /// Checks nonnegativity, both marginals and the cover relation on every
    /// supported edge, exactly.
    pub fn verify(&self) -> Result<()> {
        let mut rows = vec![Rational::zero(); self.graph.lower.len()];
        let mut cols = vec![Rational::zero(); self.graph.upper.len()];
        for (&(i, j), m) in self.graph.edges.iter().zip(&self.joint) {
            if m.is_negative() {
                return Err(Error::Malformed(format!(
                    "negative mass on edge ({i}, {j})"
                )));
            }
            if !m.is_zero() && !self.graph.lower[i].is_covered_by(&self.graph.upper[j]) {
                return Err(Error::Malformed(format!(
                    "mass on non-cover pair {} -> {}",
                    self.graph.lower[i], self.graph.upper[j]
                )));
            }
            rows[i] += m;
            cols[j] += m;
        }
        if let Some(i) = (0..rows.len()).find(|&i| rows[i] != self.lower_probs[i]) {
            return Err(Error::Malformed(format!(
                "row {} sums to {}, expected {}",
                self.graph.lower[i], rows[i], self.lower_probs[i]
            )));
        }
        if let Some(j) = (0..cols.len()).find(|&j| cols[j] != self.upper_probs[j]) {
            return Err(Error::Malformed(format!(
                "column {} sums to {}, expected {}",
                self.graph.upper[j], cols[j], self.upper_probs[j]
            )));
        }
        Ok(())
    }

    /// Checks the marginals against independently supplied layers.
    pub fn verify_against(
        &self,
        lower: &LayerDistribution<S>,
        upper: &LayerDistribution<S>,
    ) -> Result<()> {
        if self.graph.lower != lower.states()
            || self.graph.upper != upper.states()
            || self.lower_probs != lower.probs()
            || self.upper_probs != upper.probs()
        {
            return Err(Error::Malformed(
                "coupling marginals differ from layers".into(),
            ));
        }
        self.verify()
    }

    /// Precomputed conditional kernels `b ↦ P(B^{k+1} = · | B^k = b)`.
    pub fn kernel(&self) -> Kernel<S> {
        let mut rows: Vec<Option<(Vec<usize>, Categorical)>> = Vec::new();
        for i in 0..self.graph.lower.len() {
            let (targets, masses): (Vec<usize>, Vec<Rational>) = self
                .graph
                .edges
                .iter()
                .zip(&self.joint)
                .filter(|((a, _), _)| *a == i)
                .map(|(&(_, j), m)| (j, m.clone()))
                .unzip();
            if masses.iter().all(Zero::is_zero) {
                rows.push(None);
            } else {
                rows.push(Some((targets, Categorical::new(&masses))));
            }
        }
        Kernel {
            lower: self.graph.lower.clone(),
            upper: self.graph.upper.clone(),
            rows,
        }
    }

    pub fn to_json(&self, with_float: bool) -> Value {
        let state_list = |states: &[S], probs: &[Rational]| -> Vec<Value> {
            states
                .iter()
                .zip(probs)
                .map(|(s, p)| {
                    with_approx(
                        json!({ "state": s.to_json(), "prob": rational::to_string(p) }),
                        p,
                        with_float,
                    )
                })
                .collect()
        };
        let edges: Vec<Value> = self
            .graph
            .edges
            .iter()
            .zip(&self.joint)
            .map(|(&(i, j), m)| {
                with_approx(
                    json!({
                        "from": self.graph.lower[i].to_json(),
                        "to": self.graph.upper[j].to_json(),
                        "mass": rational::to_string(m),
                    }),
                    m,
                    with_float,
                )
            })
            .collect();
        json!({
            "status": "feasible",
            "lower_level": self.graph.lower[0].rank(),
            "lower": state_list(&self.graph.lower, &self.lower_probs),
            "upper": state_list(&self.graph.upper, &self.upper_probs),
            "edges": edges,
        })
    }

    /// Layered digraph: lower states on one rank, upper states on the next,
    /// edges labelled with their joint mass.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph coupling {\n  rankdir=TB;\n  node [shape=box];\n");
        let lower_rank = self.graph.lower[0].rank();
        for (tag, states, probs, level) in [
            ("l", &self.graph.lower, &self.lower_probs, lower_rank),
            ("u", &self.graph.upper, &self.upper_probs, lower_rank + 1),
        ] {
            let _ = writeln!(out, "  subgraph {{ rank=same; // k = {level}");
            for (i, (s, p)) in states.iter().zip(probs).enumerate() {
                let _ = writeln!(out, "    {tag}{i} [label=\"{s}\\n{p}\"];");
            }
            out.push_str("  }\n");
        }
        for (&(i, j), m) in self.graph.edges.iter().zip(&self.joint) {
            let style = if m.is_zero() { ", style=dashed" } else { "" };
            let _ = writeln!(out, "  l{i} -> u{j} [label=\"{m}\"{style}];");
        }
        out.push_str("}\n");
        out
    }
}

fn with_approx(mut v: Value, r: &Rational, with_float: bool) -> Value {
    if with_float {
        v["approx"] = json!(rational::to_f64(r));
    }
    v
}

/// Conditional sampling kernel of a coupling.
#[derive(Debug, Clone)]
pub struct Kernel<S> {
    lower: Vec<S>,
    upper: Vec<S>,
    rows: Vec<Option<(Vec<usize>, Categorical)>>,
}

impl<S: CoverState> Kernel<S> {
    pub fn step<R: Rng + ?Sized>(&self, current: &S, rng: &mut R) -> Result<S> {
        let i = self
            .lower
            .binary_search(current)
            .map_err(|_| Error::NotInSupport(current.to_string()))?;
        let (targets, dist) = self.rows[i]
            .as_ref()
            .ok_or_else(|| Error::NotInSupport(format!("{current} has zero mass")))?;
        Ok(self.upper[targets[dist.sample(rng)]].clone())
    }
}

/// Draws the successor of `current` under the coupling's conditional kernel.
pub fn sample_next<S: CoverState, R: Rng + ?Sized>(
    coupling: &MonotoneCoupling<S>,
    current: &S,
    rng: &mut R,
) -> Result<S> {
    coupling.kernel().step(current, rng)
}

/// A subset `C` of the lower layer with `p^k(C) > p^{k+1}(N(C))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViolationCertificate<S> {
    pub subset: Vec<S>,
    pub neighbourhood: Vec<S>,
    pub lhs: Rational,
    pub rhs: Rational,
}

impl<S: CoverState> ViolationCertificate<S> {
    /// Recomputes both sides from the layers and the graph.
    pub fn verify(
        &self,
        lower: &LayerDistribution<S>,
        upper: &LayerDistribution<S>,
        graph: &CoverGraph<S>,
    ) -> bool {
        let idx: Option<Vec<usize>> = self.subset.iter().map(|s| lower.index_of(s)).collect();
        let Some(idx) = idx else { return false };
        let neigh: Vec<S> = graph
            .neighbourhood(&idx)
            .into_iter()
            .map(|j| graph.upper[j].clone())
            .collect();
        let lhs = rational::sum(idx.iter().map(|&i| &lower.probs()[i]));
        let rhs = neigh
            .iter()
            .fold(Rational::zero(), |acc, s| acc + upper.prob(s));
        neigh == self.neighbourhood && lhs == self.lhs && rhs == self.rhs && lhs > rhs
    }

    pub fn to_json(&self, with_float: bool) -> Value {
        let mut v = json!({
            "status": "infeasible",
            "subset": self.subset.iter().map(CoverState::to_json).collect::<Vec<_>>(),
            "neighbourhood": self.neighbourhood.iter().map(CoverState::to_json).collect::<Vec<_>>(),
            "lhs": rational::to_string(&self.lhs),
            "rhs": rational::to_string(&self.rhs),
        });
        if with_float {
            v["lhs_approx"] = json!(rational::to_f64(&self.lhs));
            v["rhs_approx"] = json!(rational::to_f64(&self.rhs));
        }
        v
    }
}

/// Outcome of a feasibility solve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feasibility<S> {
    Coupled(MonotoneCoupling<S>),
    Violated(ViolationCertificate<S>),
}

impl<S> Feasibility<S> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Coupled(_))
    }

    pub fn coupling(self) -> Option<MonotoneCoupling<S>> {
        match self {
            Feasibility::Coupled(c) => Some(c),
            Feasibility::Violated(_) => None,
        }
    }
}

struct Solved {
    net: FlowNetwork,
    middle: Vec<usize>,
    scale: BigInt,
    value: BigInt,
    lower_nodes: usize,
}

const SOURCE: usize = 0;

fn solve<S: CoverState>(
    lower: &LayerDistribution<S>,
    upper: &LayerDistribution<S>,
    graph: &CoverGraph<S>,
) -> Result<Solved> {
    if graph.lower != lower.states() || graph.upper != upper.states() {
        return Err(Error::Malformed(
            "cover graph does not match the layers".into(),
        ));
    }
    let scale = rational::common_denominator(lower.probs().iter().chain(upper.probs()));
    let (nl, nu) = (lower.len(), upper.len());
    let sink = nl + nu + 1;
    let mut net = FlowNetwork::new(nl + nu + 2);
    for (i, p) in lower.probs().iter().enumerate() {
        net.add_edge(SOURCE, 1 + i, rational::scaled(p, &scale));
    }
    // Any capacity above the total mass acts as unbounded.
    let unbounded = &scale + BigInt::one();
    let middle = graph
        .edges
        .iter()
        .map(|&(i, j)| net.add_edge(1 + i, 1 + nl + j, unbounded.clone()))
        .collect();
    for (j, p) in upper.probs().iter().enumerate() {
        net.add_edge(1 + nl + j, sink, rational::scaled(p, &scale));
    }
    let value = net.max_flow(SOURCE, sink, None);
    Ok(Solved {
        net,
        middle,
        scale,
        value,
        lower_nodes: nl,
    })
}

impl Solved {
    fn is_full(&self) -> bool {
        self.value == self.scale
    }

    fn coupling<S: CoverState>(
        &self,
        lower: &LayerDistribution<S>,
        upper: &LayerDistribution<S>,
        graph: &CoverGraph<S>,
    ) -> MonotoneCoupling<S> {
        let scale = Rational::from_integer(self.scale.clone());
        let joint = self
            .middle
            .iter()
            .map(|&e| Rational::from_integer(self.net.flow(e).clone()) / &scale)
            .collect();
        MonotoneCoupling {
            graph: graph.clone(),
            joint,
            lower_probs: lower.probs().to_vec(),
            upper_probs: upper.probs().to_vec(),
        }
    }

    fn certificate<S: CoverState>(
        &self,
        lower: &LayerDistribution<S>,
        upper: &LayerDistribution<S>,
        graph: &CoverGraph<S>,
    ) -> ViolationCertificate<S> {
        let side = self.net.reachable(SOURCE);
        let subset: Vec<usize> = (0..self.lower_nodes).filter(|&i| side[1 + i]).collect();
        let neigh = graph.neighbourhood(&subset);
        let lhs = rational::sum(subset.iter().map(|&i| &lower.probs()[i]));
        let rhs = rational::sum(neigh.iter().map(|&j| &upper.probs()[j]));
        debug_assert!(lhs > rhs);
        ViolationCertificate {
            subset: subset.iter().map(|&i| graph.lower[i].clone()).collect(),
            neighbourhood: neigh.iter().map(|&j| graph.upper[j].clone()).collect(),
            lhs,
            rhs,
        }
    }
}

/// Decides whether `lower` and `upper` admit a coupling supported on the cover
/// edges of `graph`.
pub fn strassen_feasible<S: CoverState>(
    lower: &LayerDistribution<S>,
    upper: &LayerDistribution<S>,
    graph: &CoverGraph<S>,
) -> Result<Feasibility<S>> {
    let solved = solve(lower, upper, graph)?;
    Ok(if solved.is_full() {
        Feasibility::Coupled(solved.coupling(lower, upper, graph))
    } else {
        Feasibility::Violated(solved.certificate(lower, upper, graph))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Max,
    Min,
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(Direction::Max),
            "min" => Ok(Direction::Min),
            _ => Err(Error::Parse(format!(
                "direction must be max or min, got {s:?}"
            ))),
        }
    }
}

/// A coupling putting the largest (or smallest) possible mass on edge
/// `target` of `graph`.
///
/// Starting from any full flow, the mass on `a → x` can grow by exactly the
/// value of a max-flow from `x` to `a` in the residual graph with that edge
/// removed (each augmenting path closes a cycle through `a → x`), and shrink
/// by a max-flow from `a` to `x`. The optimum is exact in the target
/// coordinate; other coordinates are whatever the flow leaves.
pub fn extreme_coupling<S: CoverState>(
    lower: &LayerDistribution<S>,
    upper: &LayerDistribution<S>,
    graph: &CoverGraph<S>,
    target: usize,
    direction: Direction,
) -> Result<MonotoneCoupling<S>> {
    if target >= graph.edges.len() {
        return Err(Error::OutOfRange(format!(
            "edge {target} of {}",
            graph.edges.len()
        )));
    }
    let mut solved = solve(lower, upper, graph)?;
    if !solved.is_full() {
        let cert = solved.certificate(lower, upper, graph);
        return Err(Error::Infeasible(format!(
            "subset mass {} exceeds neighbourhood mass {}",
            cert.lhs, cert.rhs
        )));
    }
    let (i, j) = graph.edges[target];
    let a = 1 + i;
    let x = 1 + solved.lower_nodes + j;
    let e = solved.middle[target];
    let saved = solved.net.take_pair(e);
    match direction {
        Direction::Max => {
            let delta = solved.net.max_flow(x, a, None);
            solved.net.restore_pair(e, saved);
            solved.net.push(e, &delta);
        }
        Direction::Min => {
            let current = saved.1.clone();
            let delta = solved.net.max_flow(a, x, Some(&current));
            solved.net.restore_pair(e, saved);
            solved.net.push(e, &-delta);
        }
    }
    Ok(solved.coupling(lower, upper, graph))
}

/// Which coupling to use for each adjacent pair of a chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CouplingChoice {
    /// Whatever the deterministic flow finds.
    #[default]
    Flow,
    /// Extreme in the first cover edge of each pair.
    Extreme(Direction),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChainOutcome<S> {
    Coupled(Vec<MonotoneCoupling<S>>),
    /// The first infeasible pair, identified by its lower level.
    Infeasible {
        lower_level: usize,
        certificate: ViolationCertificate<S>,
    },
}

impl<S> ChainOutcome<S> {
    pub fn couplings(self) -> Option<Vec<MonotoneCoupling<S>>> {
        match self {
            ChainOutcome::Coupled(c) => Some(c),
            ChainOutcome::Infeasible { .. } => None,
        }
    }
}

/// One coupling per adjacent pair of `layers` (ordered by level), composed
/// as a Markov chain.
pub fn chain_couplings<S: CoverState>(layers: &[LayerDistribution<S>]) -> Result<ChainOutcome<S>> {
    chain_couplings_with(layers, CouplingChoice::Flow)
}

pub fn chain_couplings_with<S: CoverState>(
    layers: &[LayerDistribution<S>],
    choice: CouplingChoice,
) -> Result<ChainOutcome<S>> {
    let mut out = Vec::with_capacity(layers.len().saturating_sub(1));
    for pair in layers.windows(2) {
        let graph = build_cover_graph(&pair[0], &pair[1])?;
        match strassen_feasible(&pair[0], &pair[1], &graph)? {
            Feasibility::Violated(certificate) => {
                return Ok(ChainOutcome::Infeasible {
                    lower_level: pair[0].level(),
                    certificate,
                })
            }
            Feasibility::Coupled(c) => match choice {
                CouplingChoice::Flow => out.push(c),
                CouplingChoice::Extreme(dir) => {
                    out.push(extreme_coupling(&pair[0], &pair[1], &graph, 0, dir)?)
                }
            },
        }
    }
    Ok(ChainOutcome::Coupled(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use crate::records::{conditional_bernoulli, harmonic_probabilities};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rv(s: &str) -> RecordVector {
        RecordVector::parse(s).unwrap()
    }

    fn figure_layers() -> (
        LayerDistribution<RecordVector>,
        LayerDistribution<RecordVector>,
    ) {
        let p = harmonic_probabilities(4);
        (
            conditional_bernoulli(&p, 2).unwrap(),
            conditional_bernoulli(&p, 3).unwrap(),
        )
    }

    #[test]
    fn figure_graph_has_six_edges() {
        let (lo, up) = figure_layers();
        let g = build_cover_graph(&lo, &up).unwrap();
        assert_eq!(g.edges(), &[(0, 0), (0, 1), (1, 0), (1, 2), (2, 1), (2, 2)]);
    }

    #[test]
    fn top_pair_has_one_edge_per_state() {
        let p = harmonic_probabilities(6);
        let lo = conditional_bernoulli(&p, 5).unwrap();
        let up = conditional_bernoulli(&p, 6).unwrap();
        let g = build_cover_graph(&lo, &up).unwrap();
        assert_eq!(g.edges().len(), lo.len());
    }

    #[test]
    fn graph_rejects_non_adjacent_levels() {
        let p = harmonic_probabilities(4);
        let lo = conditional_bernoulli(&p, 1).unwrap();
        let up = conditional_bernoulli(&p, 3).unwrap();
        assert!(matches!(
            build_cover_graph(&lo, &up),
            Err(Error::NonAdjacentLayers(_))
        ));
        let other = conditional_bernoulli(&harmonic_probabilities(5), 2).unwrap();
        assert!(build_cover_graph(&lo, &other).is_err());
    }

    #[test]
    fn figure_instance_is_feasible() {
        let (lo, up) = figure_layers();
        let g = build_cover_graph(&lo, &up).unwrap();
        let c = strassen_feasible(&lo, &up, &g).unwrap().coupling().unwrap();
        c.verify_against(&lo, &up).unwrap();
    }

    #[test]
    fn point_masses() {
        let lo = LayerDistribution::point_mass(2, rv("1010"));
        let up = LayerDistribution::point_mass(3, rv("1110"));
        let g = build_cover_graph(&lo, &up).unwrap();
        let c = strassen_feasible(&lo, &up, &g).unwrap().coupling().unwrap();
        assert_eq!(c.joint(), &[int(1)]);
        for dir in [Direction::Max, Direction::Min] {
            assert_eq!(extreme_coupling(&lo, &up, &g, 0, dir).unwrap(), c);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(sample_next(&c, &rv("1010"), &mut rng).unwrap(), rv("1110"));
    }

    #[test]
    fn non_cover_point_masses_give_certificate() {
        let lo = LayerDistribution::point_mass(2, rv("1010"));
        let up = LayerDistribution::point_mass(3, rv("1101"));
        let g = build_cover_graph(&lo, &up).unwrap();
        assert!(g.edges().is_empty());
        match strassen_feasible(&lo, &up, &g).unwrap() {
            Feasibility::Violated(cert) => {
                assert_eq!(cert.subset, vec![rv("1010")]);
                assert!(cert.neighbourhood.is_empty());
                assert_eq!(cert.lhs, int(1));
                assert_eq!(cert.rhs, int(0));
                assert!(cert.verify(&lo, &up, &g));
            }
            other => panic!("expected a certificate, got {other:?}"),
        }
        assert!(matches!(
            extreme_coupling(&lo, &up, &g, 0, Direction::Max),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn figure_two_extremes() {
        let (lo, up) = figure_layers();
        let g = build_cover_graph(&lo, &up).unwrap();
        let r = |v: i64| ratio(v, 66);
        let max = extreme_coupling(&lo, &up, &g, 0, Direction::Max).unwrap();
        assert_eq!(max.joint(), &[r(26), r(10), r(7), r(11), r(12), r(0)]);
        let min = extreme_coupling(&lo, &up, &g, 0, Direction::Min).unwrap();
        assert_eq!(min.joint(), &[r(15), r(21), r(18), r(0), r(1), r(11)]);
        max.verify().unwrap();
        min.verify().unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            assert_eq!(
                sample_next(&max, &rv("1001"), &mut rng).unwrap(),
                rv("1101")
            );
            assert_eq!(
                sample_next(&min, &rv("1010"), &mut rng).unwrap(),
                rv("1110")
            );
        }
    }

    #[test]
    fn sampling_outside_support_fails() {
        let (lo, up) = figure_layers();
        let g = build_cover_graph(&lo, &up).unwrap();
        let c = strassen_feasible(&lo, &up, &g).unwrap().coupling().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            sample_next(&c, &rv("1110"), &mut rng),
            Err(Error::NotInSupport(_))
        ));
    }

    #[test]
    fn verify_detects_tampering() {
        let (lo, up) = figure_layers();
        let g = build_cover_graph(&lo, &up).unwrap();
        let mut c = strassen_feasible(&lo, &up, &g).unwrap().coupling().unwrap();
        c.joint[0] += ratio(1, 66);
        c.joint[1] -= ratio(1, 66);
        assert!(c.verify().is_err());
    }

    #[test]
    fn chain_from_bottom_reaches_top() {
        let layers = crate::records::bernoulli_layers(&harmonic_probabilities(4)).unwrap();
        let chain = chain_couplings(&layers).unwrap().couplings().unwrap();
        assert_eq!(chain.len(), 3);
        let kernels: Vec<_> = chain.iter().map(|c| c.kernel()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let mut b = RecordVector::first_only(4);
            for k in &kernels {
                let next = k.step(&b, &mut rng).unwrap();
                assert!(b.is_covered_by(&next));
                b = next;
            }
            assert_eq!(b, RecordVector::all_ones(4));
        }
    }

    #[test]
    fn chain_reports_first_infeasible_pair() {
        let layers = vec![
            LayerDistribution::point_mass(1, rv("100")),
            LayerDistribution::point_mass(2, rv("110")),
            LayerDistribution::new(3, vec![rv("111")], vec![int(1)]).unwrap(),
        ];
        assert!(chain_couplings(&layers).unwrap().couplings().is_some());
        let bad = vec![
            LayerDistribution::point_mass(1, rv("1000")),
            LayerDistribution::point_mass(2, rv("1100")),
            LayerDistribution::point_mass(3, rv("1011")),
        ];
        match chain_couplings(&bad).unwrap() {
            ChainOutcome::Infeasible {
                lower_level,
                certificate,
            } => {
                assert_eq!(lower_level, 2);
                assert_eq!(certificate.subset, vec![rv("1100")]);
            }
            ChainOutcome::Coupled(_) => panic!("expected infeasible"),
        }
    }

    #[test]
    fn dot_lists_every_edge() {
        let (lo, up) = figure_layers();
        let g = build_cover_graph(&lo, &up).unwrap();
        let c = extreme_coupling(&lo, &up, &g, 0, Direction::Max).unwrap();
        let dot = c.to_dot();
        assert_eq!(dot.matches("->").count(), 6);
        assert!(dot.contains("l0 -> u0 [label=\"13/33\"]"));
        assert!(dot.contains("style=dashed"));
    }
}
