//! Integer max-flow (Dinic) on a residual graph with arbitrary-precision
//! capacities. Edges are scanned in insertion order, so results are
//! deterministic.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

#[derive(Debug, Clone)]
pub(crate) struct FlowNetwork {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<BigInt>,
    level: Vec<Option<usize>>,
    next: Vec<usize>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        Self {
            adj: vec![Vec::new(); nodes],
            to: Vec::new(),
            cap: Vec::new(),
            level: vec![None; nodes],
            next: vec![0; nodes],
        }
    }

    /// Adds `u → v` with capacity `cap` and returns its id; the paired
    /// reverse residual edge is `id ^ 1`.
    pub fn add_edge(&mut self, u: usize, v: usize, cap: BigInt) -> usize {
        assert!(!cap.is_negative());
        let id = self.to.len();
        self.to.push(v);
        self.cap.push(cap);
        self.adj[u].push(id);
        self.to.push(u);
        self.cap.push(BigInt::zero());
        self.adj[v].push(id + 1);
        id
    }

    /// Net flow currently carried by edge `id`.
    pub fn flow(&self, id: usize) -> &BigInt {
        &self.cap[id ^ 1]
    }

    /// Residual capacities of the pair, for temporary removal.
    pub fn take_pair(&mut self, id: usize) -> (BigInt, BigInt) {
        (
            std::mem::take(&mut self.cap[id]),
            std::mem::take(&mut self.cap[id ^ 1]),
        )
    }

    pub fn restore_pair(&mut self, id: usize, saved: (BigInt, BigInt)) {
        self.cap[id] = saved.0;
        self.cap[id ^ 1] = saved.1;
    }

    /// Moves `amount` units along `id` (negative amounts cancel flow).
    pub fn push(&mut self, id: usize, amount: &BigInt) {
        self.cap[id] -= amount;
        self.cap[id ^ 1] += amount;
        assert!(!self.cap[id].is_negative() && !self.cap[id ^ 1].is_negative());
    }

    /// Augments from `s` to `t` on the current residual graph, stopping at
    /// `limit` when given. Returns the amount added.
    pub fn max_flow(&mut self, s: usize, t: usize, limit: Option<&BigInt>) -> BigInt {
        assert_ne!(s, t);
        let out_of_s: BigInt = self.adj[s].iter().map(|&e| &self.cap[e]).sum();
        let bound = match limit {
            Some(l) if *l < out_of_s => l.clone(),
            _ => out_of_s,
        };
        let mut total = BigInt::zero();
        while total < bound && self.bfs(s, t) {
            self.next.iter_mut().for_each(|i| *i = 0);
            loop {
                let remaining = &bound - &total;
                if remaining.is_zero() {
                    break;
                }
                let pushed = self.dfs(s, t, &remaining);
                if pushed.is_zero() {
                    break;
                }
                total += pushed;
            }
        }
        total
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = None);
        self.level[s] = Some(0);
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            let lu = self.level[u].unwrap();
            for &e in &self.adj[u] {
                let v = self.to[e];
                if self.level[v].is_none() && self.cap[e].is_positive() {
                    self.level[v] = Some(lu + 1);
                    queue.push_back(v);
                }
            }
        }
        self.level[t].is_some()
    }

    fn dfs(&mut self, u: usize, t: usize, f: &BigInt) -> BigInt {
        if u == t {
            return f.clone();
        }
        let lu = self.level[u].unwrap();
        while self.next[u] < self.adj[u].len() {
            let e = self.adj[u][self.next[u]];
            let v = self.to[e];
            if self.cap[e].is_positive() && self.level[v] == Some(lu + 1) {
                let bottleneck = if self.cap[e] < *f {
                    self.cap[e].clone()
                } else {
                    f.clone()
                };
                let d = self.dfs(v, t, &bottleneck);
                if d.is_positive() {
                    self.cap[e] -= &d;
                    self.cap[e ^ 1] += &d;
                    return d;
                }
            }
            self.next[u] += 1;
        }
        BigInt::zero()
    }

    /// Nodes reachable from `s` through positive residual capacity.
    pub fn reachable(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let v = self.to[e];
                if !seen[v] && self.cap[e].is_positive() {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn classic_instance() {
        let mut net = FlowNetwork::new(6);
        for (u, v, c) in [
            (0, 1, 10),
            (0, 2, 10),
            (1, 3, 4),
            (1, 4, 8),
            (2, 4, 9),
            (3, 5, 10),
            (4, 3, 6),
            (4, 5, 10),
        ] {
            net.add_edge(u, v, b(c));
        }
        assert_eq!(net.max_flow(0, 5, None), b(19));
        let side = net.reachable(0);
        assert!(side[0] && !side[5]);
    }

    #[test]
    fn limit_stops_early_and_resumes() {
        let mut net = FlowNetwork::new(4);
        net.add_edge(0, 1, b(10));
        net.add_edge(0, 2, b(5));
        net.add_edge(1, 3, b(10));
        net.add_edge(2, 3, b(5));
        assert_eq!(net.max_flow(0, 3, Some(&b(7))), b(7));
        assert_eq!(net.max_flow(0, 3, None), b(8));
        assert_eq!(net.max_flow(0, 3, None), b(0));
    }

    #[test]
    fn disconnected() {
        let mut net = FlowNetwork::new(4);
        net.add_edge(0, 1, b(10));
        net.add_edge(2, 3, b(5));
        assert_eq!(net.max_flow(0, 3, None), b(0));
    }

    #[test]
    fn huge_capacities() {
        let big = BigInt::from(7u8).pow(90);
        let mut net = FlowNetwork::new(3);
        let e = net.add_edge(0, 1, big.clone());
        net.add_edge(1, 2, &big + 1);
        assert_eq!(net.max_flow(0, 2, None), big);
        assert_eq!(net.flow(e), &big);
    }
}
