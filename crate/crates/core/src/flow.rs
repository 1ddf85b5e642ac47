//! Exact max-flow over rational capacities (Edmonds-Karp on a dense residual
//! matrix). Market graphs here have at most a few dozen nodes.

use std::collections::VecDeque;

use num_traits::{Signed, Zero};

use crate::rational::Rat;

#[derive(Debug, Clone)]
pub(crate) struct FlowNetwork {
    cap: Vec<Vec<Rat>>,
    flow: Vec<Vec<Rat>>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork {
            cap: vec![vec![Rat::zero(); nodes]; nodes],
            flow: vec![vec![Rat::zero(); nodes]; nodes],
        }
    }

    pub fn set_capacity(&mut self, u: usize, v: usize, c: Rat) {
        self.cap[u][v] = c;
    }

    fn residual(&self, u: usize, v: usize) -> Rat {
        &self.cap[u][v] - &self.flow[u][v] + &self.flow[v][u]
    }

    /// Net flow sent along `u -> v`.
    pub fn flow(&self, u: usize, v: usize) -> Rat {
        &self.flow[u][v] - &self.flow[v][u]
    }

    /// Augments from `s` to `t` until no path remains; returns the added value.
    /// Flows already present are kept, so calling again after raising
    /// capacities continues from the current flow.
    pub fn augment(&mut self, s: usize, t: usize) -> Rat {
        let n = self.cap.len();
        let mut total = Rat::zero();
        loop {
            let mut prev = vec![usize::MAX; n];
            prev[s] = s;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                if u == t {
                    break;
                }
                for v in 0..n {
                    if prev[v] == usize::MAX && self.residual(u, v).is_positive() {
                        prev[v] = u;
                        queue.push_back(v);
                    }
                }
            }
            if prev[t] == usize::MAX {
                return total;
            }
            let mut bottleneck: Option<Rat> = None;
            let mut v = t;
            while v != s {
                let u = prev[v];
                let r = self.residual(u, v);
                bottleneck = Some(match bottleneck {
                    Some(b) if b <= r => b,
                    _ => r,
                });
                v = u;
            }
            let b = bottleneck.expect("path has an edge");
            let mut v = t;
            while v != s {
                let u = prev[v];
                // Cancel opposite flow first so that flow[u][v] stays within cap.
                let back = self.flow[v][u].clone();
                if back >= b {
                    self.flow[v][u] -= &b;
                } else {
                    self.flow[v][u] = Rat::zero();
                    self.flow[u][v] += &b - back;
                }
                v = u;
            }
            total += b;
        }
    }

    /// Nodes reachable from `s` in the residual graph (the source side of a min cut).
    pub fn source_side(&self, s: usize) -> Vec<bool> {
        let n = self.cap.len();
        let mut seen = vec![false; n];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if !seen[v] && self.residual(u, v).is_positive() {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }
}
