//! Routing chore payments to agents along MPB edges.

use num_traits::Zero;

use crate::flow::FlowNetwork;
use crate::rational::{one, sum, Rat};

/// Chore payments `prices[c]` may flow to the agents in `holders[c]`.
pub(crate) struct PaymentNetwork<'a> {
    pub agents: usize,
    pub prices: &'a [Rat],
    pub holders: &'a [Vec<usize>],
}

/// Result of routing with unit income caps.
pub(crate) struct UnitRouting {
    pub value: Rat,
    /// Agents on the source side of a minimum cut.
    pub agent_source_side: Vec<bool>,
}

impl PaymentNetwork<'_> {
    fn chores(&self) -> usize {
        self.prices.len()
    }

    fn build(&self, agent_cap: &Rat) -> FlowNetwork {
        let (n, m) = (self.agents, self.chores());
        let sink = n + m + 1;
        let unbounded = sum(self.prices) + one();
        let mut net = FlowNetwork::new(n + m + 2);
        for c in 0..m {
            net.set_capacity(0, 1 + c, self.prices[c].clone());
            for &i in &self.holders[c] {
                net.set_capacity(1 + c, 1 + m + i, unbounded.clone());
            }
        }
        for i in 0..n {
            net.set_capacity(1 + m + i, sink, agent_cap.clone());
        }
        net
    }

    fn earnings(&self, net: &FlowNetwork) -> Vec<Vec<Rat>> {
        let (n, m) = (self.agents, self.chores());
        let mut e = vec![vec![Rat::zero(); m]; n];
        for c in 0..m {
            for &i in &self.holders[c] {
                e[i][c] = net.flow(1 + c, 1 + m + i);
            }
        }
        e
    }

    /// Earnings `e[i][c]` that pay out every chore in full with each agent's
    /// income in `[low, high]`, if such a routing exists.
    ///
    /// Phase one saturates the lower bounds; phase two raises every cap to
    /// `high` and keeps augmenting. Augmenting paths never reduce flow into the
    /// sink, so the lower bounds survive phase two.
    pub fn route(&self, low: &Rat, high: &Rat) -> Option<Vec<Vec<Rat>>> {
        let (n, m) = (self.agents, self.chores());
        let sink = n + m + 1;
        let total = sum(self.prices);
        let mut net = self.build(low);
        let first = net.augment(0, sink);
        if first != low * Rat::from_integer(n.into()) {
            return None;
        }
        if high != low {
            for i in 0..n {
                net.set_capacity(1 + m + i, sink, high.clone());
            }
            let second = net.augment(0, sink);
            if first + second != total {
                return None;
            }
        } else if first != total {
            return None;
        }
        Some(self.earnings(&net))
    }

    /// Max-flow with unit income caps and the source side of a minimum cut.
    pub fn route_unit(&self) -> UnitRouting {
        let (n, m) = (self.agents, self.chores());
        let sink = n + m + 1;
        let mut net = self.build(&one());
        let value = net.augment(0, sink);
        let side = net.source_side(0);
        UnitRouting {
            value,
            agent_source_side: (0..n).map(|i| side[1 + m + i]).collect(),
        }
    }
}
