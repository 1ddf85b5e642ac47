use num_traits::Zero;

use super::verify_fisher_equilibrium;
use crate::error::{Error, Result};
use crate::model::{FractionalAllocation, Instance, MarketOutcome, Node, PaymentGraph};
use crate::rational::Rat;

/// Statistics of a cycle-cancellation run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AcyclicStats {
    /// Edge count of the payment graph after each cancellation, starting with the input's.
    pub edge_counts: Vec<usize>,
}

/// Same prices, same incomes, forest payment graph.
pub fn make_acyclic(inst: &Instance, out: &MarketOutcome) -> Result<MarketOutcome> {
    make_acyclic_traced(inst, out).map(|(o, _)| o)
}

pub fn make_acyclic_traced(inst: &Instance, out: &MarketOutcome) -> Result<(MarketOutcome, AcyclicStats)> {
    let report = verify_fisher_equilibrium(inst, out);
    if !report.pass() {
        return Err(Error::InvalidInput(format!(
            "make_acyclic needs an equilibrium: {report:?}"
        )));
    }
    let mut g = out.payment_graph();
    let mut stats = AcyclicStats {
        edge_counts: vec![g.edge_count()],
    };
    let limit = g.edge_count();
    while let Some(cycle) = g.find_cycle() {
        cancel_cycle(&mut g, &cycle);
        stats.edge_counts.push(g.edge_count());
        if stats.edge_counts.len() > limit + 1 {
            return Err(Error::CertificateFailure("cycle cancellation did not terminate".into()));
        }
    }
    let (n, m) = (inst.agents(), inst.chores());
    let rows = (0..n)
        .map(|i| {
            (0..m)
                .map(|c| g.weight(i, c).map_or_else(Rat::zero, |w| w / &out.prices[c]))
                .collect()
        })
        .collect();
    let result = MarketOutcome {
        x: FractionalAllocation::from_rows_unchecked(rows),
        prices: out.prices.clone(),
        budgets: out.budgets.clone(),
        epsilon: out.epsilon.clone(),
    };
    let report = verify_fisher_equilibrium(inst, &result);
    if !report.pass() {
        return Err(Error::CertificateFailure(format!(
            "cycle cancellation broke the equilibrium: {report:?}"
        )));
    }
    Ok((result, stats))
}

/// Shifts the cycle's minimum earning around it: with the cycle written as
/// `a1, c1, a2, c2, ..., at, ct` and oriented so that `(a1, c1)` is a minimum
/// edge, every `e(a_k, c_k)` drops by that minimum and every `e(a_k, c_{k-1})`
/// rises by it. Incomes and chore payments are unchanged; `(a1, c1)` vanishes.
fn cancel_cycle(g: &mut PaymentGraph, cycle: &[Node]) {
    let t = cycle.len() / 2;
    let agent = |k: usize| match cycle[2 * (k % t)] {
        Node::Agent(i) => i,
        Node::Chore(_) => unreachable!("even positions are agents"),
    };
    let chore = |k: usize| match cycle[2 * (k % t) + 1] {
        Node::Chore(c) => c,
        Node::Agent(_) => unreachable!("odd positions are chores"),
    };
    // Edges of the cycle in order: (a_k, c_k) then (a_{k+1}, c_k).
    let mut edges = Vec::with_capacity(2 * t);
    for k in 0..t {
        edges.push((agent(k), chore(k)));
        edges.push((agent(k + 1), chore(k)));
    }
    let (min_pos, _) = edges
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| g.weight(a.0, a.1).cmp(&g.weight(b.0, b.1)))
        .expect("non-empty cycle");
    // Edges at even positions lose, odd positions gain; shift parity so the
    // minimum edge is a losing one.
    let parity = min_pos % 2;
    let delta = g
        .weight(edges[min_pos].0, edges[min_pos].1)
        .cloned()
        .expect("cycle edge");
    for (pos, &(i, c)) in edges.iter().enumerate() {
        let w = g.weight(i, c).cloned().expect("cycle edge");
        let w = if pos % 2 == parity { w - &delta } else { w + &delta };
        g.set_weight(i, c, w);
    }
}
