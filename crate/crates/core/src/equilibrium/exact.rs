//! Exact CEEI by enumerating candidate support forests.
//!
//! Edges are indexed chore-major, `(c, i) -> c * n + i`. Supports are visited
//! by edge count ascending and, within one count, in lexicographic order of
//! their sorted edge indices; the first feasible support is returned. A
//! floating-point filter prunes partial supports whose price ratios already
//! violate an MPB inequality; every accepted candidate is then recomputed and
//! verified in exact arithmetic.

use num_traits::{Signed, Zero};

use super::descent::{outcome_from_earnings, validate_market};
use crate::error::{Error, Result};
use crate::model::{Instance, MarketOutcome};
use crate::rational::{to_f64, Rat};

/// Size limits for exhaustive searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchLimits {
    pub max_agents: usize,
    pub max_chores: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_agents: 4,
            max_chores: 7,
        }
    }
}

impl SearchLimits {
    pub fn admits(&self, inst: &Instance) -> bool {
        inst.agents() <= self.max_agents && inst.chores() <= self.max_chores
    }
}

const TOL: f64 = 1e-9;

/// Union-find-free component bookkeeping: `comp[v]` labels nodes, `log[v]` is
/// `ln beta_i` for agents and `ln p_c` for chores, relative within a component.
#[derive(Clone)]
struct Partial {
    comp: Vec<usize>,
    log: Vec<f64>,
    agent_deg: Vec<usize>,
}

struct Search<'a> {
    inst: &'a Instance,
    n: usize,
    m: usize,
    ln_d: Vec<Vec<f64>>,
    chosen: Vec<usize>,
    found: Option<MarketOutcome>,
}

impl Search<'_> {
    fn agent_node(&self, i: usize) -> usize {
        i
    }

    fn chore_node(&self, c: usize) -> usize {
        self.n + c
    }

    /// Adds edge `(i, c)` if it keeps the support acyclic and the merged
    /// component's price ratios consistent with every MPB inequality inside it.
    fn join(&self, st: &Partial, i: usize, c: usize) -> Option<Partial> {
        let (a, ch) = (self.agent_node(i), self.chore_node(c));
        let (ca, cc) = (st.comp[a], st.comp[ch]);
        if ca == cc {
            return None;
        }
        let mut next = st.clone();
        // Shift the chore's component so that ln p_c = ln beta_i + ln d_i(c).
        let shift = st.log[a] + self.ln_d[i][c] - st.log[ch];
        for v in 0..next.comp.len() {
            if next.comp[v] == cc {
                next.comp[v] = ca;
                next.log[v] += shift;
            }
        }
        next.agent_deg[i] += 1;
        let members: Vec<usize> = (0..next.comp.len()).filter(|&v| next.comp[v] == ca).collect();
        for &u in members.iter().filter(|&&u| u < self.n) {
            for &w in members.iter().filter(|&&w| w >= self.n) {
                let c2 = w - self.n;
                // beta_u * d_u(c2) >= p_c2
                let lhs = next.log[u] + self.ln_d[u][c2];
                if lhs < next.log[w] - TOL {
                    return None;
                }
            }
        }
        Some(next)
    }

    fn recurse(&mut self, st: &Partial, next_edge: usize, remaining: usize, covered_upto: usize) {
        if self.found.is_some() {
            return;
        }
        if remaining == 0 {
            if covered_upto == self.m {
                self.evaluate(st);
            }
            return;
        }
        let total_edges = self.n * self.m;
        for e in next_edge..total_edges {
            let (c, i) = (e / self.n, e % self.n);
            // Chores below c can no longer be covered.
            if c > covered_upto {
                break;
            }
            let still_uncovered = self.m - covered_upto - usize::from(c == covered_upto);
            if remaining - 1 < still_uncovered {
                continue;
            }
            if let Some(next) = self.join(st, i, c) {
                self.chosen.push(e);
                let cov = if c == covered_upto {
                    covered_upto + 1
                } else {
                    covered_upto
                };
                self.recurse(&next, e + 1, remaining - 1, cov);
                self.chosen.pop();
                if self.found.is_some() {
                    return;
                }
            }
        }
    }

    fn evaluate(&mut self, st: &Partial) {
        if st.agent_deg.iter().any(|&d| d == 0) {
            return;
        }
        if !self.float_feasible(st) {
            return;
        }
        if let Some(out) = self.exact_solution() {
            if super::verify_fisher_equilibrium(self.inst, &out).pass() {
                self.found = Some(out);
            }
        }
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.chosen.iter().map(|&e| (e % self.n, e / self.n)).collect()
    }

    fn float_feasible(&self, st: &Partial) -> bool {
        let (n, m) = (self.n, self.m);
        let nodes = n + m;
        // Scale each component so its prices sum to its agent count.
        let mut log = st.log.clone();
        let mut labels: Vec<usize> = st.comp.clone();
        labels.sort_unstable();
        labels.dedup();
        for &label in &labels {
            let agents = (0..n).filter(|&i| st.comp[i] == label).count() as f64;
            let total: f64 = (0..m)
                .filter(|&c| st.comp[n + c] == label)
                .map(|c| st.log[n + c].exp())
                .sum();
            let s = (agents / total).ln();
            for v in 0..nodes {
                if st.comp[v] == label {
                    log[v] += s;
                }
            }
        }
        for i in 0..n {
            for c in 0..m {
                if log[i] + self.ln_d[i][c] < log[n + c] - TOL {
                    return false;
                }
            }
        }
        let prices: Vec<f64> = (0..m).map(|c| log[n + c].exp()).collect();
        let income = vec![1.0; n];
        match tree_flows(n, m, &self.edges(), &prices, &income) {
            Some(f) => f.iter().all(|&(_, _, v)| v >= -TOL),
            None => false,
        }
    }

    fn exact_solution(&self) -> Option<MarketOutcome> {
        let (n, m) = (self.n, self.m);
        let edges = self.edges();
        let mut beta: Vec<Option<Rat>> = vec![None; n];
        let mut price: Vec<Option<Rat>> = vec![None; m];
        let mut comp_of_agent = vec![usize::MAX; n];
        let mut comps: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
        for root in 0..n {
            if beta[root].is_some() {
                continue;
            }
            let id = comps.len();
            let mut agents = vec![root];
            let mut chores = Vec::new();
            beta[root] = Some(Rat::from_integer(1.into()));
            comp_of_agent[root] = id;
            let mut stack = vec![root];
            while let Some(i) = stack.pop() {
                for &(a, c) in edges.iter().filter(|&&(a, _)| a == i) {
                    debug_assert_eq!(a, i);
                    if price[c].is_none() {
                        let pc = beta[i].as_ref().unwrap() * self.inst.d(i, c);
                        chores.push(c);
                        for &(j, c2) in edges.iter().filter(|&&(j, c2)| c2 == c && j != i) {
                            debug_assert_eq!(c2, c);
                            if beta[j].is_none() {
                                beta[j] = Some(&pc / self.inst.d(j, c));
                                comp_of_agent[j] = id;
                                agents.push(j);
                                stack.push(j);
                            }
                        }
                        price[c] = Some(pc);
                    }
                }
            }
            comps.push((agents, chores));
        }
        let mut beta: Vec<Rat> = beta.into_iter().map(Option::unwrap).collect();
        let mut prices: Vec<Rat> = price.into_iter().map(|p| p.expect("chores covered")).collect();
        for (agents, chores) in &comps {
            let total = chores.iter().fold(Rat::zero(), |acc, &c| acc + &prices[c]);
            let s = Rat::from_integer(agents.len().into()) / total;
            for &i in agents {
                beta[i] *= &s;
            }
            for &c in chores {
                prices[c] *= &s;
            }
        }
        let unit = vec![Rat::from_integer(1.into()); n];
        let flows = tree_flows(n, m, &edges, &prices, &unit)?;
        let mut e = vec![vec![Rat::zero(); m]; n];
        for (i, c, v) in flows {
            if v.is_negative() {
                return None;
            }
            e[i][c] = v;
        }
        Some(outcome_from_earnings(&e, prices, Rat::zero()))
    }
}

/// Earnings on a forest support, solved by peeling leaves: a leaf agent takes
/// its remaining income need from its single edge, a leaf chore hands its
/// remaining payment to its single agent. Returns `None` if a component does
/// not balance.
fn tree_flows<T>(
    n: usize,
    m: usize,
    edges: &[(usize, usize)],
    prices: &[T],
    income: &[T],
) -> Option<Vec<(usize, usize, T)>>
where
    T: Clone + Balance,
{
    let nodes = n + m;
    let mut need: Vec<T> = income.iter().cloned().chain(prices.iter().cloned()).collect();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    for (k, &(i, c)) in edges.iter().enumerate() {
        adj[i].push(k);
        adj[n + c].push(k);
    }
    let mut alive = vec![true; edges.len()];
    let mut deg: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut out: Vec<Option<T>> = vec![None; edges.len()];
    let mut queue: Vec<usize> = (0..nodes).filter(|&v| deg[v] == 1).collect();
    while let Some(v) = queue.pop() {
        if deg[v] != 1 {
            continue;
        }
        let k = *adj[v].iter().find(|&&k| alive[k]).expect("degree 1");
        let (i, c) = edges[k];
        let other = if v == i { n + c } else { i };
        let amount = need[v].clone();
        need[other] = need[other].sub(&amount);
        need[v] = T::zero_like(&amount);
        out[k] = Some(amount);
        alive[k] = false;
        deg[v] -= 1;
        deg[other] -= 1;
        if deg[other] == 1 {
            queue.push(other);
        }
    }
    if need.iter().any(|v| !v.is_balanced()) {
        return None;
    }
    Some(
        edges
            .iter()
            .zip(out)
            .map(|(&(i, c), v)| (i, c, v.expect("forest edges are all peeled")))
            .collect(),
    )
}

trait Balance: Sized {
    fn sub(&self, other: &Self) -> Self;
    fn zero_like(&self) -> Self;
    fn is_balanced(&self) -> bool;
}

impl Balance for f64 {
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn zero_like(&self) -> Self {
        0.0
    }
    fn is_balanced(&self) -> bool {
        self.abs() < 1e-7
    }
}

impl Balance for Rat {
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn zero_like(&self) -> Self {
        Rat::zero()
    }
    fn is_balanced(&self) -> bool {
        self.is_zero()
    }
}

/// Exact CEEI (`epsilon = 0`, unit budgets) found by support enumeration.
pub fn exact_ceei(inst: &Instance, limits: SearchLimits) -> Result<MarketOutcome> {
    if !limits.admits(inst) {
        return Err(Error::InstanceTooLarge(format!(
            "{}x{} exceeds the exact-search limit {}x{}",
            inst.agents(),
            inst.chores(),
            limits.max_agents,
            limits.max_chores
        )));
    }
    validate_market(inst)?;
    let (n, m) = (inst.agents(), inst.chores());
    let mut search = Search {
        inst,
        n,
        m,
        ln_d: inst
            .rows()
            .iter()
            .map(|r| r.iter().map(|v| to_f64(v).ln()).collect())
            .collect(),
        chosen: Vec::new(),
        found: None,
    };
    let start = Partial {
        comp: (0..n + m).collect(),
        log: vec![0.0; n + m],
        agent_deg: vec![0; n],
    };
    for k in n.max(m)..n + m {
        search.recurse(&start, 0, k, 0);
        if let Some(out) = search.found.take() {
            return Ok(out);
        }
    }
    Err(Error::NotFound)
}
