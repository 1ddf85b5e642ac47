//! Instances, allocations, prices and the payment graph.
//!
//! Indices are 0-based: agents are `0..n`, chores are `0..m`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{one, serde_rat, sum, Rat};

/// `n` agents, `m` chores and an `n x m` matrix of non-negative disutilities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "InstanceRepr", into = "InstanceRepr")]
pub struct Instance {
    disutility: Vec<Vec<Rat>>,
    chores: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceRepr {
    agents: usize,
    chores: usize,
    #[serde(with = "serde_rat::matrix")]
    disutility: Vec<Vec<Rat>>,
}

impl TryFrom<InstanceRepr> for Instance {
    type Error = Error;

    fn try_from(r: InstanceRepr) -> Result<Self> {
        if r.disutility.len() != r.agents {
            return Err(Error::InvalidInput(format!(
                "\"agents\" is {} but \"disutility\" has {} rows",
                r.agents,
                r.disutility.len()
            )));
        }
        Instance::with_chores(r.disutility, Some(r.chores))
    }
}

impl From<Instance> for InstanceRepr {
    fn from(inst: Instance) -> Self {
        InstanceRepr {
            agents: inst.agents(),
            chores: inst.chores,
            disutility: inst.disutility,
        }
    }
}

impl Instance {
    pub fn new(disutility: Vec<Vec<Rat>>) -> Result<Self> {
        Self::with_chores(disutility, None)
    }

    /// Like [`Instance::new`], but also checks the chore count, which is the
    /// only way to describe `m = 0`-free rows unambiguously.
    pub fn with_chores(disutility: Vec<Vec<Rat>>, chores: Option<usize>) -> Result<Self> {
        if disutility.is_empty() {
            return Err(Error::InvalidInput("an instance needs at least one agent".into()));
        }
        let m = chores.unwrap_or(disutility[0].len());
        for (i, row) in disutility.iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidInput(format!(
                    "disutility row {i} has {} entries, expected {m}",
                    row.len()
                )));
            }
            if let Some(c) = row.iter().position(|v| v.is_negative()) {
                return Err(Error::InvalidInput(format!("disutility[{i}][{c}] is negative")));
            }
        }
        Ok(Instance { disutility, chores: m })
    }

    /// Convenience constructor from integer disutilities.
    pub fn from_ints(rows: &[Vec<i64>]) -> Result<Self> {
        Self::new(
            rows.iter()
                .map(|r| r.iter().map(|&v| crate::rational::int(v)).collect())
                .collect(),
        )
    }

    pub fn agents(&self) -> usize {
        self.disutility.len()
    }

    pub fn chores(&self) -> usize {
        self.chores
    }

    pub fn d(&self, agent: usize, chore: usize) -> &Rat {
        &self.disutility[agent][chore]
    }

    pub fn row(&self, agent: usize) -> &[Rat] {
        &self.disutility[agent]
    }

    pub fn rows(&self) -> &[Vec<Rat>] {
        &self.disutility
    }

    /// First `(agent, chore)` with zero disutility, if any.
    pub fn zero_entry(&self) -> Option<(usize, usize)> {
        self.disutility
            .iter()
            .enumerate()
            .find_map(|(i, row)| row.iter().position(|v| v.is_zero()).map(|c| (i, c)))
    }

    /// `d_agent(M)`, the disutility of the whole chore set.
    pub fn total(&self, agent: usize) -> Rat {
        sum(&self.disutility[agent])
    }

    /// Additive disutility of a set of original chore ids.
    pub fn cost_of(&self, agent: usize, chores: impl IntoIterator<Item = usize>) -> Rat {
        chores
            .into_iter()
            .fold(Rat::zero(), |acc, c| acc + &self.disutility[agent][c])
    }

    pub(crate) fn check_agent(&self, agent: usize) -> Result<()> {
        if agent >= self.agents() {
            return Err(Error::agent(agent, self.agents()));
        }
        Ok(())
    }
}

/// One copy of an original chore. Copy `0` is the original itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ChoreCopy {
    pub chore: usize,
    pub copy: usize,
}

impl ChoreCopy {
    pub fn original(chore: usize) -> Self {
        ChoreCopy { chore, copy: 0 }
    }
}

pub type Bundle = BTreeSet<ChoreCopy>;

/// `n x m` matrix of fractions, every chore column summing to exactly 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RatMatrix", into = "RatMatrix")]
pub struct FractionalAllocation {
    rows: Vec<Vec<Rat>>,
}

#[derive(Serialize, Deserialize)]
#[serde(transparent)]
struct RatMatrix(#[serde(with = "serde_rat::matrix")] Vec<Vec<Rat>>);

impl TryFrom<RatMatrix> for FractionalAllocation {
    type Error = Error;

    fn try_from(m: RatMatrix) -> Result<Self> {
        FractionalAllocation::new(m.0)
    }
}

impl From<FractionalAllocation> for RatMatrix {
    fn from(x: FractionalAllocation) -> Self {
        RatMatrix(x.rows)
    }
}

impl FractionalAllocation {
    pub fn new(rows: Vec<Vec<Rat>>) -> Result<Self> {
        let x = FractionalAllocation { rows };
        x.check_clears()?;
        Ok(x)
    }

    /// Agent `owner[c]` receives all of chore `c`.
    pub fn integral(n: usize, owner: &[usize]) -> Result<Self> {
        let mut rows = vec![vec![Rat::zero(); owner.len()]; n];
        for (c, &i) in owner.iter().enumerate() {
            if i >= n {
                return Err(Error::agent(i, n));
            }
            rows[i][c] = one();
        }
        Self::new(rows)
    }

    pub(crate) fn from_rows_unchecked(rows: Vec<Vec<Rat>>) -> Self {
        FractionalAllocation { rows }
    }

    fn check_clears(&self) -> Result<()> {
        let n = self.rows.len();
        if n == 0 {
            return Err(Error::InvalidInput("allocation has no agents".into()));
        }
        let m = self.rows[0].len();
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidInput(format!(
                    "allocation row {i} has {} entries, expected {m}",
                    row.len()
                )));
            }
            if let Some(c) = row.iter().position(|v| v.is_negative() || *v > one()) {
                return Err(Error::InvalidInput(format!("x[{i}][{c}] is outside [0, 1]")));
            }
        }
        for c in 0..m {
            let col = self.rows.iter().fold(Rat::zero(), |acc, r| acc + &r[c]);
            if col != one() {
                return Err(Error::InvalidInput(format!(
                    "chore {c} is allocated {col} in total, expected 1"
                )));
            }
        }
        Ok(())
    }

    pub fn agents(&self) -> usize {
        self.rows.len()
    }

    pub fn chores(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn get(&self, agent: usize, chore: usize) -> &Rat {
        &self.rows[agent][chore]
    }

    pub fn rows(&self) -> &[Vec<Rat>] {
        &self.rows
    }

    /// True when every entry is 0 or 1.
    pub fn is_integral(&self) -> bool {
        self.rows.iter().flatten().all(|v| v.is_zero() || *v == one())
    }
}

/// Strictly positive chore prices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RatVec", into = "RatVec")]
pub struct PriceVector(Vec<Rat>);

#[derive(Serialize, Deserialize)]
#[serde(transparent)]
struct RatVec(#[serde(with = "serde_rat::vec")] Vec<Rat>);

impl TryFrom<RatVec> for PriceVector {
    type Error = Error;

    fn try_from(v: RatVec) -> Result<Self> {
        PriceVector::new(v.0)
    }
}

impl From<PriceVector> for RatVec {
    fn from(p: PriceVector) -> Self {
        RatVec(p.0)
    }
}

impl PriceVector {
    pub fn new(prices: Vec<Rat>) -> Result<Self> {
        if let Some(c) = prices.iter().position(|p| !p.is_positive()) {
            return Err(Error::InvalidInput(format!("price of chore {c} is not positive")));
        }
        Ok(PriceVector(prices))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Rat] {
        &self.0
    }

    pub fn total(&self) -> Rat {
        sum(&self.0)
    }
}

impl std::ops::Index<usize> for PriceVector {
    type Output = Rat;

    fn index(&self, c: usize) -> &Rat {
        &self.0[c]
    }
}

/// A fractional allocation, prices, per-agent liabilities and the income slack
/// the outcome is meant to satisfy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarketOutcome {
    pub x: FractionalAllocation,
    pub prices: PriceVector,
    #[serde(with = "serde_rat::vec")]
    pub budgets: Vec<Rat>,
    #[serde(with = "serde_rat")]
    pub epsilon: Rat,
}

impl MarketOutcome {
    /// Equal incomes of 1 for every agent.
    pub fn ceei(x: FractionalAllocation, prices: PriceVector, epsilon: Rat) -> Self {
        let n = x.agents();
        MarketOutcome {
            x,
            prices,
            budgets: vec![one(); n],
            epsilon,
        }
    }

    pub fn earning(&self, agent: usize, chore: usize) -> Rat {
        self.x.get(agent, chore) * &self.prices[chore]
    }

    pub fn income(&self, agent: usize) -> Rat {
        (0..self.x.chores()).fold(Rat::zero(), |acc, c| acc + self.earning(agent, c))
    }

    pub fn incomes(&self) -> Vec<Rat> {
        (0..self.x.agents()).map(|i| self.income(i)).collect()
    }

    pub fn payment_graph(&self) -> PaymentGraph {
        payment_graph(&self.x, &self.prices)
    }
}

/// Integral bundles over chore copies. Serialises as the list of bundles; the
/// chore count comes from the instance when reading one back.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct SurplusAllocation {
    bundles: Vec<Bundle>,
    #[serde(skip)]
    chores: usize,
}

impl SurplusAllocation {
    /// Validates coverage of all `chores` originals and that no copy is held twice.
    pub fn new(bundles: Vec<Bundle>, chores: usize) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut covered = vec![false; chores];
        for (i, b) in bundles.iter().enumerate() {
            for item in b {
                if item.chore >= chores {
                    return Err(Error::chore(item.chore, chores));
                }
                if !seen.insert(*item) {
                    return Err(Error::InvalidInput(format!(
                        "copy {} of chore {} appears in two bundles (second holder: agent {i})",
                        item.copy, item.chore
                    )));
                }
                covered[item.chore] = true;
            }
        }
        if let Some(c) = covered.iter().position(|&v| !v) {
            return Err(Error::InvalidInput(format!("chore {c} is not allocated")));
        }
        Ok(SurplusAllocation { bundles, chores })
    }

    /// Copy-free allocation from per-agent sets of chore ids.
    pub fn from_chore_sets(sets: &[BTreeSet<usize>], chores: usize) -> Result<Self> {
        Self::new(
            sets.iter()
                .map(|s| s.iter().map(|&c| ChoreCopy::original(c)).collect())
                .collect(),
            chores,
        )
    }

    pub fn agents(&self) -> usize {
        self.bundles.len()
    }

    pub fn chores(&self) -> usize {
        self.chores
    }

    pub fn bundles(&self) -> &[Bundle] {
        &self.bundles
    }

    pub fn bundle(&self, agent: usize) -> &Bundle {
        &self.bundles[agent]
    }

    pub fn item_count(&self) -> usize {
        self.bundles.iter().map(BTreeSet::len).sum()
    }

    /// Number of items beyond the `m` originals.
    pub fn surplus_count(&self) -> usize {
        self.item_count() - self.chores
    }

    /// Every held item, in (agent, item) order.
    pub fn items(&self) -> impl Iterator<Item = (usize, ChoreCopy)> + '_ {
        self.bundles
            .iter()
            .enumerate()
            .flat_map(|(i, b)| b.iter().map(move |&c| (i, c)))
    }

    /// How many copies of each original chore are held in total.
    pub fn multiplicities(&self) -> Vec<usize> {
        let mut k = vec![0; self.chores];
        for (_, item) in self.items() {
            k[item.chore] += 1;
        }
        k
    }
}

/// `d_agent(S)`: copies count independently and inherit the original's disutility.
pub fn bundle_disutility<'a>(
    inst: &Instance,
    agent: usize,
    bundle: impl IntoIterator<Item = &'a ChoreCopy>,
) -> Result<Rat> {
    inst.check_agent(agent)?;
    let mut total = Rat::zero();
    for item in bundle {
        if item.chore >= inst.chores() {
            return Err(Error::chore(item.chore, inst.chores()));
        }
        total += inst.d(agent, item.chore);
    }
    Ok(total)
}

/// `p(S)`: copies are priced like their original.
pub fn bundle_payment<'a>(prices: &PriceVector, bundle: impl IntoIterator<Item = &'a ChoreCopy>) -> Result<Rat> {
    let mut total = Rat::zero();
    for item in bundle {
        if item.chore >= prices.len() {
            return Err(Error::chore(item.chore, prices.len()));
        }
        total += &prices[item.chore];
    }
    Ok(total)
}

/// Minimum pain per buck of `agent` and the chores attaining it.
pub fn mpb(inst: &Instance, prices: &PriceVector, agent: usize) -> Result<(Rat, BTreeSet<usize>)> {
    inst.check_agent(agent)?;
    if inst.chores() == 0 {
        return Err(Error::NoChores);
    }
    if prices.len() != inst.chores() {
        return Err(Error::InvalidInput(format!(
            "{} prices for {} chores",
            prices.len(),
            inst.chores()
        )));
    }
    let mut best: Option<Rat> = None;
    let mut argmin = BTreeSet::new();
    for c in 0..inst.chores() {
        let ratio = inst.d(agent, c) / &prices[c];
        match &best {
            Some(b) if ratio > *b => {}
            Some(b) if ratio == *b => {
                argmin.insert(c);
            }
            _ => {
                best = Some(ratio);
                argmin.clear();
                argmin.insert(c);
            }
        }
    }
    Ok((best.expect("m > 0"), argmin))
}

/// A node of the bipartite payment graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Agent(usize),
    Chore(usize),
}

/// One connected component of a payment graph, node ids ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub agents: Vec<usize>,
    pub chores: Vec<usize>,
}

/// Weighted bipartite agent/chore graph; an edge `{i, c}` carries the earning
/// `e(i, c) > 0` of agent `i` from chore `c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaymentGraph {
    agents: usize,
    chores: usize,
    weights: BTreeMap<(usize, usize), Rat>,
    agent_adj: Vec<BTreeSet<usize>>,
    chore_adj: Vec<BTreeSet<usize>>,
}

/// Payment graph of `<x, p>`: an edge wherever `x(i, c) > 0`, weighted `x(i, c) * p(c)`.
pub fn payment_graph(x: &FractionalAllocation, prices: &PriceVector) -> PaymentGraph {
    let mut g = PaymentGraph::empty(x.agents(), x.chores());
    for i in 0..x.agents() {
        for c in 0..x.chores() {
            let v = x.get(i, c);
            if v.is_positive() {
                g.set_weight(i, c, v * &prices[c]);
            }
        }
    }
    g
}

impl PaymentGraph {
    pub fn empty(agents: usize, chores: usize) -> Self {
        PaymentGraph {
            agents,
            chores,
            weights: BTreeMap::new(),
            agent_adj: vec![BTreeSet::new(); agents],
            chore_adj: vec![BTreeSet::new(); chores],
        }
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    pub fn chores(&self) -> usize {
        self.chores
    }

    /// Sets `e(agent, chore)`; a zero weight removes the edge.
    pub fn set_weight(&mut self, agent: usize, chore: usize, w: Rat) {
        if w.is_zero() {
            self.remove_edge(agent, chore);
            return;
        }
        debug_assert!(w.is_positive());
        self.weights.insert((agent, chore), w);
        self.agent_adj[agent].insert(chore);
        self.chore_adj[chore].insert(agent);
    }

    /// Removes the edge and returns its weight.
    pub fn remove_edge(&mut self, agent: usize, chore: usize) -> Option<Rat> {
        let w = self.weights.remove(&(agent, chore));
        self.agent_adj[agent].remove(&chore);
        self.chore_adj[chore].remove(&agent);
        w
    }

    pub fn weight(&self, agent: usize, chore: usize) -> Option<&Rat> {
        self.weights.get(&(agent, chore))
    }

    pub fn has_edge(&self, agent: usize, chore: usize) -> bool {
        self.weights.contains_key(&(agent, chore))
    }

    /// Edges with weights, sorted by `(agent, chore)`.
    pub fn edges(&self) -> impl Iterator<Item = ((usize, usize), &Rat)> + '_ {
        self.weights.iter().map(|(&k, w)| (k, w))
    }

    pub fn edge_count(&self) -> usize {
        self.weights.len()
    }

    /// `N(agent)`: chores adjacent to the agent.
    pub fn agent_neighbors(&self, agent: usize) -> &BTreeSet<usize> {
        &self.agent_adj[agent]
    }

    /// `N(chore)`: agents adjacent to the chore.
    pub fn chore_neighbors(&self, chore: usize) -> &BTreeSet<usize> {
        &self.chore_adj[chore]
    }

    /// Total earning of the agent across its edges.
    pub fn agent_weight(&self, agent: usize) -> Rat {
        self.agent_adj[agent]
            .iter()
            .fold(Rat::zero(), |acc, &c| acc + &self.weights[&(agent, c)])
    }

    /// Total payment routed through the chore.
    pub fn chore_weight(&self, chore: usize) -> Rat {
        self.chore_adj[chore]
            .iter()
            .fold(Rat::zero(), |acc, &i| acc + &self.weights[&(i, chore)])
    }

    fn neighbors(&self, v: Node) -> Vec<Node> {
        match v {
            Node::Agent(i) => self.agent_adj[i].iter().map(|&c| Node::Chore(c)).collect(),
            Node::Chore(c) => self.chore_adj[c].iter().map(|&i| Node::Agent(i)).collect(),
        }
    }

    /// Connected components, agent-containing ones first (by lowest agent),
    /// then the remaining chore-only ones (isolated chores).
    pub fn components(&self) -> Vec<Component> {
        let mut seen_a = vec![false; self.agents];
        let mut seen_c = vec![false; self.chores];
        let mut out = Vec::new();
        let starts = (0..self.agents)
            .map(Node::Agent)
            .chain((0..self.chores).map(Node::Chore));
        for start in starts {
            let fresh = match start {
                Node::Agent(i) => !seen_a[i],
                Node::Chore(c) => !seen_c[c],
            };
            if !fresh {
                continue;
            }
            let mut comp = Component {
                agents: Vec::new(),
                chores: Vec::new(),
            };
            let mut queue = VecDeque::from([start]);
            match start {
                Node::Agent(i) => seen_a[i] = true,
                Node::Chore(c) => seen_c[c] = true,
            }
            while let Some(v) = queue.pop_front() {
                match v {
                    Node::Agent(i) => comp.agents.push(i),
                    Node::Chore(c) => comp.chores.push(c),
                }
                for u in self.neighbors(v) {
                    let seen = match u {
                        Node::Agent(i) => &mut seen_a[i],
                        Node::Chore(c) => &mut seen_c[c],
                    };
                    if !*seen {
                        *seen = true;
                        queue.push_back(u);
                    }
                }
            }
            comp.agents.sort_unstable();
            comp.chores.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// A forest has `|V| - #components` edges.
    pub fn is_forest(&self) -> bool {
        self.edge_count() + self.components().len() == self.agents + self.chores
    }

    /// Some cycle as alternating nodes `[a1, c1, a2, c2, ..., at, ct]`, meaning edges
    /// `a1-c1, c1-a2, ..., at-ct, ct-a1`. Deterministic for a given graph.
    pub fn find_cycle(&self) -> Option<Vec<Node>> {
        let mut parent: BTreeMap<Node, Option<Node>> = BTreeMap::new();
        for root in 0..self.agents {
            let root = Node::Agent(root);
            if parent.contains_key(&root) {
                continue;
            }
            parent.insert(root, None);
            // Iterative DFS; a back edge to an already visited node other than
            // the parent closes a cycle.
            let mut stack = vec![(root, self.neighbors(root), 0usize)];
            while let Some((v, nbrs, idx)) = stack.last_mut() {
                let v = *v;
                if *idx >= nbrs.len() {
                    stack.pop();
                    continue;
                }
                let u = nbrs[*idx];
                *idx += 1;
                if parent.get(&v).copied().flatten() == Some(u) {
                    continue;
                }
                if parent.contains_key(&u) {
                    // Walk from v back to u along the DFS stack.
                    let mut path = vec![v];
                    let mut w = v;
                    while w != u {
                        w = parent[&w].expect("u is an ancestor of v");
                        path.push(w);
                    }
                    let start = path
                        .iter()
                        .position(|n| matches!(n, Node::Agent(_)))
                        .expect("bipartite cycles contain agents");
                    path.rotate_left(start);
                    return Some(path);
                }
                parent.insert(u, Some(v));
                let nb = self.neighbors(u);
                stack.push((u, nb, 0));
            }
        }
        None
    }
}
