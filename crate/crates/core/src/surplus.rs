//! Rounding a `(1 - epsilon)`-CEEI with a forest payment graph into an
//! integral allocation that is EF1 and fPO, duplicating at most `n - 1` chores.

use std::collections::{BTreeSet, VecDeque};

use num_traits::{One, Zero};
use serde::Serialize;

use crate::equilibrium::{approx_ceei, default_epsilon, descent_ceei, exact_ceei, make_acyclic, SearchLimits};
use crate::error::{Error, Result};
use crate::model::{
    bundle_payment, Bundle, ChoreCopy, Instance, MarketOutcome, PaymentGraph, PriceVector, SurplusAllocation,
};
use crate::rational::{serde_rat, Rat};
use crate::verify::{check_ef1, check_fisher_eq, check_fpo, check_pef1, fpo_lp_size, Certificate, VerifyLimits};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum TraceEvent {
    Assign {
        phase: u8,
        agent: usize,
        chore: usize,
    },
    DeleteEdge {
        agent: usize,
        chore: usize,
        #[serde(with = "serde_rat")]
        earning: Rat,
    },
    Redistribute {
        from: usize,
        to: usize,
        chore: usize,
        #[serde(with = "serde_rat")]
        amount: Rat,
    },
    AddCopy {
        agent: usize,
        chore: usize,
        copy: usize,
    },
}

/// The payment graph being rounded, the partial integral allocation, and a log.
#[derive(Debug, Clone)]
pub struct RoundingState {
    pub graph: PaymentGraph,
    pub prices: PriceVector,
    pub epsilon: Rat,
    pub bundles: Vec<Bundle>,
    /// Whether the original copy of each chore has been allocated.
    pub allocated: Vec<bool>,
    /// Copies handed out per chore, originals included.
    pub copies: Vec<usize>,
    pub trace: Vec<TraceEvent>,
    /// Incomes `income_y(i)` at the start of Phase 1 and after every edge deletion.
    pub checkpoints: Vec<Vec<Rat>>,
    /// Phase-2 parent chore of each agent (`None` for tree roots).
    pub parents: Vec<Option<usize>>,
}

impl RoundingState {
    /// Starts from an outcome whose payment graph must be a forest.
    pub fn new(out: &MarketOutcome) -> Result<Self> {
        let graph = out.payment_graph();
        if !graph.is_forest() {
            return Err(Error::InvalidInput("payment graph is not a forest".into()));
        }
        let (n, m) = (graph.agents(), graph.chores());
        let mut st = RoundingState {
            graph,
            prices: out.prices.clone(),
            epsilon: out.epsilon.clone(),
            bundles: vec![Bundle::new(); n],
            allocated: vec![false; m],
            copies: vec![0; m],
            trace: Vec::new(),
            checkpoints: Vec::new(),
            parents: vec![None; n],
        };
        st.checkpoint();
        Ok(st)
    }

    fn threshold(&self) -> Rat {
        Rat::one() - &self.epsilon
    }

    pub fn incomes(&self) -> Vec<Rat> {
        (0..self.graph.agents()).map(|i| self.graph.agent_weight(i)).collect()
    }

    fn checkpoint(&mut self) {
        let inc = self.incomes();
        self.checkpoints.push(inc);
    }

    fn payment(&self, agent: usize) -> Rat {
        self.bundles[agent].iter().map(|c| &self.prices[c.chore]).sum()
    }

    fn give(&mut self, phase: u8, agent: usize, chore: usize) {
        debug_assert!(!self.allocated[chore]);
        self.allocated[chore] = true;
        self.copies[chore] += 1;
        self.bundles[agent].insert(ChoreCopy::original(chore));
        self.trace.push(TraceEvent::Assign { phase, agent, chore });
    }

    fn give_copy(&mut self, agent: usize, chore: usize) {
        let copy = self.copies[chore];
        self.copies[chore] += 1;
        self.bundles[agent].insert(ChoreCopy { chore, copy });
        self.trace.push(TraceEvent::AddCopy { agent, chore, copy });
    }

    fn pending_leaf(&self) -> bool {
        (0..self.graph.chores()).any(|c| !self.allocated[c] && self.graph.chore_neighbors(c).len() == 1)
    }
}

/// Phase 1: hand out chores with a single neighbour, and cut edges that would
/// make their agent's payment too large even after dropping its top chore.
pub fn phase1(st: &mut RoundingState) -> Result<()> {
    let m = st.graph.chores();
    let threshold = st.threshold();
    while st.pending_leaf() {
        for c in 0..m {
            if !st.allocated[c] && st.graph.chore_neighbors(c).len() == 1 {
                let i = *st.graph.chore_neighbors(c).iter().next().expect("one neighbour");
                st.give(1, i, c);
            }
        }
        let edges: Vec<(usize, usize)> = st
            .graph
            .edges()
            .map(|(e, _)| e)
            .filter(|&(_, c)| !st.allocated[c])
            .collect();
        for (i, c) in edges {
            let pc = &st.prices[c];
            let top = st.bundles[i]
                .iter()
                .map(|x| &st.prices[x.chore])
                .chain(std::iter::once(pc))
                .max()
                .expect("non-empty");
            // min over c' of p((Y_i + c) - c') is attained at the priciest c'.
            if st.payment(i) + pc - top <= threshold {
                continue;
            }
            let others: Vec<usize> = st
                .graph
                .chore_neighbors(c)
                .iter()
                .copied()
                .filter(|&j| j != i)
                .collect();
            if others.is_empty() {
                return Err(Error::DivisionByZeroGuard { agent: i, chore: c });
            }
            let earning = st.graph.remove_edge(i, c).expect("edge present");
            st.trace.push(TraceEvent::DeleteEdge {
                agent: i,
                chore: c,
                earning: earning.clone(),
            });
            let share = earning / Rat::from_integer(others.len().into());
            for j in others {
                let w = st.graph.weight(j, c).cloned().expect("neighbour edge") + &share;
                st.graph.set_weight(j, c, w);
                st.trace.push(TraceEvent::Redistribute {
                    from: i,
                    to: j,
                    chore: c,
                    amount: share.clone(),
                });
            }
            st.checkpoint();
        }
    }
    if let Some(c) = (0..m).find(|&c| !st.allocated[c] && st.graph.chore_neighbors(c).is_empty()) {
        return Err(Error::IsolatedChore(c));
    }
    Ok(())
}

/// Phase 2: walk every tree from its lowest agent in breadth-first order and
/// fill bundles up to the `1 - epsilon` threshold, copying a parent chore
/// when an agent's own subtree cannot fill it.
pub fn phase2(st: &mut RoundingState) -> Result<SurplusAllocation> {
    let threshold = st.threshold();
    for comp in st.graph.components() {
        let Some(&root) = comp.agents.first() else {
            continue;
        };
        let mut queue = VecDeque::from([(root, None::<usize>)]);
        while let Some((i, parent)) = queue.pop_front() {
            st.parents[i] = parent;
            if let Some(ci) = parent {
                if !st.allocated[ci] {
                    st.give(2, i, ci);
                }
            }
            let children: Vec<usize> = st
                .graph
                .agent_neighbors(i)
                .iter()
                .copied()
                .filter(|&c| Some(c) != parent)
                .collect();
            for &c in &children {
                if st.bundles[i].contains(&ChoreCopy::original(c)) {
                    continue;
                }
                if st.payment(i) < threshold {
                    if st.allocated[c] {
                        return Err(Error::CertificateFailure(format!(
                            "child chore {c} of agent {i} was already allocated"
                        )));
                    }
                    st.give(2, i, c);
                }
            }
            if st.payment(i) < threshold {
                if let Some(ci) = parent {
                    if st.bundles[i].contains(&ChoreCopy::original(ci)) {
                        return Err(Error::CopyOfOwnChore { agent: i, chore: ci });
                    }
                    st.give_copy(i, ci);
                }
            }
            for c in children {
                for &j in st.graph.chore_neighbors(c) {
                    if j != i {
                        queue.push_back((j, Some(c)));
                    }
                }
            }
        }
    }
    SurplusAllocation::new(st.bundles.clone(), st.graph.chores())
}

/// Which equilibrium feeds the rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CeeiSolver {
    /// A `(1 - epsilon)`-CEEI from the price-descent solver.
    #[default]
    Approx,
    /// An exact CEEI (`epsilon = 0`): support enumeration within the search
    /// limits, the price-descent solver run to exactness beyond them.
    Exact,
}

#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    pub solver: CeeiSolver,
    /// Replaces the default `1 / (5 n m)` for the approximate solver.
    pub epsilon: Option<Rat>,
    pub limits: SearchLimits,
    pub verify_limits: VerifyLimits,
}

#[derive(Debug, Clone, Serialize)]
pub struct SurplusResult {
    pub allocation: SurplusAllocation,
    pub prices: PriceVector,
    #[serde(with = "serde_rat")]
    pub epsilon: Rat,
    pub surplus: usize,
    pub certificates: Vec<Certificate>,
    /// The acyclic equilibrium that was rounded.
    #[serde(skip)]
    pub market: MarketOutcome,
    #[serde(skip)]
    pub trace: Vec<TraceEvent>,
    #[serde(skip)]
    pub checkpoints: Vec<Vec<Rat>>,
    #[serde(skip)]
    pub parents: Vec<Option<usize>>,
}

/// `p(Y_i) >= 1 - epsilon` and some `c` in `Y_i` with `p(Y_i - c) <= 1 - epsilon`,
/// for every agent. Returns the first failing agent.
pub fn payment_window(alloc: &SurplusAllocation, prices: &PriceVector, epsilon: &Rat) -> Result<Option<usize>> {
    let threshold = Rat::one() - epsilon;
    for (i, b) in alloc.bundles().iter().enumerate() {
        let pay = bundle_payment(prices, b)?;
        let top = b
            .iter()
            .map(|c| prices[c.chore].clone())
            .max()
            .unwrap_or_else(Rat::zero);
        if pay < threshold || pay - top > threshold {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

/// Full pipeline: equilibrium, cycle cancellation, both rounding phases, and
/// re-verification of every guaranteed property.
pub fn fair_and_efficient(inst: &Instance, opts: &SolveOptions) -> Result<SurplusResult> {
    let (n, m) = (inst.agents(), inst.chores());
    if m == 0 {
        let allocation = SurplusAllocation::new(vec![Bundle::new(); n], 0)?;
        let prices = PriceVector::new(Vec::new())?;
        let certificates = vec![check_ef1(inst, &allocation)?, check_pef1(&prices, &allocation)?];
        return Ok(SurplusResult {
            market: MarketOutcome::ceei(
                crate::model::FractionalAllocation::new(vec![Vec::new(); n])?,
                prices.clone(),
                Rat::zero(),
            ),
            allocation,
            prices,
            epsilon: Rat::zero(),
            surplus: 0,
            certificates,
            trace: Vec::new(),
            checkpoints: Vec::new(),
            parents: vec![None; n],
        });
    }
    if let Some((agent, chore)) = inst.zero_entry() {
        return Err(Error::ZeroDisutility { agent, chore });
    }
    let eq = match opts.solver {
        CeeiSolver::Approx => {
            let eps = opts.epsilon.clone().unwrap_or_else(|| default_epsilon(inst));
            approx_ceei(inst, &eps)?
        }
        CeeiSolver::Exact if opts.limits.admits(inst) => exact_ceei(inst, opts.limits)?,
        CeeiSolver::Exact => descent_ceei(inst)?,
    };
    let market = make_acyclic(inst, &eq)?;
    let mut st = RoundingState::new(&market)?;
    phase1(&mut st)?;
    let allocation = phase2(&mut st)?;
    let prices = st.prices.clone();
    let epsilon = st.epsilon.clone();

    let fail = |what: String| Err(Error::CertificateFailure(what));
    let surplus = allocation.surplus_count();
    if surplus + 1 > n {
        return fail(format!("{surplus} surplus copies for {n} agents"));
    }
    if let Some(i) = payment_window(&allocation, &prices, &epsilon)? {
        return fail(format!("payment of agent {i} outside the rounding window"));
    }
    let mut certificates = vec![
        check_ef1(inst, &allocation)?,
        check_pef1(&prices, &allocation)?,
        check_fisher_eq(inst, &allocation, &prices)?,
    ];
    if fpo_lp_size(inst) <= opts.verify_limits.lp_variables {
        certificates.push(check_fpo(inst, &allocation, opts.verify_limits)?);
    }
    if let Some(c) = certificates.iter().find(|c| !c.holds) {
        return fail(format!("{:?} does not hold: {:?}", c.property, c.witness));
    }
    Ok(SurplusResult {
        allocation,
        prices,
        epsilon,
        surplus,
        certificates,
        market,
        trace: st.trace,
        checkpoints: st.checkpoints,
        parents: st.parents,
    })
}

/// Chores held in `bundle`, as original ids.
pub fn originals(bundle: &Bundle) -> BTreeSet<usize> {
    bundle.iter().map(|c| c.chore).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FractionalAllocation;
    use crate::rational::{int, rat};

    fn outcome(x: Vec<Vec<Rat>>, p: Vec<Rat>, eps: Rat) -> MarketOutcome {
        MarketOutcome::ceei(FractionalAllocation::new(x).unwrap(), PriceVector::new(p).unwrap(), eps)
    }

    #[test]
    fn integral_input_is_assigned_in_step_one() {
        let out = outcome(
            vec![vec![int(1), int(0)], vec![int(0), int(1)]],
            vec![int(1), int(1)],
            Rat::zero(),
        );
        let mut st = RoundingState::new(&out).unwrap();
        phase1(&mut st).unwrap();
        assert!(st
            .trace
            .iter()
            .all(|e| matches!(e, TraceEvent::Assign { phase: 1, .. })));
        assert_eq!(st.trace.len(), 2);
        let a = phase2(&mut st).unwrap();
        assert_eq!(a.surplus_count(), 0);
        assert_eq!(st.trace.len(), 2);
    }

    #[test]
    fn single_shared_chore_is_copied_to_every_agent() {
        let third = rat(1, 3);
        let out = outcome(
            vec![vec![third.clone()], vec![third.clone()], vec![third]],
            vec![int(3)],
            rat(1, 15),
        );
        let mut st = RoundingState::new(&out).unwrap();
        phase1(&mut st).unwrap();
        assert!(st.trace.is_empty());
        let a = phase2(&mut st).unwrap();
        assert_eq!(a.surplus_count(), 2);
        for i in 0..3 {
            assert_eq!(a.bundle(i).len(), 1);
        }
        assert_eq!(st.parents, vec![None, Some(0), Some(0)]);
    }

    #[test]
    fn two_agent_path_hand_trace() {
        let (h, z, o) = (rat(1, 2), int(0), int(1));
        let t = rat(2, 3);
        let out = outcome(
            vec![vec![o.clone(), h.clone(), z.clone()], vec![z, h, o]],
            vec![t.clone(), t.clone(), t],
            rat(1, 30),
        );
        let mut st = RoundingState::new(&out).unwrap();
        phase1(&mut st).unwrap();
        assert_eq!(
            st.trace,
            vec![
                TraceEvent::Assign {
                    phase: 1,
                    agent: 0,
                    chore: 0
                },
                TraceEvent::Assign {
                    phase: 1,
                    agent: 1,
                    chore: 2
                },
            ]
        );
        let a = phase2(&mut st).unwrap();
        let b0: Vec<ChoreCopy> = a.bundle(0).iter().copied().collect();
        let b1: Vec<ChoreCopy> = a.bundle(1).iter().copied().collect();
        assert_eq!(b0, vec![ChoreCopy::original(0), ChoreCopy::original(1)]);
        assert_eq!(b1, vec![ChoreCopy { chore: 1, copy: 1 }, ChoreCopy::original(2)]);
        assert_eq!(a.surplus_count(), 1);
    }

    #[test]
    fn pipeline_examples() {
        let opts = SolveOptions::default();
        let inst = Instance::from_ints(&[vec![1], vec![1], vec![1]]).unwrap();
        let r = fair_and_efficient(&inst, &opts).unwrap();
        assert_eq!(r.surplus, 2);
        assert!(r.certificates.iter().all(|c| c.holds));

        let inst = Instance::from_ints(&[vec![4, 7, 1]]).unwrap();
        let r = fair_and_efficient(&inst, &opts).unwrap();
        assert_eq!(r.surplus, 0);
        assert_eq!(r.allocation.bundle(0).len(), 3);

        let inst = Instance::from_ints(&[vec![1, 2], vec![2, 1]]).unwrap();
        let exact = SolveOptions {
            solver: CeeiSolver::Exact,
            ..SolveOptions::default()
        };
        let r = fair_and_efficient(&inst, &exact).unwrap();
        assert_eq!(r.prices.as_slice(), &[int(1), int(1)]);
        assert_eq!(originals(r.allocation.bundle(0)), [0].into());
        assert_eq!(originals(r.allocation.bundle(1)), [1].into());
        assert_eq!(r.epsilon, Rat::zero());
    }

    #[test]
    fn empty_and_zero_instances() {
        let inst = Instance::with_chores(vec![vec![], vec![]], Some(0)).unwrap();
        let r = fair_and_efficient(&inst, &SolveOptions::default()).unwrap();
        assert_eq!(r.allocation.item_count(), 0);
        let inst = Instance::from_ints(&[vec![0, 1], vec![1, 1]]).unwrap();
        assert!(matches!(
            fair_and_efficient(&inst, &SolveOptions::default()),
            Err(Error::ZeroDisutility { agent: 0, chore: 0 })
        ));
    }

    #[test]
    fn cyclic_input_is_rejected() {
        let h = rat(1, 2);
        let out = outcome(
            vec![vec![h.clone(), h.clone()], vec![h.clone(), h]],
            vec![int(1), int(1)],
            Rat::zero(),
        );
        assert!(matches!(RoundingState::new(&out), Err(Error::InvalidInput(_))));
    }
}
