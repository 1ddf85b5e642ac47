//! Three agents: an allocation that is tEFX or proportional.
//!
//! Agents `0, 1, 2` here play the roles of the first, second and third agent
//! of the construction: bundles are grown from an EFX split for agent 0,
//! agent 2 keeps a bundle she finds tEFX-feasible, and agent 1 picks last.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Instance, SurplusAllocation};
use crate::rational::{common_denominator, serde_rat, Rat};
use crate::verify::{check_proportional, check_tefx, Certificate};

/// Three disjoint chore sets covering all chores.
pub type Partition3 = [BTreeSet<usize>; 3];

/// Adds `epsilon * 2^(c+1)` to every entry of column `c`, where
/// `epsilon = 1 / (2 D 2^(m+1))` and `D` is the least common denominator of
/// the entries. All subset sums become distinct and strict preferences keep
/// their direction.
pub fn perturb_nondegenerate(inst: &Instance) -> (Instance, Rat) {
    let m = inst.chores();
    let d = common_denominator(inst.rows().iter().flatten());
    let epsilon = Rat::new(BigInt::one(), d * 2 * (BigInt::one() << (m + 1)));
    let rows = inst
        .rows()
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(c, v)| v + &epsilon * Rat::from_integer(BigInt::one() << (c + 1)))
                .collect()
        })
        .collect();
    let out = Instance::with_chores(rows, Some(m)).expect("same shape, larger entries");
    (out, epsilon)
}

/// Greedy EFX split for identical disutilities: chores in non-increasing `d`
/// (ties by id), each to the currently cheapest bundle (ties by index).
pub fn efx_identical(d: &[Rat], n: usize) -> Vec<BTreeSet<usize>> {
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&a, &b| d[b].cmp(&d[a]).then(a.cmp(&b)));
    let mut bundles = vec![BTreeSet::new(); n];
    let mut load = vec![Rat::zero(); n];
    if n == 0 {
        return bundles;
    }
    for c in order {
        let j = (0..n)
            .min_by(|&a, &b| load[a].cmp(&load[b]).then(a.cmp(&b)))
            .expect("n > 0");
        bundles[j].insert(c);
        load[j] += &d[c];
    }
    bundles
}

fn cost(inst: &Instance, agent: usize, set: &BTreeSet<usize>) -> Rat {
    inst.cost_of(agent, set.iter().copied())
}

/// Whether `agent` would accept bundle `k` of `p` under tEFX: moving her
/// cheapest chore of the bundle to any other bundle removes all envy.
pub fn tefx_feasible(inst: &Instance, agent: usize, k: usize, p: &Partition3) -> bool {
    let Some(cheapest) = p[k].iter().map(|&c| inst.d(agent, c)).min() else {
        return true;
    };
    let reduced = cost(inst, agent, &p[k]) - cheapest;
    (0..3).all(|j| j == k || reduced <= cost(inst, agent, &p[j]) + cheapest)
}

/// Bundle index per agent, agent 0 first.
pub type Assignment = [usize; 3];

const PERMUTATIONS: [Assignment; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Acceptability matrix: agents 0 and 2 accept their tEFX-feasible bundles,
/// agent 1 accepts only her cheapest bundles.
pub fn acceptability(inst: &Instance, p: &Partition3) -> [[bool; 3]; 3] {
    let mut acc = [[false; 3]; 3];
    for agent in [0, 2] {
        for k in 0..3 {
            acc[agent][k] = tefx_feasible(inst, agent, k, p);
        }
    }
    let costs: Vec<Rat> = (0..3).map(|k| cost(inst, 1, &p[k])).collect();
    let best = costs.iter().min().expect("three bundles");
    for k in 0..3 {
        acc[1][k] = costs[k] == *best;
    }
    acc
}

/// The lexicographically first perfect matching of agents to acceptable bundles.
pub fn terminal_assignment(inst: &Instance, p: &Partition3) -> Option<Assignment> {
    let acc = acceptability(inst, p);
    PERMUTATIONS.into_iter().find(|perm| (0..3).all(|a| acc[a][perm[a]]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Kind {
    #[serde(rename = "tEFX")]
    TEFX,
    Proportional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// An acceptable assignment exists.
    Terminal,
    /// Moving one chore to the third bundle kept every invariant.
    MoveChore,
    /// After the move, chores went from the second to the first bundle.
    Transfer,
    /// The transfer left the third bundle infeasible; bundles are handed out
    /// proportionally.
    Proportional,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// `|B_1| + |B_2|` at the start of the iteration.
    pub phi: usize,
    pub branch: Branch,
    /// Chores moved during the iteration, in order.
    pub moved: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThreeResult {
    pub kind: Kind,
    /// Bundle index of each agent.
    pub assignment: Assignment,
    pub partition: Partition3,
    pub allocation: SurplusAllocation,
    #[serde(with = "serde_rat")]
    pub perturbation: Rat,
    pub certificate: Certificate,
    pub trace: Vec<IterationRecord>,
    /// Number of iterations that changed the partition.
    pub iterations: usize,
}

fn check_invariants(inst: &Instance, p: &Partition3, iteration: usize) -> Result<()> {
    let fail = |detail: String| Err(Error::InvariantViolation { iteration, detail });
    for k in [0, 1] {
        if !tefx_feasible(inst, 0, k, p) {
            return fail(format!("bundle {k} is not tEFX-feasible for agent 0"));
        }
        if let Some(cheapest) = p[k].iter().map(|&c| inst.d(0, c)).min() {
            if cost(inst, 0, &p[k]) - cheapest > cost(inst, 0, &p[2]) {
                return fail(format!("bundle {k} minus a chore beats bundle 2 for agent 0"));
            }
        }
    }
    if !tefx_feasible(inst, 2, 2, p) {
        return fail("bundle 2 is not tEFX-feasible for agent 2".into());
    }
    Ok(())
}

fn phi(p: &Partition3) -> usize {
    p[0].len() + p[1].len()
}

struct LoopOutcome {
    kind: Kind,
    assignment: Assignment,
    partition: Partition3,
    trace: Vec<IterationRecord>,
    iterations: usize,
}

/// The main loop on an instance assumed non-degenerate.
fn run_loop(inst: &Instance) -> Result<LoopOutcome> {
    let m = inst.chores();
    let split = efx_identical(inst.row(0), 3);
    // B_3 <=_2 B_1 <=_2 B_2 in agent 2's eyes: cheapest last, priciest second.
    let mut by_cost: Vec<BTreeSet<usize>> = split;
    by_cost.sort_by_cached_key(|b| cost(inst, 2, b));
    let [low, mid, high]: [BTreeSet<usize>; 3] = by_cost.try_into().expect("three bundles");
    let mut p: Partition3 = [mid, high, low];
    let mut trace = Vec::new();
    let mut iterations = 0;
    loop {
        let iteration = trace.len();
        if cost(inst, 2, &p[0]) > cost(inst, 2, &p[1]) {
            p.swap(0, 1);
        }
        check_invariants(inst, &p, iteration)?;
        let phi_before = phi(&p);
        if let Some(assignment) = terminal_assignment(inst, &p) {
            trace.push(IterationRecord {
                iteration,
                phi: phi_before,
                branch: Branch::Terminal,
                moved: Vec::new(),
            });
            return Ok(LoopOutcome {
                kind: Kind::TEFX,
                assignment,
                partition: p,
                trace,
                iterations,
            });
        }
        if iterations >= m {
            return Err(Error::NonTermination(iterations));
        }
        // Only B_3 is acceptable to agent 2: hand her B_1's chore she minds least.
        let c1 = *p[0]
            .iter()
            .min_by(|&&a, &&b| inst.d(2, a).cmp(inst.d(2, b)).then(a.cmp(&b)))
            .ok_or_else(|| Error::InvariantViolation {
                iteration,
                detail: "bundle 0 is empty but infeasible for agent 2".into(),
            })?;
        let mut next = p.clone();
        next[0].remove(&c1);
        next[2].insert(c1);
        let mut moved = vec![c1];
        let branch = if tefx_feasible(inst, 0, 1, &next) {
            Branch::MoveChore
        } else {
            // Shift agent 0's cheapest chores from B_2 to B_1 until B_2 is no
            // longer strongly envied against B_1.
            let mut rest: Vec<usize> = next[1].iter().copied().collect();
            rest.sort_by(|&a, &b| inst.d(0, a).cmp(inst.d(0, b)).then(a.cmp(&b)));
            for c in rest {
                let dc = inst.d(0, c);
                if cost(inst, 0, &next[1]) - dc > cost(inst, 0, &next[0]) + dc {
                    next[1].remove(&c);
                    next[0].insert(c);
                    moved.push(c);
                } else {
                    break;
                }
            }
            if tefx_feasible(inst, 2, 2, &next) {
                Branch::Transfer
            } else {
                Branch::Proportional
            }
        };
        trace.push(IterationRecord {
            iteration,
            phi: phi_before,
            branch,
            moved,
        });
        if branch == Branch::Proportional {
            let pick = (0..3)
                .min_by(|&a, &b| cost(inst, 1, &next[a]).cmp(&cost(inst, 1, &next[b])).then(a.cmp(&b)))
                .expect("three bundles");
            let assignment = match pick {
                0 => [1, 0, 2],
                1 => [0, 1, 2],
                _ => [0, 2, 1],
            };
            return Ok(LoopOutcome {
                kind: Kind::Proportional,
                assignment,
                partition: next,
                trace,
                iterations: iterations + 1,
            });
        }
        if phi(&next) >= phi_before {
            return Err(Error::InvariantViolation {
                iteration,
                detail: format!("potential went from {phi_before} to {}", phi(&next)),
            });
        }
        p = next;
        iterations += 1;
    }
}

/// Runs the loop on the perturbed instance and certifies the result on `inst`.
pub fn solve_three(inst: &Instance) -> Result<ThreeResult> {
    if inst.agents() != 3 {
        return Err(Error::WrongAgentCount(inst.agents()));
    }
    let (perturbed, perturbation) = perturb_nondegenerate(inst);
    let out = run_loop(&perturbed)?;
    let sets: Vec<BTreeSet<usize>> = out.assignment.iter().map(|&k| out.partition[k].clone()).collect();
    let allocation = SurplusAllocation::from_chore_sets(&sets, inst.chores())?;
    let certificate = match out.kind {
        Kind::TEFX => check_tefx(inst, &allocation)?,
        Kind::Proportional => check_proportional(inst, &allocation)?,
    };
    if !certificate.holds {
        return Err(Error::CertificateFailure(format!(
            "{:?} does not hold on the original instance: {:?}",
            out.kind, certificate.witness
        )));
    }
    Ok(ThreeResult {
        kind: out.kind,
        assignment: out.assignment,
        partition: out.partition,
        allocation,
        perturbation,
        certificate,
        trace: out.trace,
        iterations: out.iterations,
    })
}
