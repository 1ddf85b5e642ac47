use num_traits::{Signed, Zero};

use super::{check_shape, costs_for, Certificate, Property, VerifyLimits, Witness};
use crate::error::{Error, Result};
use crate::lp::{solve, LpOutcome, StandardLp};
use crate::model::{ChoreCopy, Instance, SurplusAllocation};
use crate::rational::Rat;

/// `n^items`, saturating.
pub fn po_candidates(inst: &Instance, alloc: &SurplusAllocation) -> u64 {
    let n = inst.agents() as u64;
    (0..alloc.item_count()).fold(1u64, |acc, _| acc.saturating_mul(n))
}

/// Variables of each fractional Pareto LP: `n * m` amounts plus `n` slacks.
pub fn fpo_lp_size(inst: &Instance) -> usize {
    inst.agents() * (inst.chores() + 1)
}

struct Brute<'a> {
    inst: &'a Instance,
    items: Vec<ChoreCopy>,
    bound: Vec<Rat>,
    cost: Vec<Rat>,
    owner: Vec<usize>,
}

impl Brute<'_> {
    /// Depth-first over owners of items `k..`; a branch dies as soon as some
    /// agent exceeds its current cost (disutilities are non-negative).
    fn search(&mut self, k: usize) -> Option<usize> {
        if k == self.items.len() {
            return (0..self.cost.len()).find(|&i| self.cost[i] < self.bound[i]);
        }
        let c = self.items[k].chore;
        for i in 0..self.cost.len() {
            let next = &self.cost[i] + self.inst.d(i, c);
            if next > self.bound[i] {
                continue;
            }
            let prev = std::mem::replace(&mut self.cost[i], next);
            self.owner[k] = i;
            if let Some(hit) = self.search(k + 1) {
                return Some(hit);
            }
            self.cost[i] = prev;
        }
        None
    }
}

/// Exhaustive Pareto check over all reassignments of the held items.
pub fn check_po_brute(inst: &Instance, alloc: &SurplusAllocation, limits: VerifyLimits) -> Result<Certificate> {
    check_shape(inst, alloc)?;
    let candidates = po_candidates(inst, alloc);
    if candidates > limits.po_candidates {
        return Err(Error::InstanceTooLarge(format!(
            "{candidates} candidate allocations exceed the limit of {}",
            limits.po_candidates
        )));
    }
    let n = inst.agents();
    let bound: Vec<Rat> = (0..n).map(|i| costs_for(inst, alloc, i)[i].clone()).collect();
    let mut items: Vec<ChoreCopy> = alloc.items().map(|(_, c)| c).collect();
    items.sort();
    let k = items.len();
    let mut brute = Brute {
        inst,
        items,
        bound,
        cost: vec![Rat::zero(); n],
        owner: vec![0; k],
    };
    match brute.search(0) {
        None => Ok(Certificate::holds(Property::PO)),
        Some(improved) => {
            let mut bundles = vec![Vec::new(); n];
            for (item, &i) in brute.items.iter().zip(&brute.owner) {
                bundles[i].push(*item);
            }
            Ok(Certificate::fails(
                Property::PO,
                Witness::Dominated { improved, bundles },
            ))
        }
    }
}

/// Fractional Pareto check: for each agent `j`, minimise `d_j(y_j)` over
/// fractional reallocations `y` of the held item multiset subject to
/// `d_i(y_i) <= d_i(Y_i)` for all `i`. The allocation is fPO iff every
/// optimum equals `d_j(Y_j)`.
pub fn check_fpo(inst: &Instance, alloc: &SurplusAllocation, limits: VerifyLimits) -> Result<Certificate> {
    check_shape(inst, alloc)?;
    let (n, m) = (inst.agents(), inst.chores());
    if fpo_lp_size(inst) > limits.lp_variables {
        return Err(Error::InstanceTooLarge(format!(
            "{} LP variables exceed the limit of {}",
            fpo_lp_size(inst),
            limits.lp_variables
        )));
    }
    let mult = alloc.multiplicities();
    let bound: Vec<Rat> = (0..n).map(|i| costs_for(inst, alloc, i)[i].clone()).collect();
    // Variable y(i, c) sits at i * m + c; slack s_i at n * m + i.
    let vars = n * m + n;
    let zero_row = vec![Rat::zero(); vars];
    let mut a = Vec::with_capacity(m + n);
    let mut b = Vec::with_capacity(m + n);
    for (c, &k) in mult.iter().enumerate() {
        let mut row = zero_row.clone();
        for i in 0..n {
            row[i * m + c] = Rat::from_integer(1.into());
        }
        a.push(row);
        b.push(Rat::from_integer(k.into()));
    }
    for i in 0..n {
        let mut row = zero_row.clone();
        for c in 0..m {
            row[i * m + c] = inst.d(i, c).clone();
        }
        row[n * m + i] = Rat::from_integer(1.into());
        a.push(row);
        b.push(bound[i].clone());
    }
    for j in 0..n {
        let mut cost = zero_row.clone();
        for c in 0..m {
            cost[j * m + c] = inst.d(j, c).clone();
        }
        let lp = StandardLp {
            a: a.clone(),
            b: b.clone(),
            c: cost,
        };
        match solve(&lp) {
            LpOutcome::Optimal { x, value } => {
                if value < bound[j] {
                    let amounts = (0..n).map(|i| x[i * m..(i + 1) * m].to_vec()).collect();
                    return Ok(Certificate::fails(
                        Property::FPO,
                        Witness::FractionallyDominated { improved: j, amounts },
                    ));
                }
            }
            other => {
                // The allocation itself is feasible and costs are bounded below.
                return Err(Error::CertificateFailure(format!(
                    "fractional Pareto LP for agent {j} returned {other:?}"
                )));
            }
        }
    }
    Ok(Certificate::holds(Property::FPO))
}

/// `amounts` is a fractional reallocation of `mult` copies per chore.
pub(crate) fn is_reallocation(amounts: &[Vec<Rat>], mult: &[usize]) -> bool {
    if amounts
        .iter()
        .any(|r| r.len() != mult.len() || r.iter().any(Signed::is_negative))
    {
        return false;
    }
    mult.iter()
        .enumerate()
        .all(|(c, &k)| amounts.iter().map(|r| &r[c]).sum::<Rat>() == Rat::from_integer(k.into()))
}
