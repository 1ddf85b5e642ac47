use num_traits::Zero;

use super::efficiency::is_reallocation;
use super::{expanded_market, Certificate, Property, Witness};
use crate::model::{bundle_payment, ChoreCopy, Instance, PriceVector, SurplusAllocation};
use crate::rational::Rat;

/// Re-evaluates a failed certificate's witness from scratch. Returns true iff
/// the certificate is negative and its witness exhibits the violation.
pub fn witness_reproduces(
    inst: &Instance,
    alloc: &SurplusAllocation,
    prices: Option<&PriceVector>,
    cert: &Certificate,
) -> bool {
    let (false, Some(w)) = (cert.holds, &cert.witness) else {
        return false;
    };
    let n = inst.agents();
    let cost = |i: usize, b: &mut dyn Iterator<Item = &ChoreCopy>| -> Rat {
        b.fold(Rat::zero(), |acc, c| acc + inst.d(i, c.chore))
    };
    let own = |i: usize, j: usize| cost(i, &mut alloc.bundle(j).iter());
    match (cert.property, w) {
        (
            Property::EF1,
            Witness::Envy {
                envious: i, envied: j, ..
            },
        ) => {
            let (i, j) = (*i, *j);
            i < n
                && j < n
                && i != j
                && own(i, i) > own(i, j)
                && alloc
                    .bundle(i)
                    .iter()
                    .all(|c| own(i, i) - inst.d(i, c.chore) > own(i, j))
        }
        (
            Property::EFX,
            Witness::Envy {
                envious: i,
                envied: j,
                chore: Some(c),
            },
        ) => {
            let (i, j) = (*i, *j);
            i < n && j < n && i != j && alloc.bundle(i).contains(c) && own(i, i) - inst.d(i, c.chore) > own(i, j)
        }
        (
            Property::TEFX,
            Witness::Envy {
                envious: i,
                envied: j,
                chore: Some(c),
            },
        ) => {
            let (i, j) = (*i, *j);
            i < n
                && j < n
                && i != j
                && alloc.bundle(i).contains(c)
                && own(i, i) - inst.d(i, c.chore) > own(i, j) + inst.d(i, c.chore)
        }
        (Property::PEF1, Witness::PaymentEnvy { envious: i, envied: j }) => {
            let Some(p) = prices else { return false };
            let (i, j) = (*i, *j);
            if i >= n || j >= n || i == j || alloc.bundle(i).is_empty() {
                return false;
            }
            let (Ok(pi), Ok(pj)) = (bundle_payment(p, alloc.bundle(i)), bundle_payment(p, alloc.bundle(j))) else {
                return false;
            };
            alloc.bundle(i).iter().all(|c| &pi - &p[c.chore] > pj)
        }
        (Property::Proportional, Witness::Disproportionate { agent, cost: c, share }) => {
            let i = *agent;
            if i >= n {
                return false;
            }
            let total = alloc.items().fold(Rat::zero(), |acc, (_, c)| acc + inst.d(i, c.chore));
            let fair = total / Rat::from_integer(n.into());
            *c == own(i, i) && *share == fair && own(i, i) > fair
        }
        (Property::PO, Witness::Dominated { improved, bundles }) => {
            let mut held: Vec<ChoreCopy> = alloc.items().map(|(_, c)| c).collect();
            let mut moved: Vec<ChoreCopy> = bundles.iter().flatten().copied().collect();
            held.sort();
            moved.sort();
            bundles.len() == n
                && *improved < n
                && held == moved
                && (0..n).all(|i| cost(i, &mut bundles[i].iter()) <= own(i, i))
                && cost(*improved, &mut bundles[*improved].iter()) < own(*improved, *improved)
        }
        (Property::FPO, Witness::FractionallyDominated { improved, amounts }) => {
            let m = inst.chores();
            let frac = |i: usize| -> Rat { (0..m).map(|c| inst.d(i, c) * &amounts[i][c]).sum() };
            amounts.len() == n
                && *improved < n
                && is_reallocation(amounts, &alloc.multiplicities())
                && (0..n).all(|i| frac(i) <= own(i, i))
                && frac(*improved) < own(*improved, *improved)
        }
        (Property::FisherEq, Witness::Equilibrium { report }) => {
            let Some(p) = prices else { return false };
            let Ok((_, _, items)) = expanded_market(inst, alloc, p) else {
                return false;
            };
            if report.mpb_violations.is_empty() {
                // Integral allocations always clear and earn their budgets
                // exactly, so only MPB violations can be genuine.
                return false;
            }
            report.mpb_violations.iter().all(|v| {
                let Some(item) = items.get(v.chore) else { return false };
                let ratio = inst.d(v.agent, item.chore) / &p[item.chore];
                v.agent < n
                    && alloc.bundle(v.agent).contains(item)
                    && ratio == v.ratio
                    && (0..inst.chores()).any(|c| inst.d(v.agent, c) / &p[c] < ratio)
            })
        }
        (Property::NonDegenerate, Witness::EqualSubsets { agent, first, second }) => {
            let i = *agent;
            let valid = |s: &[usize]| s.windows(2).all(|w| w[0] < w[1]) && s.iter().all(|&c| c < inst.chores());
            i < n
                && first != second
                && valid(first)
                && valid(second)
                && inst.cost_of(i, first.iter().copied()) == inst.cost_of(i, second.iter().copied())
        }
        _ => false,
    }
}
