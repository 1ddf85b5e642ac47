use num_traits::Zero;

use super::{check_shape, costs_for, Certificate, Property, VerifyLimits, Witness};
use crate::equilibrium::verify_fisher_equilibrium;
use crate::error::{Error, Result};
use crate::model::{
    bundle_payment, ChoreCopy, FractionalAllocation, Instance, MarketOutcome, PriceVector, SurplusAllocation,
};
use crate::rational::Rat;

/// The item of `agent`'s bundle with extreme disutility for `agent`; ties go to
/// the smallest item.
fn extreme_item(inst: &Instance, alloc: &SurplusAllocation, agent: usize, largest: bool) -> Option<ChoreCopy> {
    let mut best: Option<ChoreCopy> = None;
    for &item in alloc.bundle(agent) {
        let better = match best {
            None => true,
            Some(b) => {
                let (v, w) = (inst.d(agent, item.chore), inst.d(agent, b.chore));
                if largest {
                    v > w
                } else {
                    v < w
                }
            }
        };
        if better {
            best = Some(item);
        }
    }
    best
}

/// EF1: for every pair, either no envy or removing some own item removes it.
pub fn check_ef1(inst: &Instance, alloc: &SurplusAllocation) -> Result<Certificate> {
    check_shape(inst, alloc)?;
    for i in 0..inst.agents() {
        let costs = costs_for(inst, alloc, i);
        let relief = extreme_item(inst, alloc, i, true).map_or_else(Rat::zero, |c| inst.d(i, c.chore).clone());
        for j in 0..inst.agents() {
            if i != j && costs[i] > costs[j] && &costs[i] - &relief > costs[j] {
                return Ok(Certificate::fails(
                    Property::EF1,
                    Witness::Envy {
                        envious: i,
                        envied: j,
                        chore: extreme_item(inst, alloc, i, true),
                    },
                ));
            }
        }
    }
    Ok(Certificate::holds(Property::EF1))
}

/// EFX: removing any own item removes the envy.
pub fn check_efx(inst: &Instance, alloc: &SurplusAllocation) -> Result<Certificate> {
    check_shape(inst, alloc)?;
    for i in 0..inst.agents() {
        let Some(c) = extreme_item(inst, alloc, i, false) else {
            continue;
        };
        let costs = costs_for(inst, alloc, i);
        let reduced = &costs[i] - inst.d(i, c.chore);
        for j in 0..inst.agents() {
            if i != j && reduced > costs[j] {
                return Ok(Certificate::fails(
                    Property::EFX,
                    Witness::Envy {
                        envious: i,
                        envied: j,
                        chore: Some(c),
                    },
                ));
            }
        }
    }
    Ok(Certificate::holds(Property::EFX))
}

/// tEFX: transferring any own item to the envied bundle removes the envy. For
/// additive disutilities the cheapest item is the binding one.
pub fn check_tefx(inst: &Instance, alloc: &SurplusAllocation) -> Result<Certificate> {
    check_shape(inst, alloc)?;
    for i in 0..inst.agents() {
        let Some(c) = extreme_item(inst, alloc, i, false) else {
            continue;
        };
        let costs = costs_for(inst, alloc, i);
        let dc = inst.d(i, c.chore);
        let reduced = &costs[i] - dc;
        for j in 0..inst.agents() {
            if i != j && reduced > &costs[j] + dc {
                return Ok(Certificate::fails(
                    Property::TEFX,
                    Witness::Envy {
                        envious: i,
                        envied: j,
                        chore: Some(c),
                    },
                ));
            }
        }
    }
    Ok(Certificate::holds(Property::TEFX))
}

/// `d_i(Y_i) <= d_i(items) / n`, where `items` is the multiset actually allocated
/// (the chore set itself when there are no copies).
pub fn check_proportional(inst: &Instance, alloc: &SurplusAllocation) -> Result<Certificate> {
    check_shape(inst, alloc)?;
    let n = Rat::from_integer(inst.agents().into());
    for i in 0..inst.agents() {
        let costs = costs_for(inst, alloc, i);
        let total: Rat = costs.iter().sum();
        let share = total / &n;
        if costs[i] > share {
            return Ok(Certificate::fails(
                Property::Proportional,
                Witness::Disproportionate {
                    agent: i,
                    cost: costs[i].clone(),
                    share,
                },
            ));
        }
    }
    Ok(Certificate::holds(Property::Proportional))
}

/// pEF1: every non-empty bundle drops to at most any other bundle's payment
/// after removing its most expensive item.
pub fn check_pef1(prices: &PriceVector, alloc: &SurplusAllocation) -> Result<Certificate> {
    if prices.len() != alloc.chores() {
        return Err(Error::InvalidInput(format!(
            "{} prices for {} chores",
            prices.len(),
            alloc.chores()
        )));
    }
    let pay: Vec<Rat> = alloc
        .bundles()
        .iter()
        .map(|b| bundle_payment(prices, b))
        .collect::<Result<_>>()?;
    for (i, b) in alloc.bundles().iter().enumerate() {
        let Some(top) = b.iter().map(|c| &prices[c.chore]).max() else {
            continue;
        };
        let reduced = &pay[i] - top;
        for (j, pj) in pay.iter().enumerate() {
            if i != j && reduced > *pj {
                return Ok(Certificate::fails(
                    Property::PEF1,
                    Witness::PaymentEnvy { envious: i, envied: j },
                ));
            }
        }
    }
    Ok(Certificate::holds(Property::PEF1))
}

/// The market in which every held item is its own chore: the instance with
/// one column per item (in item order), the integral allocation, item prices
/// and budgets `p(Y_i)`, at `epsilon = 0`.
pub fn expanded_market(
    inst: &Instance,
    alloc: &SurplusAllocation,
    prices: &PriceVector,
) -> Result<(Instance, MarketOutcome, Vec<ChoreCopy>)> {
    check_shape(inst, alloc)?;
    if prices.len() != inst.chores() {
        return Err(Error::InvalidInput(format!(
            "{} prices for {} chores",
            prices.len(),
            inst.chores()
        )));
    }
    let mut items: Vec<(ChoreCopy, usize)> = alloc.items().map(|(i, c)| (c, i)).collect();
    items.sort();
    let rows = (0..inst.agents())
        .map(|i| items.iter().map(|(c, _)| inst.d(i, c.chore).clone()).collect())
        .collect();
    let big = Instance::with_chores(rows, Some(items.len()))?;
    let owner: Vec<usize> = items.iter().map(|&(_, i)| i).collect();
    let x = FractionalAllocation::integral(inst.agents(), &owner)?;
    let p = PriceVector::new(items.iter().map(|(c, _)| prices[c.chore].clone()).collect())?;
    let budgets = alloc
        .bundles()
        .iter()
        .map(|b| bundle_payment(prices, b))
        .collect::<Result<_>>()?;
    let out = MarketOutcome {
        x,
        prices: p,
        budgets,
        epsilon: Rat::zero(),
    };
    Ok((big, out, items.into_iter().map(|(c, _)| c).collect()))
}

/// Fisher equilibrium of the expanded market with budgets `p(Y_i)`.
pub fn check_fisher_eq(inst: &Instance, alloc: &SurplusAllocation, prices: &PriceVector) -> Result<Certificate> {
    let (big, out, _) = expanded_market(inst, alloc, prices)?;
    let report = verify_fisher_equilibrium(&big, &out);
    Ok(if report.pass() {
        Certificate::holds(Property::FisherEq)
    } else {
        Certificate::fails(Property::FisherEq, Witness::Equilibrium { report })
    })
}

/// No agent has two distinct chore subsets of equal disutility.
pub fn check_nondegenerate(inst: &Instance, limits: VerifyLimits) -> Result<Certificate> {
    let m = inst.chores();
    if m > limits.subset_chores || m >= usize::BITS as usize {
        return Err(Error::InstanceTooLarge(format!(
            "2^{m} subset sums exceed the limit of 2^{}",
            limits.subset_chores
        )));
    }
    let masks = |mask: usize| (0..m).filter(|&c| mask >> c & 1 == 1).collect::<Vec<_>>();
    for i in 0..inst.agents() {
        // sums[mask + 2^c] = sums[mask] + d_i(c)
        let mut sums: Vec<Rat> = Vec::with_capacity(1 << m);
        sums.push(Rat::zero());
        for c in 0..m {
            let d = inst.d(i, c);
            for k in 0..sums.len() {
                let v = &sums[k] + d;
                sums.push(v);
            }
        }
        let mut order: Vec<usize> = (0..sums.len()).collect();
        order.sort_by(|&a, &b| sums[a].cmp(&sums[b]).then(a.cmp(&b)));
        if let Some(w) = order.windows(2).find(|w| sums[w[0]] == sums[w[1]]) {
            return Ok(Certificate::fails(
                Property::NonDegenerate,
                Witness::EqualSubsets {
                    agent: i,
                    first: masks(w[0]),
                    second: masks(w[1]),
                },
            ));
        }
    }
    Ok(Certificate::holds(Property::NonDegenerate))
}
