//! Exact price-adjustment solver for (approximate) CEEI.
//!
//! Agents carry scales `beta[i] > 0` and chore prices are
//! `p[c] = min_i beta[i] * d[i][c]`, so an agent's MPB chores are exactly
//! those where it attains the minimum. Each round routes payments along the
//! MPB graph with a max-flow. When the market cannot clear, the minimum cut
//! exposes a group of agents (those not reachable from the source) whose MPB
//! chores are worth less than their head count. Their scales are lowered
//! together until one of them ties on a further chore, then all prices are
//! renormalised to sum to `n`.
//!
//! Lowering such a group strictly decreases `sum_i ln beta[i]` on the
//! normalised surface `sum_c p[c] = n`, and that function is stationary
//! exactly at equal incomes, so every round makes strict progress.

use num_traits::{Signed, Zero};

use super::routing::PaymentNetwork;
use crate::error::{Error, Result};
use crate::model::{FractionalAllocation, Instance, MarketOutcome, PriceVector};
use crate::rational::{one, sum, Rat};

pub const DEFAULT_ROUND_CAP: usize = 100_000;

#[derive(Debug, Clone)]
pub(crate) struct Scales {
    pub beta: Vec<Rat>,
}

impl Scales {
    pub fn prices(&self, inst: &Instance) -> Vec<Rat> {
        (0..inst.chores())
            .map(|c| {
                (0..inst.agents())
                    .map(|i| &self.beta[i] * inst.d(i, c))
                    .min()
                    .expect("n >= 1")
            })
            .collect()
    }

    /// For each chore, the agents attaining its price.
    pub fn holders(&self, inst: &Instance, prices: &[Rat]) -> Vec<Vec<usize>> {
        (0..inst.chores())
            .map(|c| {
                (0..inst.agents())
                    .filter(|&i| &self.beta[i] * inst.d(i, c) == prices[c])
                    .collect()
            })
            .collect()
    }

    fn normalise(&mut self, inst: &Instance) {
        let total = sum(&self.prices(inst));
        let s = Rat::from_integer(inst.agents().into()) / total;
        for b in &mut self.beta {
            *b *= &s;
        }
    }
}

pub(crate) fn validate_market(inst: &Instance) -> Result<()> {
    if inst.chores() == 0 {
        return Err(Error::NoChores);
    }
    if let Some((agent, chore)) = inst.zero_entry() {
        return Err(Error::ZeroDisutility { agent, chore });
    }
    Ok(())
}

/// A `(1 - epsilon)`-CEEI of `inst`, verified before return.
pub fn approx_ceei(inst: &Instance, epsilon: &Rat) -> Result<MarketOutcome> {
    approx_ceei_with_cap(inst, epsilon, DEFAULT_ROUND_CAP)
}

pub fn approx_ceei_with_cap(inst: &Instance, epsilon: &Rat, cap: usize) -> Result<MarketOutcome> {
    if !epsilon.is_positive() || *epsilon >= one() {
        return Err(Error::InvalidInput(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    descend(inst, epsilon, cap).map(|(out, _)| out)
}

/// Runs the solver to an exact CEEI (`epsilon = 0`).
pub fn descent_ceei(inst: &Instance) -> Result<MarketOutcome> {
    descend(inst, &Rat::zero(), DEFAULT_ROUND_CAP).map(|(out, _)| out)
}

/// Returns the verified outcome and the number of rounds used.
pub(crate) fn descend(inst: &Instance, epsilon: &Rat, cap: usize) -> Result<(MarketOutcome, usize)> {
    validate_market(inst)?;
    let n = inst.agents();
    let low = one() - epsilon;
    let high = one() + epsilon;
    let mut scales = Scales { beta: vec![one(); n] };
    scales.normalise(inst);

    for round in 0..cap {
        let prices = scales.prices(inst);
        let holders = scales.holders(inst, &prices);
        let net = PaymentNetwork {
            agents: n,
            prices: &prices,
            holders: &holders,
        };
        if let Some(e) = net.route(&low, &high) {
            let out = outcome_from_earnings(&e, prices, epsilon.clone());
            let report = super::verify_fisher_equilibrium(inst, &out);
            if !report.pass() {
                return Err(Error::CertificateFailure(format!(
                    "solver produced an unverified outcome: {report:?}"
                )));
            }
            return Ok((out, round));
        }
        let cut = net.route_unit();
        debug_assert!(cut.value < Rat::from_integer(n.into()));
        let poor: Vec<usize> = (0..n).filter(|&i| !cut.agent_source_side[i]).collect();
        let mut poor_chores = vec![false; inst.chores()];
        for &i in &poor {
            for (c, hs) in holders.iter().enumerate() {
                if hs.contains(&i) {
                    poor_chores[c] = true;
                }
            }
        }
        // The largest factor below 1 at which a poor agent ties on a chore it
        // does not currently hold at MPB.
        let mut factor: Option<Rat> = None;
        for &j in &poor {
            for c in (0..inst.chores()).filter(|&c| !poor_chores[c]) {
                let r = &prices[c] / (&scales.beta[j] * inst.d(j, c));
                if factor.as_ref().map_or(true, |f| r > *f) {
                    factor = Some(r);
                }
            }
        }
        let factor = factor.ok_or_else(|| Error::CertificateFailure("cut without an improving direction".into()))?;
        debug_assert!(factor < one());
        for &j in &poor {
            scales.beta[j] *= &factor;
        }
        scales.normalise(inst);
    }
    Err(Error::BudgetExhausted(cap))
}

pub(crate) fn outcome_from_earnings(e: &[Vec<Rat>], prices: Vec<Rat>, epsilon: Rat) -> MarketOutcome {
    let rows = e
        .iter()
        .map(|row| row.iter().zip(&prices).map(|(v, p)| v / p).collect())
        .collect();
    let x = FractionalAllocation::from_rows_unchecked(rows);
    let prices = PriceVector::new(prices).expect("prices are positive");
    MarketOutcome::ceei(x, prices, epsilon)
}
