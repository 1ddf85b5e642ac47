use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::model::{Instance, MarketOutcome};
use crate::rational::{one, serde_rat, Rat};

/// An agent whose income misses its target window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncomeViolation {
    pub agent: usize,
    #[serde(with = "serde_rat")]
    pub income: Rat,
    #[serde(with = "serde_rat")]
    pub low: Rat,
    #[serde(with = "serde_rat")]
    pub high: Rat,
}

/// An agent holding part of a chore that is not minimum pain per buck for it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MpbViolation {
    pub agent: usize,
    pub chore: usize,
    #[serde(with = "serde_rat")]
    pub ratio: Rat,
    #[serde(with = "serde_rat")]
    pub mpb: Rat,
}

/// Outcome of checking the three equilibrium conditions, with witnesses.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub clearing: bool,
    pub incomes: bool,
    pub mpb: bool,
    /// Set when the outcome's dimensions do not match the instance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape_error: Option<String>,
    pub uncleared_chores: Vec<usize>,
    pub income_violations: Vec<IncomeViolation>,
    pub mpb_violations: Vec<MpbViolation>,
}

impl EquilibriumReport {
    pub fn pass(&self) -> bool {
        self.clearing && self.incomes && self.mpb
    }
}

/// Checks market clearing, the income condition and the MPB condition.
///
/// With `epsilon = 0` the income of agent `i` must equal `budgets[i]`
/// exactly; otherwise it must lie in `[budgets[i] - epsilon, budgets[i] + epsilon]`,
/// which for unit budgets is the `(1 - epsilon)`-CEEI window.
pub fn verify_fisher_equilibrium(inst: &Instance, out: &MarketOutcome) -> EquilibriumReport {
    let (n, m) = (inst.agents(), inst.chores());
    let mut report = EquilibriumReport::default();
    if out.x.agents() != n || (m > 0 && out.x.chores() != m) || out.prices.len() != m || out.budgets.len() != n {
        report.shape_error = Some(format!(
            "instance is {n}x{m}, outcome has x {}x{}, {} prices, {} budgets",
            out.x.agents(),
            out.x.chores(),
            out.prices.len(),
            out.budgets.len()
        ));
        return report;
    }

    for c in 0..m {
        let col = (0..n).fold(Rat::zero(), |acc, i| acc + out.x.get(i, c));
        if col != one() {
            report.uncleared_chores.push(c);
        }
    }
    report.clearing = report.uncleared_chores.is_empty();

    for i in 0..n {
        let income = out.income(i);
        let low = &out.budgets[i] - &out.epsilon;
        let high = &out.budgets[i] + &out.epsilon;
        if income < low || income > high {
            report.income_violations.push(IncomeViolation {
                agent: i,
                income,
                low,
                high,
            });
        }
    }
    report.incomes = report.income_violations.is_empty();

    if m > 0 {
        for i in 0..n {
            let mpb = (0..m).map(|c| inst.d(i, c) / &out.prices[c]).min().expect("m > 0");
            for c in 0..m {
                if out.x.get(i, c).is_zero() {
                    continue;
                }
                let ratio = inst.d(i, c) / &out.prices[c];
                if ratio != mpb {
                    report.mpb_violations.push(MpbViolation {
                        agent: i,
                        chore: c,
                        ratio,
                        mpb: mpb.clone(),
                    });
                }
            }
        }
    }
    report.mpb = report.mpb_violations.is_empty();
    report
}
