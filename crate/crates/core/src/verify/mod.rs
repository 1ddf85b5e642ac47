//! Certificates for fairness and efficiency properties of integral allocations.
//!
//! Every check returns a [`Certificate`]; when the property fails it carries a
//! [`Witness`] that [`witness_reproduces`] can re-check independently.
//! Allocations may contain chore copies; each copy is an ordinary item with
//! its original's disutility and price.

mod efficiency;
mod fairness;
mod implications;
mod witness;

use serde::{Deserialize, Serialize};

pub use efficiency::{check_fpo, check_po_brute, fpo_lp_size, po_candidates};
pub use fairness::{
    check_ef1, check_efx, check_fisher_eq, check_nondegenerate, check_pef1, check_proportional, check_tefx,
    expanded_market,
};
pub use implications::{implication_suite, Implication, ImplicationReport};
pub use witness::witness_reproduces;

use crate::equilibrium::EquilibriumReport;
use crate::error::{Error, Result};
use crate::model::{ChoreCopy, Instance, SurplusAllocation};
use crate::rational::{serde_rat, Rat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Property {
    EF1,
    EFX,
    #[serde(rename = "tEFX")]
    TEFX,
    #[serde(rename = "pEF1")]
    PEF1,
    Proportional,
    PO,
    #[serde(rename = "fPO")]
    FPO,
    FisherEq,
    NonDegenerate,
}

/// Counter-evidence attached to a failed certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// `envious` prefers the envied bundle even after the relevant adjustment
    /// with `chore` (the best removal for EF1, the worst one for EFX/tEFX).
    Envy {
        envious: usize,
        envied: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        chore: Option<ChoreCopy>,
    },
    /// Payment envy of `envious` towards `envied` that no single removal fixes.
    PaymentEnvy {
        envious: usize,
        envied: usize,
    },
    Disproportionate {
        agent: usize,
        #[serde(with = "serde_rat")]
        cost: Rat,
        #[serde(with = "serde_rat")]
        share: Rat,
    },
    /// An integral reallocation of the same items that weakly helps everyone
    /// and strictly helps `improved`.
    Dominated {
        improved: usize,
        bundles: Vec<Vec<ChoreCopy>>,
    },
    /// A fractional reallocation of the same item multiset: `amounts[i][c]` is
    /// how much of chore `c` (out of its multiplicity) agent `i` receives.
    FractionallyDominated {
        improved: usize,
        #[serde(with = "serde_rat::matrix")]
        amounts: Vec<Vec<Rat>>,
    },
    Equilibrium {
        report: EquilibriumReport,
    },
    /// Two distinct chore sets the agent dislikes equally.
    EqualSubsets {
        agent: usize,
        first: Vec<usize>,
        second: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub property: Property,
    pub holds: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl Certificate {
    fn holds(property: Property) -> Self {
        Certificate {
            property,
            holds: true,
            witness: None,
        }
    }

    fn fails(property: Property, witness: Witness) -> Self {
        Certificate {
            property,
            holds: false,
            witness: Some(witness),
        }
    }
}

/// Size limits of the exhaustive and linear-programming checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyLimits {
    /// Upper bound on `n^items` for brute-force Pareto checks.
    pub po_candidates: u64,
    /// Upper bound on variables of each fractional Pareto LP.
    pub lp_variables: usize,
    /// Upper bound on `m` for the `2^m` subset-sum check.
    pub subset_chores: usize,
}

impl Default for VerifyLimits {
    fn default() -> Self {
        VerifyLimits {
            po_candidates: 1_000_000,
            lp_variables: 2_000,
            subset_chores: 12,
        }
    }
}

fn check_shape(inst: &Instance, alloc: &SurplusAllocation) -> Result<()> {
    if alloc.agents() != inst.agents() {
        return Err(Error::InvalidInput(format!(
            "allocation has {} bundles for {} agents",
            alloc.agents(),
            inst.agents()
        )));
    }
    if alloc.chores() != inst.chores() {
        return Err(Error::InvalidInput(format!(
            "allocation covers {} chores, instance has {}",
            alloc.chores(),
            inst.chores()
        )));
    }
    Ok(())
}

/// `d_agent` of every bundle, as seen by `agent`.
fn costs_for(inst: &Instance, alloc: &SurplusAllocation, agent: usize) -> Vec<Rat> {
    alloc
        .bundles()
        .iter()
        .map(|b| inst.cost_of(agent, b.iter().map(|c| c.chore)))
        .collect()
}
