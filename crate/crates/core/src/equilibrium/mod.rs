//! Competitive equilibria for chore markets: verification, an exhaustive
//! exact solver, an exact price-adjustment solver, and cycle cancellation.

mod acyclic;
mod descent;
mod exact;
mod routing;
mod verify;

pub use acyclic::{make_acyclic, make_acyclic_traced, AcyclicStats};
pub use descent::{approx_ceei, approx_ceei_with_cap, descent_ceei, DEFAULT_ROUND_CAP};
pub use exact::{exact_ceei, SearchLimits};
pub use verify::{verify_fisher_equilibrium, EquilibriumReport, IncomeViolation, MpbViolation};

use crate::model::Instance;
use crate::rational::{rat, Rat};

/// `1 / (5 n m)`, the slack used by the rounding pipeline.
pub fn default_epsilon(inst: &Instance) -> Rat {
    let nm = (inst.agents() * inst.chores()) as i64;
    rat(1, 5 * nm.max(1))
}
