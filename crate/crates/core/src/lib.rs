//! Fair and efficient division of indivisible chores.
//!
//! * [`surplus`] rounds a `(1 - epsilon)`-CEEI into an integral allocation that
//!   is EF1 and fPO while duplicating at most `n - 1` chores.
//! * [`three_agent`] computes an allocation for three agents that is either
//!   tEFX or proportional.
//! * [`verify`] certifies or refutes every fairness and efficiency property
//!   used here, with witnesses.
//!
//! All arithmetic on the algorithmic path is exact ([`Rat`]).

pub mod equilibrium;
pub mod error;
mod flow;
pub mod lp;
pub mod model;
pub mod rational;
pub mod surplus;
pub mod three_agent;
pub mod verify;

pub use error::{Error, Result};
pub use model::{
    bundle_disutility, bundle_payment, mpb, payment_graph, Bundle, ChoreCopy, Component, FractionalAllocation,
    Instance, MarketOutcome, Node, PaymentGraph, PriceVector, SurplusAllocation,
};
pub use rational::Rat;
