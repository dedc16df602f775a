//! Profit-maximizing facility location and pricing with logit-demand
//! shippers.
//!
//! A logistics provider opens facilities, sets prices per shipper and
//! service level, and chooses which service to offer each customer
//! category. Shippers accept an offer when its random utility beats their
//! opt-out alternative. Acceptance probabilities `ρ` are precomputed
//! ([`choice`]), which turns the bilevel stochastic program into a
//! single-level MILP ([`milp`]) solved exactly in-repo ([`solver`]) and
//! checked against scenario simulation ([`oracle`]).
//!
//! With the default `parallel` feature, data-parallel loops run on rayon;
//! without it they run sequentially with identical results.

pub mod bench;
pub mod choice;
pub mod error;
pub mod instance;
pub mod milp;
pub mod oracle;
pub mod par;
pub mod solver;

pub use error::{Error, Result};
