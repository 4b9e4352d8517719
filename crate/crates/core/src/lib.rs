//! Exact solvers for Bayesian persuasion with and without ex-post individual
//! rationality.
//!
//! A sender commits to a signaling scheme and a receiver best-responds to the
//! resulting posterior. The ex-post IR constraint demands that no realized
//! (signal, state) pair leaves the sender worse off than staying silent. This
//! crate computes both optima exactly, decides geometrically when the
//! constraint is free for two-state games, and implements closed-form and
//! greedy constructions for trading and credence-goods games.

pub mod compare;
pub mod geometry;
pub mod greedy;
pub mod instances;
pub mod lp;
pub mod model;
pub mod oracle;
pub mod rational;
pub mod solver;
pub mod trading;

pub use model::{best_response, expected_sender_utility, no_communication_value, Belief, Game};
pub use rational::Rational;
