//! Four-stage guillotine cutting of defective glass plates with precedence chains.
//!
//! Items are packed one third-level sub-plate at a time ([`branching`]); anytime
//! best-first searches with a bounded fringe explore that tree ([`search`]);
//! [`orchestrator`] runs the portfolio of searches sharing one incumbent.

pub mod bench;
pub mod branching;
pub mod io;
pub mod model;
pub mod node;
pub mod orchestrator;
pub mod search;
pub mod tree;
pub mod validator;
