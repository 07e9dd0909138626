//! Exact computation for variable network games: network games paired with
//! a probability distribution over which network forms.
//!
//! The crate evaluates expected wealth, the Expected Myerson Value and the
//! Expected Position Value, and checks the fairness and balance axioms that
//! characterize them on concrete instances.
//!
//! Networks over `n` players are bit masks over the `n(n-1)/2` canonical link
//! slots, so membership tests and subnetwork enumeration are word operations.
//!
//! With the default `parallel` feature the support loops, subset sums and the
//! random axiom corpus run on rayon. Reductions always happen in a fixed order
//! so results are bit-identical with and without the feature.

pub mod axioms;
mod error;
pub mod io;
pub mod netcore;
pub mod netgame;
pub mod netprob;
mod par;
pub mod values;

pub use error::{Error, Result};
pub use netcore::{Coalition, Link, Network, PlayerSet};
pub use netgame::{CoopGame, NetworkGame};
pub use netprob::NetFormDist;
pub use values::{Allocation, VariableGame};

/// Tolerance for exact-arithmetic checks such as component additivity and
/// probability normalization.
pub const DEFAULT_TOL: f64 = 1e-9;
