//! Weighted Motzkin paths with height-linear step weights.
//!
//! The crate computes the terminal-height distribution of the paths four
//! ways and lets them be checked against each other:
//!
//! * [`exact`]: the weight triangle from the three-term recurrence, exactly
//!   or in log space, with a brute-force enumeration oracle;
//! * [`closedform`] and [`asymptotics`]: the balanced exponential generating
//!   function, its moving singularity `tau(x)` and one-saddle asymptotics;
//! * [`saddlepoint`]: finite-`n` cumulants and the Daniels lattice
//!   saddlepoint approximation;
//! * [`ldp`]: the limit cumulant generating function and its rate function.

pub mod asymptotics;
pub mod closedform;
pub mod csvfmt;
pub mod error;
pub mod exact;
pub mod ldp;
pub mod model;
pub mod roots;
pub mod saddlepoint;
pub mod specfun;

pub use error::{Error, Result};
pub use model::{classify, is_balanced, step_weights, ModelParams, Regime};
