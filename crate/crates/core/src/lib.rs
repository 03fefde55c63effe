//! Martingale tail-bound toolkit.
//!
//! Closed-form evaluation of nonuniform Berry–Esseen envelopes and
//! de la Peña-type tail bounds for martingales under the conditional
//! Bernstein condition, generators for martingale families that satisfy it,
//! and a deterministic parallel Monte Carlo engine (plain and exponentially
//! tilted) to check the bounds empirically. Two statistical applications are
//! included: least-squares regression and self-normalized sums.

pub mod applications;
pub mod bounds;
pub mod error;
pub mod gaussian;
pub mod martingales;
pub mod montecarlo;
pub mod numfmt;
pub mod rng;

pub use error::{Error, Result};
