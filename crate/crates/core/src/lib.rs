//! Signatures of càdlàg paths and signature-based Lévy market models.
//!
//! The crate is organised bottom-up:
//!
//! * [`tensor`]: words, shuffles and the truncated tensor algebra;
//! * [`path`]: piecewise-linear paths with jumps, p-variation and the J1 distance;
//! * [`signature`]: Marcus signatures and discrete Itô sums;
//! * [`levy`]: Lévy triplets, the generator tensor and expected signatures;
//! * [`calculus`]: the tilde transform, model representation and payoff lift;
//! * [`market`]: seeded simulation and measure changes;
//! * [`valuation`]: pricing, hedging and signature regression.

pub mod calculus;
pub mod error;
pub mod levy;
pub mod market;
pub mod path;
pub mod signature;
pub mod tensor;
pub mod valuation;

pub use error::{Error, Result};
