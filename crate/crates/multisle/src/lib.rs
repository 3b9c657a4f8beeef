//! Numerical laboratory for multiple chordal Schramm–Loewner evolutions.
//!
//! `n` curves grow in the upper half plane from boundary seeds
//! `x_1 < … < x_n`. Their driving processes obey coupled SDEs whose drift is
//! `κ ∂_i log Z` plus pairwise repulsion, where `Z` is a positive,
//! translation-invariant, homogeneous solution of the level-two null-vector
//! equations. The crate provides
//!
//! * arch (non-crossing pairing) combinatorics and Dyck-path bijections,
//! * evaluators for the admissible partition functions `Z`, including the
//!   hypergeometric four-point blocks,
//! * a Loewner-chain engine (slit-map discretization, trace reconstruction),
//! * closed-form crossing probabilities for named lattice models,
//! * a Monte-Carlo harness estimating arch-topology statistics, and
//! * the deterministic `κ → 0⁺` system.

pub mod arch;
pub mod classical;
pub mod crossing;
pub mod error;
pub mod loewner;
pub mod montecarlo;
pub mod partition;
pub mod quad;
pub mod special;

pub use error::{Error, Result};
