//! Invariant densities for dissipative, ergodic transformations.
//!
//! This crate computes, verifies and reports on absolutely continuous
//! σ-finite invariant measures for three families of dissipative systems:
//!
//! * a monotone random walk shift on integer sequences, where every
//!   computation is carried out in exact rational arithmetic
//!   ([`markov`]),
//! * the Engel series interval map, handled through a grid transfer
//!   operator with explicit escaped-mass accounting ([`interval::engel`]),
//! * the subtractive Euclidean algorithm on the positive quadrant,
//!   studied through rectangle measures and orbits ([`interval::euclid`]).
//!
//! On top of these sit decay diagnostics for conjugated transfer
//! operators ([`ergodic`]) and wandering-set certificates together with
//! annihilating densities ([`wandering`]).
//!
//! Two representation regimes are kept strictly apart:
//!
//! * **Exact**: words, measures and densities for the shift are
//!   `BigRational` values; equalities asserted by the shift layer are
//!   exact, with no tolerances.
//! * **Grid**: interval-map densities are piecewise constant `f64`
//!   grids; every grid operation documents its projection step and
//!   conserves total mass including the `escaped_mass` accumulator.

pub mod density;
pub mod ergodic;
pub mod error;
pub mod interval;
pub mod io;
pub mod markov;
pub mod rational;
pub mod series;
pub mod wandering;

pub use density::GridDensity;
pub use error::AcimError;
pub use rational::ExactRational;
pub use series::{TailReport, TruncationPolicy};
