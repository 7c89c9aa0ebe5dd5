//! The monotone Markov shift on integer sequences.
//!
//! One letter per time step; the walk moves up by one with probability
//! q and stays with probability 1 − q, so the only valid words are
//! nondecreasing with unit steps. Everything here is exact rational
//! arithmetic: cylinder measures, the explicit invariant density, a
//! symbolic transfer algebra with its conjugated form, and a seeded
//! simulator for Monte Carlo cross-checks.

pub mod measure;
pub mod simulate;
pub mod transfer;
pub mod word;

pub use measure::{
    cylinder_measure, density_expectation, density_value, invariance_check, invariance_report,
    positive_density_probability, series_identity, unique_zero_expectation,
    weighted_cylinder_measure, DensityValue, InvarianceDefect, InvarianceReport, JumpParameter,
    SeriesIdentity,
};
pub use simulate::{simulate_trajectory, zd_walk_return_estimate};
pub use transfer::{adjoint_defect, ShiftFunction};
pub use word::{CylinderWord, PrefixClass};
