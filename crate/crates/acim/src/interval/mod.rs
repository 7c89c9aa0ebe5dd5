//! Interval and planar maps studied through grids and quadrature.
//!
//! Floating point throughout: these systems have no exact cylinder
//! algebra, so operators act on [`crate::density::GridDensity`] grids
//! and measures are evaluated by quadrature, with every approximation
//! surfaced in a report rather than hidden.

pub mod engel;
pub mod euclid;

pub use engel::{
    dissipativity_witness, engel_apply, engel_grid, engel_transfer, engel_transfer_value,
    invariant_density_series, orbit_pullback, AffineBranch, BranchFamily, DissipativityReport,
    EngelMap, EngelSeriesReport,
};
pub use euclid::{
    euclid_apply, euclid_invariance_defect, euclid_orbit_gcd, euclid_rect_measure, EuclideanState,
    PlanarRectangle,
};
