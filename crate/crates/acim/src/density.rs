//! Piecewise-constant functions on a uniform grid over an interval.
//!
//! The container is signed so that differences, defects and signed
//! operator iterates are representable; densities proper are
//! nonnegative, and the operations that require nonnegativity check it
//! rather than assume it. Cells are left-open, right-closed, matching
//! the half-open interval (lo, hi] the grid covers.
//!
//! `escaped_mass` accumulates mass pushed outside the grid (in
//! practice, below its lower edge) so that truncating the domain never
//! silently loses anything.

use crate::error::{AcimError, Result};
use crate::io::{fmt_f64, kahan_sum};

#[derive(Clone, Debug, PartialEq)]
pub struct GridDensity {
    domain_lo: f64,
    domain_hi: f64,
    values: Vec<f64>,
    escaped_mass: f64,
}

impl GridDensity {
    pub fn new(domain_lo: f64, domain_hi: f64, values: Vec<f64>, escaped_mass: f64) -> Result<Self> {
        if !(domain_lo.is_finite() && domain_hi.is_finite() && domain_lo < domain_hi) {
            return Err(AcimError::Domain(format!(
                "grid domain must be a finite interval, got ({domain_lo}, {domain_hi}]"
            )));
        }
        if values.is_empty() {
            return Err(AcimError::Domain("grid needs at least one cell".into()));
        }
        if values.iter().any(|v| !v.is_finite()) || !escaped_mass.is_finite() {
            return Err(AcimError::Domain("grid values must be finite".into()));
        }
        Ok(GridDensity {
            domain_lo,
            domain_hi,
            values,
            escaped_mass,
        })
    }

    pub fn zeros(domain_lo: f64, domain_hi: f64, n_cells: usize) -> Result<Self> {
        Self::new(domain_lo, domain_hi, vec![0.0; n_cells.max(1)], 0.0)
    }

    pub fn constant(domain_lo: f64, domain_hi: f64, n_cells: usize, value: f64) -> Result<Self> {
        Self::new(domain_lo, domain_hi, vec![value; n_cells.max(1)], 0.0)
    }

    /// The L¹ projection of the indicator of (a, b] onto the grid:
    /// each cell holds its overlap fraction with (a, b], so boundary
    /// cells are fractional and the grid mass is exactly the length of
    /// (a, b] ∩ (lo, hi].
    pub fn indicator(
        domain_lo: f64,
        domain_hi: f64,
        n_cells: usize,
        a: f64,
        b: f64,
    ) -> Result<Self> {
        if !(a < b) {
            return Err(AcimError::Domain(format!(
                "indicator interval must be nonempty, got ({a}, {b}]"
            )));
        }
        let mut f = Self::zeros(domain_lo, domain_hi, n_cells)?;
        let h = f.cell_width();
        for i in 0..f.values.len() {
            let cell_lo = domain_lo + i as f64 * h;
            let cell_hi = domain_lo + (i + 1) as f64 * h;
            let overlap = (cell_hi.min(b) - cell_lo.max(a)).max(0.0);
            f.values[i] = overlap / h;
        }
        Ok(f)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.domain_lo, self.domain_hi)
    }

    pub fn n_cells(&self) -> usize {
        self.values.len()
    }

    pub fn cell_width(&self) -> f64 {
        (self.domain_hi - self.domain_lo) / self.values.len() as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn escaped_mass(&self) -> f64 {
        self.escaped_mass
    }

    pub fn add_escaped_mass(&mut self, mass: f64) {
        self.escaped_mass += mass;
    }

    pub fn cell_midpoint(&self, i: usize) -> f64 {
        self.domain_lo + (i as f64 + 0.5) * self.cell_width()
    }

    /// ∫ over (a, b] of this piecewise-constant function, exact up to
    /// float rounding: boundary cells contribute their overlap length.
    /// The interval is clipped to the domain; mass outside is not seen.
    pub fn integral_over(&self, a: f64, b: f64) -> f64 {
        let lo = a.max(self.domain_lo);
        let hi = b.min(self.domain_hi);
        if !(lo < hi) {
            return 0.0;
        }
        let h = self.cell_width();
        let first = (((lo - self.domain_lo) / h).floor() as usize).min(self.values.len() - 1);
        let last = ((((hi - self.domain_lo) / h).ceil() as usize).max(1) - 1)
            .min(self.values.len() - 1);
        let mut total = 0.0;
        for i in first..=last {
            let cell_lo = self.domain_lo + i as f64 * h;
            let cell_hi = self.domain_lo + (i + 1) as f64 * h;
            let overlap = (cell_hi.min(hi) - cell_lo.max(lo)).max(0.0);
            total += self.values[i] * overlap;
        }
        total
    }

    /// Value at a point; 0 outside (lo, hi]. Cell i covers
    /// (lo + i·h, lo + (i+1)·h].
    pub fn value_at(&self, x: f64) -> f64 {
        if !(x > self.domain_lo && x <= self.domain_hi) {
            return 0.0;
        }
        let h = self.cell_width();
        let idx = ((x - self.domain_lo) / h).ceil() as usize;
        self.values[idx.saturating_sub(1).min(self.values.len() - 1)]
    }

    fn same_grid(&self, other: &Self) -> Result<()> {
        if self.domain_lo != other.domain_lo
            || self.domain_hi != other.domain_hi
            || self.values.len() != other.values.len()
        {
            return Err(AcimError::GridMismatch(format!(
                "({}, {}] with {} cells vs ({}, {}] with {} cells",
                self.domain_lo,
                self.domain_hi,
                self.values.len(),
                other.domain_lo,
                other.domain_hi,
                other.values.len()
            )));
        }
        Ok(())
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        Self::new(
            self.domain_lo,
            self.domain_hi,
            values,
            self.escaped_mass + other.escaped_mass,
        )
    }

    pub fn minus(&self, other: &Self) -> Result<Self> {
        self.plus(&other.scaled(-1.0))
    }

    pub fn scaled(&self, c: f64) -> Self {
        GridDensity {
            domain_lo: self.domain_lo,
            domain_hi: self.domain_hi,
            values: self.values.iter().map(|v| v * c).collect(),
            escaped_mass: self.escaped_mass * c,
        }
    }

    /// Σ |vᵢ|·h over cells; escaped mass not included.
    pub fn l1_norm(&self) -> f64 {
        let h = self.cell_width();
        kahan_sum(self.values.iter().map(|v| v.abs())) * h
    }

    /// Signed grid mass plus escaped mass.
    pub fn total_mass(&self) -> f64 {
        let h = self.cell_width();
        kahan_sum(self.values.iter().copied()) * h + self.escaped_mass
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0) && self.escaped_mass >= 0.0
    }

    /// L¹ modulus of continuity at scale `delta`, for shifts of at most
    /// one cell: shifting a piecewise-constant function by t sweeps
    /// each jump (the two domain edges included, where the function
    /// drops to 0) over a set of length t, so
    /// ω(t) = t·Σ|jumps| for t ≤ cell width. Larger deltas are clamped
    /// to one cell; callers needing a wider modulus should refine the
    /// grid instead.
    pub fn l1_modulus(&self, delta: f64) -> f64 {
        let h = self.cell_width();
        let t = delta.min(h).max(0.0);
        let interior = kahan_sum(self.values.windows(2).map(|w| (w[1] - w[0]).abs()));
        let edges = self.values[0].abs() + self.values[self.values.len() - 1].abs();
        t * (interior + edges)
    }

    /// CSV rows `cell_midpoint,value`, one line per cell, floats with
    /// 17 significant digits.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("cell_midpoint,value\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&fmt_f64(self.cell_midpoint(i)));
            out.push(',');
            out.push_str(&fmt_f64(*v));
            out.push('\n');
        }
        out
    }

    /// JSON header describing the grid without the cell data.
    pub fn header_json(&self) -> serde_json::Value {
        serde_json::json!({
            "domain_lo": self.domain_lo,
            "domain_hi": self.domain_hi,
            "n_cells": self.values.len(),
            "escaped_mass": self.escaped_mass,
        })
    }
}

/// L¹ distance between two functions on the same grid; escaped mass is
/// ignored. Errors when the grids differ in domain or cell count.
pub fn l1_distance(f: &GridDensity, g: &GridDensity) -> Result<f64> {
    Ok(f.minus(g)?.l1_norm())
}
