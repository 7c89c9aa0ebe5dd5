//! Norm-triggered truncation of function series.
//!
//! The series summed here are convergent by theory, but no rate is
//! available, so truncation is triggered by the observed L¹ norm of
//! the latest term, with a hard cap on the term count. Non-convergence
//! within the cap is reported, not raised: the caller decides whether
//! a non-converged tail invalidates its computation.

use serde::{Deserialize, Serialize};

use crate::density::GridDensity;
use crate::error::{AcimError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub max_terms: usize,
    pub tail_tolerance: f64,
}

impl TruncationPolicy {
    pub fn new(max_terms: usize, tail_tolerance: f64) -> Result<Self> {
        if max_terms == 0 {
            return Err(AcimError::InvalidParameter(
                "series truncation needs at least one term".into(),
            ));
        }
        if !(tail_tolerance > 0.0 && tail_tolerance.is_finite()) {
            return Err(AcimError::InvalidParameter(format!(
                "tail tolerance must be a positive finite number, got {tail_tolerance}"
            )));
        }
        Ok(TruncationPolicy {
            max_terms,
            tail_tolerance,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub terms_used: usize,
    pub last_term_norm: f64,
    pub converged: bool,
}

/// Sums term(0) + term(1) + … until the first term whose L¹ norm is at
/// most the tail tolerance (that term is still added), or until
/// max_terms terms have been used. The report's `converged` flag says
/// which stop fired.
pub fn truncated_series<F>(mut term: F, policy: &TruncationPolicy) -> Result<(GridDensity, TailReport)>
where
    F: FnMut(usize) -> Result<GridDensity>,
{
    let mut sum = term(0)?;
    let mut last_term_norm = sum.l1_norm();
    let mut terms_used = 1;
    while last_term_norm > policy.tail_tolerance && terms_used < policy.max_terms {
        let t = term(terms_used)?;
        last_term_norm = t.l1_norm();
        sum = sum.plus(&t)?;
        terms_used += 1;
    }
    let report = TailReport {
        terms_used,
        last_term_norm,
        converged: last_term_norm <= policy.tail_tolerance,
    };
    Ok((sum, report))
}
