//! L¹ decay diagnostics for the conjugated transfer operator.
//!
//! With an invariant density p, the operator conjugated to the
//! p-weighted measure is T̂_μ f = 1{p > 0}·(1/p)·T̂(f·p). Two norm
//! sequences diagnose the mixing behavior of the weighted system: the
//! plain iterates ‖T̂_μⁿu‖ and the Cesàro averages ‖(1/n)Σ_{k<n}T̂_μᵏu‖,
//! both over mean-zero inputs u. The sequences are reported, never
//! extrapolated: monotonicity and finite-horizon thresholds are the
//! only assertions; limits stay theorems.
//!
//! On the shift side every norm is an exact rational, computed through
//! the conjugation identity ‖T̂_μⁿu‖_{L¹(μ)} = ∫1{p > 0}|T̂ⁿ(u·p)|dm,
//! which trades n divisions for a single weighting up front.

use serde::{Deserialize, Serialize};

use crate::density::GridDensity;
use crate::error::{AcimError, Result};
use crate::io::fmt_f64;
use crate::markov::{weighted_cylinder_measure, CylinderWord, JumpParameter, ShiftFunction};
use crate::rational::{self, ExactRational};

/// Which sequence a report holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecayKind {
    /// ‖T̂_μⁿu‖, non-increasing by contraction.
    Plain,
    /// ‖(1/n)Σ_{k<n}T̂_μᵏu‖, not monotone in general.
    Cesaro,
}

/// A norm sequence with its indexing convention: plain reports start
/// at n = 0, Cesàro averages at n = 1.
#[derive(Clone, Debug)]
pub struct DecayReport {
    pub kind: DecayKind,
    pub first_index: usize,
    pub norms: Vec<ExactRational>,
}

impl DecayReport {
    pub fn norm(&self, n: usize) -> Option<&ExactRational> {
        n.checked_sub(self.first_index).and_then(|i| self.norms.get(i))
    }

    pub fn is_non_increasing(&self) -> bool {
        self.norms.windows(2).all(|w| w[1] <= w[0])
    }

    pub fn norms_f64(&self) -> Vec<f64> {
        self.norms.iter().map(rational::approx).collect()
    }

    /// `n,norm` rows for plotting.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("n,norm\n");
        for (i, r) in self.norms.iter().enumerate() {
            out.push_str(&format!(
                "{},{}\n",
                self.first_index + i,
                fmt_f64(rational::approx(r))
            ));
        }
        out
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "kind": self.kind,
            "first_index": self.first_index,
            "norms": self.norms.iter().map(rational::format).collect::<Vec<_>>(),
            "norms_float": self.norms_f64(),
            "non_increasing": self.is_non_increasing(),
        })
    }
}

/// ∫ u dμ where dμ = p·dm, exact. Inputs whose weighted form keeps an
/// infinite-measure free part are rejected by the inner integral.
pub fn mu_integral(u: &ShiftFunction, q: &JumpParameter) -> Result<ExactRational> {
    u.weighted_by_density(q).integral(q)
}

fn require_mean_zero(u: &ShiftFunction, q: &JumpParameter) -> Result<()> {
    use num_traits::Zero;
    let mean = mu_integral(u, q)?;
    if !mean.is_zero() {
        return Err(AcimError::Precondition(format!(
            "decay diagnostics need a mean-zero input, got integral {}",
            rational::format(&mean)
        )));
    }
    Ok(())
}

/// The canonical mean-zero contrast of the first two positive letters,
/// u = μ([2])·1[1] − μ([1])·1[2]. Mean zero by construction, supported
/// where the invariant density is the constant q, so every norm along
/// its orbit is exactly computable.
pub fn two_letter_mean_zero_seed(q: &JumpParameter) -> ShiftFunction {
    let one = CylinderWord::of(&[1]);
    let two = CylinderWord::of(&[2]);
    let mu_one = weighted_cylinder_measure(&one, q);
    let mu_two = weighted_cylinder_measure(&two, q);
    let mut u = ShiftFunction::zero();
    u.add_cylinder(one, mu_two);
    u.add_cylinder(two, -mu_one);
    u
}

/// b_n = ‖T̂_μⁿu‖_{L¹(μ)} for n = 0..=n_max, exact.
///
/// The iteration runs on h = u·p under the plain transfer and takes
/// masked absolute integrals, which equals the conjugated iteration by
/// the support identity. Contraction makes the sequence non-increasing;
/// exact arithmetic is required to reproduce that, so it is asserted.
pub fn exactness_decay(
    u: &ShiftFunction,
    q: &JumpParameter,
    n_max: usize,
) -> Result<DecayReport> {
    require_mean_zero(u, q)?;
    let mut weighted = u.weighted_by_density(q);
    let mut norms = Vec::with_capacity(n_max + 1);
    norms.push(weighted.masked_abs_integral(q)?);
    for _ in 0..n_max {
        weighted = weighted.transfer(q);
        norms.push(weighted.masked_abs_integral(q)?);
    }
    let report = DecayReport {
        kind: DecayKind::Plain,
        first_index: 0,
        norms,
    };
    assert!(
        report.is_non_increasing(),
        "transfer norms increased; the contraction identity is broken"
    );
    Ok(report)
}

/// a_n = ‖(1/n)Σ_{k<n}T̂_μᵏu‖_{L¹(μ)} for n = 1..=n_max, exact.
pub fn ergodic_average_decay(
    u: &ShiftFunction,
    q: &JumpParameter,
    n_max: usize,
) -> Result<DecayReport> {
    require_mean_zero(u, q)?;
    let mut iterate = u.weighted_by_density(q);
    let mut partial = ShiftFunction::zero();
    let mut norms = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        partial = partial.plus(&iterate);
        norms.push(partial.masked_abs_integral(q)? / rational::int(n as i64));
        if n < n_max {
            iterate = iterate.transfer(q);
        }
    }
    Ok(DecayReport {
        kind: DecayKind::Cesaro,
        first_index: 1,
        norms,
    })
}

/// Relative cutoff for the grid support mask {p > threshold·max p}.
pub const MASK_RELATIVE_THRESHOLD: f64 = 1e-12;

/// What the grid mask discarded: the cells where division was skipped
/// and the reference mass they carry, which bounds the distortion the
/// masking convention can introduce.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MaskReport {
    pub threshold: f64,
    pub masked_cells: usize,
    pub masked_mu_mass: f64,
}

/// T̂_μ on a grid: multiply by p, push through the supplied base
/// transfer, divide where p clears the relative threshold, zero
/// elsewhere. No division ever happens on a masked cell.
pub fn grid_conjugated_transfer(
    f: &GridDensity,
    p: &GridDensity,
    base_transfer: impl Fn(&GridDensity) -> Result<GridDensity>,
) -> Result<(GridDensity, MaskReport)> {
    if f.domain() != p.domain() || f.n_cells() != p.n_cells() {
        return Err(AcimError::GridMismatch(format!(
            "function on {:?} with {} cells, density on {:?} with {} cells",
            f.domain(),
            f.n_cells(),
            p.domain(),
            p.n_cells()
        )));
    }
    if !p.is_nonnegative() {
        return Err(AcimError::Precondition(
            "the conjugating density must be nonnegative".into(),
        ));
    }
    let (lo, hi) = f.domain();
    let product_values: Vec<f64> = f
        .values()
        .iter()
        .zip(p.values())
        .map(|(a, b)| a * b)
        .collect();
    let product = GridDensity::new(lo, hi, product_values, 0.0)?;
    let pushed = base_transfer(&product)?;
    let threshold = MASK_RELATIVE_THRESHOLD * p.max_value();
    let h = f.cell_width();
    let mut masked_cells = 0usize;
    let mut masked_mu_mass = 0.0;
    let mut values = Vec::with_capacity(f.n_cells());
    for (&t, &pv) in pushed.values().iter().zip(p.values()) {
        if pv > threshold {
            values.push(t / pv);
        } else {
            masked_cells += 1;
            masked_mu_mass += pv * h;
            values.push(0.0);
        }
    }
    let out = GridDensity::new(lo, hi, values, 0.0)?;
    Ok((
        out,
        MaskReport {
            threshold,
            masked_cells,
            masked_mu_mass,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::engel_transfer;
    use num_traits::Zero;

    fn half() -> JumpParameter {
        JumpParameter::new(rational::ratio(1, 2)).unwrap()
    }

    /// Row n of Pascal's triangle scaled into jump probabilities:
    /// entry j is the chance of j upward jumps in n steps.
    fn jump_distribution(n: usize, q: &JumpParameter) -> Vec<ExactRational> {
        let mut row = vec![rational::one()];
        for _ in 0..n {
            let mut next = vec![rational::zero(); row.len() + 1];
            for (j, c) in row.iter().enumerate() {
                next[j] += c * q.stay();
                next[j + 1] += c * q.jump();
            }
            row = next;
        }
        row
    }

    /// Total variation between the n-step laws started one letter
    /// apart, the closed form for the plain decay of the two-letter
    /// seed (up to the weight q²).
    fn shifted_law_total_variation(n: usize, q: &JumpParameter) -> ExactRational {
        let row = jump_distribution(n, q);
        let mut tv = rational::zero();
        for j in 0..=row.len() {
            let from_one = if j < row.len() { row[j].clone() } else { rational::zero() };
            let from_two = if j == 0 { rational::zero() } else { row[j - 1].clone() };
            tv += rational::abs(&(from_one - from_two));
        }
        tv
    }

    #[test]
    fn seed_is_mean_zero() {
        for q_str in ["1/2", "1/3", "3/4"] {
            let q = JumpParameter::parse(q_str).unwrap();
            let u = two_letter_mean_zero_seed(&q);
            assert!(mu_integral(&u, &q).unwrap().is_zero(), "q = {q_str}");
        }
    }

    #[test]
    fn plain_decay_matches_the_total_variation_closed_form() {
        for q_str in ["1/2", "1/3"] {
            let q = JumpParameter::parse(q_str).unwrap();
            let u = two_letter_mean_zero_seed(&q);
            let report = exactness_decay(&u, &q, 12).unwrap();
            let weight = q.jump() * q.jump();
            for n in 0..=12 {
                let expect = &weight * shifted_law_total_variation(n, &q);
                assert_eq!(report.norms[n], expect, "q = {q_str}, n = {n}");
            }
        }
    }

    #[test]
    fn plain_decay_is_non_increasing_and_halves() {
        let q = half();
        let u = two_letter_mean_zero_seed(&q);
        let report = exactness_decay(&u, &q, 16).unwrap();
        assert!(report.is_non_increasing());
        assert_eq!(report.norms[0], rational::ratio(1, 2));
        assert!(report.norms[16] < report.norms[0]);
    }

    #[test]
    fn cesaro_starts_at_the_plain_norm_and_obeys_the_triangle_bound() {
        let q = half();
        let u = two_letter_mean_zero_seed(&q);
        let plain = exactness_decay(&u, &q, 20).unwrap();
        let cesaro = ergodic_average_decay(&u, &q, 20).unwrap();
        assert_eq!(cesaro.norm(1), plain.norm(0));
        for n in 1..=20usize {
            let mut bound = rational::zero();
            for k in 0..n {
                bound += plain.norms[k].clone();
            }
            bound /= rational::int(n as i64);
            assert!(
                cesaro.norms[n - 1] <= bound,
                "n = {n}: {} > {}",
                rational::format(&cesaro.norms[n - 1]),
                rational::format(&bound)
            );
        }
    }

    #[test]
    fn conjugated_iterates_report_the_same_norms() {
        let q = half();
        let u = two_letter_mean_zero_seed(&q);
        let report = exactness_decay(&u, &q, 6).unwrap();
        let mut iterate = u;
        for n in 0..=6usize {
            assert_eq!(iterate.mu_norm(&q).unwrap(), report.norms[n], "n = {n}");
            iterate = iterate.conjugated_transfer(&q);
        }
    }

    #[test]
    fn zero_input_reports_zeros() {
        let q = half();
        let zero = ShiftFunction::zero();
        let plain = exactness_decay(&zero, &q, 5).unwrap();
        assert!(plain.norms.iter().all(Zero::is_zero));
        let cesaro = ergodic_average_decay(&zero, &q, 5).unwrap();
        assert!(cesaro.norms.iter().all(Zero::is_zero));
    }

    #[test]
    fn mean_nonzero_input_is_rejected() {
        let q = half();
        let u = ShiftFunction::cylinder(CylinderWord::of(&[1]));
        match exactness_decay(&u, &q, 3) {
            Err(AcimError::Precondition(_)) => {}
            other => panic!("expected a precondition error, got {other:?}"),
        }
        assert!(ergodic_average_decay(&u, &q, 3).is_err());
    }

    #[test]
    fn csv_rows_carry_the_index_convention() {
        let q = half();
        let u = two_letter_mean_zero_seed(&q);
        let plain = exactness_decay(&u, &q, 2).unwrap().to_csv_string();
        assert!(plain.starts_with("n,norm\n0,"));
        let cesaro = ergodic_average_decay(&u, &q, 2).unwrap().to_csv_string();
        assert!(cesaro.starts_with("n,norm\n1,"));
    }

    #[test]
    fn grid_conjugation_by_a_flat_density_is_the_base_transfer() {
        let n = 128;
        let eps = 1.0 / (n as f64 + 1.0);
        let f = GridDensity::indicator(eps, 1.0, n, 0.5, 1.0).unwrap();
        let p = GridDensity::constant(eps, 1.0, n, 1.0).unwrap();
        let (out, mask) = grid_conjugated_transfer(&f, &p, engel_transfer).unwrap();
        let direct = engel_transfer(&f).unwrap();
        assert_eq!(mask.masked_cells, 0);
        for (a, b) in out.values().iter().zip(direct.values()) {
            assert!((a - b).abs() <= 1e-15 * b.abs().max(1.0));
        }
    }

    #[test]
    fn grid_mask_reports_its_distortion() {
        let n = 128;
        let eps = 1.0 / (n as f64 + 1.0);
        let f = GridDensity::constant(eps, 1.0, n, 1.0).unwrap();
        let mut p = GridDensity::constant(eps, 1.0, n, 1.0).unwrap();
        for v in p.values_mut().iter_mut().take(20) {
            *v = 1e-20;
        }
        let (out, mask) = grid_conjugated_transfer(&f, &p, engel_transfer).unwrap();
        assert_eq!(mask.masked_cells, 20);
        assert!(mask.masked_mu_mass > 0.0);
        assert!(mask.masked_mu_mass < 1e-18);
        for v in out.values().iter().take(20) {
            assert_eq!(*v, 0.0);
        }
    }

    #[test]
    fn grid_conjugation_rejects_mismatches_and_signed_densities() {
        let n = 64;
        let eps = 1.0 / (n as f64 + 1.0);
        let f = GridDensity::constant(eps, 1.0, n, 1.0).unwrap();
        let other = GridDensity::constant(eps, 1.0, n / 2, 1.0).unwrap();
        assert!(grid_conjugated_transfer(&f, &other, engel_transfer).is_err());
        let mut signed = GridDensity::constant(eps, 1.0, n, 1.0).unwrap();
        signed.values_mut()[3] = -1.0;
        assert!(grid_conjugated_transfer(&f, &signed, engel_transfer).is_err());
    }
}
