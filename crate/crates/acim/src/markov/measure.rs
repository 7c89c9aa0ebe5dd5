//! The σ-finite shift measure and its explicit invariant density.
//!
//! The walk jumps up by one with probability q and stays put with
//! probability 1 − q. The reference measure m assigns to a cylinder the
//! product of its transition weights, so every single-letter cylinder
//! has measure 1 and the space carries infinite total mass. The shift
//! preserves m because each column of the transition matrix sums to 1.
//!
//! The invariant density studied here is determined by how often the
//! coordinate path visits 0:
//!
//! * 0 on paths with two or more zero coordinates,
//! * 1 on paths with exactly one zero coordinate that start below 0,
//! * q otherwise (paths starting at or above 0 with at most one zero).
//!
//! On a finite prefix the value may or may not be determined; when it
//! is not, the conditional expectation over the cylinder has a closed
//! form, validated elsewhere against brute-force continuation
//! enumeration.

use num_traits::Zero;
use serde::Serialize;

use crate::error::{AcimError, Result};
use crate::rational::{self, ExactRational};

use super::word::{classify, CylinderWord, PrefixClass, WordClass};

/// The upward jump probability q ∈ (0, 1), kept exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JumpParameter {
    q: ExactRational,
}

impl JumpParameter {
    pub fn new(q: ExactRational) -> Result<Self> {
        if q <= rational::zero() || q >= rational::one() {
            return Err(AcimError::InvalidParameter(format!(
                "jump probability must lie strictly between 0 and 1, got {}",
                rational::format(&q)
            )));
        }
        Ok(JumpParameter { q })
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::new(rational::parse(s)?)
    }

    /// q, the probability of moving up by one.
    pub fn jump(&self) -> ExactRational {
        self.q.clone()
    }

    /// 1 − q, the probability of staying.
    pub fn stay(&self) -> ExactRational {
        rational::one() - &self.q
    }

    /// Transition weight from letter `a` to letter `b`.
    pub fn transition(&self, a: i64, b: i64) -> ExactRational {
        if b == a {
            self.stay()
        } else if b == a + 1 {
            self.jump()
        } else {
            rational::zero()
        }
    }
}

/// Measure of the cylinder of `word`: the product of its transition
/// weights. Invalid words yield 0; single-letter cylinders have
/// measure 1 (the empty product).
pub fn cylinder_measure(word: &CylinderWord, q: &JumpParameter) -> ExactRational {
    let mut m = rational::one();
    for pair in word.letters().windows(2) {
        let p = q.transition(pair[0], pair[1]);
        if p.is_zero() {
            return rational::zero();
        }
        m *= p;
    }
    m
}

/// Pointwise value of the invariant density on a cylinder, when the
/// visible prefix already determines it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DensityValue {
    Determined(ExactRational),
    /// The value depends on letters beyond the prefix; use
    /// [`density_expectation`] instead.
    Undetermined,
}

/// Value of the invariant density as determined by a prefix class:
/// 0 once two zeros are visible; 1 for a closed single zero on a path
/// starting below 0; q when the path starts above 0, or for a closed
/// single zero on a path starting at 0; undetermined otherwise.
pub fn density_value(prefix: &PrefixClass, q: &JumpParameter) -> DensityValue {
    if prefix.visible_zero_count > 1 {
        return DensityValue::Determined(rational::zero());
    }
    if prefix.visible_zero_count == 1 && prefix.zero_block_closed {
        return if prefix.first_letter < 0 {
            DensityValue::Determined(rational::one())
        } else {
            DensityValue::Determined(q.jump())
        };
    }
    if prefix.first_letter > 0 {
        return DensityValue::Determined(q.jump());
    }
    DensityValue::Undetermined
}

/// Conditional expectation of the invariant density over the cylinder
/// of `word`. Invalid words integrate to zero.
///
/// For undetermined prefixes the closed form is:
/// * all letters below 0: the future zero block has length one with
///   probability q, so the expectation is q;
/// * word ending at its single zero: the block closes next step with
///   probability q, giving value 1 when the word starts below 0 and
///   value q when the word is the bare zero, hence q and q².
pub fn density_expectation(word: &CylinderWord, q: &JumpParameter) -> ExactRational {
    let class = match classify(word) {
        None => return rational::zero(),
        Some(c) => c,
    };
    match class {
        WordClass::MultiZero => rational::zero(),
        WordClass::SingleZeroClosed { first_negative } => {
            if first_negative {
                rational::one()
            } else {
                q.jump()
            }
        }
        WordClass::FirstPositive => q.jump(),
        WordClass::AllNegative => q.jump(),
        WordClass::SingleZeroOpen { first_negative } => {
            if first_negative {
                q.jump()
            } else {
                q.jump() * q.jump()
            }
        }
    }
}

/// Conditional probability, given the cylinder of `word`, that the path
/// starts below 0 and visits 0 exactly once. This is the indicator
/// whose expectation feeds both the density decomposition and the
/// transfer algebra's tail terms.
pub fn unique_zero_expectation(word: &CylinderWord, q: &JumpParameter) -> ExactRational {
    let class = match classify(word) {
        None => return rational::zero(),
        Some(c) => c,
    };
    match class {
        WordClass::MultiZero | WordClass::FirstPositive => rational::zero(),
        WordClass::SingleZeroClosed { first_negative } => {
            if first_negative {
                rational::one()
            } else {
                rational::zero()
            }
        }
        WordClass::SingleZeroOpen { first_negative } => {
            if first_negative {
                q.jump()
            } else {
                rational::zero()
            }
        }
        WordClass::AllNegative => q.jump(),
    }
}

/// Measure of the cylinder weighted by the invariant density:
/// ∫ over the cylinder of the density, i.e. measure × expectation.
pub fn weighted_cylinder_measure(word: &CylinderWord, q: &JumpParameter) -> ExactRational {
    cylinder_measure(word, q) * density_expectation(word, q)
}

/// Conditional probability, given the cylinder of `word`, that the
/// invariant density is strictly positive, i.e. that the path visits 0
/// at most once. Certain once the zero block has closed or the path
/// starts above 0; otherwise the open or future block has length one
/// with probability q; zero once two zeros are visible.
pub fn positive_density_probability(word: &CylinderWord, q: &JumpParameter) -> ExactRational {
    match classify(word) {
        None | Some(WordClass::MultiZero) => rational::zero(),
        Some(WordClass::FirstPositive) | Some(WordClass::SingleZeroClosed { .. }) => {
            rational::one()
        }
        Some(WordClass::AllNegative) | Some(WordClass::SingleZeroOpen { .. }) => q.jump(),
    }
}

/// Both sides of the series identity for the invariant density,
/// conditioned on a word: the density equals the probability that the
/// two-sided orbit shows the pattern (−1, 0, 1) strictly in the future
/// of the first coordinate, plus the closed form of the summed
/// transfer iterates of that pattern's indicator,
/// q·1{x₁ = 0, x₂ = 1} + q·1{x₁ ≥ 1}.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeriesIdentity {
    /// Orbit-occurrence series plus transfer series, in closed form.
    #[serde(with = "crate::rational::ratio_string")]
    pub series_sum: ExactRational,
    /// Conditional expectation of the invariant density itself.
    #[serde(with = "crate::rational::ratio_string")]
    pub density: ExactRational,
}

impl SeriesIdentity {
    pub fn holds(&self) -> bool {
        self.series_sum == self.density
    }
}

/// Evaluates the series identity on a valid word.
///
/// The first series counts occurrences of the pattern (−1, 0, 1) along
/// the forward orbit; on monotone paths it is the indicator of "starts
/// below 0 and visits 0 exactly once", whose conditional expectation is
/// [`unique_zero_expectation`]. The second series sums the transfer
/// iterates of the pattern indicator; the sum telescopes through the
/// geometric sojourn at each site (expected visits 1/q) to
/// q·1{x₁ = 0, x₂ = 1} + q·1{x₁ ≥ 1}, evaluated here conditionally.
pub fn series_identity(word: &CylinderWord, q: &JumpParameter) -> Result<SeriesIdentity> {
    if !word.is_valid() {
        return Err(AcimError::Precondition(format!(
            "invalid word {word}: cylinder is null"
        )));
    }
    let orbit_part = unique_zero_expectation(word, q);
    let transfer_part = if word.first() >= 1 {
        q.jump()
    } else if word.first() == 0 {
        if word.len() == 1 {
            // Second coordinate unseen: it is 1 with probability q.
            q.jump() * q.jump()
        } else if word.letters()[1] == 1 {
            q.jump()
        } else {
            rational::zero()
        }
    } else {
        rational::zero()
    };
    Ok(SeriesIdentity {
        series_sum: orbit_part + transfer_part,
        density: density_expectation(word, q),
    })
}

/// One failed cylinder in an invariance check.
#[derive(Clone, Debug, Serialize)]
pub struct InvarianceDefect {
    pub word: CylinderWord,
    /// Weighted measure of the preimage of the cylinder.
    #[serde(with = "crate::rational::ratio_string")]
    pub preimage: ExactRational,
    /// Weighted measure of the cylinder itself.
    #[serde(with = "crate::rational::ratio_string")]
    pub cylinder: ExactRational,
}

/// Outcome of an exhaustive invariance check over a family of words.
#[derive(Clone, Debug, Serialize)]
pub struct InvarianceReport {
    pub checked: usize,
    pub exact: bool,
    pub defects: Vec<InvarianceDefect>,
}

/// Verifies, for every valid word of length ≤ `max_len` with letters in
/// `[lo, hi]`, that the density-weighted measure of the shift preimage
/// of the cylinder equals that of the cylinder itself:
///
/// ```text
/// Σ_{s ∈ {a₁−1, a₁}}  m([s, a]) · E[p | (s, a)]  =  m([a]) · E[p | a]
/// ```
///
/// where p is given through its conditional-expectation oracle. The
/// preimage letters s may leave the window; the arithmetic stays exact.
pub fn invariance_report(
    density: &dyn Fn(&CylinderWord, &JumpParameter) -> ExactRational,
    q: &JumpParameter,
    max_len: usize,
    lo: i64,
    hi: i64,
) -> InvarianceReport {
    let words = CylinderWord::enumerate_valid_up_to(max_len, lo, hi);
    let mut defects = Vec::new();
    let checked = words.len();
    for word in words {
        let rhs = cylinder_measure(&word, q) * density(&word, q);
        let mut lhs = rational::zero();
        for s in [word.first() - 1, word.first()] {
            let pre = word.prepended(s);
            lhs += cylinder_measure(&pre, q) * density(&pre, q);
        }
        if lhs != rhs {
            defects.push(InvarianceDefect {
                word,
                preimage: lhs,
                cylinder: rhs,
            });
        }
    }
    InvarianceReport {
        checked,
        exact: defects.is_empty(),
        defects,
    }
}

/// Invariance of the measure weighted by the explicit invariant
/// density, over all valid cylinders in the window.
pub fn invariance_check(q: &JumpParameter, max_len: usize, lo: i64, hi: i64) -> InvarianceReport {
    invariance_report(&density_expectation, q, max_len, lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn q(n: i64, d: i64) -> JumpParameter {
        JumpParameter::new(ratio(n, d)).unwrap()
    }

    #[test]
    fn jump_parameter_rejects_out_of_range() {
        assert!(JumpParameter::new(ratio(0, 1)).is_err());
        assert!(JumpParameter::new(ratio(1, 1)).is_err());
        assert!(JumpParameter::new(ratio(3, 2)).is_err());
        assert!(JumpParameter::new(ratio(-1, 2)).is_err());
        assert!(JumpParameter::new(ratio(1, 2)).is_ok());
    }

    #[test]
    fn single_letter_cylinders_have_measure_one() {
        for s in -5..=5 {
            assert_eq!(
                cylinder_measure(&CylinderWord::of(&[s]), &q(1, 3)),
                ratio(1, 1)
            );
        }
    }

    #[test]
    fn forbidden_transition_kills_the_measure() {
        assert_eq!(
            cylinder_measure(&CylinderWord::of(&[0, 2]), &q(1, 2)),
            ratio(0, 1)
        );
    }

    #[test]
    fn five_letter_example_at_one_third() {
        // stay · jump · stay · jump = (2/3)·(1/3)·(2/3)·(1/3) = 4/81
        assert_eq!(
            cylinder_measure(&CylinderWord::of(&[-1, -1, 0, 0, 1]), &q(1, 3)),
            ratio(4, 81)
        );
    }

    #[test]
    fn density_value_three_cases() {
        let q = q(2, 5);
        let determined = |letters: &[i64]| {
            let w = CylinderWord::of(letters);
            density_value(&PrefixClass::from_word(&w).unwrap(), &q)
        };
        assert_eq!(
            determined(&[-1, 0, 0]),
            DensityValue::Determined(ratio(0, 1))
        );
        assert_eq!(
            determined(&[-1, 0, 1]),
            DensityValue::Determined(ratio(1, 1))
        );
        assert_eq!(determined(&[2, 2, 3]), DensityValue::Determined(ratio(2, 5)));
        assert_eq!(determined(&[0, 1]), DensityValue::Determined(ratio(2, 5)));
        assert_eq!(determined(&[-2, -1]), DensityValue::Undetermined);
        assert_eq!(determined(&[0]), DensityValue::Undetermined);
    }

    #[test]
    fn expectation_closed_forms() {
        let h = q(1, 2);
        let e = |letters: &[i64]| density_expectation(&CylinderWord::of(letters), &h);
        assert_eq!(e(&[3]), ratio(1, 2));
        assert_eq!(e(&[-1, 0]), ratio(1, 2));
        assert_eq!(e(&[0]), ratio(1, 4));
        assert_eq!(e(&[-3, -2, -2]), ratio(1, 2));
        assert_eq!(e(&[1, 0]), ratio(0, 1)); // invalid word
    }

    #[test]
    fn invariance_is_exact_for_the_density() {
        for (n, d) in [(1, 4), (1, 2), (3, 4), (2, 7)] {
            let report = invariance_check(&q(n, d), 5, -3, 3);
            assert!(report.exact, "defects: {:?}", report.defects);
            assert!(report.checked > 100);
        }
    }

    #[test]
    fn invariance_holds_trivially_for_the_reference_measure() {
        let report = invariance_report(&|_, _| rational::one(), &q(1, 2), 4, -2, 2);
        assert!(report.exact);
    }

    #[test]
    fn perturbed_density_is_caught() {
        // Bump the value on one cylinder; invariance must fail.
        let bumped = |w: &CylinderWord, q: &JumpParameter| {
            let mut v = density_expectation(w, q);
            if w.letters() == [1] {
                v += ratio(1, 10);
            }
            v
        };
        let report = invariance_report(&bumped, &q(1, 2), 3, -2, 2);
        assert!(!report.exact);
    }

    #[test]
    fn series_identity_across_classes() {
        let h = q(1, 2);
        for letters in [
            &[2][..],
            &[-1, 0, 1][..],
            &[0, 1][..],
            &[0][..],
            &[-1, 0][..],
            &[-2, -1][..],
            &[0, 0][..],
            &[-1, 0, 0][..],
        ] {
            let id = series_identity(&CylinderWord::of(letters), &h).unwrap();
            assert!(id.holds(), "word {letters:?}: {id:?}");
        }
    }

    #[test]
    fn series_identity_rejects_invalid_words() {
        assert!(series_identity(&CylinderWord::of(&[0, 2]), &q(1, 2)).is_err());
    }
}
