//! Wandering-set certificates and measures that annihilate them.
//!
//! A set W wanders when W ∩ T⁻ⁿW = ∅ for every n ≥ 1. For the
//! monotone shift the letters along any path never decrease, which
//! turns wandering into a word-combinatorics question with complete
//! answers: a non-constant valid word can never reappear shifted, a
//! constant word trivially can. For the interval map the same
//! monotonicity (orbits never increase) gives a one-line certificate
//! whenever the whole interval maps below itself; otherwise sampled
//! evidence at a finite horizon is reported and labeled as such.
//!
//! The annihilating construction: given a wandering cylinder \[w\],
//! the indicator of "the two-sided path never shows the pattern w" is
//! shift-invariant, so its conditional expectation against the visible
//! coordinates is an invariant density, and it vanishes on \[w\] by
//! construction. On this chain the expectation is a closed form: the
//! two-sided path climbs through every level exactly once and sits at
//! level s for a geometric sojourn L_s, the sojourns are independent,
//! and the pattern w appears somewhere iff the L_s match the block
//! profile of w. A prefix pins some sojourns exactly, pads the two
//! boundary levels with geometric tails, and leaves the rest fresh.

use serde::{Serialize, Serializer};

use crate::error::{AcimError, Result};
use crate::interval::{engel_apply, BranchFamily, EngelMap};
use crate::markov::{
    cylinder_measure, invariance_report, weighted_cylinder_measure, CylinderWord, JumpParameter,
};
use crate::rational::{self, ExactRational};

/// Which set a certificate talks about.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SetDescriptor {
    Cylinder { word: CylinderWord },
    Interval { lo: f64, hi: f64 },
}

/// How far a certificate reaches: every n ≥ 1, or a finite check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Horizon {
    All,
    UpTo(usize),
}

impl Serialize for Horizon {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Horizon::All => s.serialize_str("all"),
            Horizon::UpTo(n) => s.serialize_u64(*n as u64),
        }
    }
}

/// Proof by structure, or evidence by finite sampling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CertificateMethod {
    Combinatorial,
    Sampled,
}

/// A positive-time return into the set, disproving wandering.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReturnWitness {
    /// A path in \[w\] ∩ T⁻ⁿ\[w\].
    Word { n: usize, word: CylinderWord },
    /// A start with Tⁿ(start) back in the interval.
    Point { n: usize, start: f64 },
}

/// The outcome of a wandering check. `verified` with the combinatorial
/// method is a proof for the stated horizon; with the sampled method it
/// is finite evidence only, never a proof.
#[derive(Clone, Debug, Serialize)]
pub struct WanderingCertificate {
    pub set: SetDescriptor,
    pub horizon: Horizon,
    pub method: CertificateMethod,
    pub verified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<ReturnWitness>,
}

impl WanderingCertificate {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("certificates serialize")
    }
}

/// Decides wandering for a cylinder. The answer is complete: a path's
/// letters never decrease, so a shifted copy of a non-constant word
/// would force its total rise to fit inside its own flat prefix, which
/// is impossible; a constant word reappears immediately. The jump
/// parameter does not enter the combinatorics and is accepted only to
/// keep the call shape uniform across set kinds.
pub fn certify_wandering_cylinder(w: &CylinderWord, q: &JumpParameter) -> WanderingCertificate {
    let _ = q;
    let set = SetDescriptor::Cylinder { word: w.clone() };
    if !w.is_valid() {
        // The empty set wanders vacuously.
        return WanderingCertificate {
            set,
            horizon: Horizon::All,
            method: CertificateMethod::Combinatorial,
            verified: true,
            witness: None,
        };
    }
    let constant = w.letters().iter().all(|&a| a == w.first());
    if constant {
        let mut letters = w.letters().to_vec();
        letters.push(w.first());
        return WanderingCertificate {
            set,
            horizon: Horizon::All,
            method: CertificateMethod::Combinatorial,
            verified: false,
            witness: Some(ReturnWitness::Word {
                n: 1,
                word: CylinderWord::of(&letters),
            }),
        };
    }
    WanderingCertificate {
        set,
        horizon: Horizon::All,
        method: CertificateMethod::Combinatorial,
        verified: true,
        witness: None,
    }
}

/// Decides wandering for a half-open interval (lo, hi] under the
/// interval map. When every point of the interval maps to lo or below,
/// monotone orbits can never come back: a proof for all n. Otherwise
/// a deterministic sample of starts (a uniform mesh, the endpoint, and
/// every branch endpoint inside, which is where the fixed points sit)
/// is iterated to the horizon; early exit once an orbit falls to lo,
/// since it cannot return after that.
pub fn certify_wandering_interval(lo: f64, hi: f64, horizon: usize) -> Result<WanderingCertificate> {
    if !(0.0 < lo && lo < hi && hi <= 1.0) || !lo.is_finite() || !hi.is_finite() {
        return Err(AcimError::Domain(format!(
            "need 0 < lo < hi <= 1, got ({lo}, {hi}]"
        )));
    }
    if horizon == 0 {
        return Err(AcimError::InvalidParameter(
            "the horizon must be at least 1".into(),
        ));
    }
    let set = SetDescriptor::Interval { lo, hi };
    let map = EngelMap;
    // Supremum of the map over (lo, hi]: within each branch the map is
    // increasing, so only right endpoints of branch pieces matter.
    let mut sup = f64::NEG_INFINITY;
    let mut k = map.locate(hi).expect("hi lies in (0, 1]");
    loop {
        let b = map.branch(k).expect("positive branch index");
        if b.domain_hi <= lo {
            break;
        }
        if b.domain_lo < hi {
            sup = sup.max(b.forward(hi.min(b.domain_hi)));
        }
        k += 1;
    }
    if sup <= lo {
        return Ok(WanderingCertificate {
            set,
            horizon: Horizon::All,
            method: CertificateMethod::Combinatorial,
            verified: true,
            witness: None,
        });
    }
    let mut starts: Vec<f64> = Vec::new();
    let mesh = 512usize;
    for j in 0..mesh {
        starts.push(lo + (hi - lo) * (j as f64 + 0.5) / mesh as f64);
    }
    starts.push(hi);
    let mut k = map.locate(hi).expect("hi lies in (0, 1]");
    loop {
        let endpoint = 1.0 / k as f64;
        if endpoint <= lo {
            break;
        }
        if endpoint <= hi {
            starts.push(endpoint);
        }
        k += 1;
    }
    for &start in &starts {
        let mut x = start;
        for n in 1..=horizon {
            x = engel_apply(x)?;
            if x <= lo {
                break;
            }
            if x <= hi {
                return Ok(WanderingCertificate {
                    set,
                    horizon: Horizon::All,
                    method: CertificateMethod::Sampled,
                    verified: false,
                    witness: Some(ReturnWitness::Point { n, start }),
                });
            }
        }
    }
    Ok(WanderingCertificate {
        set,
        horizon: Horizon::UpTo(horizon),
        method: CertificateMethod::Sampled,
        verified: true,
        witness: None,
    })
}

/// How a prefix constrains the sojourn length at one level.
#[derive(Clone, Copy, Debug)]
enum LevelInfo {
    /// Unobserved: a fresh geometric sojourn of at least 1.
    Fresh,
    /// Fully visible interior block of the prefix.
    Exact(usize),
    /// Boundary block padded on one side by a geometric tail (the
    /// unseen past at the first level, or the unseen future at the
    /// last).
    SinglePad(usize),
    /// A one-block prefix, padded on both sides.
    BothPad(usize),
}

fn rat_pow(base: &ExactRational, n: usize) -> ExactRational {
    let mut out = rational::one();
    for _ in 0..n {
        out *= base;
    }
    out
}

/// P(L ≥ v) under the given constraint; v ≥ 1.
fn sojourn_at_least(info: LevelInfo, v: usize, q: &JumpParameter) -> ExactRational {
    let stay = q.stay();
    match info {
        LevelInfo::Fresh => rat_pow(&stay, v - 1),
        LevelInfo::Exact(c) => {
            if c >= v {
                rational::one()
            } else {
                rational::zero()
            }
        }
        LevelInfo::SinglePad(c) => rat_pow(&stay, v.saturating_sub(c)),
        LevelInfo::BothPad(c) => {
            let t = v.saturating_sub(c);
            rat_pow(&stay, t) * (rational::one() + rational::int(t as i64) * q.jump())
        }
    }
}

/// P(L = v) under the given constraint; v ≥ 1.
fn sojourn_exactly(info: LevelInfo, v: usize, q: &JumpParameter) -> ExactRational {
    let stay = q.stay();
    match info {
        LevelInfo::Fresh => q.jump() * rat_pow(&stay, v - 1),
        LevelInfo::Exact(c) => {
            if c == v {
                rational::one()
            } else {
                rational::zero()
            }
        }
        LevelInfo::SinglePad(c) => {
            if v >= c {
                q.jump() * rat_pow(&stay, v - c)
            } else {
                rational::zero()
            }
        }
        LevelInfo::BothPad(c) => {
            if v >= c {
                rational::int((v - c + 1) as i64) * q.jump() * q.jump() * rat_pow(&stay, v - c)
            } else {
                rational::zero()
            }
        }
    }
}

/// Runs of equal letters as (level, length) pairs. Levels of a valid
/// word are consecutive integers.
fn blocks_of(w: &CylinderWord) -> Vec<(i64, usize)> {
    let mut out: Vec<(i64, usize)> = Vec::new();
    for &a in w.letters() {
        match out.last_mut() {
            Some((level, count)) if *level == a => *count += 1,
            _ => out.push((a, 1)),
        }
    }
    out
}

/// The density 1 − P(pattern occurs in the two-sided path | visible
/// coordinates), evaluated exactly on prefix cylinders. Vanishes on
/// the pattern's own cylinder; an impossible pattern (not a valid
/// word) gives the constant 1.
#[derive(Clone, Debug)]
pub struct PatternDensity {
    pattern: CylinderWord,
    q: JumpParameter,
    /// Block profile of the pattern; empty when the pattern cannot
    /// occur on any path.
    blocks: Vec<(i64, usize)>,
}

impl PatternDensity {
    pub fn pattern(&self) -> &CylinderWord {
        &self.pattern
    }

    pub fn q(&self) -> &JumpParameter {
        &self.q
    }

    /// Letter range wide enough to exercise every distinct evaluation
    /// case around the pattern.
    pub fn letter_window(&self) -> (i64, i64) {
        match (self.blocks.first(), self.blocks.last()) {
            (Some(&(first, _)), Some(&(last, _))) => (first - 3, last + 3),
            _ => (-3, 3),
        }
    }

    /// E\[pattern occurs | prefix\], exact: the product over pattern
    /// blocks of per-level sojourn probabilities. Interior blocks must
    /// match exactly (the pattern shows the full stay at that level);
    /// the two boundary blocks only need enough room.
    pub fn occurrence_expectation(&self, prefix: &CylinderWord) -> ExactRational {
        use num_traits::Zero;
        if self.blocks.is_empty() || !prefix.is_valid() {
            return rational::zero();
        }
        let prefix_blocks = blocks_of(prefix);
        let g = prefix_blocks.len();
        let t1 = prefix_blocks[0].0;
        let r = self.blocks.len();
        let mut prob = rational::one();
        for (i, &(level, length)) in self.blocks.iter().enumerate() {
            let info = {
                let j = level - t1;
                if j < 0 || j as usize >= g {
                    LevelInfo::Fresh
                } else {
                    let c = prefix_blocks[j as usize].1;
                    if g == 1 {
                        LevelInfo::BothPad(c)
                    } else if j == 0 || j as usize == g - 1 {
                        LevelInfo::SinglePad(c)
                    } else {
                        LevelInfo::Exact(c)
                    }
                }
            };
            let interior = r >= 2 && i > 0 && i < r - 1;
            prob *= if interior {
                sojourn_exactly(info, length, &self.q)
            } else {
                sojourn_at_least(info, length, &self.q)
            };
            if prob.is_zero() {
                break;
            }
        }
        prob
    }

    /// E\[pattern never occurs | prefix\] = 1 − occurrence.
    pub fn complement_expectation(&self, prefix: &CylinderWord) -> ExactRational {
        rational::one() - self.occurrence_expectation(prefix)
    }

    /// Mass of the prefix cylinder under the annihilating measure.
    pub fn weighted_measure(&self, prefix: &CylinderWord) -> ExactRational {
        cylinder_measure(prefix, &self.q) * self.complement_expectation(prefix)
    }
}

/// Builds the annihilating density for a wandering cylinder. Rejects
/// cylinders that fail the wandering certificate, since the avoidance
/// indicator is only shift-invariant when no shifted copy can overlap
/// the set.
pub fn annihilating_density(w: &CylinderWord, q: &JumpParameter) -> Result<PatternDensity> {
    let certificate = certify_wandering_cylinder(w, q);
    if !certificate.verified {
        return Err(AcimError::Precondition(format!(
            "{w} returns to itself under the shift, so avoiding it is not a \
             shift-invariant event"
        )));
    }
    let blocks = if w.is_valid() { blocks_of(w) } else { Vec::new() };
    Ok(PatternDensity {
        pattern: w.clone(),
        q: q.clone(),
        blocks,
    })
}

/// Exact check that the pattern density (i) assigns zero mass to the
/// pattern's cylinder and (ii) defines a shift-invariant measure on
/// every cylinder up to the given length over the pattern's letter
/// window.
pub fn verify_annihilation_and_invariance(pd: &PatternDensity, max_len: usize) -> bool {
    use num_traits::Zero;
    if pd.pattern.is_valid() && !pd.weighted_measure(&pd.pattern).is_zero() {
        return false;
    }
    let (lo, hi) = pd.letter_window();
    let report = invariance_report(
        &|u, _q| pd.complement_expectation(u),
        &pd.q,
        max_len,
        lo,
        hi,
    );
    report.exact
}

/// Scans cylinders up to the given length for positive annihilating
/// mass: the constructed measure is allowed to be zero (the theorem
/// needs a smallness condition this library does not evaluate), so
/// nonzero-ness is witnessed, never assumed.
pub fn has_positive_mass(pd: &PatternDensity, max_len: usize) -> bool {
    use num_traits::Zero;
    let (lo, hi) = pd.letter_window();
    CylinderWord::enumerate_valid_up_to(max_len, lo, hi)
        .iter()
        .any(|u| !pd.weighted_measure(u).is_zero())
}

/// Looks for two cylinders whose masses under the reference invariant
/// measure and under the annihilating measure are not proportional,
/// returning the first witnessing pair in enumeration order.
pub fn non_proportionality_witness(
    pd: &PatternDensity,
    max_len: usize,
) -> Option<(CylinderWord, CylinderWord)> {
    let (lo, hi) = pd.letter_window();
    let words = CylinderWord::enumerate_valid_up_to(max_len, lo, hi);
    let reference: Vec<ExactRational> = words
        .iter()
        .map(|u| weighted_cylinder_measure(u, &pd.q))
        .collect();
    let annihilating: Vec<ExactRational> = words.iter().map(|u| pd.weighted_measure(u)).collect();
    for (i, a) in words.iter().enumerate() {
        for (j, b) in words.iter().enumerate() {
            if &reference[i] * &annihilating[j] != &reference[j] * &annihilating[i] {
                return Some((a.clone(), b.clone()));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::density_expectation;
    use num_traits::Zero;

    fn half() -> JumpParameter {
        JumpParameter::parse("1/2").unwrap()
    }

    #[test]
    fn rising_words_wander_for_every_horizon() {
        let q = half();
        for letters in [vec![-1, 0, 1], vec![5, 6], vec![0, 0, 1], vec![-3, -2, -2]] {
            let cert = certify_wandering_cylinder(&CylinderWord::of(&letters), &q);
            assert!(cert.verified, "{letters:?}");
            assert_eq!(cert.method, CertificateMethod::Combinatorial);
            assert_eq!(cert.horizon, Horizon::All);
            assert!(cert.witness.is_none());
        }
    }

    #[test]
    fn constant_words_return_immediately() {
        let q = half();
        let cert = certify_wandering_cylinder(&CylinderWord::of(&[0]), &q);
        assert!(!cert.verified);
        match &cert.witness {
            Some(ReturnWitness::Word { n, word }) => {
                assert_eq!(*n, 1);
                assert_eq!(word.letters(), &[0, 0]);
                assert!(word.is_valid());
            }
            other => panic!("expected a word witness, got {other:?}"),
        }
        let cert = certify_wandering_cylinder(&CylinderWord::of(&[2, 2, 2]), &q);
        assert!(!cert.verified);
        match &cert.witness {
            Some(ReturnWitness::Word { n: 1, word }) => assert_eq!(word.letters(), &[2, 2, 2, 2]),
            other => panic!("unexpected witness {other:?}"),
        }
    }

    #[test]
    fn invalid_words_wander_vacuously() {
        let q = half();
        let cert = certify_wandering_cylinder(&CylinderWord::of(&[1, 0]), &q);
        assert!(cert.verified);
    }

    #[test]
    fn certificate_json_shape() {
        let q = half();
        let passing = certify_wandering_cylinder(&CylinderWord::of(&[-1, 0, 1]), &q).to_json();
        assert_eq!(passing["set"]["cylinder"]["word"], serde_json::json!([-1, 0, 1]));
        assert_eq!(passing["horizon"], "all");
        assert_eq!(passing["method"], "combinatorial");
        assert_eq!(passing["verified"], true);
        assert!(passing.get("witness").is_none());
        let failing = certify_wandering_cylinder(&CylinderWord::of(&[0]), &q).to_json();
        assert_eq!(failing["witness"]["word"]["n"], 1);
        assert_eq!(failing["witness"]["word"]["word"], serde_json::json!([0, 0]));
    }

    #[test]
    fn interval_below_its_own_image_is_certified_combinatorially() {
        // (0.55, 0.775] sits in one branch and maps onto (0.1, 0.55].
        let cert = certify_wandering_interval(0.55, 0.775, 50).unwrap();
        assert!(cert.verified);
        assert_eq!(cert.method, CertificateMethod::Combinatorial);
        assert_eq!(cert.horizon, Horizon::All);
    }

    #[test]
    fn interval_holding_a_fixed_point_fails_with_a_witness() {
        // (0.49, 0.51] contains the fixed point 1/2.
        let cert = certify_wandering_interval(0.49, 0.51, 20).unwrap();
        assert!(!cert.verified);
        match cert.witness {
            Some(ReturnWitness::Point { n, start }) => {
                assert_eq!(n, 1);
                assert!(0.49 < start && start <= 0.51);
            }
            other => panic!("expected a point witness, got {other:?}"),
        }
        // Same story around 1/3.
        let cert = certify_wandering_interval(0.3, 0.35, 20).unwrap();
        assert!(!cert.verified);
    }

    #[test]
    fn interval_validation() {
        assert!(certify_wandering_interval(0.0, 0.5, 10).is_err());
        assert!(certify_wandering_interval(0.6, 0.5, 10).is_err());
        assert!(certify_wandering_interval(0.5, 1.5, 10).is_err());
        assert!(certify_wandering_interval(0.5, 0.9, 0).is_err());
    }

    #[test]
    fn annihilating_density_rejects_returning_cylinders() {
        let q = half();
        assert!(annihilating_density(&CylinderWord::of(&[0]), &q).is_err());
        assert!(annihilating_density(&CylinderWord::of(&[2, 2]), &q).is_err());
    }

    #[test]
    fn pattern_density_hand_values() {
        let q = half();
        let pd = annihilating_density(&CylinderWord::of(&[-1, 0, 1]), &q).unwrap();
        // On the pattern's own cylinder the density vanishes.
        assert!(pd.complement_expectation(&CylinderWord::of(&[-1, 0, 1])).is_zero());
        // High start: the walk's stay at 0 is a fresh geometric, so the
        // pattern appears with probability q.
        assert_eq!(
            pd.complement_expectation(&CylinderWord::of(&[5])),
            rational::one() - q.jump()
        );
        // A double zero rules the pattern out entirely.
        assert_eq!(
            pd.complement_expectation(&CylinderWord::of(&[0, 0])),
            rational::one()
        );
    }

    #[test]
    fn pattern_probability_matches_the_invariant_density_everywhere() {
        // For the three-letter rise through zero, "the pattern occurs"
        // is exactly the event behind the invariant density.
        for q_str in ["1/3", "1/2"] {
            let q = JumpParameter::parse(q_str).unwrap();
            let pd = annihilating_density(&CylinderWord::of(&[-1, 0, 1]), &q).unwrap();
            for u in CylinderWord::enumerate_valid_up_to(6, -3, 3) {
                assert_eq!(
                    pd.occurrence_expectation(&u),
                    density_expectation(&u, &q),
                    "q = {q_str}, u = {u}"
                );
            }
        }
    }

    #[test]
    fn complement_stays_in_the_unit_interval() {
        let q = JumpParameter::parse("2/7").unwrap();
        for pattern in [vec![-1, 0, 1], vec![0, 1], vec![-2, -1, -1, 0]] {
            let pd = annihilating_density(&CylinderWord::of(&pattern), &q).unwrap();
            for u in CylinderWord::enumerate_valid_up_to(5, -4, 4) {
                let p = pd.complement_expectation(&u);
                assert!(p >= rational::zero() && p <= rational::one(), "{pattern:?}, {u}");
            }
        }
    }

    #[test]
    fn annihilation_and_invariance_verify_exactly() {
        let q = half();
        let pd = annihilating_density(&CylinderWord::of(&[-1, 0, 1]), &q).unwrap();
        assert!(verify_annihilation_and_invariance(&pd, 5));
        assert!(has_positive_mass(&pd, 3));
    }

    #[test]
    fn impossible_pattern_gives_the_flat_density() {
        let q = half();
        let pd = annihilating_density(&CylinderWord::of(&[1, 0]), &q).unwrap();
        assert_eq!(
            pd.complement_expectation(&CylinderWord::of(&[4])),
            rational::one()
        );
        assert!(verify_annihilation_and_invariance(&pd, 4));
    }

    #[test]
    fn always_occurring_pattern_gives_the_zero_measure() {
        // Every path climbs from its 0-stay to its 1-stay, so the
        // pattern (0, 1) occurs almost surely and the annihilating
        // measure collapses to zero. Still invariant, just empty.
        let q = half();
        let pd = annihilating_density(&CylinderWord::of(&[0, 1]), &q).unwrap();
        assert!(verify_annihilation_and_invariance(&pd, 4));
        assert!(!has_positive_mass(&pd, 4));
        assert!(non_proportionality_witness(&pd, 3).is_none());
    }

    #[test]
    fn perturbed_density_is_caught() {
        let q = half();
        let pd = annihilating_density(&CylinderWord::of(&[-1, 0, 1]), &q).unwrap();
        let bump = CylinderWord::of(&[1]);
        let report = invariance_report(
            &|u, _q| {
                let mut v = pd.complement_expectation(u);
                if u == &bump {
                    v += rational::ratio(1, 7);
                }
                v
            },
            &q,
            4,
            -4,
            4,
        );
        assert!(!report.exact);
        assert!(!report.defects.is_empty());
    }

    #[test]
    fn non_proportionality_has_an_exact_witness() {
        let q = half();
        let pd = annihilating_density(&CylinderWord::of(&[-1, 0, 1]), &q).unwrap();
        let (a, b) = non_proportionality_witness(&pd, 3).expect("witness exists");
        let fa = weighted_cylinder_measure(&a, &q);
        let fb = weighted_cylinder_measure(&b, &q);
        let ya = pd.weighted_measure(&a);
        let yb = pd.weighted_measure(&b);
        assert_ne!(fa * yb, fb * ya);
    }
}
