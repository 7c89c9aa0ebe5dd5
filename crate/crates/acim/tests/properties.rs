//! Randomized structural laws of the shift algebra.
//!
//! Each property is a defining identity that the exact arithmetic must
//! satisfy for every parameter and every word: the tower rule over one
//! step of the kernel, additivity of cylinder masses, the adjoint
//! relation, and contraction of the conjugated operator. Failures here
//! point at the algebra itself rather than at any particular closed
//! form.

use proptest::prelude::*;

use acim::markov::{
    adjoint_defect, cylinder_measure, density_expectation, series_identity,
    unique_zero_expectation, CylinderWord, JumpParameter, ShiftFunction,
};
use acim::rational::{self, ExactRational};
use acim::wandering::annihilating_density;

fn q_strategy() -> impl Strategy<Value = JumpParameter> {
    (1i64..50, 1i64..50).prop_map(|(a, b)| {
        let num = a.min(b);
        let den = a.max(b) + 1;
        JumpParameter::new(rational::ratio(num, den)).unwrap()
    })
}

fn word_strategy(max_extra: usize) -> impl Strategy<Value = CylinderWord> {
    (
        -4i64..=4,
        proptest::collection::vec(any::<bool>(), 0..max_extra),
    )
        .prop_map(|(start, steps)| {
            let mut letters = vec![start];
            for up in steps {
                let last = *letters.last().unwrap();
                letters.push(last + i64::from(up));
            }
            CylinderWord::of(&letters)
        })
}

fn coeff_strategy() -> impl Strategy<Value = ExactRational> {
    (-9i64..=9, 1i64..=9).prop_map(|(n, d)| rational::ratio(n, d))
}

/// One step of the kernel applied to the conditioning word must average
/// the two continuations with the transition weights.
fn tower_gap(
    value: impl Fn(&CylinderWord) -> ExactRational,
    word: &CylinderWord,
    q: &JumpParameter,
) -> ExactRational {
    let [stay, up] = word.valid_extensions();
    value(word) - (q.stay() * value(&stay) + q.jump() * value(&up))
}

proptest! {
    #[test]
    fn cylinder_mass_splits_over_extensions(word in word_strategy(6), q in q_strategy()) {
        let [stay, up] = word.valid_extensions();
        let total = cylinder_measure(&stay, &q) + cylinder_measure(&up, &q);
        prop_assert_eq!(cylinder_measure(&word, &q), total);
    }

    #[test]
    fn density_expectation_obeys_the_tower_rule(word in word_strategy(6), q in q_strategy()) {
        let gap = tower_gap(|w| density_expectation(w, &q), &word, &q);
        prop_assert!(gap == rational::zero(), "gap {}", rational::format(&gap));
    }

    #[test]
    fn unique_zero_expectation_obeys_the_tower_rule(word in word_strategy(6), q in q_strategy()) {
        let gap = tower_gap(|w| unique_zero_expectation(w, &q), &word, &q);
        prop_assert!(gap == rational::zero(), "gap {}", rational::format(&gap));
    }

    #[test]
    fn pattern_occurrence_obeys_the_tower_rule(
        word in word_strategy(5),
        pattern in word_strategy(3),
        q in q_strategy(),
    ) {
        let letters = pattern.letters();
        prop_assume!(letters.iter().any(|&a| a != letters[0]));
        let density = annihilating_density(&pattern, &q).unwrap();
        let gap = tower_gap(|w| density.occurrence_expectation(w), &word, &q);
        prop_assert!(gap == rational::zero(), "gap {}", rational::format(&gap));
    }

    #[test]
    fn series_identity_holds_on_random_words(word in word_strategy(6), q in q_strategy()) {
        prop_assert!(series_identity(&word, &q).unwrap().holds());
    }

    #[test]
    fn transfer_is_adjoint_to_the_shift(
        f_word in word_strategy(4),
        g_word in word_strategy(4),
        q in q_strategy(),
    ) {
        let f = ShiftFunction::cylinder(f_word);
        let defect = adjoint_defect(&f, &g_word, &q);
        prop_assert!(defect == rational::zero(), "defect {}", rational::format(&defect));
    }

    #[test]
    fn invariance_of_the_weighted_measure_on_random_words(
        word in word_strategy(6),
        q in q_strategy(),
    ) {
        // Mass of the preimage of the cylinder against the density
        // equals its own weighted mass.
        let own = cylinder_measure(&word, &q) * density_expectation(&word, &q);
        let mut pulled = rational::zero();
        for s in [word.first() - 1, word.first()] {
            let longer = word.prepended(s);
            if longer.is_valid() {
                pulled += cylinder_measure(&longer, &q) * density_expectation(&longer, &q);
            }
        }
        prop_assert_eq!(own, pulled);
    }

    #[test]
    fn masked_norm_never_exceeds_the_full_norm(
        w1 in word_strategy(4),
        c1 in coeff_strategy(),
        w2 in word_strategy(4),
        c2 in coeff_strategy(),
        q in q_strategy(),
    ) {
        let mut f = ShiftFunction::zero();
        f.add_cylinder(w1, c1);
        f.add_cylinder(w2, c2);
        let masked = f.masked_abs_integral(&q).unwrap();
        let full = f.abs_integral(&q).unwrap();
        prop_assert!(masked <= full);
    }

    #[test]
    fn conjugated_transfer_contracts_the_weighted_norm(
        w1 in word_strategy(4),
        c1 in coeff_strategy(),
        w2 in word_strategy(4),
        c2 in coeff_strategy(),
        q in q_strategy(),
    ) {
        let mut f = ShiftFunction::zero();
        f.add_cylinder(w1, c1);
        f.add_cylinder(w2, c2);
        let before = f.mu_norm(&q).unwrap();
        let after = f.conjugated_transfer(&q).mu_norm(&q).unwrap();
        prop_assert!(after <= before);
    }

    #[test]
    fn weighting_then_dividing_is_the_identity_in_the_weighted_norm(
        w1 in word_strategy(4),
        c1 in coeff_strategy(),
        w2 in word_strategy(4),
        c2 in coeff_strategy(),
        q in q_strategy(),
    ) {
        let mut f = ShiftFunction::zero();
        f.add_cylinder(w1, c1);
        f.add_cylinder(w2, c2);
        let back = f.weighted_by_density(&q).div_invariant_density(&q);
        let distance = back.mu_distance(&f, &q).unwrap();
        prop_assert!(distance == rational::zero(), "distance {}", rational::format(&distance));
    }
}
