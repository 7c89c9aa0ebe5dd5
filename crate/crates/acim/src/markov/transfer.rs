//! Exact transfer-operator algebra on the shift.
//!
//! The transfer operator T̂ is the adjoint of composition with the
//! shift: ∫_A T̂f dm = ∫_{T⁻¹A} f dm. Concretely, for the monotone walk,
//!
//! ```text
//! (T̂f)(x) = Σ_s p(s, x₁) · f(s, x₁, x₂, …),   s ∈ {x₁ − 1, x₁},
//! ```
//!
//! and T̂1 = 1 because the transition columns sum to one, which is the
//! operator form of shift invariance of the measure.
//!
//! [`ShiftFunction`] is a finite linear span closed under T̂, pointwise
//! multiplication by the invariant density, and the integrals needed
//! here. Its four kinds of terms:
//!
//! * plain cylinder indicators 1\[w\];
//! * products U·1\[v\] of a cylinder indicator with the indicator U of
//!   "starts below 0 and visits 0 exactly once", kept only for
//!   all-negative v (every other case collapses to a plain cylinder or
//!   to zero and is normalized away on insertion);
//! * the free indicator U itself;
//! * the indicator of starting at or above 1.
//!
//! The last two have infinite mass, so they are admitted in symbolic
//! identities and cylinder integrals but rejected by the global
//! integrals. The invariant density itself lives in the algebra:
//! p = U + q·1\[0,1\] + q·1{x₁ ≥ 1} almost everywhere, and T̂p = p holds
//! exactly at the level of normalized terms.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use crate::error::{AcimError, Result};
use crate::rational::{self, ExactRational};

use super::measure::{
    cylinder_measure, positive_density_probability, unique_zero_expectation, JumpParameter,
};
use super::word::{classify, CylinderWord, WordClass};

/// A finite linear combination of cylinder indicators, unique-zero
/// restricted indicators, the free unique-zero indicator and the
/// high-start indicator, with exact rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ShiftFunction {
    cylinders: BTreeMap<CylinderWord, ExactRational>,
    unique_zero: BTreeMap<CylinderWord, ExactRational>,
    unique_zero_free: ExactRational,
    high_start: ExactRational,
}

fn bump(map: &mut BTreeMap<CylinderWord, ExactRational>, word: CylinderWord, c: ExactRational) {
    if c.is_zero() {
        return;
    }
    match map.entry(word) {
        Entry::Vacant(slot) => {
            slot.insert(c);
        }
        Entry::Occupied(mut slot) => {
            *slot.get_mut() += c;
            if slot.get().is_zero() {
                slot.remove();
            }
        }
    }
}

impl ShiftFunction {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The indicator of a single cylinder.
    pub fn cylinder(word: CylinderWord) -> Self {
        let mut f = Self::zero();
        f.add_cylinder(word, rational::one());
        f
    }

    /// The invariant density p = U + q·1[0,1] + q·1{x₁ ≥ 1}.
    ///
    /// The identity with the pointwise definition of p fails only on
    /// the null set of paths that start below 0 and never reach it.
    pub fn invariant_density(q: &JumpParameter) -> Self {
        let mut f = Self::zero();
        f.unique_zero_free = rational::one();
        f.add_cylinder(CylinderWord::of(&[0, 1]), q.jump());
        f.high_start = q.jump();
        f
    }

    /// The indicator of the support of the invariant density,
    /// {p > 0} = {U = 1} ⊔ {x₁ = 0, x₂ = 1} ⊔ {x₁ ≥ 1} up to a null
    /// set: the set of paths visiting 0 at most once. This is also the
    /// canonical representative of the constant 1 in L¹(μ), since μ
    /// puts no mass outside it.
    pub fn density_support() -> Self {
        let mut f = Self::zero();
        f.unique_zero_free = rational::one();
        f.add_cylinder(CylinderWord::of(&[0, 1]), rational::one());
        f.high_start = rational::one();
        f
    }

    /// Adds c·1\[w\]. Indicators of invalid words vanish identically.
    pub fn add_cylinder(&mut self, word: CylinderWord, c: ExactRational) {
        if !word.is_valid() {
            return;
        }
        bump(&mut self.cylinders, word, c);
    }

    /// Adds c·U·1\[w\], normalizing by the structure of `word`: the
    /// product is zero unless the word starts below 0 and shows at most
    /// one zero; it is the plain cylinder once the zero block has
    /// closed; an open block at the end closes on the next step, so the
    /// term is the cylinder extended by 1; only all-negative words are
    /// genuinely undecided and stored as restricted terms.
    pub fn add_unique_zero(&mut self, word: CylinderWord, c: ExactRational) {
        match classify(&word) {
            None | Some(WordClass::MultiZero) | Some(WordClass::FirstPositive) => {}
            Some(WordClass::SingleZeroClosed { first_negative }) => {
                if first_negative {
                    self.add_cylinder(word, c);
                }
            }
            Some(WordClass::SingleZeroOpen { first_negative }) => {
                if first_negative {
                    self.add_cylinder(word.appended(1), c);
                }
            }
            Some(WordClass::AllNegative) => bump(&mut self.unique_zero, word, c),
        }
    }

    /// Adds c·U, the unrestricted unique-zero indicator.
    pub fn add_unique_zero_free(&mut self, c: ExactRational) {
        self.unique_zero_free += c;
    }

    /// Adds c·1{x₁ ≥ 1}.
    pub fn add_high_start(&mut self, c: ExactRational) {
        self.high_start += c;
    }

    pub fn is_zero(&self) -> bool {
        self.cylinders.is_empty()
            && self.unique_zero.is_empty()
            && self.unique_zero_free.is_zero()
            && self.high_start.is_zero()
    }

    pub fn cylinder_terms(&self) -> &BTreeMap<CylinderWord, ExactRational> {
        &self.cylinders
    }

    pub fn unique_zero_terms(&self) -> &BTreeMap<CylinderWord, ExactRational> {
        &self.unique_zero
    }

    pub fn unique_zero_free_coeff(&self) -> &ExactRational {
        &self.unique_zero_free
    }

    pub fn high_start_coeff(&self) -> &ExactRational {
        &self.high_start
    }

    pub fn scaled(&self, c: &ExactRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let scale = |m: &BTreeMap<CylinderWord, ExactRational>| {
            m.iter().map(|(w, v)| (w.clone(), v * c)).collect()
        };
        ShiftFunction {
            cylinders: scale(&self.cylinders),
            unique_zero: scale(&self.unique_zero),
            unique_zero_free: &self.unique_zero_free * c,
            high_start: &self.high_start * c,
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in &other.cylinders {
            out.add_cylinder(w.clone(), c.clone());
        }
        for (w, c) in &other.unique_zero {
            bump(&mut out.unique_zero, w.clone(), c.clone());
        }
        out.unique_zero_free += &other.unique_zero_free;
        out.high_start += &other.high_start;
        out
    }

    pub fn minus(&self, other: &Self) -> Self {
        self.plus(&other.scaled(&-rational::one()))
    }

    /// One application of the transfer operator. The span is closed
    /// under T̂:
    ///
    /// * a cylinder of length ≥ 2 loses its first letter and picks up
    ///   the first transition weight; a single letter b spreads to
    ///   (1 − q)·1\[b\] + q·1\[b + 1\];
    /// * restricted terms behave the same way while the letters stay
    ///   below 0; pushing U·1\[−1\] up crosses the boundary, where "one
    ///   zero, starting below it" becomes the visible pattern (0, 1):
    ///   T̂(U·1\[−1\]) = (1 − q)·U·1\[−1\] + q·1\[0,1\];
    /// * the free indicator reproduces itself plus the same boundary
    ///   term: T̂U = U + q·1\[0,1\];
    /// * the high-start indicator loses the mass that entered from
    ///   below: T̂1{x₁ ≥ 1} = 1{x₁ ≥ 1} − q·1\[1\].
    pub fn transfer(&self, q: &JumpParameter) -> Self {
        let mut out = Self::zero();
        for (w, c) in &self.cylinders {
            match w.tail() {
                Some(t) => {
                    let p = q.transition(w.first(), t.first());
                    out.add_cylinder(t, c * p);
                }
                None => {
                    let b = w.first();
                    out.add_cylinder(w.clone(), c * q.stay());
                    out.add_cylinder(CylinderWord::of(&[b + 1]), c * q.jump());
                }
            }
        }
        for (v, c) in &self.unique_zero {
            match v.tail() {
                Some(t) => {
                    let p = q.transition(v.first(), t.first());
                    out.add_unique_zero(t, c * p);
                }
                None => {
                    let b = v.first();
                    bump(&mut out.unique_zero, v.clone(), c * q.stay());
                    if b == -1 {
                        out.add_cylinder(CylinderWord::of(&[0, 1]), c * q.jump());
                    } else {
                        bump(
                            &mut out.unique_zero,
                            CylinderWord::of(&[b + 1]),
                            c * q.jump(),
                        );
                    }
                }
            }
        }
        if !self.unique_zero_free.is_zero() {
            out.unique_zero_free += &self.unique_zero_free;
            out.add_cylinder(
                CylinderWord::of(&[0, 1]),
                &self.unique_zero_free * q.jump(),
            );
        }
        if !self.high_start.is_zero() {
            out.high_start += &self.high_start;
            out.add_cylinder(CylinderWord::of(&[1]), -(&self.high_start * q.jump()));
        }
        out
    }

    /// n applications of the transfer operator.
    pub fn transfer_pow(&self, n: usize, q: &JumpParameter) -> Self {
        let mut f = self.clone();
        for _ in 0..n {
            f = f.transfer(q);
        }
        f
    }

    /// ∫ over the cylinder of `word` of this function, exact. Works for
    /// every term kind, the infinite-mass indicators included, because
    /// the integration domain is a single cylinder.
    pub fn cylinder_integral(&self, word: &CylinderWord, q: &JumpParameter) -> ExactRational {
        if !word.is_valid() {
            return rational::zero();
        }
        let mut total = rational::zero();
        for (w, c) in &self.cylinders {
            if let Some(u) = w.intersect(word) {
                total += c * cylinder_measure(u, q);
            }
        }
        for (v, c) in &self.unique_zero {
            if let Some(u) = v.intersect(word) {
                total += c * cylinder_measure(u, q) * unique_zero_expectation(u, q);
            }
        }
        if !self.unique_zero_free.is_zero() {
            total += &self.unique_zero_free
                * cylinder_measure(word, q)
                * unique_zero_expectation(word, q);
        }
        if !self.high_start.is_zero() && word.first() >= 1 {
            total += &self.high_start * cylinder_measure(word, q);
        }
        total
    }

    /// Refines the finite-mass terms into disjoint cylinders of a
    /// common length. Each atom carries the pair (c, d) such that the
    /// function restricted to the atom is c + d·U. Errors when a free
    /// indicator is present, since those never have a finite
    /// refinement.
    fn atoms(&self) -> Result<BTreeMap<CylinderWord, (ExactRational, ExactRational)>> {
        if !self.unique_zero_free.is_zero() || !self.high_start.is_zero() {
            return Err(AcimError::Precondition(
                "function contains a free indicator of infinite mass; \
                 only cylinder-supported functions can be refined"
                    .into(),
            ));
        }
        let depth = self
            .cylinders
            .keys()
            .chain(self.unique_zero.keys())
            .map(|w| w.len())
            .max()
            .unwrap_or(0);
        let mut atoms: BTreeMap<CylinderWord, (ExactRational, ExactRational)> = BTreeMap::new();
        let extend = |w: &CylinderWord| {
            let mut level = vec![w.clone()];
            while level[0].len() < depth {
                level = level
                    .iter()
                    .flat_map(|u| u.valid_extensions())
                    .collect();
            }
            level
        };
        for (w, c) in &self.cylinders {
            for atom in extend(w) {
                let slot = atoms
                    .entry(atom)
                    .or_insert_with(|| (rational::zero(), rational::zero()));
                slot.0 += c;
            }
        }
        for (v, d) in &self.unique_zero {
            for atom in extend(v) {
                let slot = atoms
                    .entry(atom)
                    .or_insert_with(|| (rational::zero(), rational::zero()));
                slot.1 += d;
            }
        }
        Ok(atoms)
    }

    /// ∫ f dm, exact. Defined only for cylinder-supported functions.
    pub fn integral(&self, q: &JumpParameter) -> Result<ExactRational> {
        if !self.unique_zero_free.is_zero() || !self.high_start.is_zero() {
            return Err(AcimError::Precondition(
                "free indicators have infinite measure; the integral over the whole \
                 space is undefined"
                    .into(),
            ));
        }
        let mut total = rational::zero();
        for (w, c) in &self.cylinders {
            total += c * cylinder_measure(w, q);
        }
        for (v, c) in &self.unique_zero {
            total += c * cylinder_measure(v, q) * unique_zero_expectation(v, q);
        }
        Ok(total)
    }

    /// ∫ |f| dm, exact. On each atom the function takes the value c + d
    /// where U = 1 and c where U = 0, with conditional probabilities
    /// e and 1 − e.
    pub fn abs_integral(&self, q: &JumpParameter) -> Result<ExactRational> {
        let mut total = rational::zero();
        for (atom, (c, d)) in self.atoms()? {
            let m = cylinder_measure(&atom, q);
            let e = unique_zero_expectation(&atom, q);
            total += &m * rational::abs(&(c.clone() + &d)) * &e;
            total += m * rational::abs(&c) * (rational::one() - e);
        }
        Ok(total)
    }

    /// ∫ 1{p > 0} |f| dm, the L¹ norm over the support of the invariant
    /// density. Where U = 1 the density is 1; the remaining part of the
    /// support of p within the atom has probability P(p > 0) − e.
    pub fn masked_abs_integral(&self, q: &JumpParameter) -> Result<ExactRational> {
        let mut total = rational::zero();
        for (atom, (c, d)) in self.atoms()? {
            let m = cylinder_measure(&atom, q);
            let e = unique_zero_expectation(&atom, q);
            let p = positive_density_probability(&atom, q);
            total += &m * rational::abs(&(c.clone() + &d)) * &e;
            total += m * rational::abs(&c) * (p - e);
        }
        Ok(total)
    }

    /// Pointwise product with the invariant density, exact up to a null
    /// set. Uses p = U + q·1[0,1] + q·1{x₁ ≥ 1} term by term; the
    /// products collapse back into the algebra: U·p = U because p = 1
    /// where U = 1, and the three parts of p meet a cylinder in
    /// cylinders again.
    pub fn weighted_by_density(&self, q: &JumpParameter) -> Self {
        let mut out = Self::zero();
        let zero_one = CylinderWord::of(&[0, 1]);
        for (w, c) in &self.cylinders {
            out.add_unique_zero(w.clone(), c.clone());
            if let Some(u) = w.intersect(&zero_one) {
                out.add_cylinder(u.clone(), c * q.jump());
            }
            if w.first() >= 1 {
                out.add_cylinder(w.clone(), c * q.jump());
            }
        }
        for (v, d) in &self.unique_zero {
            out.add_unique_zero(v.clone(), d.clone());
        }
        out.unique_zero_free += &self.unique_zero_free;
        out.high_start += &self.high_start * q.jump();
        out
    }

    /// Pointwise quotient by the invariant density, defined on its
    /// support {p > 0} and extended by zero off it. For h = g·p this
    /// recovers g up to a difference supported where p = 0, which every
    /// density-weighted integral ignores.
    ///
    /// The quotient is linear in the numerator, so the free indicators
    /// divide on their own: U/p = U because p = 1 where U = 1, and the
    /// high-start indicator divides by the constant q it sees on
    /// {x₁ ≥ 1}. The finite terms divide atom by atom:
    ///
    /// * two visible zeros: p = 0, the quotient is dropped;
    /// * start above 0, or a closed block on a start at 0: p = q and
    ///   U = 0, so the value c is divided by q;
    /// * closed block on a start below 0: p = 1, U = 1, value c + d;
    /// * all-negative or open block on a start below 0: {p > 0} is,
    ///   up to a null set, exactly {U = 1}, where p = 1 and the value
    ///   is c + d;
    /// * the bare word (0): {p > 0} is the continuation \[0,1\], where
    ///   p = q.
    pub fn div_invariant_density(&self, q: &JumpParameter) -> Self {
        let mut out = Self::zero();
        out.unique_zero_free = self.unique_zero_free.clone();
        out.high_start = &self.high_start / q.jump();
        let finite = ShiftFunction {
            cylinders: self.cylinders.clone(),
            unique_zero: self.unique_zero.clone(),
            unique_zero_free: rational::zero(),
            high_start: rational::zero(),
        };
        let atoms = finite
            .atoms()
            .expect("finite part never contains free indicators");
        for (atom, (c, d)) in atoms {
            match classify(&atom).expect("atoms are valid by construction") {
                WordClass::MultiZero => {}
                WordClass::FirstPositive => out.add_cylinder(atom, c / q.jump()),
                WordClass::SingleZeroClosed { first_negative: true } => {
                    out.add_cylinder(atom, c + d)
                }
                WordClass::SingleZeroClosed { first_negative: false } => {
                    out.add_cylinder(atom, c / q.jump())
                }
                WordClass::AllNegative | WordClass::SingleZeroOpen { first_negative: true } => {
                    out.add_unique_zero(atom, c + d)
                }
                WordClass::SingleZeroOpen { first_negative: false } => {
                    out.add_cylinder(atom.appended(1), c / q.jump())
                }
            }
        }
        out
    }

    /// The conjugated transfer operator T̂_μ f = 1{p > 0}·(1/p)·T̂(f·p),
    /// the adjoint of the shift with respect to the invariant measure
    /// μ = p·dm. Exact on the whole algebra; in particular
    /// T̂_μ applied to (the μ-class of) the constant 1 returns the
    /// support indicator itself, which is the operator form of the
    /// invariance of μ.
    pub fn conjugated_transfer(&self, q: &JumpParameter) -> Self {
        self.weighted_by_density(q)
            .transfer(q)
            .div_invariant_density(q)
    }

    /// L¹ norm with respect to the density-weighted measure μ = p·dm:
    /// ∫ |g| dμ = ∫ 1{p > 0} |g·p| dm.
    pub fn mu_norm(&self, q: &JumpParameter) -> Result<ExactRational> {
        self.weighted_by_density(q).masked_abs_integral(q)
    }

    /// μ-measure distance between two functions: the μ-norm of the
    /// difference. Zero exactly when the two agree μ-almost everywhere.
    pub fn mu_distance(&self, other: &Self, q: &JumpParameter) -> Result<ExactRational> {
        self.minus(other).mu_norm(q)
    }
}

impl fmt::Display for ShiftFunction {
    /// Terms as `c·[w]`, `c·U[v]`, `c·U`, `c·R`, where U is the
    /// unique-zero indicator and R the high-start indicator.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut lead = |f: &mut fmt::Formatter<'_>| -> fmt::Result {
            if first {
                first = false;
                Ok(())
            } else {
                write!(f, " + ")
            }
        };
        for (w, c) in &self.cylinders {
            lead(f)?;
            write!(f, "{}·{}", rational::format(c), w)?;
        }
        for (v, c) in &self.unique_zero {
            lead(f)?;
            write!(f, "{}·U{}", rational::format(c), v)?;
        }
        if !self.unique_zero_free.is_zero() {
            lead(f)?;
            write!(f, "{}·U", rational::format(&self.unique_zero_free))?;
        }
        if !self.high_start.is_zero() {
            lead(f)?;
            write!(f, "{}·R", rational::format(&self.high_start))?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Defect of the adjoint identity on one cylinder:
/// ∫_{T⁻¹\[w\]} f dm − ∫_\[w\] T̂f dm, which must vanish identically.
/// The preimage of \[a₁, …\] is the union of the two cylinders obtained
/// by prepending a₁ − 1 or a₁.
pub fn adjoint_defect(f: &ShiftFunction, word: &CylinderWord, q: &JumpParameter) -> ExactRational {
    let image_side = f.transfer(q).cylinder_integral(word, q);
    let mut preimage_side = rational::zero();
    for s in [word.first() - 1, word.first()] {
        preimage_side += f.cylinder_integral(&word.prepended(s), q);
    }
    preimage_side - image_side
}
