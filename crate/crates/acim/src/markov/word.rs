//! Words and cylinder sets for the monotone walk shift.
//!
//! The ambient space is the set of one-sided integer sequences
//! x = (x₁, x₂, …). A word (a₁, …, a_k) names the cylinder
//! [a₁, …, a_k] = {x : x_j = a_j, 1 ≤ j ≤ k}. The walk moves by steps
//! in {0, +1}, so a word is *valid* (its cylinder carries positive
//! measure) exactly when consecutive letters differ by 0 or +1.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{AcimError, Result};

/// A finite word of integer letters, always nonempty.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CylinderWord(Vec<i64>);

impl CylinderWord {
    pub fn new(letters: Vec<i64>) -> Result<Self> {
        if letters.is_empty() {
            return Err(AcimError::Precondition("empty word".into()));
        }
        Ok(CylinderWord(letters))
    }

    /// Convenience constructor for literal words; panics on empty input.
    pub fn of(letters: &[i64]) -> Self {
        Self::new(letters.to_vec()).expect("nonempty word")
    }

    pub fn letters(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn first(&self) -> i64 {
        self.0[0]
    }

    pub fn last(&self) -> i64 {
        *self.0.last().unwrap()
    }

    /// True when every step is 0 or +1, i.e. the cylinder has positive
    /// measure under the walk.
    pub fn is_valid(&self) -> bool {
        self.0.windows(2).all(|w| w[1] == w[0] || w[1] == w[0] + 1)
    }

    /// Word extended by one letter on the right.
    pub fn appended(&self, letter: i64) -> Self {
        let mut v = self.0.clone();
        v.push(letter);
        CylinderWord(v)
    }

    /// Word extended by one letter on the left.
    pub fn prepended(&self, letter: i64) -> Self {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(letter);
        v.extend_from_slice(&self.0);
        CylinderWord(v)
    }

    /// Word without its first letter; `None` for single-letter words.
    pub fn tail(&self) -> Option<Self> {
        if self.0.len() < 2 {
            None
        } else {
            Some(CylinderWord(self.0[1..].to_vec()))
        }
    }

    pub fn is_prefix_of(&self, other: &Self) -> bool {
        other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
    }

    /// Intersection of the two cylinders: the longer word when one is a
    /// prefix of the other, `None` when the cylinders are disjoint.
    pub fn intersect<'a>(&'a self, other: &'a Self) -> Option<&'a Self> {
        if self.is_prefix_of(other) {
            Some(other)
        } else if other.is_prefix_of(self) {
            Some(self)
        } else {
            None
        }
    }

    pub fn zero_count(&self) -> usize {
        self.0.iter().filter(|&&a| a == 0).count()
    }

    /// All valid words of the given length whose letters stay inside
    /// `[lo, hi]`, in lexicographic order.
    pub fn enumerate_valid(len: usize, lo: i64, hi: i64) -> Vec<Self> {
        let mut out = Vec::new();
        if len == 0 || lo > hi {
            return out;
        }
        let mut stack: Vec<Vec<i64>> = (lo..=hi).map(|s| vec![s]).collect();
        while let Some(w) = stack.pop() {
            if w.len() == len {
                out.push(CylinderWord(w));
                continue;
            }
            let last = *w.last().unwrap();
            for step in [1, 0] {
                let next = last + step;
                if next <= hi {
                    let mut v = w.clone();
                    v.push(next);
                    stack.push(v);
                }
            }
        }
        out.sort();
        out
    }

    /// All valid words of every length from 1 to `max_len` inside the
    /// letter window.
    pub fn enumerate_valid_up_to(max_len: usize, lo: i64, hi: i64) -> Vec<Self> {
        (1..=max_len)
            .flat_map(|len| Self::enumerate_valid(len, lo, hi))
            .collect()
    }

    /// Valid one-step right extensions (stay or move up).
    pub fn valid_extensions(&self) -> [Self; 2] {
        let last = self.last();
        [self.appended(last), self.appended(last + 1)]
    }
}

impl fmt::Debug for CylinderWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Display for CylinderWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// The features of a word that determine the invariant density on (or
/// conditioned on) its cylinder: the first and last letters, how many
/// zero letters are visible, and whether the zero block has closed
/// (a letter ≥ 1 appears after the zeros, so no further zeros can occur
/// on a valid continuation).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PrefixClass {
    pub first_letter: i64,
    pub last_letter: i64,
    pub visible_zero_count: usize,
    pub zero_block_closed: bool,
}

impl PrefixClass {
    /// Classifies a valid word. Errors on invalid words, whose
    /// cylinders are null and carry no density information.
    pub fn from_word(w: &CylinderWord) -> Result<Self> {
        if !w.is_valid() {
            return Err(AcimError::Precondition(format!(
                "invalid word {w}: cylinder is null"
            )));
        }
        let zeros = w.zero_count();
        let class = PrefixClass {
            first_letter: w.first(),
            last_letter: w.last(),
            visible_zero_count: zeros,
            zero_block_closed: zeros >= 1 && w.last() >= 1,
        };
        debug_assert!(!class.zero_block_closed || class.visible_zero_count >= 1);
        Ok(class)
    }
}

/// Structural cases of a valid word, as seen by the invariant density.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum WordClass {
    /// All letters ≥ 1; the walk never visits 0.
    FirstPositive,
    /// All letters < 0; the visit to 0 lies entirely in the future.
    AllNegative,
    /// Exactly one zero letter and the block is closed.
    SingleZeroClosed { first_negative: bool },
    /// Exactly one zero letter, sitting at the end of the word.
    SingleZeroOpen { first_negative: bool },
    /// At least two zero letters.
    MultiZero,
}

pub(crate) fn classify(w: &CylinderWord) -> Option<WordClass> {
    if !w.is_valid() {
        return None;
    }
    let zeros = w.zero_count();
    Some(if zeros >= 2 {
        WordClass::MultiZero
    } else if zeros == 1 {
        let first_negative = w.first() < 0;
        if w.last() >= 1 {
            WordClass::SingleZeroClosed { first_negative }
        } else {
            WordClass::SingleZeroOpen { first_negative }
        }
    } else if w.first() >= 1 {
        WordClass::FirstPositive
    } else {
        WordClass::AllNegative
    })
}
