//! Seeded Monte Carlo: walk trajectories and lattice return counts.
//!
//! All draws come from a ChaCha8 stream seeded with a caller-supplied
//! 64-bit value, so every result is a pure function of its arguments.
//! Where several samples are needed, one generator is drawn through
//! sequentially; there is no hidden global state.

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{AcimError, Result};

use super::measure::JumpParameter;
use super::word::CylinderWord;

/// Draws a Bernoulli(q) variable exactly: a uniform integer below the
/// denominator is compared with the numerator, so the success
/// probability is the rational q itself, not a float approximation.
fn bernoulli_exact(rng: &mut ChaCha8Rng, q: &JumpParameter) -> Result<bool> {
    let r = q.jump();
    let den = r.denom().to_u64().ok_or_else(|| {
        AcimError::InvalidParameter(
            "jump probability denominator exceeds 64 bits; exact sampling unavailable".into(),
        )
    })?;
    let num = r
        .numer()
        .to_u64()
        .expect("numerator below denominator fits when the denominator does");
    Ok(rng.gen_range(0..den) < num)
}

/// Samples one walk trajectory of `length` letters starting at `start`.
/// Deterministic in (q, start, length, seed).
pub fn simulate_trajectory(
    q: &JumpParameter,
    start: i64,
    length: usize,
    seed: u64,
) -> Result<CylinderWord> {
    if length == 0 {
        return Err(AcimError::Precondition(
            "trajectory length must be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut letters = Vec::with_capacity(length);
    let mut pos = start;
    letters.push(pos);
    for _ in 1..length {
        if bernoulli_exact(&mut rng, q)? {
            pos += 1;
        }
        letters.push(pos);
    }
    Ok(CylinderWord::of(&letters))
}

/// Monte Carlo estimate of the expected number of returns to the
/// origin within `steps` steps of the simple symmetric random walk on
/// the d-dimensional integer lattice, averaged over `samples` walks.
///
/// In one dimension the count grows with the horizon (recurrence); in
/// three or more it stabilizes below a constant (transience), the
/// probabilistic face of dissipativity.
pub fn zd_walk_return_estimate(d: usize, steps: usize, samples: usize, seed: u64) -> Result<f64> {
    if !(1..=4).contains(&d) {
        return Err(AcimError::InvalidParameter(format!(
            "lattice dimension must be between 1 and 4, got {d}"
        )));
    }
    if samples == 0 {
        return Err(AcimError::Precondition(
            "at least one sample walk is required".into(),
        ));
    }
    if steps == 0 {
        return Ok(0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total_returns: u64 = 0;
    for _ in 0..samples {
        let mut pos = [0i64; 4];
        for _ in 0..steps {
            let axis = rng.gen_range(0..d);
            let dir: bool = rng.gen();
            pos[axis] += if dir { 1 } else { -1 };
            if pos[..d].iter().all(|&c| c == 0) {
                total_returns += 1;
            }
        }
    }
    Ok(total_returns as f64 / samples as f64)
}
