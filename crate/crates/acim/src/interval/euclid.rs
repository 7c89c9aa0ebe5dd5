//! The subtractive-gcd map T(x, y) = (x − y, y) for x > y, (x, y − x)
//! for x < y, on the open positive quadrant.
//!
//! The measure dμ = dx dy/(xy) is infinite and T-invariant: each
//! branch is a shear whose Jacobian is 1, and the density identity
//! 1/((u+v)v) + 1/(u(u+v)) = 1/(uv) splits a fiber of μ exactly across
//! the two preimages. Every rational direction eventually reaches the
//! diagonal, where the map is undefined and the common value is the
//! gcd of the starting pair.

use crate::error::{AcimError, Result};

/// A point in the open positive quadrant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EuclideanState {
    pub x: f64,
    pub y: f64,
}

impl EuclideanState {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(x > 0.0 && y > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(AcimError::Domain(format!(
                "the state space is the open positive quadrant, got ({x}, {y})"
            )));
        }
        Ok(Self { x, y })
    }
}

/// One subtraction step. The diagonal is a fixed obstruction, not a
/// state: landing on it is reported as an error carrying the common
/// coordinate.
pub fn euclid_apply(state: &EuclideanState) -> Result<EuclideanState> {
    if state.x == state.y {
        return Err(AcimError::DiagonalStep(state.x));
    }
    if state.x > state.y {
        EuclideanState::new(state.x - state.y, state.y)
    } else {
        EuclideanState::new(state.x, state.y - state.x)
    }
}

/// An axis-aligned rectangle (x_lo, x_hi] × (y_lo, y_hi] strictly
/// inside the positive quadrant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlanarRectangle {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl PlanarRectangle {
    pub fn new(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Result<Self> {
        let ordered = 0.0 < x_lo && x_lo < x_hi && 0.0 < y_lo && y_lo < y_hi;
        let finite = [x_lo, x_hi, y_lo, y_hi].iter().all(|v| v.is_finite());
        if !ordered || !finite {
            return Err(AcimError::Domain(format!(
                "rectangle sides must satisfy 0 < lo < hi, got \
                 ({x_lo}, {x_hi}] x ({y_lo}, {y_hi}]"
            )));
        }
        Ok(Self { x_lo, x_hi, y_lo, y_hi })
    }
}

/// μ-measure of a rectangle: log-length times log-length.
pub fn euclid_rect_measure(rect: &PlanarRectangle) -> f64 {
    (rect.x_hi / rect.x_lo).ln() * (rect.y_hi / rect.y_lo).ln()
}

const MAX_SIMPSON_DEPTH: usize = 48;

fn simpson_slice(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let m = 0.5 * (a + b);
    (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
}

fn adaptive_simpson_rec(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let left = simpson_slice(f, a, m);
    let right = simpson_slice(f, m, b);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(AcimError::Quadrature(format!(
            "refinement stalled on [{a}, {b}] at depth {MAX_SIMPSON_DEPTH} with \
             residual {delta:e} against tolerance {tol:e}"
        )));
    }
    let lv = adaptive_simpson_rec(f, a, m, left, 0.5 * tol, depth - 1)?;
    let rv = adaptive_simpson_rec(f, m, b, right, 0.5 * tol, depth - 1)?;
    Ok(lv + rv)
}

/// Adaptive Simpson integration of a smooth integrand.
fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(AcimError::InvalidParameter(format!(
            "quadrature tolerance must be positive and finite, got {tol}"
        )));
    }
    adaptive_simpson_rec(f, a, b, simpson_slice(f, a, b), tol, MAX_SIMPSON_DEPTH)
}

/// μ-measure of the preimage T⁻¹(rect), reduced to two 1-dimensional
/// integrals. The x > y piece is the shear preimage
/// {(v + s, v) : s ∈ (x_lo, x_hi], v ∈ (y_lo, y_hi]}, whose μ-mass is
/// ∫ ln((x_hi + v)/(x_lo + v)) dv/v; the x < y piece is symmetric.
fn preimage_measure(rect: &PlanarRectangle, quad_tol: f64) -> Result<f64> {
    let above = adaptive_simpson(
        &|v: f64| ((rect.x_hi + v) / (rect.x_lo + v)).ln() / v,
        rect.y_lo,
        rect.y_hi,
        quad_tol,
    )?;
    let below = adaptive_simpson(
        &|u: f64| ((rect.y_hi + u) / (rect.y_lo + u)).ln() / u,
        rect.x_lo,
        rect.x_hi,
        quad_tol,
    )?;
    Ok(above + below)
}

/// |μ(T⁻¹A) − μ(A)| for a rectangle A, with the preimage measure
/// computed at two quadrature resolutions which must agree to within
/// the stated tolerance.
pub fn euclid_invariance_defect(rect: &PlanarRectangle, quad_tol: f64) -> Result<f64> {
    let coarse = preimage_measure(rect, quad_tol)?;
    let fine = preimage_measure(rect, quad_tol / 16.0)?;
    if (coarse - fine).abs() > quad_tol.max(4.0 * f64::EPSILON * fine.abs()) {
        return Err(AcimError::Quadrature(format!(
            "resolution disagreement {:e} exceeds tolerance {quad_tol:e} \
             (coarse {coarse:.17}, fine {fine:.17})",
            (coarse - fine).abs()
        )));
    }
    Ok((fine - euclid_rect_measure(rect)).abs())
}

/// Iterates the subtraction map from an integer pair until the orbit
/// hits the diagonal; returns the common value (the gcd) and the
/// number of steps taken.
pub fn euclid_orbit_gcd(a: u64, b: u64) -> Result<(u64, usize)> {
    if a == 0 || b == 0 {
        return Err(AcimError::Domain(
            "both coordinates must be positive integers".into(),
        ));
    }
    if a > (1u64 << 52) || b > (1u64 << 52) {
        return Err(AcimError::Precondition(
            "coordinates above 2^52 lose exact float subtraction".into(),
        ));
    }
    let mut state = EuclideanState::new(a as f64, b as f64)?;
    let mut steps = 0usize;
    loop {
        match euclid_apply(&state) {
            Ok(next) => {
                state = next;
                steps += 1;
            }
            Err(AcimError::DiagonalStep(v)) => return Ok((v as u64, steps)),
            Err(e) => return Err(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_integer::Integer;

    #[test]
    fn apply_matches_hand_values() {
        let s = EuclideanState::new(5.0, 3.0).unwrap();
        let t = euclid_apply(&s).unwrap();
        assert_eq!((t.x, t.y), (2.0, 3.0));
        let u = euclid_apply(&t).unwrap();
        assert_eq!((u.x, u.y), (2.0, 1.0));
        match euclid_apply(&EuclideanState::new(1.0, 1.0).unwrap()) {
            Err(AcimError::DiagonalStep(v)) => assert_eq!(v, 1.0),
            other => panic!("expected a diagonal stop, got {other:?}"),
        }
    }

    #[test]
    fn state_and_rectangle_validation() {
        assert!(EuclideanState::new(0.0, 1.0).is_err());
        assert!(EuclideanState::new(1.0, -2.0).is_err());
        assert!(EuclideanState::new(f64::NAN, 1.0).is_err());
        assert!(PlanarRectangle::new(0.0, 1.0, 1.0, 2.0).is_err());
        assert!(PlanarRectangle::new(2.0, 1.0, 1.0, 2.0).is_err());
        assert!(PlanarRectangle::new(1.0, 2.0, 3.0, 3.0).is_err());
    }

    #[test]
    fn rectangle_measures_match_logarithms() {
        let e = std::f64::consts::E;
        let unit = PlanarRectangle::new(1.0, e, 1.0, e).unwrap();
        assert!((euclid_rect_measure(&unit) - 1.0).abs() < 1e-14);
        let two = PlanarRectangle::new(1.0, e * e, 1.0, e).unwrap();
        assert!((euclid_rect_measure(&two) - 2.0).abs() < 1e-14);
        let dyadic = PlanarRectangle::new(0.5, 2.0, 0.25, 4.0).unwrap();
        let expect = 8.0 * 2.0_f64.ln().powi(2);
        assert!((euclid_rect_measure(&dyadic) - expect).abs() < 1e-13);
    }

    #[test]
    fn pointwise_density_identity_is_exact() {
        // The two preimages of (u, v) carry densities that sum to the
        // density at (u, v): 1/((u+v)v) + 1/(u(u+v)) = 1/(uv).
        for (u, v) in [(1.0f64, 2.0f64), (0.3, 0.7), (13.0, 0.04)] {
            let lhs = 1.0 / ((u + v) * v) + 1.0 / (u * (u + v));
            let rhs = 1.0 / (u * v);
            assert!((lhs - rhs).abs() < 1e-14 * rhs.abs());
        }
    }

    #[test]
    fn invariance_defect_is_tiny_on_reference_rectangles() {
        let e = std::f64::consts::E;
        let rects = [
            PlanarRectangle::new(1.0, e, 1.0, e).unwrap(),
            PlanarRectangle::new(0.1, 0.2, 5.0, 10.0).unwrap(),
            PlanarRectangle::new(0.5, 2.0, 0.25, 4.0).unwrap(),
        ];
        for rect in rects {
            let defect = euclid_invariance_defect(&rect, 1e-9).unwrap();
            assert!(defect <= 1e-6, "defect {defect:e} for {rect:?}");
        }
    }

    #[test]
    fn defect_detects_a_wrong_reference_measure() {
        // Shearing the comparison value simulates a non-invariant
        // candidate: the defect must see it.
        let rect = PlanarRectangle::new(1.0, 2.0, 1.0, 3.0).unwrap();
        let preimage = preimage_measure(&rect, 1e-10).unwrap();
        let wrong = euclid_rect_measure(&rect) * 1.1;
        assert!((preimage - wrong).abs() > 1e-2);
    }

    #[test]
    fn quadrature_reports_stall_instead_of_guessing() {
        let rect = PlanarRectangle::new(1.0, 2.0, 1.0, 2.0).unwrap();
        match euclid_invariance_defect(&rect, 0.0) {
            Err(AcimError::InvalidParameter(_)) => {}
            other => panic!("expected rejection of zero tolerance, got {other:?}"),
        }
        match adaptive_simpson(&|x: f64| x.sin() / x, 1.0, 40.0, 1e-300) {
            Err(AcimError::Quadrature(msg)) => {
                assert!(msg.contains("depth"), "diagnostic lacks depth: {msg}")
            }
            other => panic!("expected a stall report, got {other:?}"),
        }
    }

    #[test]
    fn orbit_gcd_matches_the_arithmetic_gcd() {
        for a in 1..=100u64 {
            for b in 1..=100u64 {
                let (g, steps) = euclid_orbit_gcd(a, b).unwrap();
                assert_eq!(g, a.gcd(&b), "gcd({a}, {b})");
                // Subtractive steps are bounded by a/g + b/g.
                assert!(steps as u64 <= a / g + b / g);
            }
        }
        assert_eq!(euclid_orbit_gcd(1, 1).unwrap(), (1, 0));
        assert!(euclid_orbit_gcd(0, 5).is_err());
    }
}
