//! Exact rational scalars.
//!
//! All shift-side computations run on arbitrary-precision rationals so
//! that invariance and adjointness can be asserted as equalities rather
//! than tolerances. The scalar type is re-exported from `num-rational`,
//! which already maintains the invariants we rely on (lowest terms,
//! positive denominator). Helpers here cover construction, parsing and
//! the `"numerator/denominator"` string form used at serialization
//! boundaries.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{AcimError, Result};

/// Arbitrary-precision rational scalar, always in lowest terms with a
/// positive denominator.
pub type ExactRational = BigRational;

/// Builds a rational from machine integers.
pub fn ratio(num: i64, den: i64) -> ExactRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Integer as a rational.
pub fn int(n: i64) -> ExactRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn zero() -> ExactRational {
    BigRational::zero()
}

pub fn one() -> ExactRational {
    BigRational::one()
}

/// Parses `"a/b"` or `"a"` into a rational. Whitespace around the
/// separator is rejected; the denominator must be nonzero.
pub fn parse(s: &str) -> Result<ExactRational> {
    let parse_int = |t: &str| -> Result<BigInt> {
        t.parse::<BigInt>()
            .map_err(|_| AcimError::InvalidParameter(format!("not an integer: {t:?}")))
    };
    match s.split_once('/') {
        None => Ok(BigRational::from_integer(parse_int(s)?)),
        Some((n, d)) => {
            let den = parse_int(d)?;
            if den.is_zero() {
                return Err(AcimError::InvalidParameter(format!(
                    "zero denominator in {s:?}"
                )));
            }
            Ok(BigRational::new(parse_int(n)?, den))
        }
    }
}

/// Renders a rational as `"a/b"` (or `"a"` for integers), the exact
/// form used in JSON and CSV output.
pub fn format(r: &ExactRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Absolute value.
pub fn abs(r: &ExactRational) -> ExactRational {
    r.abs()
}

/// Nearest float, for report output only; exact values stay rational
/// internally.
pub fn approx(r: &ExactRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Serde adapter serializing rationals as `"a/b"` strings.
pub mod ratio_string {
    use super::ExactRational;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &ExactRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ExactRational, D::Error> {
        let s = String::deserialize(d)?;
        super::parse(&s).map_err(|e| D::Error::custom(e.to_string()))
    }
}
