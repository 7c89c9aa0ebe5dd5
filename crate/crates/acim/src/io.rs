//! Output formatting and numerically careful summation.

/// Formats a float with 17 significant digits, enough to round-trip
/// any f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Compensated (Neumaier) summation, left to right. Deterministic for
/// a given input order and accurate to a few ulps regardless of length,
/// which the mass-conservation checks rely on.
pub fn kahan_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut compensation = 0.0;
    for v in values {
        let t = sum + v;
        compensation += if sum.abs() >= v.abs() {
            (sum - t) + v
        } else {
            (v - t) + sum
        };
        sum = t;
    }
    sum + compensation
}
