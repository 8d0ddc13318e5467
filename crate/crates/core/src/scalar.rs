//! Coefficient backends: exact rationals and `f64`.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Arbitrary-precision rational used by the exact backend.
pub type Rational = BigRational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Float,
}

impl Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Backend::Exact => f.write_str("exact"),
            Backend::Float => f.write_str("float"),
        }
    }
}

/// A real field usable as a multivector coefficient.
///
/// Comparisons against zero always go through [`Scalar::is_negligible`], which
/// is exact equality for rationals and a tolerance test for floats.
pub trait Scalar: Signed + Clone + PartialOrd + Debug + Display + Send + Sync + 'static {
    const BACKEND: Backend;

    fn from_i64(n: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self;

    /// Exact conversion of a double; `None` for non-finite input.
    fn from_f64(x: f64) -> Option<Self>;

    fn to_f64(&self) -> f64;

    /// `true` when `self` should count as zero: exact zero for rationals,
    /// `|x| <= tol` for floats.
    fn is_negligible(&self, tol: f64) -> bool;

    fn to_json(&self) -> serde_json::Value;

    fn half() -> Self {
        Self::from_ratio(1, 2)
    }

    fn within(&self, other: &Self, tol: f64) -> bool {
        (self.clone() - other.clone()).is_negligible(tol)
    }
}

impl Scalar for f64 {
    const BACKEND: Backend = Backend::Float;

    fn from_i64(n: i64) -> Self {
        n as f64
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_negligible(&self, tol: f64) -> bool {
        self.abs() <= tol
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Number::from_f64(*self).map(serde_json::Value::Number).unwrap_or(serde_json::Value::Null)
    }
}

impl Scalar for Rational {
    const BACKEND: Backend = Backend::Exact;

    fn from_i64(n: i64) -> Self {
        Rational::from_integer(BigInt::from(n))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_f64(x: f64) -> Option<Self> {
        Rational::from_float(x)
    }

    fn to_f64(&self) -> f64 {
        self.to_f64_lossy()
    }

    fn is_negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(self.to_string())
    }
}

trait LossyF64 {
    fn to_f64_lossy(&self) -> f64;
}

impl LossyF64 for Rational {
    fn to_f64_lossy(&self) -> f64 {
        if let Some(x) = ToPrimitive::to_f64(self) {
            return x;
        }
        // huge numerator/denominator: scale down before dividing
        let n = self.numer().to_f64().unwrap_or(f64::NAN);
        let d = self.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    }
}

/// Parse `"p/q"`, `"p"` or a decimal literal into a scalar.
pub fn parse_scalar<S: Scalar>(text: &str) -> Option<S> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: i64 = n.trim().parse().ok()?;
        let d: i64 = d.trim().parse().ok()?;
        if d == 0 {
            return None;
        }
        return Some(S::from_ratio(n, d));
    }
    if let Ok(n) = text.parse::<i64>() {
        return Some(S::from_i64(n));
    }
    if S::BACKEND == Backend::Exact {
        return parse_decimal(text);
    }
    S::from_f64(text.parse().ok()?)
}

// Decimal literals are read as the rational they spell, not as their binary
// approximation, so "0.1" is exactly 1/10.
fn parse_decimal<S: Scalar>(text: &str) -> Option<S> {
    let (mantissa, exp) = match text.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: String = format!("{int}{frac}");
    let mut value = S::zero();
    let ten = S::from_i64(10);
    for c in digits.chars() {
        value = value * ten.clone() + S::from_i64(c.to_digit(10)? as i64);
    }
    let shift = exp - frac.len() as i32;
    for _ in 0..shift.unsigned_abs() {
        value = if shift > 0 { value * ten.clone() } else { value / ten.clone() };
    }
    Some(if neg { -value } else { value })
}

/// Largest absolute value, as an `f64`, for residual reporting.
pub fn max_abs<'a, S: Scalar>(values: impl IntoIterator<Item = &'a S>) -> f64 {
    values.into_iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_exact_decimals() {
        let x: Rational = parse_scalar("0.1").unwrap();
        assert_eq!(x, Rational::from_ratio(1, 10));
        let y: Rational = parse_scalar("-2.5e-1").unwrap();
        assert_eq!(y, Rational::from_ratio(-1, 4));
        let z: Rational = parse_scalar("3/5").unwrap();
        assert_eq!(z, Rational::from_ratio(3, 5));
        assert!(parse_scalar::<Rational>("abc").is_none());
        assert!(parse_scalar::<Rational>("1/0").is_none());
    }

    #[test]
    fn float_parse_and_negligible() {
        let x: f64 = parse_scalar("1e-3").unwrap();
        assert_eq!(x, 1e-3);
        assert!(1e-14_f64.is_negligible(1e-12));
        assert!(!Rational::from_ratio(1, 1_000_000_000).is_negligible(1.0));
    }

    #[test]
    fn json_forms() {
        assert_eq!(Rational::from_ratio(-3, 4).to_json(), serde_json::json!("-3/4"));
        assert_eq!(0.5f64.to_json(), serde_json::json!(0.5));
    }
}
