//! Numeric values for contours, set functions and probability vectors.
//!
//! Two representations are supported: exact rationals (used on every
//! finite-label pipeline so that fractions such as `21/101` survive end to
//! end) and `f64` for grid problems and user-supplied real scores.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

/// Exact rational number.
pub type Rational = BigRational;

/// Scalar type usable as a plausibility, mass or probability value.
pub trait Value: Num + Clone + PartialOrd + Debug + Send + Sync + 'static {
    /// `true` when arithmetic and comparisons are exact.
    const EXACT: bool;

    fn from_ratio(num: u64, den: u64) -> Self;

    fn to_f64(&self) -> f64;

    /// Slack allowed when comparing computed quantities (zero for exact types).
    fn tolerance() -> Self;

    /// Parses `"num/den"`, integers and plain decimals such as `"0.25"`.
    fn parse(s: &str) -> Option<Self>;

    /// Renders as `"num/den"` (exact) or a shortest round-trip decimal.
    fn render(&self) -> String;

    /// The exact rational value, when the representation is exact.
    fn as_rational(&self) -> Option<Rational>;

    fn half() -> Self {
        Self::from_ratio(1, 2)
    }

    /// `self <= other` up to [`Value::tolerance`].
    fn le_tol(&self, other: &Self) -> bool {
        *self <= other.clone() + Self::tolerance()
    }

    fn approx_eq(&self, other: &Self) -> bool {
        self.le_tol(other) && other.le_tol(self)
    }
}

impl Value for f64 {
    const EXACT: bool = false;

    fn from_ratio(num: u64, den: u64) -> Self {
        num as f64 / den as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn tolerance() -> Self {
        1e-12
    }

    fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        match s.split_once('/') {
            Some((n, d)) => {
                let n: f64 = n.trim().parse().ok()?;
                let d: f64 = d.trim().parse().ok()?;
                (d != 0.0).then(|| n / d)
            }
            None => s.parse().ok().filter(|x: &f64| x.is_finite()),
        }
    }

    fn render(&self) -> String {
        format!("{self}")
    }

    fn as_rational(&self) -> Option<Rational> {
        None
    }
}

impl Value for Rational {
    const EXACT: bool = true;

    fn from_ratio(num: u64, den: u64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn tolerance() -> Self {
        Rational::zero()
    }

    fn parse(s: &str) -> Option<Self> {
        parse_rational(s)
    }

    fn render(&self) -> String {
        if self.denom().is_one() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }

    fn as_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }
}

/// Parses a rational from `"a/b"`, `"-3"`, `"0.125"` or `"1.5e-3"`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if all_digits.is_empty() { BigInt::zero() } else { all_digits.parse().ok()? };
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let mut value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    Some(value)
}

/// Exact rational equal to the binary value of `x`.
pub fn rational_from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// Largest element of a non-empty slice under `PartialOrd`.
pub(crate) fn max_value<V: Value>(values: &[V]) -> Option<&V> {
    let mut iter = values.iter();
    let mut best = iter.next()?;
    for v in iter {
        if v > best {
            best = v;
        }
    }
    Some(best)
}

/// Scales an exact table onto a common denominator so that brute-force
/// sums can run in machine integers. Returns `None` when the table is not
/// exact or the scaled numerators do not fit comfortably in `i128`.
pub(crate) fn scaled_integers<V: Value>(table: &[V]) -> Option<Vec<i128>> {
    let rationals: Vec<Rational> = table.iter().map(Value::as_rational).collect::<Option<_>>()?;
    let mut lcm = BigInt::one();
    for r in &rationals {
        lcm = num_integer::Integer::lcm(&lcm, r.denom());
    }
    // Leave headroom for inclusion-exclusion sums of up to 2^4 terms.
    let limit = BigInt::from(i128::MAX >> 16);
    rationals
        .iter()
        .map(|r| {
            let scaled = r.numer() * (&lcm / r.denom());
            if scaled.abs() > limit {
                None
            } else {
                scaled.to_i128()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn parses_fractions_and_decimals_exactly() {
        assert_eq!(parse_rational("21/101"), Some(q(21, 101)));
        assert_eq!(parse_rational("0.2"), Some(q(1, 5)));
        assert_eq!(parse_rational("-0.25"), Some(q(-1, 4)));
        assert_eq!(parse_rational("3"), Some(q(3, 1)));
        assert_eq!(parse_rational(".5"), Some(q(1, 2)));
        assert_eq!(parse_rational("1.5e-3"), Some(q(3, 2000)));
        assert_eq!(parse_rational("2e2"), Some(q(200, 1)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational(""), None);
        assert_eq!(parse_rational("."), None);
    }

    #[test]
    fn renders_rationals_as_num_over_den() {
        assert_eq!(q(21, 101).render(), "21/101");
        assert_eq!(q(1, 1).render(), "1");
        assert_eq!(Rational::zero().render(), "0");
        assert_eq!(q(80, 101).render(), "80/101");
    }

    #[test]
    fn f64_parse_accepts_fraction_syntax() {
        assert_eq!(<f64 as Value>::parse("1/4"), Some(0.25));
        assert_eq!(<f64 as Value>::parse("0.3"), Some(0.3));
        assert_eq!(<f64 as Value>::parse("nan"), None);
    }

    #[test]
    fn tolerance_is_zero_only_for_exact() {
        assert!(Rational::tolerance().is_zero());
        assert!(f64::tolerance() > 0.0);
        assert!(q(1, 3).le_tol(&q(1, 3)));
        assert!(!q(1, 3).le_tol(&q(1, 4)));
        assert!(0.3f64.le_tol(&(0.1 + 0.2 - 1e-15)));
    }

    #[test]
    fn scaled_integers_share_a_denominator() {
        let table = vec![q(21, 101), q(51, 101), q(1, 1), q(1, 2)];
        assert_eq!(scaled_integers(&table), Some(vec![42, 102, 202, 101]));
        assert_eq!(scaled_integers(&[0.5f64]), None);
    }
}
