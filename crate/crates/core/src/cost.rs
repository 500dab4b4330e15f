//! Exact cost arithmetic shared by both optimizers.
//!
//! Costs are non-negative rationals. Register allocation additionally needs a
//! distinct `+inf` (spill-free mode), which is modelled by [`Cost`].

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use num_rational::Ratio;
use num_traits::Signed;

/// Exact rational number used for every cost in the crate.
pub type Rational = Ratio<i64>;

/// A non-negative extended cost: a finite rational or `+inf`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cost {
    Finite(Rational),
    Infinite,
}

impl Cost {
    pub const ZERO: Cost = Cost::Finite(Ratio::new_raw(0, 1));

    pub fn finite(value: Rational) -> Cost {
        debug_assert!(!value.is_negative(), "costs are non-negative");
        Cost::Finite(value)
    }

    pub fn from_int(value: i64) -> Cost {
        Cost::finite(Rational::from_integer(value))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Cost::Finite(_))
    }

    pub fn as_finite(&self) -> Option<Rational> {
        match self {
            Cost::Finite(v) => Some(*v),
            Cost::Infinite => None,
        }
    }

    /// Subtracts a finite amount. Subtracting from or by `+inf` is not
    /// defined and yields `None`, as does a negative result.
    pub fn checked_sub(self, rhs: Cost) -> Option<Cost> {
        match (self, rhs) {
            (Cost::Finite(a), Cost::Finite(b)) if a >= b => Some(Cost::Finite(a - b)),
            _ => None,
        }
    }
}

impl Default for Cost {
    fn default() -> Self {
        Cost::ZERO
    }
}

impl Add for Cost {
    type Output = Cost;

    fn add(self, rhs: Cost) -> Cost {
        match (self, rhs) {
            (Cost::Finite(a), Cost::Finite(b)) => Cost::Finite(a + b),
            _ => Cost::Infinite,
        }
    }
}

impl std::iter::Sum for Cost {
    fn sum<I: Iterator<Item = Cost>>(iter: I) -> Cost {
        iter.fold(Cost::ZERO, |acc, c| acc + c)
    }
}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Cost::Finite(a), Cost::Finite(b)) => a.cmp(b),
            (Cost::Finite(_), Cost::Infinite) => Ordering::Less,
            (Cost::Infinite, Cost::Finite(_)) => Ordering::Greater,
            (Cost::Infinite, Cost::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::Finite(v) => f.write_str(&format_rational(v)),
            Cost::Infinite => f.write_str("inf"),
        }
    }
}

/// Renders a rational as an exact decimal when its expansion terminates,
/// otherwise as `p/q`.
pub fn format_rational(value: &Rational) -> String {
    let numer = *value.numer();
    let denom = *value.denom();
    if denom == 1 {
        return numer.to_string();
    }
    let mut rest = denom;
    let (mut twos, mut fives) = (0u32, 0u32);
    while rest % 2 == 0 {
        rest /= 2;
        twos += 1;
    }
    while rest % 5 == 0 {
        rest /= 5;
        fives += 1;
    }
    if rest != 1 {
        return format!("{numer}/{denom}");
    }
    let digits = twos.max(fives);
    let scale = 10i128.pow(digits);
    let scaled = numer as i128 * (scale / denom as i128);
    let sign = if scaled < 0 { "-" } else { "" };
    let scaled = scaled.abs();
    let int_part = scaled / scale;
    let frac_part = scaled % scale;
    format!("{sign}{int_part}.{frac_part:0width$}", width = digits as usize)
}

/// Parses a decimal literal (optionally with exponent) or `p/q` into an
/// exact rational. Returns `None` on malformed input or overflow.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((p, q)) = text.split_once('/') {
        let p: i64 = p.trim().parse().ok()?;
        let q: i64 = q.trim().parse().ok()?;
        if q == 0 {
            return None;
        }
        return Some(Rational::new(p, q));
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut numer: i64 = if digits.is_empty() { 0 } else { digits.parse().ok()? };
    let mut exp10 = exponent.checked_sub(i32::try_from(frac_part.len()).ok()?)?;
    let mut denom: i64 = 1;
    while exp10 > 0 {
        numer = numer.checked_mul(10)?;
        exp10 -= 1;
    }
    while exp10 < 0 {
        denom = denom.checked_mul(10)?;
        exp10 += 1;
    }
    if negative {
        numer = -numer;
    }
    Some(Rational::new(numer, denom))
}

/// Converts a rational to a JSON value: an exact number when the decimal
/// expansion terminates, a `"p/q"` string otherwise.
pub fn rational_to_json(value: &Rational) -> serde_json::Value {
    let text = format_rational(value);
    if text.contains('/') {
        serde_json::Value::String(text)
    } else {
        match text.parse::<serde_json::Number>() {
            Ok(n) => serde_json::Value::Number(n),
            Err(_) => serde_json::Value::String(text),
        }
    }
}

/// Reads a rational from a JSON number or `"p/q"` string.
pub fn rational_from_json(value: &serde_json::Value) -> Option<Rational> {
    match value {
        serde_json::Value::Number(n) => parse_rational(&n.to_string()),
        serde_json::Value::String(s) => parse_rational(s),
        _ => None,
    }
}

pub fn cost_to_json(cost: &Cost) -> serde_json::Value {
    match cost {
        Cost::Finite(v) => rational_to_json(v),
        Cost::Infinite => serde_json::Value::String("inf".into()),
    }
}
