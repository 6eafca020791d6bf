//! Numeric abstraction for alignment costs.
//!
//! Costs are non-negative quantities added along search paths and compared in
//! the priority queue. Anything that behaves like a field element with a
//! (partial) order works: `f32`, `f64` and exact rationals.

use std::cmp::Ordering;
use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Exact rational cost, the default scalar of the CLI and the reports.
pub type Rational = Ratio<i64>;

/// Scalar type usable as an alignment cost.
pub trait CostValue:
    Num + Copy + PartialOrd + Debug + Display + ToPrimitive + FromPrimitive + Send + Sync + 'static
{
    /// Total order used by the search queues. Incomparable values (NaN) tie.
    fn total_cmp(&self, other: &Self) -> Ordering {
        self.partial_cmp(other).unwrap_or(Ordering::Equal)
    }

    /// Parses decimal (`0.5`), fractional (`1/2`) or integral (`3`) notation.
    fn parse_cost(text: &str) -> Option<Self>;

    fn is_negative_cost(&self) -> bool {
        *self < Self::zero()
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

fn parse_float<T: FromStr>(text: &str) -> Option<T> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: f64 = num.trim().parse().ok()?;
        let den: f64 = den.trim().parse().ok()?;
        if den == 0.0 {
            return None;
        }
        return (num / den).to_string().parse().ok();
    }
    text.parse().ok()
}

impl CostValue for f64 {
    fn parse_cost(text: &str) -> Option<Self> {
        parse_float(text).filter(|v: &f64| v.is_finite())
    }
}

impl CostValue for f32 {
    fn parse_cost(text: &str) -> Option<Self> {
        parse_float(text).filter(|v: &f32| v.is_finite())
    }
}

impl CostValue for Rational {
    fn total_cmp(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }

    fn parse_cost(text: &str) -> Option<Self> {
        let text = text.trim();
        if let Some((num, den)) = text.split_once('/') {
            let num: i64 = num.trim().parse().ok()?;
            let den: i64 = den.trim().parse().ok()?;
            if den == 0 {
                return None;
            }
            return Some(Ratio::new(num, den));
        }
        let (negative, digits) = match text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, text),
        };
        let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
            return None;
        }
        if frac_part.len() > 12 {
            return None;
        }
        let scale = 10_i64.checked_pow(frac_part.len() as u32)?;
        let int_value: i64 = if int_part.is_empty() { 0 } else { int_part.parse().ok()? };
        let frac_value: i64 = if frac_part.is_empty() { 0 } else { frac_part.parse().ok()? };
        let mut numer = int_value.checked_mul(scale)?.checked_add(frac_value)?;
        if negative {
            numer = -numer;
        }
        Some(Ratio::new(numer, scale))
    }
}

/// Renders a cost for reports: integers plainly, rationals as `p/q`.
pub fn format_cost<S: CostValue>(value: &S) -> String {
    value.to_string()
}
