//! Exact decimal amounts.
//!
//! Demands, capacities and costs are stored as integers scaled by
//! `10^scale`, where `scale` is fixed per instance. Sums are carried in
//! [`Amount`] (`i128`) so that penalized objectives never overflow.

use std::fmt;

/// A scaled objective value (cost units times `10^scale`).
pub type Amount = i128;

/// Largest number of decimals accepted in an input literal.
pub const MAX_SCALE: u32 = 9;

/// A decimal literal split into its integer mantissa and number of decimals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decimal {
    pub mantissa: i128,
    pub decimals: u32,
}

impl Decimal {
    /// Parses `[-+]digits[.digits]`. Exponents are not accepted.
    pub fn parse(text: &str) -> Option<Decimal> {
        let (negative, body) = match text.as_bytes().first()? {
            b'-' => (true, &text[1..]),
            b'+' => (false, &text[1..]),
            _ => (false, text),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
            return None;
        }
        let decimals = frac_part.len() as u32;
        if decimals > MAX_SCALE || int_part.len() + frac_part.len() > 30 {
            return None;
        }
        let mut mantissa: i128 = 0;
        for b in int_part.bytes().chain(frac_part.bytes()) {
            mantissa = mantissa * 10 + i128::from(b - b'0');
        }
        if negative {
            mantissa = -mantissa;
        }
        Some(Decimal { mantissa, decimals })
    }

    /// The value scaled to `scale` decimals. `None` if precision would be lost
    /// or the result does not fit in `i64`.
    pub fn to_scaled(self, scale: u32) -> Option<i64> {
        if self.decimals > scale {
            return None;
        }
        let value = self.mantissa.checked_mul(pow10(scale - self.decimals))?;
        i64::try_from(value).ok()
    }
}

pub(crate) fn pow10(exp: u32) -> i128 {
    10i128.pow(exp)
}

/// Formats a scaled integer with exactly `scale` decimals.
pub fn format_scaled(value: Amount, scale: u32) -> String {
    ScaledDisplay { value, scale }.to_string()
}

/// Rounds a real value to the nearest scaled integer (half away from zero).
pub fn round_to_scale(value: f64, scale: u32) -> i64 {
    (value * 10f64.powi(scale as i32)).round() as i64
}

/// `Display` adapter for scaled integers.
#[derive(Debug, Clone, Copy)]
pub struct ScaledDisplay {
    pub value: Amount,
    pub scale: u32,
}

impl fmt::Display for ScaledDisplay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scale == 0 {
            return write!(f, "{}", self.value);
        }
        let unit = pow10(self.scale);
        let sign = if self.value < 0 { "-" } else { "" };
        let abs = self.value.unsigned_abs();
        let unit = unit as u128;
        write!(
            f,
            "{sign}{}.{:0width$}",
            abs / unit,
            abs % unit,
            width = self.scale as usize
        )
    }
}
