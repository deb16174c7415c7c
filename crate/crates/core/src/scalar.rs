//! Numeric carrier shared by exact (rational) and floating evaluation.

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};

/// Exact rationals used throughout for group matrices and coefficients.
pub type Q = BigRational;

pub trait Scalar: Clone + Debug + PartialOrd + Num + Neg<Output = Self> {
    fn from_rational(q: &Q) -> Self;
    /// Exact for rationals: every finite float is a dyadic rational.
    fn from_f64(x: f64) -> Self;
    fn to_float(&self) -> f64;
    fn abs_val(&self) -> Self;
}

impl Scalar for f64 {
    fn from_rational(q: &Q) -> Self {
        q_to_f64(q)
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_float(&self) -> f64 {
        *self
    }
    fn abs_val(&self) -> Self {
        self.abs()
    }
}

impl Scalar for Q {
    fn from_rational(q: &Q) -> Self {
        q.clone()
    }
    fn from_f64(x: f64) -> Self {
        Q::from_float(x).unwrap_or_else(Q::zero)
    }
    fn to_float(&self) -> f64 {
        q_to_f64(self)
    }
    fn abs_val(&self) -> Self {
        self.abs()
    }
}

pub fn q_to_f64(q: &Q) -> f64 {
    ToPrimitive::to_f64(q).unwrap_or_else(|| {
        // Huge numerators/denominators: scale down before dividing.
        let n = q.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = q.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

pub fn q_int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `p/q`, an integer, or a decimal literal like `-0.375` exactly.
pub fn parse_rational(s: &str) -> Option<Q> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((p, q)) = s.split_once('/') {
        let p = parse_rational(p)?;
        let q = parse_rational(q)?;
        if q.is_zero() {
            return None;
        }
        return Some(p / q);
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], body[i + 1..].parse::<i32>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer = BigInt::parse_bytes(if digits.is_empty() { b"0" } else { digits.as_bytes() }, 10)?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Q::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Q::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Some(if neg { -value } else { value })
}

/// Finite-precision literal for display: integers print bare, others as `p/q`.
pub fn format_rational(q: &Q) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Reads `"a b; c d"` (rows split by `;`, entries by spaces or commas).
pub fn parse_matrix(s: &str) -> Option<Vec<Vec<Q>>> {
    s.split(';')
        .map(|row| {
            row.split(|c: char| c.is_whitespace() || c == ',')
                .filter(|e| !e.is_empty())
                .map(parse_rational)
                .collect::<Option<Vec<Q>>>()
        })
        .collect()
}

/// Inverse of [`parse_matrix`] for a row-major `rows × cols` matrix.
pub fn format_matrix(entries: &[Q], cols: usize) -> String {
    entries
        .chunks(cols.max(1))
        .map(|row| row.iter().map(format_rational).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join("; ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_literals() {
        assert_eq!(parse_rational("3/4"), Some(q_frac(3, 4)));
        assert_eq!(parse_rational("-0.375"), Some(q_frac(-3, 8)));
        assert_eq!(parse_rational("12"), Some(q_int(12)));
        assert_eq!(parse_rational("1e-2"), Some(q_frac(1, 100)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("."), None);
    }

    #[test]
    fn matrix_text_round_trip() {
        let m = parse_matrix("0 -1; 1/2, 0").unwrap();
        assert_eq!(m, vec![vec![q_int(0), q_int(-1)], vec![q_frac(1, 2), q_int(0)]]);
        let flat: Vec<Q> = m.concat();
        assert_eq!(format_matrix(&flat, 2), "0 -1; 1/2 0");
        assert!(parse_matrix("1 x").is_none());
    }

    #[test]
    fn float_embedding_is_exact() {
        let q = <Q as Scalar>::from_f64(0.1);
        assert_eq!(q.to_float(), 0.1);
        assert_ne!(q, q_frac(1, 10));
    }
}
