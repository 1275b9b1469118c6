//! Rational-or-real scalars.
//!
//! Flux parameters that are given as fractions or finite decimals are kept
//! exact so that questions like "is `A_j + 1/2` an integer" are answered in
//! integer arithmetic instead of against a floating-point tolerance.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Ratio;

use crate::error::{Error, Result};

/// Tolerance for classifying a floating-point `a_j` as zero.
pub const TOL_ZERO: f64 = 1e-12;

/// Decimal strings with more fractional digits than this fall back to `Real`.
const MAX_DECIMAL_DIGITS: u32 = 15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scalar {
    Exact(Ratio<i64>),
    Real(f64),
}

impl Scalar {
    pub fn integer(n: i64) -> Self {
        Scalar::Exact(Ratio::from_integer(n))
    }

    /// Reduced fraction `num/den`; panics on a zero denominator.
    pub fn ratio(num: i64, den: i64) -> Self {
        Scalar::Exact(Ratio::new(num, den))
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Scalar::Exact(r) => *r.numer() as f64 / *r.denom() as f64,
            Scalar::Real(x) => x,
        }
    }

    pub fn as_ratio(self) -> Option<Ratio<i64>> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Real(_) => None,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Scalar::Exact(_))
    }
}

impl From<f64> for Scalar {
    fn from(x: f64) -> Self {
        Scalar::Real(x)
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::integer(n)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) if *r.denom() == 1 => write!(f, "{}", r.numer()),
            Scalar::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Scalar::Real(x) => write!(f, "{x}"),
        }
    }
}

impl FromStr for Scalar {
    type Err = Error;

    /// Accepts `p/q`, plain decimals (kept exact) and anything `f64` parses
    /// as a finite number (kept as `Real`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty number".into()));
        }
        if let Some((num, den)) = s.split_once('/') {
            let num: i64 = num
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
            let den: i64 = den
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
            if den == 0 {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            if num == i64::MIN || den == i64::MIN {
                return Err(Error::Overflow);
            }
            return Ok(Scalar::Exact(Ratio::new(num, den)));
        }
        if let Some(r) = parse_decimal(s) {
            return Ok(Scalar::Exact(r));
        }
        match s.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(Scalar::Real(x)),
            _ => Err(Error::Parse(format!("not a finite number: {s:?}"))),
        }
    }
}

fn parse_decimal(s: &str) -> Option<Ratio<i64>> {
    let (negative, body) = match s.as_bytes().first()? {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let frac_digits = frac_part.len() as u32;
    if frac_digits > MAX_DECIMAL_DIGITS {
        return None;
    }
    let den = 10i64.checked_pow(frac_digits)?;
    let mut num: i64 = 0;
    for b in int_part.bytes().chain(frac_part.bytes()) {
        num = num.checked_mul(10)?.checked_add(i64::from(b - b'0'))?;
    }
    if negative {
        num = -num;
    }
    Some(Ratio::new(num, den))
}

/// A single vector-potential value `A_j`, exact when it could be computed so.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Potential {
    /// Reduced `num/den` with `den > 0`.
    Exact {
        num: i128,
        den: i128,
    },
    Real(f64),
}

impl Potential {
    pub fn exact(num: i128, den: i128) -> Result<Self> {
        if den == 0 {
            return Err(Error::Parse("zero denominator".into()));
        }
        let g = num.gcd(&den);
        let sign = if den < 0 { -1 } else { 1 };
        Ok(Potential::Exact {
            num: sign * num / g,
            den: sign * den / g,
        })
    }

    pub fn from_scalar(x: Scalar) -> Self {
        match x {
            Scalar::Exact(r) => Potential::Exact {
                num: i128::from(*r.numer()),
                den: i128::from(*r.denom()),
            },
            Scalar::Real(x) => Potential::Real(x),
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Potential::Exact { num, den } => num as f64 / den as f64,
            Potential::Real(x) => x,
        }
    }

    /// `A + 1/2 ∈ ℤ`, i.e. `cos(πA) = 0`.
    pub fn is_half_integer(self) -> bool {
        match self {
            Potential::Exact { den, .. } => den == 2,
            Potential::Real(x) => dist_to_integer(x + 0.5) < TOL_ZERO,
        }
    }

    /// `A ∈ ℤ`, i.e. `sin(πA) = 0`.
    pub fn is_integer(self) -> bool {
        match self {
            Potential::Exact { den, .. } => den == 1,
            Potential::Real(x) => dist_to_integer(x) < TOL_ZERO,
        }
    }

    /// `πA` reduced into `[0, 2π)`, computed from the exact residue when possible.
    fn angle(self) -> f64 {
        match self {
            Potential::Exact { num, den } => {
                let r = num.rem_euclid(2 * den);
                std::f64::consts::PI * (r as f64 / den as f64)
            }
            Potential::Real(x) => std::f64::consts::PI * x.rem_euclid(2.0),
        }
    }

    /// Jacobi coefficient `2cos(πA)`; exactly zero on half-integers.
    pub fn coefficient(self) -> f64 {
        if self.is_half_integer() {
            return 0.0;
        }
        if let Potential::Exact { num, den: 1 } = self {
            return if num.rem_euclid(2) == 0 { 2.0 } else { -2.0 };
        }
        2.0 * self.angle().cos()
    }

    pub fn sin_pi(self) -> f64 {
        if let Potential::Exact { den: 1, .. } = self {
            return 0.0;
        }
        if let Potential::Exact { num, den: 2 } = self {
            return if num.rem_euclid(4) == 1 { 1.0 } else { -1.0 };
        }
        self.angle().sin()
    }

    pub fn cos_pi(self) -> f64 {
        0.5 * self.coefficient()
    }

    /// `e^{iπA}`, exact on integers and half-integers.
    pub fn phase(self) -> Complex64 {
        Complex64::new(self.cos_pi(), self.sin_pi())
    }
}

pub(crate) fn dist_to_integer(x: f64) -> f64 {
    (x - x.round()).abs()
}
