//! Vector-potential profiles `A_j` and the Jacobi coefficients `a_j = 2cos(πA_j)`
//! they induce.

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::scalar::{Potential, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub enum FieldProfile {
    /// `A_j = alpha * j + theta`.
    Linear { alpha: Scalar, theta: Scalar },
    /// `A_j = values[j mod N]`.
    Periodic { values: Vec<Scalar> },
    /// Finite window `A_lo, ..., A_{lo + len - 1}`.
    Explicit { lo: i64, values: Vec<Scalar> },
}

impl FieldProfile {
    pub fn linear(alpha: impl Into<Scalar>, theta: impl Into<Scalar>) -> Self {
        FieldProfile::Linear {
            alpha: alpha.into(),
            theta: theta.into(),
        }
    }

    /// Shorthand for a linear profile with `alpha = p/q` and exact `theta = r/s`.
    pub fn rational(p: i64, q: i64, theta_num: i64, theta_den: i64) -> Self {
        FieldProfile::Linear {
            alpha: Scalar::ratio(p, q),
            theta: Scalar::ratio(theta_num, theta_den),
        }
    }

    pub fn periodic(values: Vec<Scalar>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("periodic profile"));
        }
        Ok(FieldProfile::Periodic { values })
    }

    pub fn explicit(lo: i64, values: Vec<Scalar>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("explicit profile"));
        }
        if lo.checked_add(values.len() as i64 - 1).is_none() {
            return Err(Error::Overflow);
        }
        Ok(FieldProfile::Explicit { lo, values })
    }

    /// Slope as a reduced `(p, q)` when the profile is linear with rational slope.
    pub fn rational_slope(&self) -> Option<(i64, i64)> {
        match self {
            FieldProfile::Linear {
                alpha: Scalar::Exact(r),
                ..
            } => Some((*r.numer(), *r.denom())),
            _ => None,
        }
    }

    /// Period of `|a_j|`: `q` for rational linear profiles, the list length for
    /// periodic ones.
    pub fn period(&self) -> Option<usize> {
        match self {
            FieldProfile::Linear { .. } => self.rational_slope().and_then(|(_, q)| usize::try_from(q).ok()),
            FieldProfile::Periodic { values } => Some(values.len()),
            FieldProfile::Explicit { .. } => None,
        }
    }

    pub fn declared_range(&self) -> Option<(i64, i64)> {
        match self {
            FieldProfile::Explicit { lo, values } => Some((*lo, lo + values.len() as i64 - 1)),
            _ => None,
        }
    }

    pub fn potential(&self, j: i64) -> Result<Potential> {
        match self {
            FieldProfile::Linear { alpha, theta } => linear_potential(*alpha, *theta, j),
            FieldProfile::Periodic { values } => {
                let idx = j.rem_euclid(values.len() as i64) as usize;
                Ok(Potential::from_scalar(values[idx]))
            }
            FieldProfile::Explicit { lo, values } => {
                let hi = lo + values.len() as i64 - 1;
                if j < *lo || j > hi {
                    return Err(Error::OutsideDeclaredRange { index: j, lo: *lo, hi });
                }
                Ok(Potential::from_scalar(values[(j - lo) as usize]))
            }
        }
    }

    pub fn coefficient(&self, j: i64) -> Result<f64> {
        Ok(self.potential(j)?.coefficient())
    }
}

fn linear_potential(alpha: Scalar, theta: Scalar, j: i64) -> Result<Potential> {
    match (alpha, theta) {
        (Scalar::Exact(a), Scalar::Exact(t)) => {
            let (p, q) = (i128::from(*a.numer()), i128::from(*a.denom()));
            let (r, s) = (i128::from(*t.numer()), i128::from(*t.denom()));
            let num = p
                .checked_mul(i128::from(j))
                .and_then(|x| x.checked_mul(s))
                .and_then(|x| x.checked_add(r.checked_mul(q)?))
                .ok_or(Error::Overflow)?;
            let den = q.checked_mul(s).ok_or(Error::Overflow)?;
            Potential::exact(num, den)
        }
        (Scalar::Exact(a), Scalar::Real(t)) => {
            // Reduce alpha*j modulo 2 exactly before going to floating point.
            let (p, q) = (i128::from(*a.numer()), i128::from(*a.denom()));
            let num = p.checked_mul(i128::from(j)).ok_or(Error::Overflow)?;
            let r = num.rem_euclid(2 * q);
            Ok(Potential::Real(r as f64 / q as f64 + t))
        }
        (alpha, theta) => Ok(Potential::Real(alpha.to_f64() * j as f64 + theta.to_f64())),
    }
}

/// Jacobi coefficients `a_j` over an index interval.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientWindow {
    pub lo: i64,
    pub values: Vec<f64>,
    /// Period of `|a_j|`, when known.
    pub period: Option<usize>,
    /// Sorted indices with `a_j = 0`.
    pub zero_positions: Vec<i64>,
}

impl CoefficientWindow {
    /// Window from raw coefficients; zeros are classified against [`crate::TOL_ZERO`].
    pub fn from_values(lo: i64, values: Vec<f64>, period: Option<usize>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("coefficient window"));
        }
        if let Some(p) = period {
            if p == 0 || p > values.len() {
                return Err(Error::Precondition(format!(
                    "period {p} incompatible with window length {}",
                    values.len()
                )));
            }
        }
        let mut values = values;
        let mut zero_positions = Vec::new();
        for (k, a) in values.iter_mut().enumerate() {
            if a.abs() < crate::scalar::TOL_ZERO {
                *a = 0.0;
                zero_positions.push(lo + k as i64);
            }
        }
        Ok(CoefficientWindow {
            lo,
            values,
            period,
            zero_positions,
        })
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.values.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn covers(&self, lo: i64, hi: i64) -> bool {
        lo >= self.lo && hi <= self.hi()
    }

    pub fn get(&self, j: i64) -> Option<f64> {
        if j < self.lo || j > self.hi() {
            return None;
        }
        Some(self.values[(j - self.lo) as usize])
    }

    /// One period `a_lo, ..., a_{lo+N-1}`, requiring the window to hold it.
    pub fn period_values(&self) -> Result<&[f64]> {
        let n = self.period.ok_or(Error::NotPeriodic)?;
        Ok(&self.values[..n])
    }

    /// Offsets (relative to `lo`) of zero coefficients within the first period.
    pub fn period_zero_offsets(&self) -> Result<Vec<usize>> {
        let n = self.period.ok_or(Error::NotPeriodic)?;
        Ok(self
            .zero_positions
            .iter()
            .map(|&j| (j - self.lo) as usize)
            .filter(|&k| k < n)
            .collect())
    }
}

/// Coefficients `a_j = 2cos(πA_j)` for `j ∈ [j_lo, j_hi]`.
///
/// Zeros of rational linear profiles are decided exactly. The period is `q`
/// for rational linear profiles and the list length for periodic ones, and is
/// dropped when the window is shorter than one period.
pub fn evaluate_profile(profile: &FieldProfile, j_lo: i64, j_hi: i64) -> Result<CoefficientWindow> {
    if j_lo > j_hi {
        return Err(Error::InvalidRange { lo: j_lo, hi: j_hi });
    }
    let len = j_hi
        .checked_sub(j_lo)
        .and_then(|d| usize::try_from(d).ok())
        .and_then(|d| d.checked_add(1))
        .ok_or(Error::InvalidRange { lo: j_lo, hi: j_hi })?;
    if len > 1 << 28 {
        return Err(Error::InvalidRange { lo: j_lo, hi: j_hi });
    }
    let mut values = Vec::with_capacity(len);
    let mut zero_positions = Vec::new();
    for j in j_lo..=j_hi {
        let a = profile.potential(j)?;
        if a.is_half_integer() {
            zero_positions.push(j);
            values.push(0.0);
        } else {
            values.push(a.coefficient());
        }
    }
    let period = profile.period().filter(|&n| n <= len);
    Ok(CoefficientWindow {
        lo: j_lo,
        values,
        period,
        zero_positions,
    })
}

/// One period `[0, N-1]` of a periodic or rational linear profile.
pub fn evaluate_period(profile: &FieldProfile) -> Result<CoefficientWindow> {
    let n = profile.period().ok_or(Error::NotPeriodic)?;
    evaluate_profile(profile, 0, n as i64 - 1)
}

/// The residue `j₀ mod q` with `αj₀ + θ + 1/2 ∈ ℤ`, if any.
///
/// Unique when it exists because `gcd(p, q) = 1`. Exact for rational `θ`;
/// for real `θ` the condition is tested against [`crate::TOL_ZERO`].
pub fn degenerate_flux_check(profile: &FieldProfile) -> Result<Option<i64>> {
    let FieldProfile::Linear { alpha, theta } = profile else {
        return Err(Error::NotRationalLinear);
    };
    let Scalar::Exact(alpha) = alpha else {
        return Err(Error::NotRationalLinear);
    };
    let (p, q) = (i128::from(*alpha.numer()), i128::from(*alpha.denom()));
    match theta {
        Scalar::Exact(t) => {
            // t + 1/2 = r/s; need p*j/q + r/s ∈ ℤ, which forces s | q.
            let r = 2 * i128::from(*t.numer()) + i128::from(*t.denom());
            let s = 2 * i128::from(*t.denom());
            let g = r.gcd(&s);
            let (r, s) = (r / g, s / g);
            if q % s != 0 {
                return Ok(None);
            }
            let c = r * (q / s);
            // p*j ≡ -c (mod q)
            let inv = mod_inverse(p.rem_euclid(q), q).ok_or(Error::NotRationalLinear)?;
            let j0 = ((-c).rem_euclid(q) * inv).rem_euclid(q);
            Ok(Some(j0 as i64))
        }
        Scalar::Real(t) => {
            for j in 0..q {
                let frac = (p * j).rem_euclid(q) as f64 / q as f64;
                if crate::scalar::dist_to_integer(frac + t + 0.5) < crate::scalar::TOL_ZERO {
                    return Ok(Some(j as i64));
                }
            }
            Ok(None)
        }
    }
}

fn mod_inverse(a: i128, m: i128) -> Option<i128> {
    if m == 1 {
        return Some(0);
    }
    let e = a.extended_gcd(&m);
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(m))
}
