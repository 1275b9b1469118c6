//! Finite sections of the zero-diagonal Jacobi operator
//! `(Lφ)_j = a_j φ_{j+1} + a_{j-1} φ_{j-1}` and a Sturm-bisection eigensolver.

use crate::error::{Error, Result};
use crate::profile::CoefficientWindow;

/// How the section is closed at its ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Couplings leaving the window are dropped.
    Dirichlet,
    /// The last site couples back to the first through `a_{j_hi}`.
    Periodic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedJacobi {
    pub lo: i64,
    /// `a_{lo}, ..., a_{hi-1}`.
    pub off_diagonal: Vec<f64>,
    pub boundary: Boundary,
    /// Corner coupling for [`Boundary::Periodic`], zero otherwise.
    pub wrap: f64,
}

impl TruncatedJacobi {
    pub fn from_off_diagonal(off_diagonal: Vec<f64>) -> Self {
        TruncatedJacobi {
            lo: 0,
            off_diagonal,
            boundary: Boundary::Dirichlet,
            wrap: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.off_diagonal.len() + 1
    }

    /// Gershgorin radius; all eigenvalues lie in `[-r, r]`.
    pub fn gershgorin_radius(&self) -> f64 {
        let n = self.dim();
        let mut r: f64 = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            if i > 0 {
                row += self.off_diagonal[i - 1].abs();
            }
            if i + 1 < n {
                row += self.off_diagonal[i].abs();
            }
            if self.boundary == Boundary::Periodic && (i == 0 || i + 1 == n) {
                row += self.wrap.abs();
            }
            r = r.max(row);
        }
        r
    }

    /// Number of eigenvalues strictly below `lambda`.
    pub fn count_below(&self, lambda: f64) -> usize {
        match self.boundary {
            Boundary::Dirichlet => sturm_count(&self.off_diagonal, lambda),
            Boundary::Periodic => cyclic_count(&self.off_diagonal, self.wrap, lambda),
        }
    }

    /// Dense copy, for tests and small problems.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut m = vec![vec![0.0; n]; n];
        for (i, &a) in self.off_diagonal.iter().enumerate() {
            m[i][i + 1] = a;
            m[i + 1][i] = a;
        }
        if self.boundary == Boundary::Periodic {
            m[0][n - 1] += self.wrap;
            m[n - 1][0] += self.wrap;
        }
        m
    }
}

/// Section over `[j_lo, j_hi]` with hard cutoff: off-diagonal `a_{j_lo}, ..., a_{j_hi-1}`.
pub fn truncate(window: &CoefficientWindow, j_lo: i64, j_hi: i64) -> Result<TruncatedJacobi> {
    if j_lo > j_hi {
        return Err(Error::InvalidRange { lo: j_lo, hi: j_hi });
    }
    if !window.covers(j_lo, j_hi) {
        return Err(Error::WindowTooSmall {
            have_lo: window.lo,
            have_hi: window.hi(),
            want_lo: j_lo,
            want_hi: j_hi,
        });
    }
    let start = (j_lo - window.lo) as usize;
    let end = (j_hi - window.lo) as usize;
    Ok(TruncatedJacobi {
        lo: j_lo,
        off_diagonal: window.values[start..end].to_vec(),
        boundary: Boundary::Dirichlet,
        wrap: 0.0,
    })
}

/// Section over `[j_lo, j_hi]` closed into a ring through `a_{j_hi}`.
///
/// When the length is a multiple of the period of `|a_j|` this is a direct sum
/// of Bloch problems, so its eigenvalues lie in the bands with no edge states.
pub fn truncate_periodic(window: &CoefficientWindow, j_lo: i64, j_hi: i64) -> Result<TruncatedJacobi> {
    if j_hi - j_lo < 2 {
        return Err(Error::Precondition("periodic section needs at least 3 sites".into()));
    }
    if !window.covers(j_lo, j_hi) {
        return Err(Error::WindowTooSmall {
            have_lo: window.lo,
            have_hi: window.hi(),
            want_lo: j_lo,
            want_hi: j_hi,
        });
    }
    let mut t = truncate(window, j_lo, j_hi)?;
    t.boundary = Boundary::Periodic;
    t.wrap = window.get(j_hi).unwrap_or(0.0);
    Ok(t)
}

const PIVOT_GUARD: f64 = 1e-300;

/// Sturm count for the zero-diagonal tridiagonal matrix.
pub fn sturm_count(off_diagonal: &[f64], lambda: f64) -> usize {
    let mut count = 0;
    let mut q = -lambda;
    if q < 0.0 {
        count += 1;
    }
    for &a in off_diagonal {
        let q_safe = guard(q);
        q = -lambda - a * a / q_safe;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn guard(q: f64) -> f64 {
    guard_with(q, PIVOT_GUARD)
}

fn guard_with(q: f64, g: f64) -> f64 {
    if q.abs() < g {
        if q < 0.0 {
            -g
        } else {
            g
        }
    } else {
        q
    }
}

/// Inertia count of `C - λI` for the cyclic tridiagonal matrix `C`.
///
/// LDLᵀ without pivoting; eliminating the chain fills in only the last column.
fn cyclic_count(off: &[f64], wrap: f64, lambda: f64) -> usize {
    let n = off.len() + 1;
    debug_assert!(n >= 3);
    // The fill column squares the inverse pivots, so the guard must stay far
    // from the underflow range.
    let scale = off.iter().fold(wrap.abs(), |m, a| m.max(a.abs()));
    let g = 1e-14 * (1.0 + lambda.abs() + scale);
    let guard = |q: f64| guard_with(q, g);
    let mut count = 0;
    // Current pivot, coupling of the current row to the last row, and the
    // running last diagonal entry.
    let mut pivot = -lambda;
    let mut fill = wrap;
    let mut last = -lambda;
    for i in 0..n - 2 {
        let p = guard(pivot);
        if p < 0.0 {
            count += 1;
        }
        let e = off[i];
        let next_pivot = -lambda - e * e / p;
        let next_fill = if i + 1 == n - 2 {
            off[n - 2] - e * fill / p
        } else {
            -e * fill / p
        };
        last -= fill * fill / p;
        pivot = next_pivot;
        fill = next_fill;
    }
    let p = guard(pivot);
    if p < 0.0 {
        count += 1;
    }
    last -= fill * fill / p;
    if last < 0.0 {
        count += 1;
    }
    count
}

/// All eigenvalues in ascending order.
///
/// Bisection on Sturm counts; intervals are split until their width falls
/// under `1e-13 * max(1, r)` with `r` the Gershgorin radius.
pub fn eigenvalues(t: &TruncatedJacobi) -> Vec<f64> {
    let r = t.gershgorin_radius();
    let lo = -r - 1e-9 - 1e-12 * r;
    let hi = r + 1e-9 + 1e-12 * r;
    let tol = 1e-13 * r.max(1.0);
    bisect_all(|x| t.count_below(x), lo, hi, 0, t.dim(), tol)
}

/// Eigenvalues of a counting function on `[lo, hi)`, where `count(lo) = c_lo`
/// and `count(hi) = c_hi`. Repeated eigenvalues are emitted with multiplicity.
pub fn bisect_all<F>(count: F, lo: f64, hi: f64, c_lo: usize, c_hi: usize, tol: f64) -> Vec<f64>
where
    F: Fn(f64) -> usize,
{
    let mut out = Vec::with_capacity(c_hi.saturating_sub(c_lo));
    let mut stack = vec![(lo, hi, c_lo, c_hi)];
    while let Some((a, b, ca, cb)) = stack.pop() {
        if cb <= ca {
            continue;
        }
        let mid = 0.5 * (a + b);
        if b - a <= tol || mid <= a || mid >= b {
            out.extend(std::iter::repeat_n(mid, cb - ca));
            continue;
        }
        let cm = count(mid).clamp(ca, cb);
        // Upper half first so the lower half is popped (and emitted) first.
        stack.push((mid, b, cm, cb));
        stack.push((a, mid, ca, cm));
    }
    out
}

/// Signs `u_j ∈ {±1}` with `u_0 = 1` relating two coefficient sequences of
/// equal moduli: `ã_j = u_j u_{j+1} a_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignGauge {
    pub u: Vec<i8>,
}

impl SignGauge {
    /// Gauge taking off-diagonal `from` to `to`; both must agree in modulus.
    pub fn between(from: &[f64], to: &[f64]) -> Result<Self> {
        if from.len() != to.len() {
            return Err(Error::LengthMismatch {
                expected: from.len(),
                got: to.len(),
            });
        }
        let mut u = Vec::with_capacity(from.len() + 1);
        u.push(1i8);
        for (a, b) in from.iter().zip(to) {
            let s = if a.signum() == b.signum() || *a == 0.0 { 1 } else { -1 };
            let last = *u.last().unwrap();
            u.push(last * s);
        }
        Ok(SignGauge { u })
    }

    pub fn apply(&self, phi: &[f64]) -> Vec<f64> {
        phi.iter().zip(&self.u).map(|(x, &s)| x * f64::from(s)).collect()
    }
}

/// Replace the signs of the off-diagonal by `target_signs` (moduli preserved).
///
/// Isospectral for Dirichlet sections: the result is `U T U` with `U` the
/// diagonal [`SignGauge`].
pub fn apply_sign_gauge(t: &TruncatedJacobi, target_signs: &[i8]) -> Result<TruncatedJacobi> {
    if target_signs.len() != t.off_diagonal.len() {
        return Err(Error::LengthMismatch {
            expected: t.off_diagonal.len(),
            got: target_signs.len(),
        });
    }
    if t.boundary != Boundary::Dirichlet {
        return Err(Error::Precondition(
            "sign gauge is only isospectral on Dirichlet sections".into(),
        ));
    }
    if target_signs.iter().any(|&s| s != 1 && s != -1) {
        return Err(Error::Precondition("signs must be ±1".into()));
    }
    let off_diagonal = t
        .off_diagonal
        .iter()
        .zip(target_signs)
        .map(|(a, &s)| a.abs() * f64::from(s))
        .collect();
    Ok(TruncatedJacobi {
        off_diagonal,
        ..t.clone()
    })
}

/// `sup_j (|a_{j-1}| + |a_j|)`: over one period (cyclically) when the window is
/// periodic, over consecutive pairs of the window otherwise.
pub fn norm_bound(window: &CoefficientWindow) -> f64 {
    let vals: Vec<f64> = window.values.iter().map(|a| a.abs()).collect();
    if let Some(n) = window.period {
        return (0..n).map(|j| vals[(j + n - 1) % n] + vals[j]).fold(0.0, f64::max);
    }
    if vals.len() == 1 {
        return vals[0];
    }
    vals.windows(2).map(|w| w[0] + w[1]).fold(0.0, f64::max)
}
