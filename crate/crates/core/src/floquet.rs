//! Spectra of periodic Jacobi operators.
//!
//! Without zero couplings the spectrum is the band set `{λ : |Δ(λ)| ≤ 2}` of
//! the discriminant `Δ = tr M(λ)`, located here by root bracketing. With zero
//! couplings the operator splits into identical finite blocks and the spectrum
//! is a finite set of infinitely degenerate eigenvalues.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::jacobi::{self, norm_bound, TruncatedJacobi};
use crate::profile::CoefficientWindow;
use crate::sets::{self, Interval};

/// Endpoints closer than this are treated as touching bands.
pub const TOUCH_TOL: f64 = 1e-9;

/// Cap on the discriminant scan grid before giving up.
const MAX_GRID: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub m: [[f64; 2]; 2],
    /// Index of the first factor.
    pub source: i64,
}

impl TransferMatrix {
    /// Single step `T_j(λ) = [[λ/a_j, -a_{j-1}/a_j], [1, 0]]`.
    pub fn step(a_prev: f64, a: f64, lambda: f64, source: i64) -> Self {
        TransferMatrix {
            m: [[lambda / a, -a_prev / a], [1.0, 0.0]],
            source,
        }
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// `self · rhs`.
    pub fn mul(&self, rhs: &TransferMatrix) -> TransferMatrix {
        let a = &self.m;
        let b = &rhs.m;
        TransferMatrix {
            m: [
                [
                    a[0][0] * b[0][0] + a[0][1] * b[1][0],
                    a[0][0] * b[0][1] + a[0][1] * b[1][1],
                ],
                [
                    a[1][0] * b[0][0] + a[1][1] * b[1][0],
                    a[1][0] * b[0][1] + a[1][1] * b[1][1],
                ],
            ],
            source: rhs.source,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralKind {
    AbsolutelyContinuous,
    /// Finitely many eigenvalues, each of infinite multiplicity.
    PurePoint,
}

/// Spectrum of a periodic Jacobi operator. Points are stored as zero-length
/// intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSet {
    pub kind: SpectralKind,
    pub intervals: Vec<Interval>,
}

impl BandSet {
    pub fn points(&self) -> Vec<f64> {
        self.intervals.iter().map(|i| i.lo).collect()
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Lebesgue measure; zero for point spectra.
    pub fn measure(&self) -> f64 {
        match self.kind {
            SpectralKind::PurePoint => 0.0,
            SpectralKind::AbsolutelyContinuous => sets::total_length(&self.intervals),
        }
    }

    pub fn distance(&self, x: f64) -> f64 {
        sets::distance_to_union(x, &self.intervals)
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        self.distance(x) <= tol
    }

    pub fn hull(&self) -> Option<Interval> {
        let lo = self.intervals.first()?.lo;
        let hi = self.intervals.iter().map(|i| i.hi).fold(f64::NEG_INFINITY, f64::max);
        Some(Interval::new(lo, hi))
    }
}

fn nondegenerate_period(window: &CoefficientWindow) -> Result<&[f64]> {
    let a = window.period_values()?;
    if let Some(k) = a.iter().position(|&x| x == 0.0) {
        return Err(Error::ZeroCoefficient {
            index: window.lo + k as i64,
        });
    }
    Ok(a)
}

/// Monodromy `T_{q-1}(λ) ⋯ T_0(λ)` over the first period of the window, with
/// `a_{-1}` taken as `a_{q-1}`.
pub fn monodromy(window: &CoefficientWindow, lambda: f64) -> Result<TransferMatrix> {
    monodromy_from(window, 0, lambda)
}

/// Monodromy starting at offset `start` within the period.
pub fn monodromy_from(window: &CoefficientWindow, start: usize, lambda: f64) -> Result<TransferMatrix> {
    let a = nondegenerate_period(window)?;
    let q = a.len();
    let mut m = TransferMatrix {
        m: [[1.0, 0.0], [0.0, 1.0]],
        source: window.lo + start as i64,
    };
    for k in 0..q {
        let j = (start + k) % q;
        let prev = a[(j + q - 1) % q];
        m = TransferMatrix::step(prev, a[j], lambda, window.lo + j as i64).mul(&m);
    }
    Ok(m)
}

/// Discriminant `Δ(λ)` and `Δ'(λ)`, by forward-mode differentiation of the
/// transfer-matrix product.
fn discriminant(a: &[f64], lambda: f64) -> (f64, f64) {
    let q = a.len();
    let mut m = [[1.0, 0.0], [0.0, 1.0]];
    let mut dm = [[0.0, 0.0], [0.0, 0.0]];
    for j in 0..q {
        let prev = a[(j + q - 1) % q];
        let t = [[lambda / a[j], -prev / a[j]], [1.0, 0.0]];
        let dt00 = 1.0 / a[j];
        let mut nm = [[0.0; 2]; 2];
        let mut ndm = [[0.0; 2]; 2];
        for c in 0..2 {
            nm[0][c] = t[0][0] * m[0][c] + t[0][1] * m[1][c];
            nm[1][c] = m[0][c];
            ndm[0][c] = dt00 * m[0][c] + t[0][0] * dm[0][c] + t[0][1] * dm[1][c];
            ndm[1][c] = dm[0][c];
        }
        m = nm;
        dm = ndm;
    }
    (m[0][0] + m[1][1], dm[0][0] + dm[1][1])
}

/// Bisection for a sign change of `f` on `[lo, hi]`, run to machine precision.
fn bisect_sign<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Critical points of `Δ`, located by refining a uniform grid until exactly
/// `q - 1` sign changes of `Δ'` are isolated.
fn discriminant_extrema(a: &[f64], lo: f64, hi: f64) -> Result<Vec<f64>> {
    let q = a.len();
    let want = q - 1;
    if want == 0 {
        return Ok(Vec::new());
    }
    let mut n = 64 * q;
    loop {
        let step = (hi - lo) / n as f64;
        let mut brackets = Vec::with_capacity(want);
        let mut prev_x = lo;
        let mut prev_d = discriminant(a, lo).1;
        for k in 1..=n {
            let x = if k == n { hi } else { lo + step * k as f64 };
            let d = discriminant(a, x).1;
            if d == 0.0 {
                brackets.push((x, x));
            } else if prev_d != 0.0 && (d < 0.0) != (prev_d < 0.0) {
                brackets.push((prev_x, x));
            }
            prev_x = x;
            prev_d = d;
        }
        if brackets.len() == want {
            return Ok(brackets
                .into_iter()
                .map(|(l, h)| {
                    if l == h {
                        l
                    } else {
                        bisect_sign(|x| discriminant(a, x).1, l, h)
                    }
                })
                .collect());
        }
        if n >= MAX_GRID {
            return Err(Error::Bracketing(format!(
                "found {} critical points of the discriminant, expected {want}",
                brackets.len()
            )));
        }
        n *= 2;
    }
}

/// Band spectrum of a periodic window without zero couplings.
///
/// Between consecutive critical points the discriminant is monotone, so each of
/// the `q` monotone pieces carries exactly one band, bounded by the solutions
/// of `Δ = ±2` (or by the critical point itself when two bands touch).
pub fn bands_nondegenerate(window: &CoefficientWindow) -> Result<BandSet> {
    let a = nondegenerate_period(window)?;
    let q = a.len();
    let bound = norm_bound(window);
    let lo = -bound - 0.05;
    let hi = bound + 0.05;
    let delta = |x: f64| discriminant(a, x).0;
    if delta(lo).abs() <= 2.0 || delta(hi).abs() <= 2.0 {
        return Err(Error::Bracketing(
            "discriminant inside [-2, 2] at the scan boundary".into(),
        ));
    }
    let extrema = discriminant_extrema(a, lo, hi)?;
    let mut knots = Vec::with_capacity(q + 1);
    knots.push(lo);
    knots.extend(extrema.iter().copied());
    knots.push(hi);

    let mut bands = Vec::with_capacity(q);
    for seg in knots.windows(2) {
        let (x0, x1) = (seg[0], seg[1]);
        let (d0, d1) = (delta(x0), delta(x1));
        let left = if d0.abs() <= 2.0 {
            x0
        } else {
            let target = 2.0 * d0.signum();
            bisect_sign(|x| delta(x) - target, x0, x1)
        };
        let right = if d1.abs() <= 2.0 {
            x1
        } else {
            let target = 2.0 * d1.signum();
            bisect_sign(|x| delta(x) - target, x0, x1)
        };
        if d0.abs() > 2.0 && d1.abs() > 2.0 && d0.signum() == d1.signum() {
            return Err(Error::Bracketing(format!(
                "monotone piece [{x0}, {x1}] carries no band"
            )));
        }
        bands.push(Interval::new(left.min(right), left.max(right)));
    }
    // Touching bands share the critical point as a common endpoint.
    for k in 1..bands.len() {
        if bands[k].lo - bands[k - 1].hi <= TOUCH_TOL {
            let e = extrema[k - 1];
            bands[k - 1].hi = e;
            bands[k].lo = e;
        }
    }
    if bands.len() != q {
        return Err(Error::Bracketing(format!("found {} bands, expected {q}", bands.len())));
    }
    Ok(BandSet {
        kind: SpectralKind::AbsolutelyContinuous,
        intervals: bands,
    })
}

/// `q × q` Bloch matrix at quasi-momentum `kappa` (`φ_{j+q} = e^{iκ} φ_j`).
pub fn bloch_matrix(a: &[f64], kappa: f64) -> DMatrix<Complex64> {
    let q = a.len();
    let mut m = DMatrix::<Complex64>::zeros(q, q);
    let phase = Complex64::from_polar(1.0, kappa);
    match q {
        1 => m[(0, 0)] = Complex64::new(2.0 * a[0] * kappa.cos(), 0.0),
        2 => {
            let z = a[0] + a[1] * phase.conj();
            m[(0, 1)] = z;
            m[(1, 0)] = z.conj();
        }
        _ => {
            for j in 0..q - 1 {
                m[(j, j + 1)] = Complex64::new(a[j], 0.0);
                m[(j + 1, j)] = Complex64::new(a[j], 0.0);
            }
            m[(q - 1, 0)] = a[q - 1] * phase;
            m[(0, q - 1)] = a[q - 1] * phase.conj();
        }
    }
    m
}

/// Independent band computation: sweep the Bloch matrix over `n_kappa`
/// uniform quasi-momenta in `[0, π]` and take per-index eigenvalue ranges.
pub fn bands_bloch_oracle(window: &CoefficientWindow, n_kappa: usize) -> Result<BandSet> {
    let a = window.period_values()?.to_vec();
    let q = a.len();
    let n_kappa = n_kappa.max(2);
    let spectra: Vec<Vec<f64>> = (0..n_kappa)
        .into_par_iter()
        .map(|k| {
            let kappa = std::f64::consts::PI * k as f64 / (n_kappa - 1) as f64;
            let mut e: Vec<f64> = bloch_matrix(&a, kappa)
                .symmetric_eigenvalues()
                .iter()
                .copied()
                .collect();
            e.sort_by(f64::total_cmp);
            e
        })
        .collect();
    let mut lo = vec![f64::INFINITY; q];
    let mut hi = vec![f64::NEG_INFINITY; q];
    for e in &spectra {
        for (i, &x) in e.iter().enumerate() {
            lo[i] = lo[i].min(x);
            hi[i] = hi[i].max(x);
        }
    }
    Ok(BandSet {
        kind: SpectralKind::AbsolutelyContinuous,
        intervals: lo.into_iter().zip(hi).map(|(l, h)| Interval::new(l, h)).collect(),
    })
}

/// Point spectrum of a periodic window with zero couplings.
///
/// Each block between consecutive zeros is a finite Jacobi matrix with nonzero
/// couplings and hence simple spectrum; the union over blocks is deduplicated.
pub fn blocks_degenerate(window: &CoefficientWindow) -> Result<BandSet> {
    let q = window.period.ok_or(Error::NotPeriodic)?;
    let zeros = window.period_zero_offsets()?;
    if zeros.is_empty() {
        return Err(Error::NoZeroCoefficient);
    }
    let block_spectra = period_blocks(&window.values, q, &zeros)?;
    // A second period, when available, must reproduce the same blocks.
    if window.len() >= 2 * q {
        let shifted: Vec<f64> = window.values[q..2 * q].to_vec();
        let zeros2: Vec<usize> = (0..q).filter(|&k| shifted[k] == 0.0).collect();
        if zeros2 != zeros {
            return Err(Error::InconsistentBlocks);
        }
        let again = period_blocks(&shifted, q, &zeros2)?;
        for (x, y) in block_spectra.iter().zip(&again) {
            if x.len() != y.len() || x.iter().zip(y).any(|(u, v)| (u - v).abs() > 1e-9) {
                return Err(Error::InconsistentBlocks);
            }
        }
    }
    let mut points: Vec<f64> = block_spectra.into_iter().flatten().collect();
    points.sort_by(f64::total_cmp);
    points.dedup_by(|b, a| (*b - *a).abs() <= 1e-9);
    Ok(BandSet {
        kind: SpectralKind::PurePoint,
        intervals: points.into_iter().map(Interval::point).collect(),
    })
}

fn period_blocks(values: &[f64], q: usize, zeros: &[usize]) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(zeros.len());
    for (i, &z) in zeros.iter().enumerate() {
        let next = if i + 1 < zeros.len() {
            zeros[i + 1]
        } else {
            zeros[0] + q
        };
        let size = next - z;
        let off: Vec<f64> = (z + 1..next).map(|k| values[k % q]).collect();
        debug_assert_eq!(off.len() + 1, size);
        let eigs = jacobi::eigenvalues(&TruncatedJacobi::from_off_diagonal(off));
        if eigs.windows(2).any(|w| w[1] - w[0] <= 1e-12) {
            return Err(Error::InconsistentBlocks);
        }
        out.push(eigs);
    }
    Ok(out)
}

/// Spectrum of a periodic window: bands without zeros, blocks with.
pub fn periodic_spectrum(window: &CoefficientWindow) -> Result<BandSet> {
    if window.period_zero_offsets()?.is_empty() {
        bands_nondegenerate(window)
    } else {
        blocks_degenerate(window)
    }
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use crate::profile::{evaluate_period, evaluate_profile, FieldProfile};
    use crate::scalar::Scalar;
    use approx::assert_abs_diff_eq;

    fn linear_window(p: i64, q: i64, theta: Scalar) -> CoefficientWindow {
        evaluate_period(&FieldProfile::linear(Scalar::ratio(p, q), theta)).unwrap()
    }

    #[test]
    fn single_site_trace() {
        let w = CoefficientWindow::from_values(0, vec![2.0], Some(1)).unwrap();
        for lambda in [-3.0, 0.0, 0.7, 5.0] {
            let m = monodromy(&w, lambda).unwrap();
            assert_abs_diff_eq!(m.trace(), lambda / 2.0, epsilon = 1e-15);
            assert_abs_diff_eq!(m.det(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn third_flux_monodromy_at_zero() {
        let w = linear_window(1, 3, Scalar::integer(0));
        let m = monodromy(&w, 0.0).unwrap();
        let want = [[0.0, 0.5], [-2.0, 0.0]];
        for r in 0..2 {
            for c in 0..2 {
                assert_abs_diff_eq!(m.m[r][c], want[r][c], epsilon = 1e-14);
            }
        }
        assert_abs_diff_eq!(m.trace(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(m.det(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn monodromy_rejects_zero_coefficient() {
        let w = linear_window(1, 2, Scalar::ratio(1, 2));
        assert!(matches!(monodromy(&w, 0.0), Err(Error::ZeroCoefficient { index: 0 })));
    }

    #[test]
    fn trace_independent_of_start() {
        let w = linear_window(3, 7, Scalar::ratio(123, 1000));
        for lambda in [-2.1, -0.4, 0.3, 1.9] {
            let t0 = monodromy(&w, lambda).unwrap().trace();
            for s in 1..7 {
                let ts = monodromy_from(&w, s, lambda).unwrap().trace();
                assert!((t0 - ts).abs() <= 1e-10 * t0.abs().max(1.0));
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let a = [2.0, 1.0, -1.0, 0.3];
        for x in [-1.5, 0.2, 1.1] {
            let h = 1e-6;
            let fd = (discriminant(&a, x + h).0 - discriminant(&a, x - h).0) / (2.0 * h);
            let d = discriminant(&a, x).1;
            assert!((fd - d).abs() <= 1e-6 * d.abs().max(1.0));
        }
    }

    #[test]
    fn single_band_formula() {
        let w = linear_window(0, 1, Scalar::ratio(3, 10));
        let b = bands_nondegenerate(&w).unwrap();
        let e = 4.0 * (0.3 * std::f64::consts::PI).cos();
        assert_eq!(b.len(), 1);
        assert_abs_diff_eq!(b.intervals[0].lo, -e, epsilon = 1e-12);
        assert_abs_diff_eq!(b.intervals[0].hi, e, epsilon = 1e-12);
        assert_abs_diff_eq!(e, 2.351_141_009_169_892, epsilon = 1e-12);

        let w = linear_window(0, 1, Scalar::integer(0));
        let b = bands_nondegenerate(&w).unwrap();
        assert_abs_diff_eq!(b.intervals[0].lo, -4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.intervals[0].hi, 4.0, epsilon = 1e-12);
    }

    #[test]
    fn third_flux_bands_contain_zero() {
        let w = linear_window(1, 3, Scalar::integer(0));
        let b = bands_nondegenerate(&w).unwrap();
        assert_eq!(b.len(), 3);
        assert!(b.contains(0.0, 0.0));
        let oracle = bands_bloch_oracle(&w, 2001).unwrap();
        assert!(sets::hausdorff(&b.intervals, &oracle.intervals) <= 1e-6);
    }

    #[test]
    fn period_doubled_constant_chain_touches() {
        let w = CoefficientWindow::from_values(0, vec![1.0, 1.0], Some(2)).unwrap();
        let b = bands_nondegenerate(&w).unwrap();
        assert_eq!(b.len(), 2);
        assert_abs_diff_eq!(b.intervals[0].lo, -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.intervals[1].hi, 2.0, epsilon = 1e-12);
        // Shared endpoint, never merged.
        assert_eq!(b.intervals[0].hi, b.intervals[1].lo);
        assert!(b.intervals[0].hi.abs() <= 1e-7);

        let o = bands_bloch_oracle(&w, 1001).unwrap();
        assert_abs_diff_eq!(o.intervals[0].hi, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(o.intervals[1].lo, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn bloch_oracle_constant_chain() {
        let w = linear_window(0, 1, Scalar::integer(0));
        let o = bands_bloch_oracle(&w, 1001).unwrap();
        assert_abs_diff_eq!(o.intervals[0].lo, -4.0, epsilon = 1e-5);
        assert_abs_diff_eq!(o.intervals[0].hi, 4.0, epsilon = 1e-5);
    }

    #[test]
    fn degenerate_blocks() {
        let w = linear_window(1, 2, Scalar::ratio(1, 2));
        let b = blocks_degenerate(&w).unwrap();
        assert_eq!(b.kind, SpectralKind::PurePoint);
        let p = b.points();
        assert_abs_diff_eq!(p[0], -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p[1], 2.0, epsilon = 1e-12);

        let w = linear_window(0, 1, Scalar::ratio(1, 2));
        let p = blocks_degenerate(&w).unwrap().points();
        assert_eq!(p.len(), 1);
        assert_abs_diff_eq!(p[0], 0.0, epsilon = 1e-12);

        let w = linear_window(1, 4, Scalar::ratio(1, 4));
        let p = blocks_degenerate(&w).unwrap().points();
        assert_eq!(p.len(), 4);
        for k in 0..4 {
            assert_abs_diff_eq!(p[k], -p[3 - k], epsilon = 1e-10);
        }
        assert_eq!(
            blocks_degenerate(&linear_window(1, 3, Scalar::integer(0))),
            Err(Error::NoZeroCoefficient)
        );
    }

    #[test]
    fn degenerate_blocks_over_two_periods() {
        let prof = FieldProfile::rational(2, 5, 1, 2);
        let w = evaluate_profile(&prof, 0, 9).unwrap();
        assert_eq!(blocks_degenerate(&w).unwrap().len(), 5);
    }

    #[test]
    fn step_determinant() {
        for (prev, a) in [(2.0, 1.0), (-1.3, 0.2), (0.0125, -1.9)] {
            let t = TransferMatrix::step(prev, a, 0.7, 0);
            assert!((t.det() - prev / a).abs() <= 1e-14 * (prev / a).abs().max(1.0));
        }
    }

    #[test]
    fn determinant_is_one() {
        for (p, q) in [(1, 3), (2, 5), (3, 7), (5, 8), (7, 11)] {
            let w = linear_window(p, q, Scalar::ratio(123, 1000));
            for k in 0..=40 {
                let lambda = -4.0 + 0.2 * k as f64;
                let m = monodromy(&w, lambda).unwrap();
                // The determinant of the computed product cancels terms of
                // size |M|², so the error is relative to that.
                let big = m.m.iter().flatten().fold(1.0f64, |x, y| x.max(y.abs()));
                assert!((m.det() - 1.0).abs() <= 1e-14 * big * big, "{p}/{q} at {lambda}");
            }
        }
    }

    #[test]
    fn band_sets_are_symmetric() {
        for (p, q) in [(1, 3), (2, 5), (3, 7), (5, 8), (1, 6)] {
            let b = bands_nondegenerate(&linear_window(p, q, Scalar::ratio(123, 1000))).unwrap();
            let n = b.len();
            for k in 0..n {
                assert!((b.intervals[k].lo + b.intervals[n - 1 - k].hi).abs() <= 1e-10);
            }
        }
    }
}
