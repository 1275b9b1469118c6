//! Spectrum of the chain graph: Dirichlet energies `n²` together with the
//! branchwise preimages `σ_n = η⁻¹(σ(L)) ∩ I_n`, plus the measure, dimension
//! and sweep tooling built on top.

use num_integer::Integer;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::eta::{branch_intervals, BranchInterval};
use crate::floquet::{periodic_spectrum, BandSet, SpectralKind};
use crate::jacobi::{self, norm_bound};
use crate::profile::{evaluate_period, evaluate_profile, CoefficientWindow, FieldProfile};
use crate::scalar::Scalar;
use crate::sets::{self, Interval};

/// Parts closer than this are reported as touching.
pub const TOUCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumPart {
    pub n: usize,
    pub kind: SpectralKind,
    pub branch: BranchInterval,
    /// Sorted; points are zero-length intervals.
    pub intervals: Vec<Interval>,
}

impl SpectrumPart {
    pub fn hull(&self) -> Interval {
        let lo = self.intervals.first().map_or(self.branch.lo, |i| i.lo);
        let hi = self.intervals.iter().map(|i| i.hi).fold(f64::NEG_INFINITY, f64::max);
        Interval::new(lo, hi)
    }

    pub fn measure(&self) -> f64 {
        match self.kind {
            SpectralKind::PurePoint => 0.0,
            SpectralKind::AbsolutelyContinuous => sets::total_length(&self.intervals),
        }
    }
}

/// Open interval between the hulls of `σ_{n-1}` and `σ_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gap {
    pub lo: f64,
    pub hi: f64,
    /// `n²`, the Dirichlet energy separating the two branches.
    pub dirichlet: f64,
    pub touching: bool,
}

impl Gap {
    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn strictly_contains(&self, z: f64) -> bool {
        self.lo < z && z < self.hi
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphSpectrum {
    pub gamma: f64,
    pub dirichlet_points: Vec<f64>,
    pub parts: Vec<SpectrumPart>,
    pub gaps: Vec<Gap>,
    /// The spectrum of the dual operator the parts were mapped from.
    pub discrete: BandSet,
    pub norm_bound: f64,
}

impl GraphSpectrum {
    pub fn kind(&self) -> SpectralKind {
        self.discrete.kind
    }

    /// Distance from `z` to the union of all parts and the Dirichlet points.
    pub fn distance(&self, z: f64) -> f64 {
        let d_parts = self
            .parts
            .iter()
            .map(|p| sets::distance_to_union(z, &p.intervals))
            .fold(f64::INFINITY, f64::min);
        let d_points = self
            .dirichlet_points
            .iter()
            .map(|&x| (z - x).abs())
            .fold(f64::INFINITY, f64::min);
        d_parts.min(d_points)
    }

    pub fn contains(&self, z: f64, tol: f64) -> bool {
        self.distance(z) <= tol
    }

    pub fn total_measure(&self) -> f64 {
        self.parts.iter().map(SpectrumPart::measure).sum()
    }

    /// Index of the part nearest to `z`.
    pub fn nearest_part(&self, z: f64) -> Option<usize> {
        self.parts
            .iter()
            .enumerate()
            .map(|(k, p)| (k, sets::distance_to_union(z, &p.intervals)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(k, _)| k)
    }
}

/// Spectrum of the dual operator for a rational linear or periodic profile.
///
/// An explicit profile is finite, so its eigenvalues on the declared range
/// (hard cutoff) stand in as a truncation approximation.
pub fn discrete_spectrum(profile: &FieldProfile) -> Result<(BandSet, CoefficientWindow)> {
    if let Some((lo, hi)) = profile.declared_range() {
        let window = evaluate_profile(profile, lo, hi)?;
        let mut points = jacobi::eigenvalues(&jacobi::truncate(&window, lo, hi)?);
        points.dedup_by(|b, a| (*b - *a).abs() <= 1e-9);
        let set = BandSet {
            kind: SpectralKind::PurePoint,
            intervals: points.into_iter().map(Interval::point).collect(),
        };
        return Ok((set, window));
    }
    let window = evaluate_period(profile)?;
    Ok((periodic_spectrum(&window)?, window))
}

/// Map a discrete band set onto every branch `I_0, ..., I_{n_max}`.
pub fn assemble_from(discrete: BandSet, bound: f64, gamma: f64, n_max: usize) -> Result<GraphSpectrum> {
    let branches = branch_intervals(gamma, n_max)?;
    let mut parts = Vec::with_capacity(branches.len());
    for b in &branches {
        let mut intervals: Vec<Interval> = discrete
            .intervals
            .iter()
            .map(|i| {
                let x = b.inverse(i.lo, gamma);
                if i.is_point() {
                    return Interval::point(x);
                }
                let y = b.inverse(i.hi, gamma);
                Interval::new(x.min(y), x.max(y))
            })
            .collect();
        intervals.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        parts.push(SpectrumPart {
            n: b.n,
            kind: discrete.kind,
            branch: *b,
            intervals,
        });
    }
    let gaps = parts
        .windows(2)
        .map(|w| {
            let lo = w[0].hull().hi;
            let hi = w[1].hull().lo;
            Gap {
                lo,
                hi: hi.max(lo),
                dirichlet: (w[1].n * w[1].n) as f64,
                touching: hi - lo <= TOUCH_TOL,
            }
        })
        .collect();
    Ok(GraphSpectrum {
        gamma,
        dirichlet_points: (1..=n_max).map(|n| (n * n) as f64).collect(),
        parts,
        gaps,
        discrete,
        norm_bound: bound,
    })
}

/// `σ(-Δ)` below the top of `I_{n_max}` for a rational linear or periodic profile.
pub fn assemble(profile: &FieldProfile, gamma: f64, n_max: usize) -> Result<GraphSpectrum> {
    let (discrete, window) = discrete_spectrum(profile)?;
    assemble_from(discrete, norm_bound(&window), gamma, n_max)
}

/// Lebesgue measure of a band set (zero for point spectra).
pub fn total_measure(set: &BandSet) -> f64 {
    set.measure()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxDimension {
    pub dimension: f64,
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
}

/// Boxes `[kε, (k+1)ε)` meeting the union of `set`.
pub fn box_count(set: &[Interval], eps: f64) -> u64 {
    let mut ranges: Vec<(i64, i64)> = set
        .iter()
        .map(|i| ((i.lo / eps).floor() as i64, (i.hi / eps).floor() as i64))
        .collect();
    ranges.sort_unstable();
    let mut count = 0u64;
    let mut covered_to = i64::MIN;
    for (a, b) in ranges {
        let start = a.max(covered_to.saturating_add(1));
        if b >= start {
            count += (b - start + 1) as u64;
        }
        covered_to = covered_to.max(b);
    }
    count
}

/// Least-squares slope of `log N(ε)` against `log(1/ε)`.
///
/// Needs at least four scales spanning two decades. Constant counts give
/// slope zero, as for a finite point set.
pub fn box_dimension_estimate(set: &[Interval], scales: &[f64]) -> Result<BoxDimension> {
    if set.is_empty() {
        return Err(Error::Empty("box-counting set"));
    }
    if scales.len() < 4 {
        return Err(Error::DegenerateFit(format!(
            "need at least 4 scales, got {}",
            scales.len()
        )));
    }
    if scales.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::DegenerateFit("box widths must be positive".into()));
    }
    let max = scales.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = scales.iter().copied().fold(f64::INFINITY, f64::min);
    if (max / min).log10() < 2.0 - 1e-12 {
        return Err(Error::DegenerateFit("scales must span at least two decades".into()));
    }
    let pts: Vec<(f64, f64)> = scales
        .iter()
        .map(|&e| ((1.0 / e).ln(), (box_count(set, e) as f64).ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let residual = (pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum::<f64>() / n).sqrt();
    Ok(BoxDimension {
        dimension: slope,
        residual,
    })
}

/// Box widths `10^-1, ..., 10^-decades`.
pub fn decade_scales(decades: u32) -> Vec<f64> {
    (1..=decades as i32).map(|k| 10f64.powi(-k)).collect()
}

/// Reduced fractions `p/q ∈ [0, 1]` with `q ≤ q_max`, ordered by value then `q`.
pub fn farey(q_max: u32) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for q in 1..=i64::from(q_max) {
        for p in 0..=q {
            if p.gcd(&q) == 1 {
                out.push((p, q));
            }
        }
    }
    out.sort_by(|a, b| (a.0 * b.1).cmp(&(b.0 * a.1)).then(a.1.cmp(&b.1)));
    out
}

/// Convergents `1/2, 2/3, 3/5, 5/8, ...` of the golden mean `(√5 - 1)/2`.
pub fn golden_convergents(depth: usize) -> Vec<(i64, i64)> {
    let mut out = Vec::with_capacity(depth);
    let (mut a, mut b) = (1i64, 2i64);
    for _ in 0..depth {
        out.push((a, b));
        let next = a + b;
        a = b;
        b = next;
    }
    out
}

/// Continued-fraction convergents `p_k/q_k` of `x ∈ (0, 1)` with `q_k ≥ 2`.
pub fn convergents(x: f64, depth: usize) -> Vec<(i64, i64)> {
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut r = x;
    let mut out = Vec::new();
    while out.len() < depth {
        let a = r.floor();
        let Some(h) = (a as i64).checked_mul(h1).and_then(|v| v.checked_add(h0)) else {
            break;
        };
        let Some(k) = (a as i64).checked_mul(k1).and_then(|v| v.checked_add(k0)) else {
            break;
        };
        (h0, h1) = (h1, h);
        (k0, k1) = (k1, k);
        if k >= 2 {
            out.push((h, k));
        }
        let f = r - a;
        if f.abs() < 1e-15 {
            break;
        }
        r = 1.0 / f;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coordinates {
    Discrete,
    Graph,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ButterflyRow {
    pub p: i64,
    pub q: i64,
    pub theta: Scalar,
    /// Branch index; absent in discrete coordinates.
    pub n: Option<usize>,
    pub lo: f64,
    pub hi: f64,
    pub kind: SpectralKind,
}

/// Spectra over all reduced `p/q` with `q ≤ q_max`, one row per band or point.
///
/// Rows are ordered by `p/q`, then `θ` in the given order, then `n`, then `lo`.
pub fn butterfly(
    q_max: u32,
    thetas: &[Scalar],
    gamma: f64,
    coordinates: Coordinates,
    n_max: usize,
) -> Result<Vec<ButterflyRow>> {
    if q_max == 0 {
        return Err(Error::Precondition("q_max must be at least 1".into()));
    }
    let jobs: Vec<((i64, i64), Scalar)> = farey(q_max)
        .into_iter()
        .flat_map(|f| thetas.iter().map(move |&t| (f, t)))
        .collect();
    let blocks: Vec<Result<Vec<ButterflyRow>>> = jobs
        .par_iter()
        .map(|&((p, q), theta)| {
            let profile = FieldProfile::linear(Scalar::ratio(p, q), theta);
            let (discrete, window) = discrete_spectrum(&profile)?;
            let kind = discrete.kind;
            let row = |n: Option<usize>, i: &Interval| ButterflyRow {
                p,
                q,
                theta,
                n,
                lo: i.lo,
                hi: i.hi,
                kind,
            };
            Ok(match coordinates {
                Coordinates::Discrete => discrete.intervals.iter().map(|i| row(None, i)).collect(),
                Coordinates::Graph => {
                    let g = assemble_from(discrete, norm_bound(&window), gamma, n_max)?;
                    g.parts
                        .iter()
                        .flat_map(|part| part.intervals.iter().map(|i| row(Some(part.n), i)).collect::<Vec<_>>())
                        .collect()
                }
            })
        })
        .collect();
    let mut rows = Vec::new();
    for b in blocks {
        rows.extend(b?);
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureRow {
    pub p: i64,
    pub q: i64,
    pub total_measure: f64,
    pub box_dimension: f64,
}

/// Total band measure and box dimension of `σ(L)` at each `α = p/q`.
pub fn measure_table(alphas: &[(i64, i64)], theta: Scalar, scales: &[f64]) -> Result<Vec<MeasureRow>> {
    alphas
        .par_iter()
        .map(|&(p, q)| {
            let (set, _) = discrete_spectrum(&FieldProfile::linear(Scalar::ratio(p, q), theta))?;
            let dim = box_dimension_estimate(&set.intervals, scales)?;
            Ok(MeasureRow {
                p,
                q,
                total_measure: set.measure(),
                box_dimension: dim.dimension,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eta::eta;
    use crate::profile::degenerate_flux_check;
    use approx::assert_abs_diff_eq;

    #[test]
    fn free_chain_fills_half_line() {
        let g = assemble(&FieldProfile::rational(0, 1, 0, 1), 0.0, 3).unwrap();
        assert_eq!(g.parts[0].intervals, vec![Interval::new(0.0, 1.0)]);
        for n in 1..=3 {
            let i = g.parts[n].intervals[0];
            assert_abs_diff_eq!(i.lo, (n * n) as f64, epsilon = 1e-12);
            assert_abs_diff_eq!(i.hi, ((n + 1) * (n + 1)) as f64, epsilon = 1e-12);
        }
        assert!(g.gaps.iter().all(|gap| gap.touching));
    }

    #[test]
    fn half_flux_gives_points() {
        let g = assemble(&FieldProfile::rational(1, 2, 1, 2), 1.0, 3).unwrap();
        for p in &g.parts {
            assert_eq!(p.kind, SpectralKind::PurePoint);
            assert_eq!(p.intervals.len(), 2);
            for i in &p.intervals {
                assert!(i.is_point() && p.branch.contains(i.lo));
            }
        }
        assert_eq!(g.total_measure(), 0.0);
    }

    #[test]
    fn third_flux_bands_and_gaps() {
        let g = assemble(&FieldProfile::rational(1, 3, 0, 1), 1.0, 3).unwrap();
        assert_abs_diff_eq!(g.norm_bound, 3.0, epsilon = 1e-14);
        for p in &g.parts {
            assert_eq!(p.intervals.len(), 3);
            for i in &p.intervals {
                assert!(p.branch.contains(i.lo) && p.branch.contains(i.hi));
            }
        }
        for (k, gap) in g.gaps.iter().enumerate() {
            assert_eq!(gap.dirichlet, ((k + 1) * (k + 1)) as f64);
            assert!(gap.strictly_contains(gap.dirichlet));
        }
    }

    #[test]
    fn zero_energy_criterion() {
        for (p, q, tn, td) in [(1, 3, 0, 1), (1, 2, 1, 2), (2, 5, 1, 7), (0, 1, 0, 1)] {
            let prof = FieldProfile::rational(p, q, tn, td);
            for gamma in [-2.0, -8.0 / std::f64::consts::PI, -1.0, -0.3, 0.0, 0.5] {
                let g = assemble(&prof, gamma, 1).unwrap();
                let lhs = g.contains(0.0, 1e-9);
                let rhs = g.discrete.contains(eta(0.0, gamma), 1e-9);
                assert_eq!(lhs, rhs, "{p}/{q} gamma {gamma}");
            }
        }
    }

    #[test]
    fn kind_follows_exact_dichotomy() {
        for (p, q) in farey(6) {
            for (tn, td) in [(0, 1), (1, 2), (1, 3), (1, 2 * q), (123, 1000)] {
                let prof = FieldProfile::rational(p, q, tn, td);
                let g = assemble(&prof, 0.7, 1).unwrap();
                let degenerate = degenerate_flux_check(&prof).unwrap().is_some();
                let want = if degenerate {
                    SpectralKind::PurePoint
                } else {
                    SpectralKind::AbsolutelyContinuous
                };
                assert_eq!(g.kind(), want);
                assert_eq!(g.discrete.len(), q as usize);
            }
        }
    }

    #[test]
    fn explicit_profile_uses_its_section() {
        let p = FieldProfile::explicit(0, vec![Scalar::integer(0); 3]).unwrap();
        let (set, _) = discrete_spectrum(&p).unwrap();
        let pts = set.points();
        assert_eq!(pts.len(), 3);
        assert_abs_diff_eq!(pts[0], -2.0 * 2f64.sqrt(), epsilon = 1e-10);
        assert_abs_diff_eq!(pts[1], 0.0, epsilon = 1e-10);
    }

    #[test]
    fn box_counts() {
        let s = [Interval::new(-4.0, 4.0)];
        assert_eq!(box_count(&s, 1.0), 9);
        let d = box_dimension_estimate(&s, &[1.0, 0.1, 0.01, 0.001]).unwrap();
        assert!((d.dimension - 1.0).abs() <= 0.05);
        let pts: Vec<Interval> = [-1.0, 0.3, 2.0].into_iter().map(Interval::point).collect();
        let d = box_dimension_estimate(&pts, &decade_scales(5)).unwrap();
        assert!(d.dimension.abs() <= 0.05);
        assert!(box_dimension_estimate(&s, &[1.0, 0.1, 0.05]).is_err());
        assert!(box_dimension_estimate(&s, &[1.0, 0.5, 0.2, 0.1]).is_err());
        assert!(box_dimension_estimate(&[], &decade_scales(4)).is_err());
    }

    #[test]
    fn overlapping_boxes_counted_once() {
        let s = [Interval::new(0.0, 0.5), Interval::new(0.2, 0.7), Interval::point(0.9)];
        assert_eq!(box_count(&s, 0.1), 8);
    }

    #[test]
    fn fractions() {
        assert_eq!(farey(1), vec![(0, 1), (1, 1)]);
        assert_eq!(farey(3), vec![(0, 1), (1, 3), (1, 2), (2, 3), (1, 1)]);
        assert_eq!(
            golden_convergents(6),
            vec![(1, 2), (2, 3), (3, 5), (5, 8), (8, 13), (13, 21)]
        );
        let g = (5f64.sqrt() - 1.0) / 2.0;
        assert_eq!(convergents(g, 6), golden_convergents(6));
        assert_eq!(convergents(std::f64::consts::PI - 3.0, 2), vec![(1, 7), (15, 106)]);
    }

    #[test]
    fn butterfly_row_counts() {
        let rows = butterfly(8, &[Scalar::integer(0)], 0.0, Coordinates::Discrete, 0).unwrap();
        let want: i64 = farey(8).iter().map(|f| f.1).sum();
        assert_eq!(rows.len() as i64, want);
        let half: Vec<_> = rows.iter().filter(|r| (r.p, r.q) == (1, 2)).collect();
        assert!(half.iter().all(|r| r.kind == SpectralKind::PurePoint));
        assert_abs_diff_eq!(half[0].lo, -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(half[1].lo, 2.0, epsilon = 1e-12);
        let ends: Vec<_> = rows.iter().filter(|r| r.q == 1).collect();
        assert_eq!(ends.len(), 2);
        for r in ends {
            assert_abs_diff_eq!(r.lo, -4.0, epsilon = 1e-12);
            assert_abs_diff_eq!(r.hi, 4.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn butterfly_graph_rows_stay_in_branches() {
        let rows = butterfly(4, &[Scalar::ratio(1, 5)], 1.0, Coordinates::Graph, 2).unwrap();
        let br = branch_intervals(1.0, 2).unwrap();
        for r in &rows {
            let b = &br[r.n.unwrap()];
            assert!(b.contains(r.lo) && b.contains(r.hi));
        }
    }
}
