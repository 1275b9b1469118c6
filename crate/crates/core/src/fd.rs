//! Finite-difference model of the gauge-transformed chain Hamiltonian and
//! checks of the loop eigenfunctions living at the Dirichlet energies.
//!
//! Each ring `j` carries an upper and a lower edge `(0, π)` with `M` interior
//! nodes. After the gauge transform the field only enters through the vertex
//! conditions
//!
//! ```text
//! ψ^U_j(0) = ψ^L_j(0) = e^{-iπA_{j-1}} ψ^U_{j-1}(π) = e^{iπA_{j-1}} ψ^L_{j-1}(π)
//! -e^{-iπA_{j-1}} ψ^U_{j-1}'(π) - e^{iπA_{j-1}} ψ^L_{j-1}'(π) + ψ^U_j'(0) + ψ^L_j'(0) = γ ψ_j(0)
//! ```
//!
//! which are built into the unknowns: the edge value at `π` is the phase times
//! the vertex unknown. The quadratic form `Σ ∫|ψ'|² + γ Σ |ψ(v)|²` is then
//! discretized elementwise, giving a Hermitian pencil `K w = E B w`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jacobi::bisect_all;
use crate::profile::FieldProfile;
use crate::scalar::Potential;
use crate::spectrum::GraphSpectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainBoundary {
    /// `R` rings on `R + 1` vertices; the end vertices keep their δ coupling
    /// with the missing edges dropped.
    Open,
    /// `R` rings closed into a cycle on `R` vertices.
    Necklace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stencil {
    /// Lumped mass: the three-point second difference, `O(h²)`.
    SecondDifference,
    /// Mass `(1, 10, 1) h/12`, the Numerov scheme, `O(h⁴)`.
    Numerov,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FdOptions {
    pub boundary: ChainBoundary,
    pub stencil: Stencil,
}

impl Default for FdOptions {
    fn default() -> Self {
        FdOptions {
            boundary: ChainBoundary::Open,
            stencil: Stencil::SecondDifference,
        }
    }
}

type Sparse = BTreeMap<(usize, usize), Complex64>;

#[derive(Debug, Clone)]
pub struct DiscretizedChain {
    pub rings: usize,
    pub points: usize,
    pub h: f64,
    pub gamma: f64,
    pub options: FdOptions,
    pub n_vertices: usize,
    /// Stiffness `K`, both triangles, indexed by unknown.
    pub stiffness: Sparse,
    /// Mass `B`, both triangles.
    pub mass: Sparse,
    /// Position of each unknown in the banded elimination order.
    slot: Vec<usize>,
    bandwidth: usize,
}

impl DiscretizedChain {
    pub fn dim(&self) -> usize {
        self.n_vertices + 2 * self.rings * self.points
    }

    /// Unknown index of vertex `v`.
    pub fn vertex_index(&self, v: usize) -> usize {
        v * (2 * self.points + 1)
    }

    /// Unknown index of interior node `m ∈ 1..=M` on the upper or lower edge of ring `j`.
    pub fn edge_index(&self, ring: usize, upper: bool, m: usize) -> usize {
        ring * (2 * self.points + 1) + 1 + 2 * (m - 1) + usize::from(!upper)
    }

    /// Every row of the pencil is the continuum equation multiplied by this.
    pub fn row_scaling(&self) -> f64 {
        self.h
    }

    /// `max |X_ab - conj(X_ba)|` over stiffness and mass.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut r: f64 = 0.0;
        for m in [&self.stiffness, &self.mass] {
            for (&(a, b), v) in m {
                let t = m.get(&(b, a)).copied().unwrap_or_default();
                r = r.max((v - t.conj()).norm());
            }
        }
        r
    }

    pub fn is_real(&self) -> bool {
        self.stiffness.values().chain(self.mass.values()).all(|v| v.im == 0.0)
    }

    pub fn dense(&self) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
        let n = self.dim();
        let mut k = DMatrix::zeros(n, n);
        let mut b = DMatrix::zeros(n, n);
        for (&(i, j), v) in &self.stiffness {
            k[(i, j)] = *v;
        }
        for (&(i, j), v) in &self.mass {
            b[(i, j)] = *v;
        }
        (k, b)
    }

    /// Number of eigenvalues of the pencil strictly below `e`, by the inertia
    /// of `K - eB` from a banded `LDLᴴ` factorization.
    pub fn count_below(&self, e: f64) -> usize {
        let n = self.dim();
        let bw = self.bandwidth;
        // band[i][d] = (K - eB)[i][i - d] in slot order.
        let mut band = vec![vec![Complex64::default(); bw + 1]; n];
        for (&(a, b), v) in &self.stiffness {
            let (i, j) = (self.slot[a], self.slot[b]);
            if i >= j {
                band[i][i - j] += v;
            }
        }
        for (&(a, b), v) in &self.mass {
            let (i, j) = (self.slot[a], self.slot[b]);
            if i >= j {
                band[i][i - j] -= v * e;
            }
        }
        let scale = band.iter().map(|r| r[0].norm()).fold(1.0, f64::max);
        let guard = 1e-14 * scale;
        let mut l = vec![vec![Complex64::default(); bw + 1]; n];
        let mut d = vec![0.0f64; n];
        let mut count = 0;
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..i {
                let mut s = band[i][i - j];
                for k in j0.max(j.saturating_sub(bw))..j {
                    s -= l[i][i - k] * d[k] * l[j][j - k].conj();
                }
                l[i][i - j] = s / d[j];
            }
            let mut di = band[i][0].re;
            for k in j0..i {
                di -= l[i][i - k].norm_sqr() * d[k];
            }
            if di.abs() < guard {
                di = if di < 0.0 { -guard } else { guard };
            }
            if di < 0.0 {
                count += 1;
            }
            d[i] = di;
        }
        count
    }
}

fn add(m: &mut Sparse, a: usize, b: usize, v: Complex64) {
    *m.entry((a, b)).or_default() += v;
}

/// One element between nodes `a` and `b` whose edge values are `ca w_a` and
/// `cb w_b`.
fn add_element(m: &mut Sparse, a: usize, ca: Complex64, b: usize, cb: Complex64, diag: f64, off: f64) {
    add(m, a, a, Complex64::from(diag * ca.norm_sqr()));
    add(m, b, b, Complex64::from(diag * cb.norm_sqr()));
    if off != 0.0 {
        add(m, a, b, ca.conj() * cb * off);
        add(m, b, a, cb.conj() * ca * off);
    }
}

/// Bandwidth-preserving order for a cycle: interleave the two halves so that
/// neighbours at cyclic distance `d` land at most `2d + 1` apart.
fn fold_order(n: usize) -> Vec<usize> {
    (0..n)
        .map(|i| if 2 * i < n { 2 * i } else { 2 * (n - 1 - i) + 1 })
        .collect()
}

pub fn assemble_fd(profile: &FieldProfile, gamma: f64, rings: usize, points: usize) -> Result<DiscretizedChain> {
    assemble_fd_with(profile, gamma, rings, points, FdOptions::default())
}

pub fn assemble_fd_with(
    profile: &FieldProfile,
    gamma: f64,
    rings: usize,
    points: usize,
    options: FdOptions,
) -> Result<DiscretizedChain> {
    if rings < 2 {
        return Err(Error::Precondition(format!("need at least 2 rings, got {rings}")));
    }
    if points < 8 {
        return Err(Error::Precondition(format!(
            "need at least 8 points per edge, got {points}"
        )));
    }
    if !gamma.is_finite() {
        return Err(Error::Precondition("gamma must be finite".into()));
    }
    let h = std::f64::consts::PI / (points + 1) as f64;
    let n_vertices = match options.boundary {
        ChainBoundary::Open => rings + 1,
        ChainBoundary::Necklace => rings,
    };
    let (mass_diag, mass_off) = match options.stencil {
        Stencil::SecondDifference => (h / 2.0, 0.0),
        Stencil::Numerov => (5.0 * h / 12.0, h / 12.0),
    };
    let mut chain = DiscretizedChain {
        rings,
        points,
        h,
        gamma,
        options,
        n_vertices,
        stiffness: Sparse::new(),
        mass: Sparse::new(),
        slot: Vec::new(),
        bandwidth: 0,
    };
    let one = Complex64::new(1.0, 0.0);
    for j in 0..rings {
        let phase = profile.potential(j as i64)?.phase();
        let start = chain.vertex_index(j);
        let end = chain.vertex_index((j + 1) % n_vertices);
        for upper in [true, false] {
            let end_phase = if upper { phase } else { phase.conj() };
            let mut nodes = Vec::with_capacity(points + 2);
            nodes.push((start, one));
            nodes.extend((1..=points).map(|m| (chain.edge_index(j, upper, m), one)));
            nodes.push((end, end_phase));
            for w in nodes.windows(2) {
                let ((a, ca), (b, cb)) = (w[0], w[1]);
                add_element(&mut chain.stiffness, a, ca, b, cb, 1.0 / h, -1.0 / h);
                add_element(&mut chain.mass, a, ca, b, cb, mass_diag, mass_off);
            }
        }
    }
    for v in 0..n_vertices {
        let i = chain.vertex_index(v);
        add(&mut chain.stiffness, i, i, Complex64::from(gamma));
    }
    // The natural order runs along the chain with neighbours at most two
    // apart; the cycle is folded so the wrap-around stays banded too.
    let n = chain.dim();
    match options.boundary {
        ChainBoundary::Open => {
            chain.slot = (0..n).collect();
            chain.bandwidth = 2;
        }
        ChainBoundary::Necklace => {
            chain.slot = fold_order(n);
            chain.bandwidth = 5;
        }
    }
    debug_assert!(chain
        .stiffness
        .keys()
        .chain(chain.mass.keys())
        .all(|&(a, b)| chain.slot[a].abs_diff(chain.slot[b]) <= chain.bandwidth));
    Ok(chain)
}

/// All pencil eigenvalues `≤ e_max`, ascending, with multiplicity.
pub fn fd_eigenvalues(chain: &DiscretizedChain, e_max: f64) -> Result<Vec<f64>> {
    if !(e_max > 0.0 && e_max.is_finite()) {
        return Err(Error::Precondition("e_max must be positive".into()));
    }
    let mut lo = -1.0;
    while chain.count_below(lo) > 0 {
        lo *= 2.0;
        if lo < -1e12 {
            return Err(Error::Bracketing("no lower bound for the discrete spectrum".into()));
        }
    }
    let hi = e_max * (1.0 + 1e-12);
    let c_hi = chain.count_below(hi);
    let tol = 1e-12 * e_max.max(1.0);
    Ok(bisect_all(|e| chain.count_below(e), lo, hi, 0, c_hi, tol))
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub max_distance: f64,
    pub mean_distance: f64,
    pub n_eigs: usize,
    /// Eigenvalues whose nearest piece of spectrum is `σ_n`, indexed by `n`.
    pub per_branch_counts: Vec<usize>,
    /// Eigenvalues nearer to a Dirichlet energy `n²` than to any `σ_n`.
    pub dirichlet_count: usize,
    pub tol: f64,
    pub pass: bool,
}

pub fn compare_to_prediction(eigs: &[f64], predicted: &GraphSpectrum, tol: f64) -> Result<VerificationReport> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Precondition("tolerance must be positive".into()));
    }
    if eigs.is_empty() {
        return Err(Error::Empty("eigenvalue list"));
    }
    if predicted.parts.is_empty() {
        return Err(Error::Empty("predicted spectrum"));
    }
    let mut counts = vec![0usize; predicted.parts.len()];
    let mut dirichlet = 0;
    let mut max: f64 = 0.0;
    let mut sum = 0.0;
    for &e in eigs {
        let d = predicted.distance(e);
        max = max.max(d);
        sum += d;
        let k = predicted.nearest_part(e).unwrap_or(0);
        let d_part = crate::sets::distance_to_union(e, &predicted.parts[k].intervals);
        if d_part > d {
            dirichlet += 1;
        } else {
            counts[predicted.parts[k].n] += 1;
        }
    }
    Ok(VerificationReport {
        max_distance: max,
        mean_distance: sum / eigs.len() as f64,
        n_eigs: eigs.len(),
        per_branch_counts: counts,
        dirichlet_count: dirichlet,
        tol,
        pass: max <= tol,
    })
}

/// Which loop eigenfunction at energy `k²` to build around ring `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopCase {
    /// Supported on ring `j`; needs `A_j ∈ ℤ`.
    IntegerFlux(i64),
    /// Supported on rings `j - 1` and `j`; needs `A_{j-1}, A_j ∉ ℤ`.
    GenericFlux(i64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    /// Largest mismatch among the four gauge-adjusted edge values at a vertex.
    pub continuity: f64,
    /// Largest defect of the derivative condition.
    pub delta_balance: f64,
    /// Largest `|-ψ'' - k²ψ|` over interior samples.
    pub ode: f64,
    /// Largest `|ψ|` over the samples, to rule out the zero function.
    pub amplitude: f64,
}

/// `c · s(x - shift·π; k²)` on one edge.
#[derive(Debug, Clone, Copy)]
struct EdgeWave {
    c: Complex64,
    shift: f64,
}

impl EdgeWave {
    fn value(&self, k: f64, x: f64) -> Complex64 {
        self.c * ((k * (x - self.shift)).sin() / k)
    }

    fn derivative(&self, k: f64, x: f64) -> Complex64 {
        self.c * (k * (x - self.shift)).cos()
    }

    fn second_derivative(&self, k: f64, x: f64) -> Complex64 {
        self.c * (-k * (k * (x - self.shift)).sin())
    }
}

/// Residuals of the explicit eigenfunction at energy `k²` in the vertex
/// conditions and the edge equation, all evaluated analytically.
pub fn loop_state_residual(k: u32, case: LoopCase, profile: &FieldProfile, gamma: f64) -> Result<ResidualReport> {
    if k == 0 {
        return Err(Error::Precondition("k must be positive".into()));
    }
    let kf = f64::from(k);
    let pi = std::f64::consts::PI;
    let zero = Complex64::default();
    // ring -> (upper, lower, A_ring)
    let mut support: BTreeMap<i64, (EdgeWave, EdgeWave, Potential)> = BTreeMap::new();
    match case {
        LoopCase::IntegerFlux(j) => {
            let a = profile.potential(j)?;
            if !a.is_integer() {
                return Err(Error::Precondition(format!("A_{j} is not an integer")));
            }
            let u = EdgeWave {
                c: Complex64::new(1.0, 0.0),
                shift: 0.0,
            };
            let l = EdgeWave {
                c: Complex64::new(-1.0, 0.0),
                shift: 0.0,
            };
            support.insert(j, (u, l, a));
        }
        LoopCase::GenericFlux(j) => {
            let a_prev = profile.potential(j - 1)?;
            let a = profile.potential(j)?;
            if a_prev.is_integer() || a.is_integer() {
                return Err(Error::Precondition(format!("A_{} or A_{j} is an integer", j - 1)));
            }
            let (s_prev, s) = (a_prev.sin_pi(), a.sin_pi());
            let ph = a.phase();
            support.insert(
                j - 1,
                (
                    EdgeWave {
                        c: Complex64::from(s),
                        shift: 0.0,
                    },
                    EdgeWave {
                        c: Complex64::from(-s),
                        shift: 0.0,
                    },
                    a_prev,
                ),
            );
            support.insert(
                j,
                (
                    EdgeWave {
                        c: -s_prev * ph,
                        shift: pi,
                    },
                    EdgeWave {
                        c: s_prev * ph.conj(),
                        shift: pi,
                    },
                    a,
                ),
            );
        }
    }
    let first = *support.keys().next().unwrap();
    let last = *support.keys().last().unwrap();
    let mut report = ResidualReport {
        continuity: 0.0,
        delta_balance: 0.0,
        ode: 0.0,
        amplitude: 0.0,
    };
    // Vertex v joins the end of ring v-1 to the start of ring v.
    for v in first..=last + 1 {
        let (mut vals, mut flux) = (Vec::with_capacity(4), zero);
        let mut psi0 = zero;
        if let Some((u, l, _)) = support.get(&v) {
            psi0 = u.value(kf, 0.0);
            vals.push(psi0);
            vals.push(l.value(kf, 0.0));
            flux += u.derivative(kf, 0.0) + l.derivative(kf, 0.0);
        } else {
            vals.extend([zero, zero]);
        }
        if let Some((u, l, a)) = support.get(&(v - 1)) {
            let ph = a.phase();
            vals.push(ph.conj() * u.value(kf, pi));
            vals.push(ph * l.value(kf, pi));
            flux -= ph.conj() * u.derivative(kf, pi) + ph * l.derivative(kf, pi);
        } else {
            vals.extend([zero, zero]);
        }
        for x in &vals[1..] {
            report.continuity = report.continuity.max((x - vals[0]).norm());
        }
        report.delta_balance = report.delta_balance.max((flux - gamma * psi0).norm());
    }
    for (u, l, _) in support.values() {
        for i in 1..64 {
            let x = pi * f64::from(i) / 64.0;
            for w in [u, l] {
                let r = -w.second_derivative(kf, x) - kf * kf * w.value(kf, x);
                report.ode = report.ode.max(r.norm());
                report.amplitude = report.amplitude.max(w.value(kf, x).norm());
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;
    use crate::spectrum::assemble;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Generalized eigenvalues by Cholesky reduction and a dense Hermitian solve.
    fn dense_eigs(chain: &DiscretizedChain) -> Vec<f64> {
        let (k, b) = chain.dense();
        let l = b.cholesky().expect("mass matrix is positive definite").l();
        let li = l.clone().try_inverse().unwrap();
        let a = &li * k * li.adjoint();
        let a = (&a + a.adjoint()) * Complex64::from(0.5);
        let mut e: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    fn random_profile(rng: &mut ChaCha8Rng) -> FieldProfile {
        FieldProfile::linear(
            Scalar::Real(rng.gen_range(0.0..1.0)),
            Scalar::Real(rng.gen_range(0.0..1.0)),
        )
    }

    #[test]
    fn free_chain_dimension_and_symmetry() {
        let c = assemble_fd(&FieldProfile::rational(0, 1, 0, 1), 0.0, 2, 8).unwrap();
        assert_eq!(c.dim(), 35);
        assert!(c.is_real());
        assert_eq!(c.hermiticity_residual(), 0.0);
    }

    #[test]
    fn rejects_small_sizes() {
        let p = FieldProfile::rational(0, 1, 0, 1);
        assert!(assemble_fd(&p, 0.0, 1, 8).is_err());
        assert!(assemble_fd(&p, 0.0, 2, 7).is_err());
    }

    #[test]
    fn hermitian_for_random_fields() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let p = random_profile(&mut rng);
            let gamma = rng.gen_range(-3.0..3.0);
            for boundary in [ChainBoundary::Open, ChainBoundary::Necklace] {
                for stencil in [Stencil::SecondDifference, Stencil::Numerov] {
                    let c = assemble_fd_with(&p, gamma, 4, 9, FdOptions { boundary, stencil }).unwrap();
                    assert!(c.hermiticity_residual() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn half_integer_field_has_imaginary_couplings() {
        let p = FieldProfile::rational(0, 1, 1, 2);
        let c = assemble_fd(&p, 1.0, 3, 8).unwrap();
        assert!(!c.is_real());
        let end = c.edge_index(0, true, 8);
        let v = c.vertex_index(1);
        let e = c.stiffness[&(end, v)] * c.h;
        assert!((e - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert!(c.hermiticity_residual() < 1e-14);
    }

    #[test]
    fn inertia_matches_dense_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..6 {
            let p = random_profile(&mut rng);
            let gamma = rng.gen_range(-2.0..2.0);
            for boundary in [ChainBoundary::Open, ChainBoundary::Necklace] {
                for stencil in [Stencil::SecondDifference, Stencil::Numerov] {
                    let c = assemble_fd_with(&p, gamma, 3, 10, FdOptions { boundary, stencil }).unwrap();
                    let dense = dense_eigs(&c);
                    let ours = fd_eigenvalues(&c, 30.0).unwrap();
                    let below: Vec<f64> = dense.iter().copied().filter(|&e| e <= 30.0).collect();
                    assert_eq!(ours.len(), below.len());
                    for (a, b) in ours.iter().zip(&below) {
                        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn free_ground_state() {
        let c = assemble_fd(&FieldProfile::rational(0, 1, 0, 1), 0.0, 2, 64).unwrap();
        let e = fd_eigenvalues(&c, 1.0).unwrap();
        assert!(e[0].abs() < 5e-3);
    }

    #[test]
    fn count_grows_with_rings() {
        let p = FieldProfile::rational(1, 3, 0, 1);
        let mut last = 0;
        for r in 2..8 {
            let c = assemble_fd(&p, 1.0, r, 12).unwrap();
            let n = fd_eigenvalues(&c, 10.0).unwrap().len();
            assert!(n >= last);
            last = n;
        }
    }

    #[test]
    fn integer_shifts_are_a_gauge() {
        let base = [0.13, 0.71, -0.4, 0.25, 0.9];
        let shift = [0.0, 3.0, -1.0, 2.0, 0.0];
        let a: Vec<Scalar> = base.iter().map(|&x| Scalar::Real(x)).collect();
        let b: Vec<Scalar> = base.iter().zip(&shift).map(|(&x, &s)| Scalar::Real(x + s)).collect();
        let pa = FieldProfile::explicit(0, a).unwrap();
        let pb = FieldProfile::explicit(0, b).unwrap();
        for boundary in [ChainBoundary::Open, ChainBoundary::Necklace] {
            let opt = FdOptions {
                boundary,
                stencil: Stencil::Numerov,
            };
            let ea = fd_eigenvalues(&assemble_fd_with(&pa, 0.6, 5, 16, opt).unwrap(), 20.0).unwrap();
            let eb = fd_eigenvalues(&assemble_fd_with(&pb, 0.6, 5, 16, opt).unwrap(), 20.0).unwrap();
            assert_eq!(ea.len(), eb.len());
            for (x, y) in ea.iter().zip(&eb) {
                assert!((x - y).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn decoupled_vertices_cluster_at_preimages_of_zero() {
        let p = FieldProfile::rational(0, 1, 1, 2);
        let opt = FdOptions {
            boundary: ChainBoundary::Necklace,
            stencil: Stencil::Numerov,
        };
        let c = assemble_fd_with(&p, 0.5, 4, 40, opt).unwrap();
        let eigs = fd_eigenvalues(&c, 15.0).unwrap();
        let predicted = assemble(&p, 0.5, 3).unwrap();
        let r = compare_to_prediction(&eigs, &predicted, 1e-3).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn comparison_examples() {
        let free = assemble(&FieldProfile::rational(0, 1, 0, 1), 0.0, 3).unwrap();
        let r = compare_to_prediction(&[0.0, 0.5, 3.3, 9.0, 15.9], &free, 1e-12).unwrap();
        assert_eq!(r.max_distance, 0.0);
        assert!(r.pass);

        let g = assemble(&FieldProfile::rational(1, 3, 0, 1), 1.0, 2).unwrap();
        let ends: Vec<f64> = g
            .parts
            .iter()
            .flat_map(|p| p.intervals.iter().flat_map(|i| [i.lo, i.hi]))
            .collect();
        let r = compare_to_prediction(&ends, &g, 1e-12).unwrap();
        assert_eq!(r.max_distance, 0.0);
        assert_eq!(r.per_branch_counts, vec![6, 6, 6]);

        assert!(compare_to_prediction(&[], &g, 1.0).is_err());
        assert!(compare_to_prediction(&[1.0], &g, 0.0).is_err());
    }

    #[test]
    fn loop_states() {
        let free = FieldProfile::rational(0, 1, 0, 1);
        let r = loop_state_residual(1, LoopCase::IntegerFlux(0), &free, 3.0).unwrap();
        assert!(r.continuity < 1e-12 && r.delta_balance < 1e-12 && r.ode < 1e-12);
        assert!(r.amplitude > 0.5);

        let p = FieldProfile::rational(1, 3, 1, 5);
        let r = loop_state_residual(2, LoopCase::GenericFlux(1), &p, 0.7).unwrap();
        assert!(r.continuity < 1e-12 && r.delta_balance < 1e-12 && r.ode < 1e-12);
        assert!(r.amplitude > 0.1);

        assert!(loop_state_residual(1, LoopCase::GenericFlux(0), &free, 0.0).is_err());
        assert!(loop_state_residual(1, LoopCase::IntegerFlux(1), &p, 0.0).is_err());
    }

    #[test]
    fn loop_states_are_fd_eigenvalues() {
        let p = FieldProfile::rational(1, 3, 1, 5);
        let opt = FdOptions {
            boundary: ChainBoundary::Necklace,
            stencil: Stencil::Numerov,
        };
        let c = assemble_fd_with(&p, 1.0, 6, 60, opt).unwrap();
        let e = fd_eigenvalues(&c, 10.0).unwrap();
        for k in [1.0f64, 2.0, 3.0] {
            let near = e.iter().filter(|&&x| (x - k * k).abs() < 1e-3).count();
            assert!(near >= 1);
        }
    }
}
