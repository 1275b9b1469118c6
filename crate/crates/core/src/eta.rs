//! The entire function `η(z) = γ sin(π√z)/√z + 4cos(π√z)` linking graph
//! energies to the spectrum of the dual Jacobi operator, its monotone branches
//! `I_n` and their inverses.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Below this `|z|` the series expansion is used.
const SERIES_CUTOFF: f64 = 1e-8;

/// Closest relative approach to the open ends of a branch window when sampling.
const EDGE_OFFSET: f64 = 1e-10;

const GRID_POINTS: usize = 4096;

/// Interior samples for the monotonicity check.
const MONOTONE_SAMPLES: usize = 128;

pub fn eta(z: f64, gamma: f64) -> f64 {
    if z.abs() <= SERIES_CUTOFF {
        let p2 = PI * PI;
        let sinc = PI * (1.0 - p2 * z / 6.0 + p2 * p2 * z * z / 120.0);
        let cos = 1.0 - p2 * z / 2.0 + p2 * p2 * z * z / 24.0;
        return gamma * sinc + 4.0 * cos;
    }
    if z > 0.0 {
        let r = z.sqrt();
        gamma * (PI * r).sin() / r + 4.0 * (PI * r).cos()
    } else {
        let k = (-z).sqrt();
        gamma * (PI * k).sinh() / k + 4.0 * (PI * k).cosh()
    }
}

/// Central difference with step `1e-6 · max(1, |z|)`; only its sign is relied on.
pub fn eta_derivative(z: f64, gamma: f64) -> f64 {
    let h = 1e-6 * z.abs().max(1.0);
    (eta(z + h, gamma) - eta(z - h, gamma)) / (2.0 * h)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaMap {
    pub gamma: f64,
}

impl EtaMap {
    pub fn new(gamma: f64) -> Self {
        EtaMap { gamma }
    }

    pub fn eval(&self, z: f64) -> f64 {
        eta(z, self.gamma)
    }

    pub fn derivative(&self, z: f64) -> f64 {
        eta_derivative(z, self.gamma)
    }

    pub fn branches(&self, n_max: usize) -> Result<Vec<BranchInterval>> {
        branch_intervals(self.gamma, n_max)
    }
}

/// `I_n`: the part of `η⁻¹([-4, 4])` in `(n², (n+1)²)` (or in `(-∞, 1)` for
/// `n = 0`), on which `η` is a monotone bijection onto `[-4, 4]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchInterval {
    pub n: usize,
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
    /// Sign of `η'` on the interior.
    pub increasing: bool,
}

impl BranchInterval {
    pub fn contains(&self, z: f64) -> bool {
        self.lo <= z && z <= self.hi
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    /// `η` at the lower and upper end of the closure.
    pub fn end_values(&self, gamma: f64) -> (f64, f64) {
        (eta(self.lo, gamma), eta(self.hi, gamma))
    }

    /// The unique `z` in the closure with `η(z) = λ`.
    pub fn inverse(&self, lambda: f64, gamma: f64) -> f64 {
        let (e_lo, e_hi) = self.end_values(gamma);
        if (lambda - e_lo).abs() <= 1e-12 {
            return self.lo;
        }
        if (lambda - e_hi).abs() <= 1e-12 {
            return self.hi;
        }
        let f = |z: f64| eta(z, gamma) - lambda;
        let (mut a, mut b) = (self.lo, self.hi);
        let mut fa = f(a);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let fm = f(m);
            if fm == 0.0 {
                return m;
            }
            if (fm < 0.0) == (fa < 0.0) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        let m = 0.5 * (a + b);
        if f(a).abs() < f(m).abs() {
            a
        } else if f(b).abs() < f(m).abs() {
            b
        } else {
            m
        }
    }
}

fn outside(z: f64, gamma: f64) -> f64 {
    eta(z, gamma).abs() - 4.0
}

fn bisect_boundary(gamma: f64, mut inside_z: f64, mut outside_z: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (inside_z + outside_z);
        if m == inside_z || m == outside_z {
            break;
        }
        if outside(m, gamma) <= 0.0 {
            inside_z = m;
        } else {
            outside_z = m;
        }
    }
    inside_z
}

/// Sample points in `(l, r)`: a uniform grid plus geometric clusters towards
/// both ends, and any `extra` points inside.
fn samples(l: f64, r: f64, extra: &[f64]) -> Vec<f64> {
    let w = r - l;
    let mut z: Vec<f64> = (1..GRID_POINTS)
        .map(|k| l + w * k as f64 / GRID_POINTS as f64)
        .collect();
    let mut off = 1.0 / GRID_POINTS as f64;
    while off > EDGE_OFFSET {
        off *= 0.5;
        z.push(l + w * off);
        z.push(r - w * off);
    }
    z.extend(extra.iter().copied().filter(|&x| x > l && x < r));
    z.sort_by(f64::total_cmp);
    z.dedup();
    z
}

/// The single run of samples with `|η| ≤ 4`, returned as sample indices.
fn inside_run(z: &[f64], inside: &[bool], gamma: f64, n: usize) -> Result<(usize, usize)> {
    let mut runs = Vec::new();
    let mut start = None;
    for (i, &ins) in inside.iter().enumerate() {
        match (ins, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                runs.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, z.len() - 1));
    }
    match runs.as_slice() {
        [one] => Ok(*one),
        _ => Err(Error::BranchShape {
            gamma,
            detail: format!("branch {n}: expected one interval of |eta| <= 4, found {}", runs.len()),
        }),
    }
}

fn branch_n(gamma: f64, n: usize) -> Result<BranchInterval> {
    let l = (n * n) as f64;
    let r = ((n + 1) * (n + 1)) as f64;
    if gamma == 0.0 {
        return Ok(BranchInterval {
            n,
            lo: l,
            hi: r,
            lo_closed: false,
            hi_closed: false,
            increasing: n % 2 == 1,
        });
    }
    let z = samples(l, r, &[]);
    let inside: Vec<bool> = z.iter().map(|&x| outside(x, gamma) <= 0.0).collect();
    let (s, e) = inside_run(&z, &inside, gamma, n)?;
    let (lo, lo_closed) = if s == 0 {
        (l, false)
    } else {
        (bisect_boundary(gamma, z[s], z[s - 1]), true)
    };
    let (hi, hi_closed) = if e == z.len() - 1 {
        (r, false)
    } else {
        (bisect_boundary(gamma, z[e], z[e + 1]), true)
    };
    let b = BranchInterval {
        n,
        lo,
        hi,
        lo_closed,
        hi_closed,
        increasing: n % 2 == 1,
    };
    // γ > 0 pushes η outside [-4, 4] just above n²; γ < 0 just below (n+1)².
    let shape_ok = if gamma > 0.0 {
        lo_closed && !hi_closed
    } else {
        !lo_closed && hi_closed
    };
    if !shape_ok {
        return Err(Error::BranchShape {
            gamma,
            detail: format!("branch {n} = [{lo}, {hi}] has the wrong end types"),
        });
    }
    Ok(b)
}

fn branch_zero(gamma: f64) -> Result<BranchInterval> {
    let cap = -(4.0 + gamma.abs()).powi(2);
    let mut z_lo = -1.0;
    while eta(z_lo, gamma) <= 4.0 {
        z_lo *= 2.0;
        if z_lo < cap {
            return Err(Error::Bracketing(format!(
                "eta stays <= 4 down to z = {cap} for gamma = {gamma}"
            )));
        }
    }
    let e0 = eta(0.0, gamma);
    let snap_lo = (e0 - 4.0).abs() <= 1e-12;
    let snap_hi = (e0 + 4.0).abs() <= 1e-12;
    let z = samples(z_lo, 1.0, &[0.0]);
    let inside: Vec<bool> = z
        .iter()
        .map(|&x| {
            if x == 0.0 && (snap_lo || snap_hi) {
                true
            } else {
                outside(x, gamma) <= 0.0
            }
        })
        .collect();
    let (s, e) = inside_run(&z, &inside, gamma, 0)?;
    if s == 0 {
        return Err(Error::BranchShape {
            gamma,
            detail: "branch 0 reaches the lower scan limit".into(),
        });
    }
    let mut lo = bisect_boundary(gamma, z[s], z[s - 1]);
    if snap_lo && z[s] == 0.0 {
        lo = 0.0;
    }
    let (mut hi, hi_closed) = if e == z.len() - 1 {
        (1.0, false)
    } else {
        (bisect_boundary(gamma, z[e], z[e + 1]), true)
    };
    if snap_hi && z[e] == 0.0 {
        hi = 0.0;
    }
    let b = BranchInterval {
        n: 0,
        lo,
        hi,
        lo_closed: true,
        hi_closed,
        increasing: false,
    };
    check_zero_shape(gamma, &b)?;
    Ok(b)
}

fn check_zero_shape(gamma: f64, b: &BranchInterval) -> Result<()> {
    let crit = -8.0 / PI;
    let bad = |detail: &str| {
        Err(Error::BranchShape {
            gamma,
            detail: format!("branch 0 = [{}, {}]: {detail}", b.lo, b.hi),
        })
    };
    let at_crit = (gamma - crit).abs() <= 1e-12;
    if gamma > 0.0 {
        if !(b.lo > 0.0 && b.lo < 1.0 && !b.hi_closed) {
            return bad("expected [a0, 1) with 0 < a0 < 1");
        }
    } else if gamma == 0.0 {
        if !(b.lo == 0.0 && !b.hi_closed) {
            return bad("expected [0, 1)");
        }
    } else if at_crit {
        if !(b.lo < 0.0 && b.hi == 0.0) {
            return bad("expected [a0, 0] with a0 < 0");
        }
    } else if gamma > crit {
        if !(b.lo < 0.0 && b.hi > 0.0 && b.hi < 1.0 && b.hi_closed) {
            return bad("expected [a0, b0] with a0 < 0 < b0 < 1");
        }
    } else if !(b.lo < b.hi && b.hi < 0.0) {
        return bad("expected [a0, b0] with a0 < b0 < 0");
    }
    let has_zero = b.contains(0.0);
    let should = gamma <= 0.0 && (gamma >= crit || at_crit);
    if has_zero != should {
        return bad("zero membership disagrees with the coupling regime");
    }
    Ok(())
}

fn check_monotone(gamma: f64, b: &mut BranchInterval) -> Result<()> {
    let w = b.hi - b.lo;
    let mut sign = 0.0;
    for k in 0..MONOTONE_SAMPLES {
        let z = b.lo + w * (k as f64 + 0.5) / MONOTONE_SAMPLES as f64;
        let d = eta_derivative(z, gamma);
        let s = d.signum();
        if d == 0.0 || (sign != 0.0 && s != sign) {
            return Err(Error::Monotonicity {
                n: b.n,
                lo: b.lo,
                hi: b.hi,
            });
        }
        sign = s;
    }
    b.increasing = sign > 0.0;
    Ok(())
}

/// `I_0, ..., I_{n_max}` with located endpoints, regime checks and a
/// monotonicity check on each interior.
pub fn branch_intervals(gamma: f64, n_max: usize) -> Result<Vec<BranchInterval>> {
    if !gamma.is_finite() {
        return Err(Error::Precondition("gamma must be finite".into()));
    }
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let mut b = if n == 0 {
            branch_zero(gamma)?
        } else {
            branch_n(gamma, n)?
        };
        check_monotone(gamma, &mut b)?;
        out.push(b);
    }
    Ok(out)
}

/// `(n, z)` with `z ∈ I_n` and `η(z) = λ`, for `n = 0..=n_max`.
pub fn preimage(lambda: f64, gamma: f64, n_max: usize) -> Result<Vec<(usize, f64)>> {
    if !(-4.0..=4.0).contains(&lambda) {
        return Err(Error::OutOfRange { value: lambda });
    }
    let branches = branch_intervals(gamma, n_max)?;
    Ok(branches.iter().map(|b| (b.n, b.inverse(lambda, gamma))).collect())
}
