//! Stability and convergence analysis of the APSO position recurrence.
//!
//! Eliminating velocity and acceleration from the APSO update leaves a
//! third-order linear recurrence per axis,
//!
//! ```text
//! x(k+1) = (1 + w1 + w2 - (r1 + r2)·T) x(k) - (w1 + w2 + w1·w2) x(k-1)
//!          + w1·w2 x(k-2) + T (r1 x_ib + r2 x_gb)
//! ```
//!
//! whose characteristic polynomial is `z³ + a1 z² + a2 z + a3`. Because
//! `r1 + r2` ranges over `[0, c1 + c2]`, only `a1` is uncertain, and it is
//! enough to check the two extreme polynomials at the ends of that
//! interval. [`jury_check`] does this twice: once with the closed-form
//! inequalities obtained from Jury's table, once numerically from the
//! companion-matrix eigenvalues, and reports any disagreement.
//!
//! The lower extreme factors as `(z - 1)(z - w1)(z - w2)`: with zero
//! cognitive gain every position is an equilibrium. That root sits on the
//! unit circle for every parameter choice, so the numerical check deflates
//! it and tests the remaining quadratic.

use std::fmt;

use nalgebra::{Complex, DMatrix, Schur};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Roots whose magnitude lies within this distance of 1 are treated as
/// marginal when comparing the closed-form verdict against the root oracle.
pub const BOUNDARY_BAND: f64 = 1e-9;

/// The conditions a verdict can fail. `C13`..`C16` are the closed-form Jury
/// inequalities; `RootOracle` flags a disagreement with the eigenvalue check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Condition {
    C13,
    C14,
    C15,
    C16,
    RootOracle,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Condition::C13 => "C13",
            Condition::C14 => "C14",
            Condition::C15 => "C15",
            Condition::C16 => "C16",
            Condition::RootOracle => "RootOracle",
        };
        f.write_str(s)
    }
}

/// Coefficients of `H(z) = 1 + a1 z⁻¹ + a2 z⁻² + a3 z⁻³`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThirdOrderCoeffs {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

impl ThirdOrderCoeffs {
    pub fn new(a1: f64, a2: f64, a3: f64) -> Self {
        Self { a1, a2, a3 }
    }

    pub fn is_finite(&self) -> bool {
        self.a1.is_finite() && self.a2.is_finite() && self.a3.is_finite()
    }
}

/// One evaluated inequality `lhs < rhs` (or `lhs > rhs` for C13).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionValue {
    pub condition: Condition,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub stable: bool,
    pub failed_conditions: Vec<Condition>,
    pub conditions: Vec<ConditionValue>,
    /// Root magnitudes of the lower extreme polynomial (includes the
    /// structural root at 1), sorted descending.
    pub lower_roots: Vec<f64>,
    /// Root magnitudes of the upper extreme polynomial, sorted descending.
    pub upper_roots: Vec<f64>,
    /// Verdict of the eigenvalue check alone.
    pub oracle_stable: bool,
    /// Smallest `| |root| - 1 |` over the roots the oracle inspects.
    pub boundary_distance: f64,
}

impl StabilityVerdict {
    pub fn condition(&self, c: Condition) -> Option<&ConditionValue> {
        self.conditions.iter().find(|v| v.condition == c)
    }

    /// Closed-form verdict alone (conditions C13..C16).
    pub fn closed_form_stable(&self) -> bool {
        self.conditions.iter().all(|c| c.satisfied)
    }
}

pub fn coeffs_from_params(w1: f64, w2: f64, r1: f64, r2: f64, t: f64) -> ThirdOrderCoeffs {
    ThirdOrderCoeffs {
        a1: -1.0 - w1 - w2 + r1 * t + r2 * t,
        a2: w1 + w2 + w1 * w2,
        a3: -w1 * w2,
    }
}

/// Closed-form Jury conditions for the interval family `a1 ∈ [a1l, a1u]`.
pub fn jury_conditions(w1: f64, w2: f64, c1: f64, c2: f64, t: f64) -> [ConditionValue; 4] {
    let p = w1 * w2;
    let s = w1 + w2;

    let c13_lhs = (2.0 / t) * (1.0 + s + p);
    let c13_rhs = c1 + c2;
    let c14_lhs = p.abs();
    let c15_lhs = ((1.0 - p) * s + p * (c1 * t + c2 * t)).abs();
    let c15_rhs = (1.0 - p * p).abs();
    let c16_lhs = s.abs();
    let c16_rhs = (1.0 + p).abs();

    [
        ConditionValue {
            condition: Condition::C13,
            lhs: c13_lhs,
            rhs: c13_rhs,
            satisfied: c13_lhs > c13_rhs,
        },
        ConditionValue {
            condition: Condition::C14,
            lhs: c14_lhs,
            rhs: 1.0,
            satisfied: c14_lhs < 1.0,
        },
        ConditionValue {
            condition: Condition::C15,
            lhs: c15_lhs,
            rhs: c15_rhs,
            satisfied: c15_lhs < c15_rhs,
        },
        ConditionValue {
            condition: Condition::C16,
            lhs: c16_lhs,
            rhs: c16_rhs,
            satisfied: c16_lhs < c16_rhs,
        },
    ]
}

/// Full stability verdict: closed-form conditions plus the root oracle on
/// both extreme polynomials.
pub fn jury_check(w1: f64, w2: f64, c1: f64, c2: f64, t: f64) -> StabilityVerdict {
    let conditions = jury_conditions(w1, w2, c1, c2, t);
    let mut failed: Vec<Condition> = conditions
        .iter()
        .filter(|c| !c.satisfied)
        .map(|c| c.condition)
        .collect();
    let closed_stable = failed.is_empty();

    let lower = coeffs_from_params(w1, w2, 0.0, 0.0, t);
    let upper = ThirdOrderCoeffs {
        a1: lower.a1 + t * (c1 + c2),
        ..lower
    };

    let lower_roots = root_magnitudes(&lower);
    let upper_roots = root_magnitudes(&upper);
    let deflated = deflated_lower_magnitudes(&lower);

    let inspected = deflated.iter().chain(upper_roots.iter());
    let oracle_stable = inspected.clone().all(|&m| m < 1.0);
    let boundary_distance = inspected
        .map(|&m| (m - 1.0).abs())
        .fold(f64::INFINITY, f64::min);

    if oracle_stable != closed_stable && boundary_distance > BOUNDARY_BAND {
        failed.push(Condition::RootOracle);
    }

    StabilityVerdict {
        stable: failed.is_empty(),
        failed_conditions: failed,
        conditions: conditions.to_vec(),
        lower_roots,
        upper_roots,
        oracle_stable,
        boundary_distance,
    }
}

/// Root magnitudes of the lower extreme polynomial after dividing out the
/// structural `(z - 1)` factor.
fn deflated_lower_magnitudes(lower: &ThirdOrderCoeffs) -> Vec<f64> {
    // synthetic division by (z - 1)
    let b1 = lower.a1 + 1.0;
    let b0 = lower.a2 + b1;
    monic_root_magnitudes(&[b1, b0])
}

/// Magnitudes of the roots of `z³ + a1 z² + a2 z + a3`, sorted descending.
pub fn root_magnitudes(c: &ThirdOrderCoeffs) -> Vec<f64> {
    monic_root_magnitudes(&[c.a1, c.a2, c.a3])
}

const SCHUR_EPS: f64 = 1e-15;
const SCHUR_MAX_ITER: usize = 500;

/// Roots of the monic polynomial `zⁿ + coeffs[0] zⁿ⁻¹ + … + coeffs[n-1]`
/// from the eigenvalues of its companion matrix, refined by Newton steps.
pub fn monic_roots(coeffs: &[f64]) -> Vec<Complex<f64>> {
    let n = coeffs.len();
    if n == 0 {
        return Vec::new();
    }
    let companion = DMatrix::from_fn(n, n, |i, j| {
        if i == 0 {
            -coeffs[j]
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let mut roots: Vec<Complex<f64>> = match Schur::try_new(companion, SCHUR_EPS, SCHUR_MAX_ITER) {
        Some(schur) => schur.complex_eigenvalues().iter().copied().collect(),
        // QR iteration can stall on exactly repeated roots
        None => deflation_roots(coeffs),
    };
    for z in roots.iter_mut() {
        *z = polish(coeffs, *z);
    }
    roots
}

/// Fallback root finder: peel off one real root at a time (Newton from a
/// Cauchy-bound bracket with bisection safeguard) and finish with the
/// quadratic formula.
fn deflation_roots(coeffs: &[f64]) -> Vec<Complex<f64>> {
    let mut c = coeffs.to_vec();
    let mut roots = Vec::with_capacity(c.len());
    while c.len() > 2 {
        let r = real_root(&c);
        roots.push(Complex::new(r, 0.0));
        // synthetic division by (z - r)
        let mut b = Vec::with_capacity(c.len() - 1);
        let mut acc = 1.0;
        for &ci in &c[..c.len() - 1] {
            acc = acc * r + ci;
            b.push(acc);
        }
        c = b;
    }
    match c.len() {
        2 => {
            let (p, q) = (c[0], c[1]);
            let disc = p * p / 4.0 - q;
            if disc >= 0.0 {
                let s = disc.sqrt();
                roots.push(Complex::new(-p / 2.0 + s, 0.0));
                roots.push(Complex::new(-p / 2.0 - s, 0.0));
            } else {
                let s = (-disc).sqrt();
                roots.push(Complex::new(-p / 2.0, s));
                roots.push(Complex::new(-p / 2.0, -s));
            }
        }
        1 => roots.push(Complex::new(-c[0], 0.0)),
        _ => {}
    }
    roots
}

/// A real root of an odd-degree monic polynomial.
fn real_root(c: &[f64]) -> f64 {
    let eval = |x: f64| c.iter().fold(1.0, |p, &ci| p * x + ci);
    let bound = 1.0 + c.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if eval(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= f64::EPSILON * mid.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn monic_root_magnitudes(coeffs: &[f64]) -> Vec<f64> {
    let mut mags: Vec<f64> = monic_roots(coeffs).iter().map(|z| z.norm()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    mags
}

/// A few Newton iterations; keeps the eigenvalue estimate when a step does
/// not reduce the residual (repeated roots, vanishing derivative).
fn polish(coeffs: &[f64], mut z: Complex<f64>) -> Complex<f64> {
    let eval = |z: Complex<f64>| {
        let mut p = Complex::new(1.0, 0.0);
        let mut dp = Complex::new(0.0, 0.0);
        for &c in coeffs {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    };
    for _ in 0..4 {
        let (p, dp) = eval(z);
        if p.norm() == 0.0 || dp.norm() == 0.0 {
            break;
        }
        let next = z - p / dp;
        if !(next.re.is_finite() && next.im.is_finite()) || eval(next).0.norm() >= p.norm() {
            break;
        }
        z = next;
    }
    z
}

/// Largest root magnitude over `samples` evenly spaced interior values of
/// `a1`, excluding both endpoints.
pub fn interior_max_root(w1: f64, w2: f64, c1: f64, c2: f64, t: f64, samples: usize) -> f64 {
    let lower = coeffs_from_params(w1, w2, 0.0, 0.0, t);
    let span = t * (c1 + c2);
    (1..=samples)
        .map(|j| {
            let a1 = lower.a1 + span * j as f64 / (samples + 1) as f64;
            root_magnitudes(&ThirdOrderCoeffs { a1, ..lower })[0]
        })
        .fold(0.0, f64::max)
}

/// Fixed point of the recurrence for constant gains `r1c`, `r2c`.
pub fn steady_state(r1c: f64, r2c: f64, x_ib_ss: f64, x_gb_ss: f64) -> Result<f64> {
    let total = r1c + r2c;
    if total == 0.0 {
        return Err(Error::ZeroWeights);
    }
    if x_ib_ss == x_gb_ss {
        return Ok(x_ib_ss);
    }
    Ok((r1c * x_ib_ss + r2c * x_gb_ss) / total)
}

/// Gains and best positions driving one step of the scalar recurrence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecurrenceInput {
    pub r1: f64,
    pub r2: f64,
    pub x_ib: f64,
    pub x_gb: f64,
}

/// Iterates the third-order position recurrence.
///
/// Returns `[x0, x1, x2, x3, …]` with `steps` new values appended. `input(k)`
/// supplies the gains and bests used to produce the `k`-th new value.
pub fn simulate_recurrence<F>(
    w1: f64,
    w2: f64,
    t: f64,
    x0: f64,
    x1: f64,
    x2: f64,
    steps: usize,
    mut input: F,
) -> Vec<f64>
where
    F: FnMut(usize) -> RecurrenceInput,
{
    let mut xs = Vec::with_capacity(steps + 3);
    xs.extend([x0, x1, x2]);
    let lag1 = -w1 - w2 - w1 * w2;
    let lag2 = w1 * w2;
    for k in 0..steps {
        let u = input(k);
        let n = xs.len();
        let next = (1.0 + w1 + w2 - u.r1 * t - u.r2 * t) * xs[n - 1]
            + lag1 * xs[n - 2]
            + lag2 * xs[n - 3]
            + t * (u.r1 * u.x_ib + u.r2 * u.x_gb);
        xs.push(next);
    }
    xs
}

/// [`simulate_recurrence`] with a constant input.
pub fn simulate_recurrence_constant(
    w1: f64,
    w2: f64,
    t: f64,
    start: [f64; 3],
    steps: usize,
    input: RecurrenceInput,
) -> Vec<f64> {
    simulate_recurrence(w1, w2, t, start[0], start[1], start[2], steps, |_| input)
}
