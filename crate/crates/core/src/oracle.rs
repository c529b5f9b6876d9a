//! Reference solutions for nonlocal rods: closed-form uncracked modes and
//! the transcendental characteristic equations of a rod with one crack.
//!
//! All quantities are dimensionless: `beta = omega L sqrt(rhoA / EA)` and
//! `mu_bar = (e0a / L)^2`. With `s = sqrt(1 - mu_bar beta^2)` the effective
//! wavenumber is `beta / s`, so roots only exist below the cutoff
//! `1 / sqrt(mu_bar)`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::rod::RodBc;
use crate::{Error, Result};

/// Grid step of the root scan.
pub const SCAN_STEP: f64 = 1e-3;
/// Bracket width at which bisection stops.
pub const BISECT_TOL: f64 = 1e-10;
/// Upper end of the scan when there is no cutoff.
pub const LOCAL_SCAN_LIMIT: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharEqProblem {
    pub bc: RodBc,
    pub severity: f64,
    pub position: f64,
    pub mu_bar: f64,
}

impl CharEqProblem {
    pub fn new(bc: RodBc, severity: f64, position: f64, mu_bar: f64) -> Result<Self> {
        if !(severity >= 0.0) {
            return Err(Error::InvalidModel(format!("severity {severity} must be >= 0")));
        }
        if !(position > 0.0 && position < 1.0) {
            return Err(Error::InvalidModel(format!("crack position {position} must lie in (0, 1)")));
        }
        if !(mu_bar >= 0.0) {
            return Err(Error::InvalidModel(format!("mu_bar {mu_bar} must be >= 0")));
        }
        Ok(Self {
            bc,
            severity,
            position,
            mu_bar,
        })
    }

    /// `1 / sqrt(mu_bar)`, or infinity for a local rod.
    pub fn cutoff(&self) -> f64 {
        if self.mu_bar == 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.mu_bar.sqrt()
        }
    }
}

/// Closed-form `beta` of mode `n` (1-based) for an uncracked rod.
pub fn beta_uncracked(bc: RodBc, n: usize, mu_bar: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidModel("mode index starts at 1".into()));
    }
    if !(mu_bar >= 0.0) {
        return Err(Error::InvalidModel(format!("mu_bar {mu_bar} must be >= 0")));
    }
    let k = match bc {
        RodBc::ClampedFree => (2 * n - 1) as f64 * FRAC_PI_2,
        RodBc::ClampedClamped => n as f64 * PI,
    };
    Ok(k / (1.0 + k * k * mu_bar).sqrt())
}

/// Left-hand side of the characteristic equation.
///
/// Clamped-free: `cos(q) - K beta s cos(b q) sin((1 - b) q)`;
/// clamped-clamped: `2 sin(q) + K beta s [cos(q) + cos((1 - 2b) q)]`,
/// with `q = beta / s`.
pub fn char_residual(problem: &CharEqProblem, beta: f64) -> Result<f64> {
    let arg = 1.0 - problem.mu_bar * beta * beta;
    if !(arg > 0.0) {
        return Err(Error::AboveCutoff {
            beta,
            cutoff: problem.cutoff(),
        });
    }
    let s = arg.sqrt();
    let q = beta / s;
    let (kk, b) = (problem.severity, problem.position);
    Ok(match problem.bc {
        RodBc::ClampedFree => q.cos() - kk * beta * s * (b * q).cos() * ((1.0 - b) * q).sin(),
        RodBc::ClampedClamped => 2.0 * q.sin() + kk * beta * s * (q.cos() + ((1.0 - 2.0 * b) * q).cos()),
    })
}

/// Roots found by [`solve_char`]; `shortfall` is set when fewer than the
/// requested number lie below the cutoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharRoots {
    pub roots: Vec<f64>,
    pub shortfall: bool,
}

pub fn solve_char(problem: &CharEqProblem, n_roots: usize) -> Result<CharRoots> {
    solve_char_with_step(problem, n_roots, SCAN_STEP)
}

/// Uniform scan with the given step, then bisection of each sign change.
pub fn solve_char_with_step(problem: &CharEqProblem, n_roots: usize, step: f64) -> Result<CharRoots> {
    if n_roots == 0 {
        return Err(Error::InvalidModel("at least one root must be requested".into()));
    }
    if !(step > 0.0) {
        return Err(Error::InvalidModel(format!("scan step {step} must be positive")));
    }
    let upper = problem.cutoff().min(LOCAL_SCAN_LIMIT);
    let f = |b: f64| char_residual(problem, b);
    let mut roots = Vec::with_capacity(n_roots);
    let mut lo = step;
    let mut f_lo = f(lo)?;
    let mut i = 1usize;
    while roots.len() < n_roots {
        i += 1;
        let hi = i as f64 * step;
        if hi >= upper {
            break;
        }
        let f_hi = f(hi)?;
        if f_lo == 0.0 {
            roots.push(lo);
        } else if f_lo * f_hi < 0.0 {
            roots.push(bisect(&f, lo, hi, f_lo)?);
        }
        lo = hi;
        f_lo = f_hi;
    }
    Ok(CharRoots {
        shortfall: roots.len() < n_roots,
        roots,
    })
}

fn bisect(f: &impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64, mut f_lo: f64) -> Result<f64> {
    while hi - lo > BISECT_TOL {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if f_lo * fm < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            f_lo = fm;
        }
    }
    Ok(0.5 * (lo + hi))
}
