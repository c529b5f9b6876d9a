//! Constraint elimination and the symmetric generalized eigensolver
//! `K x = lambda M x` for the lowest modes.
//!
//! Two independent routes share one contract: a dense route (Cholesky of
//! the shifted stiffness, full symmetric eigendecomposition of the inverse
//! problem) and a sparse route (shift-invert subspace iteration over a
//! skyline factorization). [`SolverPath::Auto`] picks by size.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::sparse::{CsrMatrix, SkylineLdl};
use crate::{Error, Result};

/// Systems up to this many unknowns go to the dense route under `Auto`.
pub const DENSE_LIMIT: usize = 2000;

const SUBSPACE_TOL: f64 = 1e-11;
const MAX_SUBSPACE_ITERS: usize = 2000;
/// Accepted residual once the iteration stops improving.
const STAGNATION_TOL: f64 = 4e-9;
const STAGNATION_WINDOW: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverPath {
    Auto,
    Dense,
    Iterative,
}

/// Stiffness and mass restricted to the free unknowns.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub k: CsrMatrix,
    pub m: CsrMatrix,
    /// `free[r]` is the full index of reduced unknown `r`.
    pub free: Vec<usize>,
    pub n_full: usize,
}

impl ReducedSystem {
    pub fn n(&self) -> usize {
        self.free.len()
    }

    /// Scatters a reduced vector back to full size with zeros on the
    /// constrained unknowns.
    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.n_full];
        for (r, &f) in self.free.iter().enumerate() {
            full[f] = reduced[r];
        }
        full
    }
}

/// Eliminates the rows and columns of `constrained`.
pub fn apply_constraints(k: &CsrMatrix, m: &CsrMatrix, constrained: &[usize]) -> Result<ReducedSystem> {
    let n = k.n();
    let mut fixed = vec![false; n];
    for &c in constrained {
        if c >= n {
            return Err(Error::ConstraintOutOfRange { index: c, size: n });
        }
        fixed[c] = true;
    }
    let free: Vec<usize> = (0..n).filter(|&i| !fixed[i]).collect();
    if free.is_empty() {
        return Err(Error::EmptySystem(n));
    }
    let (k, m) = if free.len() == n {
        (k.clone(), m.clone())
    } else {
        (k.submatrix(&free), m.submatrix(&free))
    };
    Ok(ReducedSystem { k, m, free, n_full: n })
}

/// Lowest modes of a constrained system.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModalResult {
    /// Eigenvalues `omega^2`, ascending.
    pub eigenvalues: Vec<f64>,
    /// Angular frequencies; eigenvalues below zero from round-off map to 0.
    pub omegas: Vec<f64>,
    /// Mass-orthonormal mode vectors over the full unknown set.
    pub modes: Vec<Vec<f64>>,
    /// Nondimensional frequencies (filled by the caller that knows the model).
    pub dimensionless: Vec<f64>,
    pub path: SolverPath,
}

/// Shift `sigma <= 0` making `K - sigma M` positive definite, with its factor.
fn shifted_factor(sys: &ReducedSystem) -> Result<(f64, SkylineLdl)> {
    match SkylineLdl::factor(&sys.k) {
        Ok(f) if f.pivots().all(|d| d > 1e-13 * max_abs_diag(&sys.k)) => Ok((0.0, f)),
        _ => {
            // Stiffness is singular (zero-energy modes admitted by the
            // constraints): shift below zero by a small fraction of the
            // smallest diagonal Rayleigh quotient.
            let kd = sys.k.diagonal();
            let md = sys.m.diagonal();
            let rq = kd
                .iter()
                .zip(&md)
                .filter(|(k, m)| **k > 0.0 && **m > 0.0)
                .map(|(k, m)| k / m)
                .fold(f64::INFINITY, f64::min);
            let rq = if rq.is_finite() { rq } else { 1.0 };
            let sigma = -1e-4 * rq;
            let a = CsrMatrix::combine(1.0, &sys.k, -sigma, &sys.m);
            let f = SkylineLdl::factor(&a)?;
            Ok((sigma, f))
        }
    }
}

fn max_abs_diag(a: &CsrMatrix) -> f64 {
    a.diagonal().into_iter().fold(0.0, |m, d| m.max(d.abs()))
}

/// `k` lowest eigenpairs of the reduced system.
pub fn solve_smallest(sys: &ReducedSystem, k: usize, path: SolverPath) -> Result<ModalResult> {
    let n = sys.n();
    let k = k.min(n).max(1);
    // The mass matrix must be positive definite for the problem to be well posed.
    SkylineLdl::factor(&sys.m)?;
    let path = match path {
        SolverPath::Auto if n <= DENSE_LIMIT => SolverPath::Dense,
        SolverPath::Auto => SolverPath::Iterative,
        p => p,
    };
    let (eigenvalues, reduced_modes) = match path {
        SolverPath::Dense => dense_lowest(sys, k)?,
        _ => subspace_lowest(sys, k)?,
    };
    let omegas = eigenvalues.iter().map(|&l: &f64| l.max(0.0).sqrt()).collect();
    let modes = reduced_modes.iter().map(|v| sys.expand(v)).collect();
    Ok(ModalResult {
        eigenvalues,
        omegas,
        modes,
        dimensionless: Vec::new(),
        path,
    })
}

/// Rayleigh quotient and mass-normalization of a candidate vector.
fn polish(sys: &ReducedSystem, mut v: Vec<f64>) -> (f64, Vec<f64>) {
    let mv = sys.m.bilinear(&v, &v);
    let s = 1.0 / mv.sqrt();
    v.iter_mut().for_each(|x| *x *= s);
    let lambda = sys.k.bilinear(&v, &v);
    (lambda, v)
}

/// Dense route: with `A = K - sigma M = L L^T`, the largest eigenvalues
/// `theta` of `L^{-1} M L^{-T}` give `lambda = sigma + 1/theta`.
fn dense_lowest(sys: &ReducedSystem, k: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let (sigma, _) = shifted_factor(sys)?;
    let a = CsrMatrix::combine(1.0, &sys.k, -sigma, &sys.m).to_dense();
    let chol = a.clone().cholesky().ok_or(Error::Indefinite { row: 0, pivot: f64::NAN })?;
    let l = chol.l();
    let m = sys.m.to_dense();
    let x = l.solve_lower_triangular(&m).expect("nonsingular factor");
    let mut c = l.solve_lower_triangular(&x.transpose()).expect("nonsingular factor");
    c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let lt = l.transpose();
    let mut pairs = Vec::with_capacity(k);
    for &idx in order.iter().take(k) {
        let y = eig.eigenvectors.column(idx).into_owned();
        let v = lt.solve_upper_triangular(&y).expect("nonsingular factor");
        pairs.push(polish(sys, v.iter().copied().collect()));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs.into_iter().unzip())
}

/// Generalized eigenproblem for small dense symmetric matrices; ascending.
fn dense_generalized(kr: &DMatrix<f64>, mr: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let chol = mr
        .clone()
        .cholesky()
        .ok_or(Error::Indefinite { row: 0, pivot: f64::NAN })?;
    let l = chol.l();
    let x = l.solve_lower_triangular(kr).expect("nonsingular factor");
    let mut c = l.solve_lower_triangular(&x.transpose()).expect("nonsingular factor");
    c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let lt = l.transpose();
    let q = order.len();
    let mut vecs = DMatrix::zeros(q, q);
    let mut vals = Vec::with_capacity(q);
    for (col, &idx) in order.iter().enumerate() {
        let y = eig.eigenvectors.column(idx).into_owned();
        let v = lt.solve_upper_triangular(&y).expect("nonsingular factor");
        vecs.set_column(col, &v);
        vals.push(eig.eigenvalues[idx]);
    }
    Ok((vals, vecs))
}

/// Sparse route: shift-invert subspace iteration with Rayleigh-Ritz on
/// `(K, M)`.
fn subspace_lowest(sys: &ReducedSystem, k: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = sys.n();
    let q = n.min((2 * k).max(k + 8));
    let (_, factor) = shifted_factor(sys)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x: Vec<Vec<f64>> = (0..q)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let k_scale = max_abs_diag(&sys.k).max(f64::MIN_POSITIVE);

    let mut last_residual = f64::INFINITY;
    let mut history = Vec::new();
    for _ in 0..MAX_SUBSPACE_ITERS {
        let xb: Vec<Vec<f64>> = x
            .iter()
            .map(|v| {
                let mut y = sys.m.mul_vec(v);
                factor.solve_in_place(&mut y);
                y
            })
            .collect();
        let kx: Vec<Vec<f64>> = xb.iter().map(|v| sys.k.mul_vec(v)).collect();
        let mx: Vec<Vec<f64>> = xb.iter().map(|v| sys.m.mul_vec(v)).collect();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let kr = DMatrix::from_fn(q, q, |i, j| dot(&xb[i], &kx[j]));
        let mr = DMatrix::from_fn(q, q, |i, j| dot(&xb[i], &mx[j]));
        let kr = (&kr + kr.transpose()) * 0.5;
        let mr = (&mr + mr.transpose()) * 0.5;
        let (vals, vecs) = dense_generalized(&kr, &mr)?;

        let combine = |basis: &[Vec<f64>], col: usize| -> Vec<f64> {
            let mut out = vec![0.0; n];
            for (j, b) in basis.iter().enumerate() {
                let c = vecs[(j, col)];
                if c != 0.0 {
                    out.iter_mut().zip(b).for_each(|(o, v)| *o += c * v);
                }
            }
            out
        };
        x = (0..q).map(|c| combine(&xb, c)).collect();

        // Residual of the wanted pairs from the already-projected products.
        let mut worst = 0.0f64;
        for (i, &lambda) in vals.iter().enumerate().take(k) {
            let kv = combine(&kx, i);
            let mv = combine(&mx, i);
            let r: f64 = kv.iter().zip(&mv).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt();
            let kn: f64 = kv.iter().map(|a| a * a).sum::<f64>().sqrt();
            let mn: f64 = mv.iter().map(|a| a * a).sum::<f64>().sqrt();
            let xn: f64 = x[i].iter().map(|a| a * a).sum::<f64>().sqrt();
            let denom = kn + lambda.abs() * mn + 1e-14 * k_scale * xn;
            worst = worst.max(r / denom);
        }
        last_residual = worst;
        history.push(worst);
        let stalled = history.len() > STAGNATION_WINDOW
            && worst < STAGNATION_TOL
            && worst > 0.5 * history[history.len() - 1 - STAGNATION_WINDOW];
        // A subspace spanning the whole space makes Rayleigh-Ritz exact.
        if worst < SUBSPACE_TOL || stalled || q == n {
            let mut pairs: Vec<(f64, Vec<f64>)> = x.into_iter().take(k).map(|v| polish(sys, v)).collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            return Ok(pairs.into_iter().unzip());
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_SUBSPACE_ITERS,
        residual: last_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::TripletBuilder;
    use approx::assert_relative_eq;

    fn two_by_two() -> ReducedSystem {
        let k = CsrMatrix::from_dense(&DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]));
        let m = CsrMatrix::from_dense(&DMatrix::identity(2, 2));
        apply_constraints(&k, &m, &[]).unwrap()
    }

    #[test]
    fn hand_computed_pair() {
        let sys = two_by_two();
        for path in [SolverPath::Dense, SolverPath::Iterative] {
            let r = solve_smallest(&sys, 2, path).unwrap();
            assert_relative_eq!(r.eigenvalues[0], 1.0, epsilon = 1e-12);
            assert_relative_eq!(r.eigenvalues[1], 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn constraint_errors() {
        let sys = two_by_two();
        assert_eq!(apply_constraints(&sys.k, &sys.m, &[0, 1]).unwrap_err(), Error::EmptySystem(2));
        assert!(matches!(
            apply_constraints(&sys.k, &sys.m, &[5]),
            Err(Error::ConstraintOutOfRange { index: 5, .. })
        ));
        let r = apply_constraints(&sys.k, &sys.m, &[]).unwrap();
        assert_eq!(r.free, vec![0, 1]);
        assert_eq!(r.k, sys.k);
    }

    #[test]
    fn singular_stiffness_reports_zero_mode() {
        // Free-free spring chain: one rigid mode.
        let n = 6;
        let mut kt = TripletBuilder::new(n);
        let mut mt = TripletBuilder::new(n);
        for i in 0..n - 1 {
            for (a, b, s) in [(i, i, 1.0), (i + 1, i + 1, 1.0), (i, i + 1, -1.0), (i + 1, i, -1.0)] {
                kt.add(a, b, s);
            }
        }
        for i in 0..n {
            mt.add(i, i, 1.0);
        }
        let sys = apply_constraints(&kt.build(), &mt.build(), &[]).unwrap();
        for path in [SolverPath::Dense, SolverPath::Iterative] {
            let r = solve_smallest(&sys, 2, path).unwrap();
            assert!(r.eigenvalues[0].abs() < 1e-10, "{:?}", r.eigenvalues);
            assert_eq!(r.omegas[0], r.eigenvalues[0].max(0.0).sqrt());
            // 2 - 2 cos(pi/6)
            assert_relative_eq!(r.eigenvalues[1], 2.0 - 2.0 * (std::f64::consts::PI / 6.0).cos(), epsilon = 1e-10);
        }
    }

    #[test]
    fn indefinite_mass_is_rejected() {
        let k = CsrMatrix::from_dense(&DMatrix::identity(2, 2));
        let m = CsrMatrix::from_dense(&DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]));
        let sys = apply_constraints(&k, &m, &[]).unwrap();
        assert!(matches!(solve_smallest(&sys, 1, SolverPath::Dense), Err(Error::Indefinite { .. })));
    }
}
