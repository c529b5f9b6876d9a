use std::sync::OnceLock;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::ShapeEval;
use crate::{Error, Result};

const DOMAIN_TOL: f64 = 1e-12;

fn check_parent(xi: f64) -> Result<()> {
    if xi.is_finite() && xi.abs() <= 1.0 + DOMAIN_TOL {
        Ok(())
    } else {
        Err(Error::OutsideParentDomain(xi))
    }
}

/// Lagrange shape functions on [-1, 1] with equally spaced nodes.
///
/// Degree 1 nodes are `{-1, 1}`, degree 2 nodes are `{-1, 0, 1}`.
pub fn lagrange_1d(degree: usize, xi: f64) -> Result<ShapeEval<1>> {
    check_parent(xi)?;
    let (values, grads) = match degree {
        1 => (vec![0.5 * (1.0 - xi), 0.5 * (1.0 + xi)], vec![-0.5, 0.5]),
        2 => (
            vec![0.5 * xi * (xi - 1.0), 1.0 - xi * xi, 0.5 * xi * (xi + 1.0)],
            vec![xi - 0.5, -2.0 * xi, xi + 0.5],
        ),
        d => return Err(Error::UnsupportedDegree(d)),
    };
    let n = values.len();
    Ok(ShapeEval {
        values,
        gradients: grads.into_iter().map(|g| [g]).collect(),
        indices: (0..n).collect(),
    })
}

/// Quadrilateral element families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadKind {
    Q4,
    Q8,
}

impl QuadKind {
    pub fn n_nodes(self) -> usize {
        match self {
            QuadKind::Q4 => 4,
            QuadKind::Q8 => 8,
        }
    }

    /// Parent coordinates of the nodes: corners counter-clockwise from
    /// (-1, -1), then (Q8) mid-sides bottom, right, top, left.
    pub fn nodes(self) -> &'static [[f64; 2]] {
        const NODES: [[f64; 2]; 8] = [
            [-1.0, -1.0],
            [1.0, -1.0],
            [1.0, 1.0],
            [-1.0, 1.0],
            [0.0, -1.0],
            [1.0, 0.0],
            [0.0, 1.0],
            [-1.0, 0.0],
        ];
        &NODES[..self.n_nodes()]
    }

    /// Exponents `(a, b)` of the monomials `xi^a eta^b` spanning the element.
    fn monomials(self) -> &'static [(u8, u8)] {
        match self {
            QuadKind::Q4 => &[(0, 0), (1, 0), (0, 1), (1, 1)],
            QuadKind::Q8 => &[(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (2, 1), (1, 2)],
        }
    }

    /// Monomial coefficients of every shape function: column `i` holds the
    /// coefficients of function `i`.
    fn coefficients(self) -> &'static DMatrix<f64> {
        static Q4: OnceLock<DMatrix<f64>> = OnceLock::new();
        static Q8: OnceLock<DMatrix<f64>> = OnceLock::new();
        let cell = match self {
            QuadKind::Q4 => &Q4,
            QuadKind::Q8 => &Q8,
        };
        cell.get_or_init(|| {
            let mons = self.monomials();
            let nodes = self.nodes();
            let n = nodes.len();
            // V[j][k] = monomial k at node j; N = V^{-1} gives nodal interpolation.
            let v = DMatrix::from_fn(n, n, |j, k| {
                let (a, b) = mons[k];
                nodes[j][0].powi(a as i32) * nodes[j][1].powi(b as i32)
            });
            v.try_inverse().expect("serendipity Vandermonde is invertible")
        })
    }
}

fn check_parent_2d(xi: [f64; 2]) -> Result<()> {
    check_parent(xi[0])?;
    check_parent(xi[1])
}

/// Bilinear (Q4) or serendipity (Q8) shape functions and parent gradients.
pub fn quad_shape(kind: QuadKind, xi: [f64; 2]) -> Result<ShapeEval<2>> {
    check_parent_2d(xi)?;
    let [x, y] = xi;
    let mut values = Vec::with_capacity(kind.n_nodes());
    let mut gradients = Vec::with_capacity(kind.n_nodes());
    match kind {
        QuadKind::Q4 => {
            for &[xa, ya] in kind.nodes() {
                values.push(0.25 * (1.0 + xa * x) * (1.0 + ya * y));
                gradients.push([0.25 * xa * (1.0 + ya * y), 0.25 * ya * (1.0 + xa * x)]);
            }
        }
        QuadKind::Q8 => {
            for &[xa, ya] in kind.nodes() {
                if xa != 0.0 && ya != 0.0 {
                    let s = xa * x + ya * y - 1.0;
                    let (fx, fy) = (1.0 + xa * x, 1.0 + ya * y);
                    values.push(0.25 * fx * fy * s);
                    gradients.push([
                        0.25 * xa * fy * (s + fx),
                        0.25 * ya * fx * (s + fy),
                    ]);
                } else if xa == 0.0 {
                    values.push(0.5 * (1.0 - x * x) * (1.0 + ya * y));
                    gradients.push([-x * (1.0 + ya * y), 0.5 * ya * (1.0 - x * x)]);
                } else {
                    values.push(0.5 * (1.0 + xa * x) * (1.0 - y * y));
                    gradients.push([0.5 * xa * (1.0 - y * y), -y * (1.0 + xa * x)]);
                }
            }
        }
    }
    Ok(ShapeEval {
        values,
        gradients,
        indices: (0..kind.n_nodes()).collect(),
    })
}

/// Substitute interpolations for the rotations inside the transverse shear
/// strains.
///
/// `theta_x` interpolates the rotation paired with `w_{,x}` in `gamma_xz`;
/// `theta_y` the rotation paired with `w_{,y}` in `gamma_yz`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubstituteShear {
    pub theta_x: ShapeEval<2>,
    pub theta_y: ShapeEval<2>,
}

/// Replacement for a monomial `xi^a eta^b` that has no counterpart in the
/// derivative field along `dir`: its L2 projection onto the derivative space.
///
/// Returns a list of `(coefficient, a, b)` terms.
fn redistribute(kind: QuadKind, dir: usize, a: u8, b: u8) -> Vec<(f64, u8, u8)> {
    // Exponents along / across the differentiation direction.
    let (along, across) = if dir == 0 { (a, b) } else { (b, a) };
    let make = |c: f64, al: u8, ac: u8| {
        if dir == 0 {
            (c, al, ac)
        } else {
            (c, ac, al)
        }
    };
    match kind {
        // dw/dxi of a bilinear field is constant along xi.
        QuadKind::Q4 => {
            if along == 0 {
                vec![make(1.0, 0, across)]
            } else {
                vec![]
            }
        }
        // Derivative space of the serendipity field along xi is
        // {1, xi, eta, xi*eta, eta^2}.
        QuadKind::Q8 => match (along, across) {
            (2, 0) => vec![make(1.0 / 3.0, 0, 0)],
            (2, 1) => vec![make(1.0 / 3.0, 0, 1)],
            (1, 2) => vec![make(1.0 / 3.0, 1, 0)],
            _ => vec![make(1.0, along, across)],
        },
    }
}

fn eval_polynomial(terms: &[(f64, u8, u8)], x: f64, y: f64) -> (f64, [f64; 2]) {
    let mut v = 0.0;
    let mut g = [0.0; 2];
    for &(c, a, b) in terms {
        let (a, b) = (a as i32, b as i32);
        v += c * x.powi(a) * y.powi(b);
        if a > 0 {
            g[0] += c * a as f64 * x.powi(a - 1) * y.powi(b);
        }
        if b > 0 {
            g[1] += c * b as f64 * x.powi(a) * y.powi(b - 1);
        }
    }
    (v, g)
}

fn substitute_along(kind: QuadKind, dir: usize, xi: [f64; 2]) -> ShapeEval<2> {
    let coeffs = kind.coefficients();
    let mons = kind.monomials();
    let n = kind.n_nodes();
    let mut values = Vec::with_capacity(n);
    let mut gradients = Vec::with_capacity(n);
    for i in 0..n {
        let mut terms = Vec::new();
        for (k, &(a, b)) in mons.iter().enumerate() {
            let c = coeffs[(k, i)];
            if c == 0.0 {
                continue;
            }
            for (s, ra, rb) in redistribute(kind, dir, a, b) {
                terms.push((c * s, ra, rb));
            }
        }
        let (v, g) = eval_polynomial(&terms, xi[0], xi[1]);
        values.push(v);
        gradients.push(g);
    }
    ShapeEval {
        values,
        gradients,
        indices: (0..n).collect(),
    }
}

/// Field-consistent substitute shape functions for the shear-strain rotation
/// terms: the rotation interpolation is projected onto the polynomial space of
/// the matching deflection derivative.
pub fn substitute_shear_shape(kind: QuadKind, xi: [f64; 2]) -> Result<SubstituteShear> {
    check_parent_2d(xi)?;
    Ok(SubstituteShear {
        theta_x: substitute_along(kind, 0, xi),
        theta_y: substitute_along(kind, 1, xi),
    })
}
