use serde::{Deserialize, Serialize};

use super::ShapeEval;
use crate::{Error, Result};

/// Non-decreasing knot sequence together with the spline degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnotVector {
    knots: Vec<f64>,
    degree: usize,
}

impl KnotVector {
    pub fn new(knots: Vec<f64>, degree: usize) -> Result<Self> {
        if degree < 1 {
            return Err(Error::InvalidKnots("degree must be at least 1".into()));
        }
        if knots.iter().any(|k| !k.is_finite()) {
            return Err(Error::InvalidKnots("non-finite knot".into()));
        }
        if knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidKnots("knots must be non-decreasing".into()));
        }
        if knots.len() < 2 * (degree + 1) {
            return Err(Error::InvalidKnots(format!(
                "{} knots cannot carry {} basis functions of degree {degree}",
                knots.len(),
                degree + 1
            )));
        }
        if knots[degree] >= knots[knots.len() - 1 - degree] {
            return Err(Error::InvalidKnots("empty parameter domain".into()));
        }
        Ok(Self { knots, degree })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_basis(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[self.degree], self.knots[self.knots.len() - 1 - self.degree])
    }

    /// True when the first and last knots are repeated `degree + 1` times.
    pub fn is_open(&self) -> bool {
        let p = self.degree;
        let n = self.knots.len();
        self.knots[..=p].iter().all(|&k| k == self.knots[0])
            && self.knots[n - 1 - p..].iter().all(|&k| k == self.knots[n - 1])
    }

    /// Non-empty knot spans `(index, lo, hi)`; `index` is the span index
    /// `i` with `knots[i] <= xi < knots[i + 1]`.
    pub fn spans(&self) -> Vec<(usize, f64, f64)> {
        (self.degree..self.n_basis())
            .filter(|&i| self.knots[i + 1] > self.knots[i])
            .map(|i| (i, self.knots[i], self.knots[i + 1]))
            .collect()
    }

    /// Span index containing `xi`; the right end of the domain belongs to the
    /// last non-empty span.
    pub fn find_span(&self, xi: f64) -> Result<usize> {
        let (lo, hi) = self.domain();
        let tol = 1e-12 * (hi - lo);
        if !(xi >= lo - tol && xi <= hi + tol) {
            return Err(Error::OutsideKnotRange { value: xi, lo, hi });
        }
        let n = self.n_basis();
        if xi >= self.knots[n] {
            return Ok((self.degree..n).rev().find(|&i| self.knots[i] < self.knots[i + 1]).unwrap());
        }
        // Largest i in [p, n-1] with knots[i] <= xi.
        let i = self.knots[..=n].partition_point(|&k| k <= xi).saturating_sub(1);
        Ok(i.clamp(self.degree, n - 1))
    }

    /// Greville abscissae: knot averages that give the identity geometry.
    pub fn greville(&self) -> Vec<f64> {
        let p = self.degree;
        (0..self.n_basis())
            .map(|i| self.knots[i + 1..=i + p].iter().sum::<f64>() / p as f64)
            .collect()
    }
}

/// Uniform open knot vector with `n_elements` spans over `span`.
pub fn open_knot_vector(degree: usize, n_elements: usize, span: (f64, f64)) -> Result<KnotVector> {
    if degree < 1 || n_elements < 1 {
        return Err(Error::InvalidKnots(format!(
            "degree {degree} and element count {n_elements} must both be at least 1"
        )));
    }
    let (a, b) = span;
    if !(b > a) {
        return Err(Error::InvalidKnots(format!("empty span [{a}, {b}]")));
    }
    let mut knots = vec![a; degree + 1];
    for e in 1..n_elements {
        knots.push(a + (b - a) * e as f64 / n_elements as f64);
    }
    knots.extend(std::iter::repeat_n(b, degree + 1));
    KnotVector::new(knots, degree)
}

/// The `p + 1` non-vanishing B-spline values and first derivatives at `xi`.
///
/// Uses the triangular Cox-de Boor table; terms whose knot difference is zero
/// contribute nothing.
pub fn bspline_eval(kv: &KnotVector, xi: f64) -> Result<ShapeEval<1>> {
    let p = kv.degree;
    let span = kv.find_span(xi)?;
    let u = &kv.knots;
    let xi = xi.clamp(kv.domain().0, kv.domain().1);

    // ndu[j][r]: basis values (upper triangle incl. diagonal) and knot
    // differences (lower triangle), as in the standard table layout.
    let mut ndu = vec![vec![0.0; p + 1]; p + 1];
    let mut left = vec![0.0; p + 1];
    let mut right = vec![0.0; p + 1];
    ndu[0][0] = 1.0;
    for j in 1..=p {
        left[j] = xi - u[span + 1 - j];
        right[j] = u[span + j] - xi;
        let mut saved = 0.0;
        for r in 0..j {
            ndu[j][r] = right[r + 1] + left[j - r];
            let temp = if ndu[j][r] == 0.0 { 0.0 } else { ndu[r][j - 1] / ndu[j][r] };
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }
    let values: Vec<f64> = (0..=p).map(|r| ndu[r][p]).collect();

    // First derivative: p * (N_{r-1,p-1}/d_left - N_{r,p-1}/d_right).
    let mut gradients = Vec::with_capacity(p + 1);
    for r in 0..=p {
        let mut d = 0.0;
        if r >= 1 {
            let denom = ndu[p][r - 1];
            if denom != 0.0 {
                d += ndu[r - 1][p - 1] / denom;
            }
        }
        if r < p {
            let denom = ndu[p][r];
            if denom != 0.0 {
                d -= ndu[r][p - 1] / denom;
            }
        }
        gradients.push([p as f64 * d]);
    }

    Ok(ShapeEval {
        values,
        gradients,
        indices: (span - p..=span).collect(),
    })
}

/// Tensor-product NURBS patch in one or two parametric directions.
///
/// Control points are ordered with the first parametric direction fastest:
/// index `i + n_0 * j`. Each control point carries physical coordinates of
/// the same dimension as the parameter space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NurbsPatch {
    pub knots: Vec<KnotVector>,
    pub control_points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl NurbsPatch {
    pub fn new(knots: Vec<KnotVector>, control_points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if knots.is_empty() || knots.len() > 2 {
            return Err(Error::InvalidPatch(format!("{} parametric directions", knots.len())));
        }
        let expected: usize = knots.iter().map(KnotVector::n_basis).product();
        if control_points.len() != expected || weights.len() != expected {
            return Err(Error::InvalidPatch(format!(
                "expected {expected} control points and weights, got {} and {}",
                control_points.len(),
                weights.len()
            )));
        }
        if control_points.iter().any(|p| p.len() != knots.len()) {
            return Err(Error::InvalidPatch("control point dimension mismatch".into()));
        }
        if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidPatch("weights must be strictly positive".into()));
        }
        Ok(Self {
            knots,
            control_points,
            weights,
        })
    }

    /// Straight segment `[x0, x1]` with unit weights and Greville control points,
    /// parameterized over the knot domain of `kv`.
    pub fn line(kv: KnotVector, x0: f64, x1: f64) -> Result<Self> {
        let (lo, hi) = kv.domain();
        let pts = kv
            .greville()
            .into_iter()
            .map(|g| vec![x0 + (x1 - x0) * (g - lo) / (hi - lo)])
            .collect::<Vec<_>>();
        let w = vec![1.0; pts.len()];
        Self::new(vec![kv], pts, w)
    }

    /// Axis-aligned rectangle `[0, a] x [0, b]` with unit weights.
    pub fn rectangle(kx: KnotVector, ky: KnotVector, a: f64, b: f64) -> Result<Self> {
        let map = |kv: &KnotVector, len: f64| -> Vec<f64> {
            let (lo, hi) = kv.domain();
            kv.greville().into_iter().map(|g| len * (g - lo) / (hi - lo)).collect()
        };
        let gx = map(&kx, a);
        let gy = map(&ky, b);
        let mut pts = Vec::with_capacity(gx.len() * gy.len());
        for &y in &gy {
            for &x in &gx {
                pts.push(vec![x, y]);
            }
        }
        let w = vec![1.0; pts.len()];
        Self::new(vec![kx, ky], pts, w)
    }

    pub fn dim(&self) -> usize {
        self.knots.len()
    }

    pub fn n_control(&self) -> usize {
        self.control_points.len()
    }

    /// Control-point counts per parametric direction.
    pub fn shape(&self) -> Vec<usize> {
        self.knots.iter().map(KnotVector::n_basis).collect()
    }

    /// Physical coordinates and the Jacobian `dx_a / dxi_b` at a parameter point.
    pub fn map<const D: usize>(&self, xi: [f64; D]) -> Result<([f64; D], [[f64; D]; D])> {
        let r = nurbs_eval(self, xi)?;
        let mut x = [0.0; D];
        let mut jac = [[0.0; D]; D];
        for (k, &g) in r.indices.iter().enumerate() {
            let p = &self.control_points[g];
            for a in 0..D {
                x[a] += r.values[k] * p[a];
                for b in 0..D {
                    jac[a][b] += r.gradients[k][b] * p[a];
                }
            }
        }
        Ok((x, jac))
    }
}

/// Rational basis `R_i = N_i w_i / sum_j N_j w_j` and its parametric gradient.
pub fn nurbs_eval<const D: usize>(patch: &NurbsPatch, xi: [f64; D]) -> Result<ShapeEval<D>> {
    if patch.dim() != D {
        return Err(Error::InvalidPatch(format!(
            "evaluated with {D} parameters on a {}-parametric patch",
            patch.dim()
        )));
    }
    let per_dir: Vec<ShapeEval<1>> = patch
        .knots
        .iter()
        .zip(xi)
        .map(|(kv, x)| bspline_eval(kv, x))
        .collect::<Result<_>>()?;
    let strides: Vec<usize> = {
        let mut s = vec![1; D];
        for d in 1..D {
            s[d] = s[d - 1] * patch.knots[d - 1].n_basis();
        }
        s
    };

    // Tensor product of the univariate factors, first direction fastest.
    let count: usize = per_dir.iter().map(ShapeEval::len).product();
    let mut values = Vec::with_capacity(count);
    let mut gradients = Vec::with_capacity(count);
    let mut indices = Vec::with_capacity(count);
    for flat in 0..count {
        let mut rem = flat;
        let mut v = 1.0;
        let mut g = [1.0; D];
        let mut global = 0;
        for d in 0..D {
            let len = per_dir[d].len();
            let k = rem % len;
            rem /= len;
            v *= per_dir[d].values[k];
            for (e, ge) in g.iter_mut().enumerate() {
                *ge *= if e == d { per_dir[d].gradients[k][0] } else { per_dir[d].values[k] };
            }
            global += per_dir[d].indices[k] * strides[d];
        }
        let w = patch.weights[global];
        values.push(v * w);
        gradients.push(g.map(|gd| gd * w));
        indices.push(global);
    }

    let wsum: f64 = values.iter().sum();
    if wsum == 0.0 {
        return Err(Error::SingularGeometry);
    }
    let mut dwsum = [0.0; D];
    for g in &gradients {
        for d in 0..D {
            dwsum[d] += g[d];
        }
    }
    for (v, g) in values.iter_mut().zip(gradients.iter_mut()) {
        for d in 0..D {
            g[d] = (g[d] * wsum - *v * dwsum[d]) / (wsum * wsum);
        }
        *v /= wsum;
    }
    Ok(ShapeEval {
        values,
        gradients,
        indices,
    })
}
