//! Shape-function families: Lagrange segments, Q4/Q8 quadrilaterals with
//! field-consistent shear interpolation, and B-spline/NURBS bases.

mod lagrange;
mod spline;

pub use lagrange::{lagrange_1d, quad_shape, substitute_shear_shape, QuadKind, SubstituteShear};
pub use spline::{bspline_eval, nurbs_eval, open_knot_vector, KnotVector, NurbsPatch};

/// Basis values and parent-coordinate gradients at one evaluation point.
///
/// `gradients[i][d]` is the derivative of function `i` along parent
/// direction `d`. `indices` maps each local function to its global index
/// within the family (node number or control-point number).
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeEval<const D: usize> {
    pub values: Vec<f64>,
    pub gradients: Vec<[f64; D]>,
    pub indices: Vec<usize>,
}

impl<const D: usize> ShapeEval<D> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value_sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn gradient_sum(&self) -> [f64; D] {
        let mut s = [0.0; D];
        for g in &self.gradients {
            for d in 0..D {
                s[d] += g[d];
            }
        }
        s
    }
}
