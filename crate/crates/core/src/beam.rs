//! Nonlocal Timoshenko beam with interleaved `(w, phi)` unknowns.
//!
//! ```text
//! K = int EI phi' psi' + kappa G A (phi + w')(psi + v') dx
//! M = int m0 (w v + mu w' v') + m2 (phi psi + mu phi' psi') dx
//! ```
//!
//! Linear Lagrange elements integrate the shear term with a single point to
//! avoid locking; NURBS elements use `p + 1` points for every term.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::basis::{lagrange_1d, nurbs_eval, open_knot_vector, NurbsPatch, ShapeEval};
use crate::post::Nondim;
use crate::quadrature::gauss_rule;
use crate::sparse::TripletBuilder;
use crate::system::{AssembledSystem, Dof, Field};
use crate::{Error, NonlocalParams, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BeamBc {
    /// Simply supported at both ends.
    Ss,
    /// Clamped at both ends.
    Cc,
    /// Clamped at `x = 0`, free at `x = L`.
    Cf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BeamDiscretization {
    Lagrange { n_elements: usize },
    Nurbs { degree: usize, n_elements: usize },
}

impl BeamDiscretization {
    pub fn n_elements(&self) -> usize {
        match *self {
            BeamDiscretization::Lagrange { n_elements } | BeamDiscretization::Nurbs { n_elements, .. } => n_elements,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamModel {
    pub length: f64,
    /// Slenderness `L / h`.
    pub aspect: f64,
    pub e: f64,
    pub nu: f64,
    pub rho: f64,
    pub kappa: f64,
    pub nonlocal: NonlocalParams,
    pub discretization: BeamDiscretization,
    pub bc: BeamBc,
}

impl BeamModel {
    /// `E = 30e6`, `nu = 0.3`, `rho = 1`, `kappa = 5/6`, `L = 10`, unit width.
    pub fn reference(aspect: f64, mu: f64, discretization: BeamDiscretization, bc: BeamBc) -> Result<Self> {
        let length = 10.0;
        let m = Self {
            length,
            aspect,
            e: 30e6,
            nu: 0.3,
            rho: 1.0,
            kappa: 5.0 / 6.0,
            nonlocal: NonlocalParams::from_mu(mu, length)?,
            discretization,
            bc,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.aspect > 0.0 && self.e > 0.0 && self.rho > 0.0) {
            return Err(Error::InvalidModel("beam length, aspect, E and rho must be positive".into()));
        }
        if !(self.nu > -1.0 && self.nu < 0.5) {
            return Err(Error::InvalidModel(format!("Poisson ratio {} outside (-1, 0.5)", self.nu)));
        }
        if !(self.kappa > 0.0 && self.kappa <= 1.0) {
            return Err(Error::InvalidModel(format!("shear correction {} outside (0, 1]", self.kappa)));
        }
        match self.discretization {
            BeamDiscretization::Lagrange { n_elements } if n_elements < 1 => {
                Err(Error::InvalidModel("beam needs at least one element".into()))
            }
            BeamDiscretization::Nurbs { degree, n_elements } if degree < 1 || n_elements < 1 => {
                Err(Error::InvalidModel("NURBS beam needs degree >= 1 and at least one element".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn thickness(&self) -> f64 {
        self.length / self.aspect
    }

    pub fn area(&self) -> f64 {
        self.thickness()
    }

    pub fn inertia(&self) -> f64 {
        self.thickness().powi(3) / 12.0
    }

    pub fn shear_modulus(&self) -> f64 {
        self.e / (2.0 * (1.0 + self.nu))
    }

    pub fn m0(&self) -> f64 {
        self.rho * self.area()
    }

    pub fn m2(&self) -> f64 {
        self.rho * self.inertia()
    }

    pub fn nondim(&self) -> Nondim {
        Nondim::Beam {
            length: self.length,
            rho_a: self.m0(),
            ei: self.e * self.inertia(),
        }
    }
}

/// Basis over the beam axis, built once per assembly.
enum Axis {
    Lagrange { n: usize, h: f64 },
    Nurbs { patch: NurbsPatch, spans: Vec<(f64, f64)> },
}

impl Axis {
    fn new(model: &BeamModel) -> Result<Self> {
        Ok(match model.discretization {
            BeamDiscretization::Lagrange { n_elements } => Axis::Lagrange {
                n: n_elements,
                h: model.length / n_elements as f64,
            },
            BeamDiscretization::Nurbs { degree, n_elements } => {
                let kv = open_knot_vector(degree, n_elements, (0.0, model.length))?;
                let spans = kv.spans().into_iter().map(|(_, lo, hi)| (lo, hi)).collect();
                Axis::Nurbs {
                    patch: NurbsPatch::line(kv, 0.0, model.length)?,
                    spans,
                }
            }
        })
    }

    fn n_functions(&self) -> usize {
        match self {
            Axis::Lagrange { n, .. } => n + 1,
            Axis::Nurbs { patch, .. } => patch.n_control(),
        }
    }

    fn n_elements(&self) -> usize {
        match self {
            Axis::Lagrange { n, .. } => *n,
            Axis::Nurbs { spans, .. } => spans.len(),
        }
    }

    fn rule_size(&self) -> usize {
        match self {
            Axis::Lagrange { .. } => 2,
            Axis::Nurbs { patch, .. } => patch.knots[0].degree() + 1,
        }
    }

    fn shear_rule_size(&self) -> usize {
        match self {
            Axis::Lagrange { .. } => 1,
            Axis::Nurbs { .. } => self.rule_size(),
        }
    }

    /// Values, physical derivatives and `dx` weight factor at parent `xi` of
    /// element `e`.
    fn eval(&self, e: usize, xi: f64) -> Result<(ShapeEval<1>, f64)> {
        match self {
            Axis::Lagrange { h, .. } => {
                let mut s = lagrange_1d(1, xi)?;
                let jac = h / 2.0;
                s.gradients.iter_mut().for_each(|g| g[0] /= jac);
                s.indices = vec![e, e + 1];
                Ok((s, jac))
            }
            Axis::Nurbs { patch, spans } => {
                let (lo, hi) = spans[e];
                let dt = (hi - lo) / 2.0;
                let t = lo + (xi + 1.0) * dt;
                let mut s = nurbs_eval(patch, [t])?;
                let (_, jac) = patch.map([t])?;
                let dxdt = jac[0][0];
                if !(dxdt > 0.0) {
                    return Err(Error::DegenerateElement { element: e, det_j: dxdt });
                }
                s.gradients.iter_mut().for_each(|g| g[0] /= dxdt);
                Ok((s, dxdt * dt))
            }
        }
    }
}

/// Element stiffness and mass with their global unknown indices
/// (`2 i` is `w`, `2 i + 1` is `phi` of basis function `i`).
#[derive(Debug, Clone, PartialEq)]
pub struct BeamElement {
    pub dofs: Vec<usize>,
    pub k: DMatrix<f64>,
    pub m: DMatrix<f64>,
}

pub fn beam_element_matrices(element: usize, model: &BeamModel) -> Result<BeamElement> {
    model.validate()?;
    let axis = Axis::new(model)?;
    if element >= axis.n_elements() {
        return Err(Error::InvalidModel(format!("beam has no element {element}")));
    }
    element_on_axis(element, model, &axis)
}

fn element_on_axis(element: usize, model: &BeamModel, axis: &Axis) -> Result<BeamElement> {
    let ei = model.e * model.inertia();
    let kga = model.kappa * model.shear_modulus() * model.area();
    let (m0, m2, mu) = (model.m0(), model.m2(), model.nonlocal.mu());

    let (s0, _) = axis.eval(element, 0.0)?;
    let n = s0.len();
    let mut k = DMatrix::zeros(2 * n, 2 * n);
    let mut m = DMatrix::zeros(2 * n, 2 * n);

    for (xi, w) in gauss_rule(axis.rule_size())?.iter() {
        let (s, dx) = axis.eval(element, xi)?;
        let f = w * dx;
        for a in 0..n {
            let (na, da) = (s.values[a], s.gradients[a][0]);
            for b in 0..n {
                let (nb, db) = (s.values[b], s.gradients[b][0]);
                k[(2 * a + 1, 2 * b + 1)] += ei * da * db * f;
                m[(2 * a, 2 * b)] += m0 * (na * nb + mu * da * db) * f;
                m[(2 * a + 1, 2 * b + 1)] += m2 * (na * nb + mu * da * db) * f;
            }
        }
    }
    for (xi, w) in gauss_rule(axis.shear_rule_size())?.iter() {
        let (s, dx) = axis.eval(element, xi)?;
        // gamma = w' + phi
        let mut g = vec![0.0; 2 * n];
        for a in 0..n {
            g[2 * a] = s.gradients[a][0];
            g[2 * a + 1] = s.values[a];
        }
        for i in 0..2 * n {
            for j in 0..2 * n {
                k[(i, j)] += kga * g[i] * g[j] * w * dx;
            }
        }
    }
    let dofs = s0.indices.iter().flat_map(|&i| [2 * i, 2 * i + 1]).collect();
    Ok(BeamElement { dofs, k, m })
}

pub fn assemble_beam(model: &BeamModel) -> Result<AssembledSystem> {
    model.validate()?;
    let axis = Axis::new(model)?;
    let nf = axis.n_functions();
    let mut kt = TripletBuilder::new(2 * nf);
    let mut mt = TripletBuilder::new(2 * nf);
    for e in 0..axis.n_elements() {
        let el = element_on_axis(e, model, &axis)?;
        kt.add_block(&el.dofs, &el.k);
        mt.add_block(&el.dofs, &el.m);
    }
    let dofs = (0..nf)
        .flat_map(|i| {
            [
                Dof { entity: i, field: Field::W },
                Dof { entity: i, field: Field::Phi },
            ]
        })
        .collect();
    let last = nf - 1;
    let constrained = match model.bc {
        BeamBc::Ss => vec![0, 2 * last],
        BeamBc::Cc => vec![0, 1, 2 * last, 2 * last + 1],
        BeamBc::Cf => vec![0, 1],
    };
    Ok(AssembledSystem {
        k: kt.build(),
        m: mt.build(),
        dofs,
        constrained,
        nondim: model.nondim(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn lagrange(n: usize, mu: f64, bc: BeamBc) -> BeamModel {
        BeamModel::reference(100.0, mu, BeamDiscretization::Lagrange { n_elements: n }, bc).unwrap()
    }

    #[test]
    fn section_properties() {
        let m = lagrange(10, 0.0, BeamBc::Ss);
        assert_abs_diff_eq!(m.thickness(), 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(m.inertia(), 1e-3 / 12.0, epsilon = 1e-18);
        assert_abs_diff_eq!(m.shear_modulus(), 30e6 / 2.6, epsilon = 1e-6);
    }

    #[test]
    fn translation_is_zero_energy() {
        for disc in [
            BeamDiscretization::Lagrange { n_elements: 4 },
            BeamDiscretization::Nurbs { degree: 3, n_elements: 4 },
        ] {
            let model = BeamModel::reference(20.0, 1.0, disc, BeamBc::Ss).unwrap();
            let sys = assemble_beam(&model).unwrap();
            let v: Vec<f64> = (0..sys.n()).map(|i| if i % 2 == 0 { 1.0 } else { 0.0 }).collect();
            let kv = sys.k.mul_vec(&v);
            assert!(kv.iter().all(|x| x.abs() < 1e-6), "{kv:?}");
        }
    }

    #[test]
    fn local_mass_is_classical() {
        let model = lagrange(10, 0.0, BeamBc::Ss);
        let el = beam_element_matrices(0, &model).unwrap();
        let l = 1.0;
        assert_abs_diff_eq!(el.m[(0, 0)], model.m0() * l / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(el.m[(0, 2)], model.m0() * l / 6.0, epsilon = 1e-14);
        assert_abs_diff_eq!(el.m[(1, 3)], model.m2() * l / 6.0, epsilon = 1e-16);
        assert_abs_diff_eq!(el.m[(0, 1)], 0.0);
    }

    #[test]
    fn reduced_shear_on_linear_element() {
        // One-point shear gives kGA/l for w-w and kGA l/4 for phi-phi.
        let model = lagrange(10, 0.0, BeamBc::Ss);
        let el = beam_element_matrices(3, &model).unwrap();
        let kga = model.kappa * model.shear_modulus() * model.area();
        let ei = model.e * model.inertia();
        assert_abs_diff_eq!(el.k[(0, 0)], kga, epsilon = 1e-6);
        assert_abs_diff_eq!(el.k[(1, 1)], ei + kga / 4.0, epsilon = 1e-6);
        assert_eq!(el.dofs, vec![6, 7, 8, 9]);
    }

    #[test]
    fn constraints_per_bc() {
        let n = 5;
        let count = |bc| assemble_beam(&lagrange(n, 0.0, bc)).unwrap().constrained;
        assert_eq!(count(BeamBc::Ss), vec![0, 10]);
        assert_eq!(count(BeamBc::Cc), vec![0, 1, 10, 11]);
        assert_eq!(count(BeamBc::Cf), vec![0, 1]);
    }

    #[test]
    fn nurbs_slender_ss() {
        let model =
            BeamModel::reference(100.0, 0.0, BeamDiscretization::Nurbs { degree: 3, n_elements: 82 }, BeamBc::Ss)
                .unwrap();
        let r = assemble_beam(&model).unwrap().solve(1).unwrap();
        assert!((r.dimensionless[0] - 9.8680).abs() / 9.8680 < 1e-3, "{}", r.dimensionless[0]);
    }
}
