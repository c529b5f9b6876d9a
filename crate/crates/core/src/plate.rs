//! Nonlocal first-order shear deformable plate, five unknowns per node or
//! control point: `u0, v0, w0, theta_x, theta_y`.
//!
//! ```text
//! eps_p = [u0,x, v0,y, u0,y + v0,x]
//! eps_b = [tx,x, ty,y, tx,y + ty,x]
//! gamma = [tx + w0,x, ty + w0,y]
//! ```
//!
//! Every inertia pairing `I (N_a N_b)` is accompanied by
//! `I mu (grad N_a . grad N_b)`.

use nalgebra::{DMatrix, Matrix2, Matrix3};
use serde::{Deserialize, Serialize};

use crate::basis::{nurbs_eval, open_knot_vector, quad_shape, substitute_shear_shape, NurbsPatch, QuadKind};
use crate::post::Nondim;
use crate::quadrature::gauss_rule;
use crate::sparse::TripletBuilder;
use crate::system::{AssembledSystem, Dof, Field};
use crate::{Error, NonlocalParams, Result};

pub const DOFS_PER_NODE: usize = 5;

const FIELDS: [Field; DOFS_PER_NODE] = [Field::U0, Field::V0, Field::W0, Field::ThetaX, Field::ThetaY];
const U0: usize = 0;
const V0: usize = 1;
const W0: usize = 2;
const TX: usize = 3;
const TY: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlateBc {
    /// `w0 = 0` on every edge, in-plane rigid motion pinned at two corners.
    Ssss,
    /// As [`PlateBc::Ssss`] plus zero tangential rotation on every edge.
    SsssHard,
    /// All five unknowns zero on every edge.
    Cccc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PlateDiscretization {
    Q4 { nx: usize, ny: usize },
    Q8 { nx: usize, ny: usize },
    /// Tensor-product patch with `control` points per direction.
    Nurbs { degree: usize, control_x: usize, control_y: usize },
}

/// Rotation interpolation inside the transverse shear strain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShearInterpolation {
    /// Substitute shapes matching the order of the deflection derivative.
    #[default]
    Consistent,
    /// Plain element shapes; locks for thin plates.
    Naive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateModel {
    pub a: f64,
    pub b: f64,
    pub h: f64,
    pub e: f64,
    pub nu: f64,
    pub rho: f64,
    pub kappa: f64,
    pub nonlocal: NonlocalParams,
    pub discretization: PlateDiscretization,
    pub bc: PlateBc,
    pub shear: ShearInterpolation,
}

impl PlateModel {
    /// `E = 30e6`, `nu = 0.3`, `rho = 1`, `kappa = 5/6`.
    pub fn reference(a: f64, b: f64, h: f64, mu: f64, discretization: PlateDiscretization, bc: PlateBc) -> Result<Self> {
        let m = Self {
            a,
            b,
            h,
            e: 30e6,
            nu: 0.3,
            rho: 1.0,
            kappa: 5.0 / 6.0,
            nonlocal: NonlocalParams::from_mu(mu, a)?,
            discretization,
            bc,
            shear: ShearInterpolation::Consistent,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.b > 0.0 && self.h > 0.0 && self.e > 0.0 && self.rho > 0.0) {
            return Err(Error::InvalidModel("plate a, b, h, E and rho must be positive".into()));
        }
        if !(self.nu > -1.0 && self.nu < 0.5) {
            return Err(Error::InvalidModel(format!("Poisson ratio {} outside (-1, 0.5)", self.nu)));
        }
        if !(self.kappa > 0.0 && self.kappa <= 1.0) {
            return Err(Error::InvalidModel(format!("shear correction {} outside (0, 1]", self.kappa)));
        }
        match self.discretization {
            PlateDiscretization::Q4 { nx, ny } | PlateDiscretization::Q8 { nx, ny } if nx < 1 || ny < 1 => {
                Err(Error::InvalidModel("plate mesh needs at least one element per direction".into()))
            }
            PlateDiscretization::Nurbs {
                degree,
                control_x,
                control_y,
            } if degree < 1 || control_x <= degree || control_y <= degree => Err(Error::InvalidModel(format!(
                "{control_x} x {control_y} control points cannot carry degree {degree}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn shear_modulus(&self) -> f64 {
        self.e / (2.0 * (1.0 + self.nu))
    }

    pub fn nondim(&self) -> Nondim {
        Nondim::Plate {
            thickness: self.h,
            rho: self.rho,
            shear_modulus: self.shear_modulus(),
        }
    }
}

/// Section stiffnesses and inertias of a homogeneous plate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstitutiveSet {
    pub a_e: Matrix3<f64>,
    pub b_be: Matrix3<f64>,
    pub d_b: Matrix3<f64>,
    pub e_s: Matrix2<f64>,
    pub i11: f64,
    pub i12: f64,
    pub i22: f64,
}

pub fn constitutive(model: &PlateModel) -> Result<ConstitutiveSet> {
    let (e, nu, h) = (model.e, model.nu, model.h);
    if !(nu > -1.0 && nu < 0.5) {
        return Err(Error::InvalidModel(format!("Poisson ratio {nu} outside (-1, 0.5)")));
    }
    let q11 = e / (1.0 - nu * nu);
    let q12 = nu * q11;
    let q66 = e / (2.0 * (1.0 + nu));
    let q = Matrix3::new(q11, q12, 0.0, q12, q11, 0.0, 0.0, 0.0, q66);
    Ok(ConstitutiveSet {
        a_e: q * h,
        b_be: Matrix3::zeros(),
        d_b: q * (h.powi(3) / 12.0),
        e_s: Matrix2::identity() * (model.kappa * q66 * h),
        i11: model.rho * h,
        i12: 0.0,
        i22: model.rho * h.powi(3) / 12.0,
    })
}

/// Shape data at one quadrature point, gradients in physical coordinates.
struct PointEval {
    n: Vec<f64>,
    dn: Vec<[f64; 2]>,
    /// Rotation shapes paired with `w,x` and `w,y` in the shear strain.
    sx: Vec<f64>,
    sy: Vec<f64>,
    dv: f64,
}

enum Mesh {
    Lagrange {
        kind: QuadKind,
        coords: Vec<[f64; 2]>,
        connectivity: Vec<Vec<usize>>,
    },
    Nurbs {
        patch: NurbsPatch,
        spans: Vec<((f64, f64), (f64, f64))>,
    },
}

impl Mesh {
    fn new(model: &PlateModel) -> Result<Self> {
        Ok(match model.discretization {
            PlateDiscretization::Q4 { nx, ny } => {
                let idx = |i: usize, j: usize| j * (nx + 1) + i;
                let coords = grid(model, nx + 1, ny + 1, |_, _| true);
                let connectivity = (0..ny)
                    .flat_map(|j| (0..nx).map(move |i| (i, j)))
                    .map(|(i, j)| vec![idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)])
                    .collect();
                Mesh::Lagrange {
                    kind: QuadKind::Q4,
                    coords,
                    connectivity,
                }
            }
            PlateDiscretization::Q8 { nx, ny } => {
                // Fine grid of (2nx+1) x (2ny+1) points without element centers.
                let (gx, gy) = (2 * nx + 1, 2 * ny + 1);
                let keep = |i: usize, j: usize| !(i % 2 == 1 && j % 2 == 1);
                let mut number = vec![usize::MAX; gx * gy];
                let mut next = 0;
                for j in 0..gy {
                    for i in 0..gx {
                        if keep(i, j) {
                            number[j * gx + i] = next;
                            next += 1;
                        }
                    }
                }
                let coords = grid(model, gx, gy, keep);
                let at = |i: usize, j: usize| number[j * gx + i];
                let connectivity = (0..ny)
                    .flat_map(|j| (0..nx).map(move |i| (2 * i, 2 * j)))
                    .map(|(i, j)| {
                        vec![
                            at(i, j),
                            at(i + 2, j),
                            at(i + 2, j + 2),
                            at(i, j + 2),
                            at(i + 1, j),
                            at(i + 2, j + 1),
                            at(i + 1, j + 2),
                            at(i, j + 1),
                        ]
                    })
                    .collect();
                Mesh::Lagrange {
                    kind: QuadKind::Q8,
                    coords,
                    connectivity,
                }
            }
            PlateDiscretization::Nurbs {
                degree,
                control_x,
                control_y,
            } => {
                let kx = open_knot_vector(degree, control_x - degree, (0.0, 1.0))?;
                let ky = open_knot_vector(degree, control_y - degree, (0.0, 1.0))?;
                let sx: Vec<_> = kx.spans().into_iter().map(|(_, lo, hi)| (lo, hi)).collect();
                let sy: Vec<_> = ky.spans().into_iter().map(|(_, lo, hi)| (lo, hi)).collect();
                let spans = sy.iter().flat_map(|&y| sx.iter().map(move |&x| (x, y))).collect();
                Mesh::Nurbs {
                    patch: NurbsPatch::rectangle(kx, ky, model.a, model.b)?,
                    spans,
                }
            }
        })
    }

    fn n_entities(&self) -> usize {
        match self {
            Mesh::Lagrange { coords, .. } => coords.len(),
            Mesh::Nurbs { patch, .. } => patch.n_control(),
        }
    }

    fn n_elements(&self) -> usize {
        match self {
            Mesh::Lagrange { connectivity, .. } => connectivity.len(),
            Mesh::Nurbs { spans, .. } => spans.len(),
        }
    }

    fn coords(&self, entity: usize) -> [f64; 2] {
        match self {
            Mesh::Lagrange { coords, .. } => coords[entity],
            Mesh::Nurbs { patch, .. } => [patch.control_points[entity][0], patch.control_points[entity][1]],
        }
    }

    fn rule_size(&self) -> usize {
        match self {
            Mesh::Lagrange { kind: QuadKind::Q4, .. } => 2,
            Mesh::Lagrange { kind: QuadKind::Q8, .. } => 3,
            Mesh::Nurbs { patch, .. } => patch.knots[0].degree().max(patch.knots[1].degree()) + 1,
        }
    }

    fn entities(&self, element: usize) -> Result<Vec<usize>> {
        match self {
            Mesh::Lagrange { connectivity, .. } => Ok(connectivity[element].clone()),
            Mesh::Nurbs { patch, spans } => {
                let ((x0, x1), (y0, y1)) = spans[element];
                Ok(nurbs_eval(patch, [0.5 * (x0 + x1), 0.5 * (y0 + y1)])?.indices)
            }
        }
    }

    fn eval(&self, element: usize, xi: [f64; 2], shear: ShearInterpolation) -> Result<PointEval> {
        let (n, grads, sub, jac, parent_scale) = match self {
            Mesh::Lagrange {
                kind,
                coords,
                connectivity,
            } => {
                let s = quad_shape(*kind, xi)?;
                let nodes = &connectivity[element];
                let mut jac = [[0.0; 2]; 2];
                for (g, &node) in s.gradients.iter().zip(nodes) {
                    for a in 0..2 {
                        for b in 0..2 {
                            jac[a][b] += coords[node][a] * g[b];
                        }
                    }
                }
                let sub = match shear {
                    ShearInterpolation::Consistent => {
                        let ss = substitute_shear_shape(*kind, xi)?;
                        (ss.theta_x.values, ss.theta_y.values)
                    }
                    ShearInterpolation::Naive => (s.values.clone(), s.values.clone()),
                };
                (s.values, s.gradients, sub, jac, 1.0)
            }
            Mesh::Nurbs { patch, spans } => {
                let ((x0, x1), (y0, y1)) = spans[element];
                let (hx, hy) = (0.5 * (x1 - x0), 0.5 * (y1 - y0));
                let t = [x0 + (xi[0] + 1.0) * hx, y0 + (xi[1] + 1.0) * hy];
                let s = nurbs_eval(patch, t)?;
                let (_, jac) = patch.map(t)?;
                let sub = (s.values.clone(), s.values.clone());
                (s.values, s.gradients, sub, jac, hx * hy)
            }
        };
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if !(det > 0.0) {
            return Err(Error::DegenerateElement { element, det_j: det });
        }
        // Physical gradient: J^{-T} times parametric gradient.
        let inv = [[jac[1][1] / det, -jac[0][1] / det], [-jac[1][0] / det, jac[0][0] / det]];
        let dn = grads
            .iter()
            .map(|g| {
                [
                    inv[0][0] * g[0] + inv[1][0] * g[1],
                    inv[0][1] * g[0] + inv[1][1] * g[1],
                ]
            })
            .collect();
        Ok(PointEval {
            n,
            dn,
            sx: sub.0,
            sy: sub.1,
            dv: det * parent_scale,
        })
    }
}

fn grid(model: &PlateModel, gx: usize, gy: usize, keep: impl Fn(usize, usize) -> bool) -> Vec<[f64; 2]> {
    let mut out = Vec::new();
    for j in 0..gy {
        for i in 0..gx {
            if keep(i, j) {
                out.push([
                    model.a * i as f64 / (gx - 1) as f64,
                    model.b * j as f64 / (gy - 1) as f64,
                ]);
            }
        }
    }
    out
}

/// Element stiffness and mass with global unknown indices
/// (`5 i + f` for field `f` of node or control point `i`).
#[derive(Debug, Clone, PartialEq)]
pub struct PlateElement {
    pub dofs: Vec<usize>,
    pub k: DMatrix<f64>,
    pub m: DMatrix<f64>,
}

pub fn plate_element_matrices(element: usize, model: &PlateModel, cset: &ConstitutiveSet) -> Result<PlateElement> {
    model.validate()?;
    let mesh = Mesh::new(model)?;
    if element >= mesh.n_elements() {
        return Err(Error::InvalidModel(format!("plate has no element {element}")));
    }
    element_on_mesh(element, model, cset, &mesh)
}

fn element_on_mesh(element: usize, model: &PlateModel, cset: &ConstitutiveSet, mesh: &Mesh) -> Result<PlateElement> {
    let entities = mesh.entities(element)?;
    let nn = entities.len();
    let nd = DOFS_PER_NODE * nn;
    let mu = model.nonlocal.mu();
    let mut k = DMatrix::zeros(nd, nd);
    let mut m = DMatrix::zeros(nd, nd);
    let rule = gauss_rule(mesh.rule_size())?;

    let mut bp = DMatrix::zeros(3, nd);
    let mut bb = DMatrix::zeros(3, nd);
    let mut bs = DMatrix::zeros(2, nd);
    let a_e = DMatrix::from_fn(3, 3, |i, j| cset.a_e[(i, j)]);
    let b_be = DMatrix::from_fn(3, 3, |i, j| cset.b_be[(i, j)]);
    let d_b = DMatrix::from_fn(3, 3, |i, j| cset.d_b[(i, j)]);
    let e_s = DMatrix::from_fn(2, 2, |i, j| cset.e_s[(i, j)]);

    for (x, y, w) in rule.tensor() {
        let p = mesh.eval(element, [x, y], model.shear)?;
        if p.n.len() != nn {
            return Err(Error::InvalidModel(format!("element {element} changes support inside the span")));
        }
        let f = w * p.dv;
        bp.fill(0.0);
        bb.fill(0.0);
        bs.fill(0.0);
        for a in 0..nn {
            let c = DOFS_PER_NODE * a;
            let [dx, dy] = p.dn[a];
            bp[(0, c + U0)] = dx;
            bp[(1, c + V0)] = dy;
            bp[(2, c + U0)] = dy;
            bp[(2, c + V0)] = dx;
            bb[(0, c + TX)] = dx;
            bb[(1, c + TY)] = dy;
            bb[(2, c + TX)] = dy;
            bb[(2, c + TY)] = dx;
            bs[(0, c + W0)] = dx;
            bs[(0, c + TX)] = p.sx[a];
            bs[(1, c + W0)] = dy;
            bs[(1, c + TY)] = p.sy[a];
        }
        let coupling = bp.transpose() * &b_be * &bb;
        k += (bp.transpose() * &a_e * &bp
            + &coupling
            + coupling.transpose()
            + bb.transpose() * &d_b * &bb
            + bs.transpose() * &e_s * &bs)
            * f;

        for a in 0..nn {
            for b in 0..nn {
                let g = p.n[a] * p.n[b] + mu * (p.dn[a][0] * p.dn[b][0] + p.dn[a][1] * p.dn[b][1]);
                let (ca, cb) = (DOFS_PER_NODE * a, DOFS_PER_NODE * b);
                for fld in [U0, V0, W0] {
                    m[(ca + fld, cb + fld)] += cset.i11 * g * f;
                }
                for fld in [TX, TY] {
                    m[(ca + fld, cb + fld)] += cset.i22 * g * f;
                }
                for (u, t) in [(U0, TX), (V0, TY)] {
                    m[(ca + u, cb + t)] += cset.i12 * g * f;
                    m[(ca + t, cb + u)] += cset.i12 * g * f;
                }
            }
        }
    }
    let dofs = entities
        .iter()
        .flat_map(|&i| (0..DOFS_PER_NODE).map(move |f| DOFS_PER_NODE * i + f))
        .collect();
    Ok(PlateElement { dofs, k, m })
}

/// Unknowns removed by the boundary conditions, ascending.
fn plate_constraints(model: &PlateModel, mesh: &Mesh) -> Vec<usize> {
    let tol = 1e-9 * model.a.max(model.b);
    let mut out = Vec::new();
    for i in 0..mesh.n_entities() {
        let [x, y] = mesh.coords(i);
        let on_x = x.abs() < tol || (x - model.a).abs() < tol;
        let on_y = y.abs() < tol || (y - model.b).abs() < tol;
        let mut fixed = [false; DOFS_PER_NODE];
        match model.bc {
            PlateBc::Cccc => {
                if on_x || on_y {
                    fixed = [true; DOFS_PER_NODE];
                }
            }
            PlateBc::Ssss | PlateBc::SsssHard => {
                fixed[W0] = on_x || on_y;
                if model.bc == PlateBc::SsssHard {
                    // Rotation about the edge normal stays free.
                    fixed[TY] |= on_x;
                    fixed[TX] |= on_y;
                }
                if x.abs() < tol && y.abs() < tol {
                    fixed[U0] = true;
                    fixed[V0] = true;
                }
                if (x - model.a).abs() < tol && y.abs() < tol {
                    fixed[V0] = true;
                }
            }
        }
        out.extend((0..DOFS_PER_NODE).filter(|&f| fixed[f]).map(|f| DOFS_PER_NODE * i + f));
    }
    out
}

pub fn assemble_plate(model: &PlateModel) -> Result<AssembledSystem> {
    model.validate()?;
    let cset = constitutive(model)?;
    let mesh = Mesh::new(model)?;
    let n = DOFS_PER_NODE * mesh.n_entities();
    let mut kt = TripletBuilder::new(n);
    let mut mt = TripletBuilder::new(n);
    for e in 0..mesh.n_elements() {
        let el = element_on_mesh(e, model, &cset, &mesh)?;
        kt.add_block(&el.dofs, &el.k);
        mt.add_block(&el.dofs, &el.m);
    }
    let dofs = (0..mesh.n_entities())
        .flat_map(|i| FIELDS.iter().map(move |&field| Dof { entity: i, field }))
        .collect();
    Ok(AssembledSystem {
        k: kt.build(),
        m: mt.build(),
        dofs,
        constrained: plate_constraints(model, &mesh),
        nondim: model.nondim(),
    })
}

/// Bending part `(w0, theta_x, theta_y)` of an assembled plate: the in-plane
/// unknowns join the constrained set. Fails unless the two groups are
/// uncoupled in both `K` and `M`.
pub fn flexural_part(sys: &AssembledSystem) -> Result<AssembledSystem> {
    let membrane = |i: usize| matches!(sys.dofs[i].field, Field::U0 | Field::V0);
    for mat in [&sys.k, &sys.m] {
        for i in 0..mat.n() {
            if mat.row(i).any(|(j, v)| membrane(i) != membrane(j) && v != 0.0) {
                return Err(Error::InvalidModel(
                    "membrane and bending unknowns are coupled; the flexural part is not separable".into(),
                ));
            }
        }
    }
    let mut constrained: Vec<usize> = sys.constrained.clone();
    constrained.extend((0..sys.n()).filter(|&i| membrane(i)));
    constrained.sort_unstable();
    constrained.dedup();
    Ok(AssembledSystem {
        constrained,
        ..sys.clone()
    })
}

/// Assembles the plate and keeps its flexural part.
pub fn assemble_plate_flexural(model: &PlateModel) -> Result<AssembledSystem> {
    flexural_part(&assemble_plate(model)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn square(disc: PlateDiscretization, mu: f64, bc: PlateBc) -> PlateModel {
        PlateModel::reference(10.0, 10.0, 1.0, mu, disc, bc).unwrap()
    }

    #[test]
    fn constitutive_values() {
        let m = square(PlateDiscretization::Q4 { nx: 2, ny: 2 }, 0.0, PlateBc::Ssss);
        let c = constitutive(&m).unwrap();
        assert_relative_eq!(c.d_b[(0, 0)], 30e6 / (12.0 * 0.91), max_relative = 1e-14);
        assert_eq!(c.b_be, Matrix3::zeros());
        assert_relative_eq!(c.e_s[(0, 0)], 5.0 / 6.0 * 30e6 / 2.6, max_relative = 1e-14);
        let mut m0 = m.clone();
        m0.nu = 0.0;
        let c0 = constitutive(&m0).unwrap();
        assert_eq!(c0.a_e[(0, 1)], 0.0);
        assert_eq!(c0.a_e[(0, 0)], 30e6);
        m0.nu = 0.5;
        assert!(constitutive(&m0).is_err());
    }

    #[test]
    fn q8_node_count() {
        let m = square(PlateDiscretization::Q8 { nx: 2, ny: 3 }, 0.0, PlateBc::Ssss);
        let sys = assemble_plate(&m).unwrap();
        // (5 * 7 - 2 * 3) nodes
        assert_eq!(sys.n(), 5 * 29);
    }

    #[test]
    fn constraint_sets() {
        let m = square(PlateDiscretization::Q4 { nx: 2, ny: 2 }, 0.0, PlateBc::Ssss);
        let soft = assemble_plate(&m).unwrap().constrained;
        // 8 boundary deflections plus 3 membrane pins.
        assert_eq!(soft.len(), 11);
        let mut hard = m.clone();
        hard.bc = PlateBc::SsssHard;
        assert_eq!(assemble_plate(&hard).unwrap().constrained.len(), 11 + 8 + 4);
        let mut cl = m;
        cl.bc = PlateBc::Cccc;
        assert_eq!(assemble_plate(&cl).unwrap().constrained.len(), 40);
    }

    #[test]
    fn w_translation_is_zero_energy() {
        for disc in [
            PlateDiscretization::Q4 { nx: 2, ny: 2 },
            PlateDiscretization::Q8 { nx: 2, ny: 2 },
            PlateDiscretization::Nurbs {
                degree: 3,
                control_x: 5,
                control_y: 5,
            },
        ] {
            let sys = assemble_plate(&square(disc, 1.0, PlateBc::Ssss)).unwrap();
            let v: Vec<f64> = (0..sys.n()).map(|i| if i % 5 == W0 { 1.0 } else { 0.0 }).collect();
            assert!(sys.k.bilinear(&v, &v).abs() < 1e-6);
        }
    }
}
