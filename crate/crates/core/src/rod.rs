//! Axial vibration of a nonlocal rod, optionally cracked.
//!
//! Weak form of `EA u'' = (1 - mu d^2/dx^2) rhoA u_tt` after integrating
//! both sides by parts:
//!
//! ```text
//! K = int EA N' N'^T dx            (+ k [[u]] [[v]] at a crack)
//! M = int rhoA (N N^T + mu N' N'^T) dx
//! ```
//!
//! A crack at `x = C` is a linear spring of stiffness `k = EA / (K L)`
//! bridging the faces. The displacement jump is carried by a shifted sign
//! enrichment on the two nodes of the cut element:
//! `u = sum N_i u_i + sum_{cut} N_i (psi(x) - psi(x_i)) a_i`,
//! `psi(x) = sign(x - C)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::basis::lagrange_1d;
use crate::post::Nondim;
use crate::quadrature::gauss_rule;
use crate::sparse::TripletBuilder;
use crate::system::{AssembledSystem, Dof, Field};
use crate::{Error, NonlocalParams, Result};

/// Relative shift applied to a crack that falls exactly on a node.
pub const NODE_TIE_BREAK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RodBc {
    ClampedFree,
    ClampedClamped,
}

/// Crack position `b = C / L` and severity `K = EA / (k L)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrackSpec {
    pub position: f64,
    pub severity: f64,
}

impl CrackSpec {
    pub fn new(position: f64, severity: f64) -> Result<Self> {
        if !(position > 0.0 && position < 1.0) {
            return Err(Error::InvalidModel(format!("crack position {position} must lie in (0, 1)")));
        }
        if !(severity >= 0.0) {
            return Err(Error::InvalidModel(format!("crack severity {severity} must be >= 0")));
        }
        Ok(Self { position, severity })
    }

    /// Spring stiffness `EA / (K L)`; infinite for an intact section.
    pub fn spring_stiffness(&self, ea: f64, length: f64) -> f64 {
        if self.severity == 0.0 {
            f64::INFINITY
        } else {
            ea / (self.severity * length)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RodModel {
    pub length: f64,
    pub ea: f64,
    pub rho_a: f64,
    pub nonlocal: NonlocalParams,
    pub n_elements: usize,
    pub crack: Option<CrackSpec>,
    pub bc: RodBc,
}

impl RodModel {
    /// Unit-property rod (`EA = rhoA = 1`) of the given length.
    pub fn unit(length: f64, n_elements: usize, bc: RodBc) -> Result<Self> {
        let m = Self {
            length,
            ea: 1.0,
            rho_a: 1.0,
            nonlocal: NonlocalParams::local(length)?,
            n_elements,
            crack: None,
            bc,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn with_mu_bar(mut self, mu_bar: f64) -> Result<Self> {
        self.nonlocal = NonlocalParams::from_mu(mu_bar * self.length * self.length, self.length)?;
        Ok(self)
    }

    pub fn with_crack(mut self, crack: Option<CrackSpec>) -> Self {
        self.crack = crack;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.ea > 0.0 && self.rho_a > 0.0) {
            return Err(Error::InvalidModel("rod length, EA and rhoA must be positive".into()));
        }
        if self.n_elements < 2 {
            return Err(Error::InvalidModel(format!("rod needs at least 2 elements, got {}", self.n_elements)));
        }
        if let Some(c) = self.crack {
            CrackSpec::new(c.position, c.severity)?;
        }
        Ok(())
    }

    pub fn element_length(&self) -> f64 {
        self.length / self.n_elements as f64
    }

    pub fn node_x(&self, i: usize) -> f64 {
        self.length * i as f64 / self.n_elements as f64
    }

    pub fn nondim(&self) -> Nondim {
        Nondim::Rod {
            length: self.length,
            rho_a: self.rho_a,
            ea: self.ea,
        }
    }

    /// Crack that takes part in the discretization: absent or intact
    /// (`K = 0`) cracks bypass the enrichment entirely.
    fn active_crack(&self) -> Option<CrackSpec> {
        self.crack.filter(|c| c.severity > 0.0)
    }
}

/// Standard and enriched unknowns of a cracked rod.
#[derive(Debug, Clone, PartialEq)]
pub struct EnrichedDofMap {
    pub n_standard: usize,
    /// `(node, unknown index)` for each enriched node.
    pub enriched: Vec<(usize, usize)>,
    /// Element containing the crack (0-based), if any.
    pub cut_element: Option<usize>,
    /// Physical crack location after the node tie-break.
    pub crack_x: Option<f64>,
}

impl EnrichedDofMap {
    pub fn n_total(&self) -> usize {
        self.n_standard + self.enriched.len()
    }
}

/// Locates the crack and numbers the enriched unknowns after the standard
/// ones.
pub fn enrich_dofs(model: &RodModel) -> Result<EnrichedDofMap> {
    model.validate()?;
    let n_standard = model.n_elements + 1;
    let Some(crack) = model.active_crack() else {
        return Ok(EnrichedDofMap {
            n_standard,
            enriched: vec![],
            cut_element: None,
            crack_x: None,
        });
    };
    let h = model.element_length();
    let mut x = crack.position * model.length;
    let s = x / h;
    if (s - s.round()).abs() < 1e-12 * model.n_elements as f64 {
        // On a node: nudge toward the rod's middle.
        let eps = NODE_TIE_BREAK * model.length;
        x = s.round() * h + if crack.position < 0.5 { eps } else { -eps };
    }
    let e = ((x / h).floor() as usize).min(model.n_elements - 1);
    Ok(EnrichedDofMap {
        n_standard,
        enriched: vec![(e, n_standard), (e + 1, n_standard + 1)],
        cut_element: Some(e),
        crack_x: Some(x),
    })
}

/// Stiffness and nonlocal mass of an uncut two-node element.
pub fn rod_element_matrices(element: usize, model: &RodModel) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let l = model.element_length();
    if !(l > 0.0) || element >= model.n_elements {
        return Err(Error::InvalidModel(format!("element {element} has zero length or does not exist")));
    }
    let mu = model.nonlocal.mu();
    let rule = gauss_rule(2)?;
    let mut ke = DMatrix::zeros(2, 2);
    let mut me = DMatrix::zeros(2, 2);
    let jac = l / 2.0;
    for (xi, w) in rule.iter() {
        let s = lagrange_1d(1, xi)?;
        let dn: Vec<f64> = s.gradients.iter().map(|g| g[0] / jac).collect();
        for a in 0..2 {
            for b in 0..2 {
                ke[(a, b)] += model.ea * dn[a] * dn[b] * w * jac;
                me[(a, b)] += model.rho_a * (s.values[a] * s.values[b] + mu * dn[a] * dn[b]) * w * jac;
            }
        }
    }
    Ok((ke, me))
}

/// Element matrices of the cut element over `[u_a, u_b, a_a, a_b]`,
/// integrated separately on each side of the crack.
pub fn cut_element_matrices(
    element: usize,
    model: &RodModel,
    dofmap: &EnrichedDofMap,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let crack_x = dofmap
        .crack_x
        .filter(|_| dofmap.cut_element == Some(element))
        .ok_or_else(|| Error::InvalidModel(format!("element {element} is not cut")))?;
    let (xa, xb) = (model.node_x(element), model.node_x(element + 1));
    let l = xb - xa;
    let mu = model.nonlocal.mu();
    let rule = gauss_rule(2)?;
    // psi(x_i) at the two nodes.
    let psi_nodes = [-1.0, 1.0];
    let mut ke = DMatrix::zeros(4, 4);
    let mut me = DMatrix::zeros(4, 4);
    for (lo, hi, psi) in [(xa, crack_x, -1.0), (crack_x, xb, 1.0)] {
        let half = (hi - lo) / 2.0;
        for (t, w) in rule.iter() {
            let x = lo + half * (t + 1.0);
            let xi = 2.0 * (x - xa) / l - 1.0;
            let s = lagrange_1d(1, xi)?;
            let mut n = [0.0; 4];
            let mut dn = [0.0; 4];
            for a in 0..2 {
                n[a] = s.values[a];
                dn[a] = s.gradients[a][0] * 2.0 / l;
                // psi is constant on the sub-interval.
                let shift = psi - psi_nodes[a];
                n[a + 2] = s.values[a] * shift;
                dn[a + 2] = dn[a] * shift;
            }
            for a in 0..4 {
                for b in 0..4 {
                    ke[(a, b)] += model.ea * dn[a] * dn[b] * w * half;
                    me[(a, b)] += model.rho_a * (n[a] * n[b] + mu * dn[a] * dn[b]) * w * half;
                }
            }
        }
    }
    Ok((ke, me))
}

/// Jump operator `[[u]] = j . [u_a, u_b, a_a, a_b]` at the crack.
pub fn jump_operator(model: &RodModel, dofmap: &EnrichedDofMap) -> Result<[f64; 4]> {
    let (e, x) = dofmap
        .cut_element
        .zip(dofmap.crack_x)
        .ok_or_else(|| Error::InvalidModel("rod has no active crack".into()))?;
    let xa = model.node_x(e);
    let xi = 2.0 * (x - xa) / model.element_length() - 1.0;
    let s = lagrange_1d(1, xi)?;
    // psi jumps from -1 to +1 across the crack; the nodal shifts cancel.
    Ok([0.0, 0.0, 2.0 * s.values[0], 2.0 * s.values[1]])
}

/// Spring energy `k/2 [[u]]^2` as a rank-one stiffness over the cut element's
/// four unknowns.
pub fn crack_spring_contribution(model: &RodModel, dofmap: &EnrichedDofMap) -> Result<DMatrix<f64>> {
    let crack = model
        .active_crack()
        .ok_or_else(|| Error::InvalidModel("spring requires a crack with K > 0".into()))?;
    let k = crack.spring_stiffness(model.ea, model.length);
    let j = jump_operator(model, dofmap)?;
    Ok(DMatrix::from_fn(4, 4, |a, b| if k.is_finite() { k * j[a] * j[b] } else { 0.0 }))
}

/// Global `K`, `M` and the boundary constraints of the rod.
pub fn assemble_rod(model: &RodModel) -> Result<AssembledSystem> {
    let map = enrich_dofs(model)?;
    let n = map.n_total();
    let mut kt = TripletBuilder::new(n);
    let mut mt = TripletBuilder::new(n);
    for e in 0..model.n_elements {
        if map.cut_element == Some(e) {
            let (ke, me) = cut_element_matrices(e, model, &map)?;
            let spring = crack_spring_contribution(model, &map)?;
            let dofs = [e, e + 1, map.enriched[0].1, map.enriched[1].1];
            kt.add_block(&dofs, &(ke + spring));
            mt.add_block(&dofs, &me);
        } else {
            let (ke, me) = rod_element_matrices(e, model)?;
            kt.add_block(&[e, e + 1], &ke);
            mt.add_block(&[e, e + 1], &me);
        }
    }
    let mut dofs: Vec<Dof> = (0..map.n_standard).map(|i| Dof { entity: i, field: Field::U }).collect();
    dofs.extend(map.enriched.iter().map(|&(node, _)| Dof {
        entity: node,
        field: Field::Enriched,
    }));
    let constrained = match model.bc {
        RodBc::ClampedFree => vec![0],
        RodBc::ClampedClamped => vec![0, model.n_elements],
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

    fn rod(n: usize, bc: RodBc) -> RodModel {
        RodModel::unit(1.0, n, bc).unwrap()
    }

    #[test]
    fn classical_consistent_mass() {
        let m = RodModel::unit(2.0, 2, RodBc::ClampedFree).unwrap();
        let (_, me) = rod_element_matrices(0, &m).unwrap();
        assert_abs_diff_eq!(me[(0, 0)], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(me[(0, 1)], 1.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn stiffness_scaling() {
        let m = rod(2, RodBc::ClampedFree);
        let (ke, _) = rod_element_matrices(1, &m).unwrap();
        assert_abs_diff_eq!(ke[(0, 0)], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(ke[(0, 1)], -2.0, epsilon = 1e-14);
    }

    #[test]
    fn nonlocal_mass_term() {
        // l = 0.1, mu = 0.01: correction mu rhoA / l = 0.1 on the [[1,-1],[-1,1]] pattern.
        let m = rod(10, RodBc::ClampedFree).with_mu_bar(0.01).unwrap();
        let (_, me) = rod_element_matrices(0, &m).unwrap();
        assert_abs_diff_eq!(me[(0, 0)], 0.1 / 3.0 + 0.1, epsilon = 1e-14);
        assert_abs_diff_eq!(me[(0, 1)], 0.1 / 6.0 - 0.1, epsilon = 1e-14);
    }

    #[test]
    fn crack_location_arithmetic() {
        let m = rod(100, RodBc::ClampedFree).with_crack(Some(CrackSpec::new(0.2002, 0.1144).unwrap()));
        let map = enrich_dofs(&m).unwrap();
        assert_eq!(map.cut_element, Some(20));
        assert_eq!(map.enriched.len(), 2);
        assert_eq!(map.n_total(), 103);
    }

    #[test]
    fn crack_on_node_moves_inward() {
        let m = rod(10, RodBc::ClampedFree).with_crack(Some(CrackSpec::new(0.3, 0.1).unwrap()));
        let map = enrich_dofs(&m).unwrap();
        assert_eq!(map.cut_element, Some(3));
        assert_abs_diff_eq!(map.crack_x.unwrap(), 0.3 + NODE_TIE_BREAK, epsilon = 1e-15);
        let m = rod(10, RodBc::ClampedFree).with_crack(Some(CrackSpec::new(0.7, 0.1).unwrap()));
        let map = enrich_dofs(&m).unwrap();
        assert_eq!(map.cut_element, Some(6));
    }

    #[test]
    fn intact_crack_bypasses_enrichment() {
        let m = rod(10, RodBc::ClampedFree).with_crack(Some(CrackSpec::new(0.35, 0.0).unwrap()));
        let map = enrich_dofs(&m).unwrap();
        assert!(map.enriched.is_empty());
        assert!(crack_spring_contribution(&m, &map).is_err());
    }

    #[test]
    fn rejects_bad_crack() {
        assert!(CrackSpec::new(0.0, 0.1).is_err());
        assert!(CrackSpec::new(1.0, 0.1).is_err());
        assert!(CrackSpec::new(0.5, -0.1).is_err());
    }

    #[test]
    fn cut_element_reduces_to_standard() {
        let m = rod(10, RodBc::ClampedFree)
            .with_mu_bar(0.02)
            .unwrap()
            .with_crack(Some(CrackSpec::new(0.437, 0.3).unwrap()));
        let map = enrich_dofs(&m).unwrap();
        let e = map.cut_element.unwrap();
        let (kc, mc) = cut_element_matrices(e, &m, &map).unwrap();
        let (ks, ms) = rod_element_matrices(e, &m).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                assert_abs_diff_eq!(kc[(a, b)], ks[(a, b)], epsilon = 1e-12);
                assert_abs_diff_eq!(mc[(a, b)], ms[(a, b)], epsilon = 1e-12);
            }
        }
        assert_abs_diff_eq!((&kc - kc.transpose()).abs().max(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!((&mc - mc.transpose()).abs().max(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn jump_from_both_sides() {
        // Evaluate the enriched field just left and right of the crack.
        let m = rod(10, RodBc::ClampedFree).with_crack(Some(CrackSpec::new(0.437, 0.3).unwrap()));
        let map = enrich_dofs(&m).unwrap();
        let e = map.cut_element.unwrap();
        let c = map.crack_x.unwrap();
        let a = [0.7, -0.4];
        let field = |x: f64| {
            let xi = 2.0 * (x - m.node_x(e)) / m.element_length() - 1.0;
            let s = lagrange_1d(1, xi).unwrap();
            let psi = (x - c).signum();
            s.values[0] * (psi + 1.0) * a[0] + s.values[1] * (psi - 1.0) * a[1]
        };
        let jump = field(c + 1e-12) - field(c - 1e-12);
        let j = jump_operator(&m, &map).unwrap();
        assert_abs_diff_eq!(jump, j[2] * a[0] + j[3] * a[1], epsilon = 1e-9);
    }

    #[test]
    fn spring_is_rank_one() {
        let m = rod(10, RodBc::ClampedFree).with_crack(Some(CrackSpec::new(0.2002, 0.1144).unwrap()));
        let map = enrich_dofs(&m).unwrap();
        let s = crack_spring_contribution(&m, &map).unwrap();
        let k = m.crack.unwrap().spring_stiffness(m.ea, m.length);
        assert_abs_diff_eq!(k, 1.0 / 0.1144, epsilon = 1e-12);
        let eig = s.symmetric_eigenvalues();
        let j = jump_operator(&m, &map).unwrap();
        let jn2: f64 = j.iter().map(|v| v * v).sum();
        let mut ev: Vec<f64> = eig.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        for v in &ev[..3] {
            assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-10);
        }
        assert_abs_diff_eq!(ev[3], k * jn2, epsilon = 1e-9);
    }

    #[test]
    fn clamped_free_local_fundamental() {
        let sys = assemble_rod(&rod(100, RodBc::ClampedFree)).unwrap();
        let r = sys.solve(1).unwrap();
        assert_abs_diff_eq!(r.dimensionless[0], std::f64::consts::FRAC_PI_2, epsilon = 1e-3);
    }
}
