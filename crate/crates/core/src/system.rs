use serde::{Deserialize, Serialize};

use crate::eigen::{self, ModalResult, SolverPath};
use crate::post::Nondim;
use crate::sparse::CsrMatrix;
use crate::Result;

/// Physical meaning of one unknown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Field {
    /// Axial displacement of a rod node.
    U,
    /// Amplitude of the sign enrichment at a rod node.
    Enriched,
    /// Beam deflection.
    W,
    /// Beam cross-section rotation.
    Phi,
    U0,
    V0,
    W0,
    ThetaX,
    ThetaY,
}

/// Unknown `index` belongs to node or control point `entity`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dof {
    pub entity: usize,
    pub field: Field,
}

/// Global stiffness and mass with their unknown map and the unknowns to be
/// eliminated by the boundary conditions.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub k: CsrMatrix,
    pub m: CsrMatrix,
    pub dofs: Vec<Dof>,
    pub constrained: Vec<usize>,
    pub nondim: Nondim,
}

impl AssembledSystem {
    pub fn n(&self) -> usize {
        self.k.n()
    }

    /// Constrains, solves for the `n_modes` lowest modes and fills in the
    /// nondimensional frequencies.
    pub fn solve(&self, n_modes: usize) -> Result<ModalResult> {
        self.solve_with(n_modes, SolverPath::Auto)
    }

    pub fn solve_with(&self, n_modes: usize, path: SolverPath) -> Result<ModalResult> {
        let reduced = eigen::apply_constraints(&self.k, &self.m, &self.constrained)?;
        let mut result = eigen::solve_smallest(&reduced, n_modes, path)?;
        let s = self.nondim.scale();
        result.dimensionless = result.omegas.iter().map(|w| w * s).collect();
        Ok(result)
    }
}
