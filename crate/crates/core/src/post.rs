//! Nondimensional frequencies and nonlocal-to-local ratios.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Nondimensionalization convention for each structural model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Nondim {
    /// `omega * L * sqrt(rho A / EA)`.
    Rod { length: f64, rho_a: f64, ea: f64 },
    /// `omega * L^2 * sqrt(rho A / EI)`.
    Beam { length: f64, rho_a: f64, ei: f64 },
    /// `omega * h * sqrt(rho / G)`.
    Plate { thickness: f64, rho: f64, shear_modulus: f64 },
}

impl Nondim {
    /// Factor `s` with `Omega = s * omega`.
    pub fn scale(&self) -> f64 {
        match *self {
            Nondim::Rod { length, rho_a, ea } => length * (rho_a / ea).sqrt(),
            Nondim::Beam { length, rho_a, ei } => length * length * (rho_a / ei).sqrt(),
            Nondim::Plate {
                thickness,
                rho,
                shear_modulus,
            } => thickness * (rho / shear_modulus).sqrt(),
        }
    }
}

pub fn nondimensionalize(omega: f64, kind: &Nondim) -> f64 {
    omega * kind.scale()
}

/// `Omega_NL / Omega_L`.
pub fn frequency_ratio(nonlocal: f64, local: f64) -> Result<f64> {
    if local == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok(nonlocal / local)
}
