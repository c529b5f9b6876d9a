use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Internal length data shared by every model.
///
/// `mu = (e0 a)^2` carries units of length squared; `mu_bar` is its
/// dimensionless form relative to the external length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonlocalParams {
    e0a: f64,
    l_ext: f64,
}

impl NonlocalParams {
    pub fn new(e0a: f64, l_ext: f64) -> Result<Self> {
        if !(e0a >= 0.0) || !e0a.is_finite() {
            return Err(Error::InvalidModel(format!("e0a must be finite and >= 0, got {e0a}")));
        }
        if !(l_ext > 0.0) || !l_ext.is_finite() {
            return Err(Error::InvalidModel(format!("external length must be > 0, got {l_ext}")));
        }
        Ok(Self { e0a, l_ext })
    }

    pub fn local(l_ext: f64) -> Result<Self> {
        Self::new(0.0, l_ext)
    }

    pub fn from_mu(mu: f64, l_ext: f64) -> Result<Self> {
        if !(mu >= 0.0) {
            return Err(Error::InvalidModel(format!("mu must be >= 0, got {mu}")));
        }
        Self::new(mu.sqrt(), l_ext)
    }

    /// From the ratio `e0a / l_ext`.
    pub fn from_scaled(e0a_over_l: f64, l_ext: f64) -> Result<Self> {
        Self::new(e0a_over_l * l_ext, l_ext)
    }

    pub fn e0a(&self) -> f64 {
        self.e0a
    }

    pub fn l_ext(&self) -> f64 {
        self.l_ext
    }

    pub fn mu(&self) -> f64 {
        self.e0a * self.e0a
    }

    pub fn mu_bar(&self) -> f64 {
        self.mu() / (self.l_ext * self.l_ext)
    }

    pub fn is_local(&self) -> bool {
        self.e0a == 0.0
    }

    /// Same internal length, zero nonlocality.
    pub fn to_local(self) -> Self {
        Self { e0a: 0.0, ..self }
    }
}
