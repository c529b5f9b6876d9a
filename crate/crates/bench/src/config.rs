//! Case configuration, read from TOML.
//!
//! The model is one of `[model.rod]`, `[model.beam]` or `[model.plate]`;
//! a discretization is written `{ nurbs = { degree = 3, n_elements = 82 } }`.
//!
//! Every table rejects keys it does not know. Omitted keys take the defaults
//! listed on each field; serializing a parsed config writes every field, so
//! a second parse yields the same value.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use nanovib_core::beam::{BeamBc, BeamDiscretization, BeamModel};
use nanovib_core::plate::{PlateBc, PlateDiscretization, PlateModel, ShearInterpolation};
use nanovib_core::rod::{CrackSpec, RodBc, RodModel};
use nanovib_core::NonlocalParams;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    /// Label prefixed to every case key. Default `"case"`.
    #[serde(default = "default_name")]
    pub name: String,
    /// Modes reported per case. Default 1.
    #[serde(default = "default_modes")]
    pub modes: usize,
    /// Table reproduced by `nanovib table --config`. Optional.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<u8>,
    pub model: ModelConfig,
    #[serde(default, skip_serializing_if = "SweepConfig::is_empty")]
    pub sweep: SweepConfig,
    #[serde(default, skip_serializing_if = "OutputConfig::is_default")]
    pub output: OutputConfig,
}

fn default_name() -> String {
    "case".into()
}

fn default_modes() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelConfig {
    Rod(RodConfig),
    Beam(BeamConfig),
    Plate(PlateConfig),
}

/// Axial rod. Defaults: unit length, `EA = rhoA = 1`, local, 100 elements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RodConfig {
    #[serde(default = "one")]
    pub length: f64,
    #[serde(default = "one")]
    pub ea: f64,
    #[serde(default = "one")]
    pub rho_a: f64,
    /// Internal length `e0a` in the units of `length`.
    #[serde(default)]
    pub e0a: f64,
    #[serde(default = "hundred")]
    pub n_elements: usize,
    pub bc: RodBc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crack: Option<CrackConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrackConfig {
    /// `C / L`.
    pub position: f64,
    /// `EA / (k L)`.
    pub severity: f64,
}

/// Timoshenko beam. Defaults: `L = 10`, `E = 30e6`, `nu = 0.3`, `rho = 1`,
/// `kappa = 5/6`, `mu = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamConfig {
    #[serde(default = "ten")]
    pub length: f64,
    /// `L / h`.
    pub aspect: f64,
    #[serde(default = "default_e")]
    pub e: f64,
    #[serde(default = "default_nu")]
    pub nu: f64,
    #[serde(default = "one")]
    pub rho: f64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    /// `(e0a)^2`.
    #[serde(default)]
    pub mu: f64,
    pub discretization: BeamMesh,
    pub bc: BeamBc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum BeamMesh {
    Lagrange { n_elements: usize },
    Nurbs { degree: usize, n_elements: usize },
}

/// Mindlin plate. Defaults: `a = b = 10`, `E = 30e6`, `nu = 0.3`, `rho = 1`,
/// `kappa = 5/6`, `mu = 0`, hard simple support, consistent shear.
/// Only flexural modes are reported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlateConfig {
    #[serde(default = "ten")]
    pub a: f64,
    #[serde(default = "ten")]
    pub b: f64,
    pub h: f64,
    #[serde(default = "default_e")]
    pub e: f64,
    #[serde(default = "default_nu")]
    pub nu: f64,
    #[serde(default = "one")]
    pub rho: f64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default)]
    pub mu: f64,
    pub discretization: PlateMesh,
    #[serde(default = "default_plate_bc")]
    pub bc: PlateBc,
    #[serde(default)]
    pub shear: ShearInterpolation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum PlateMesh {
    Q4 { nx: usize, ny: usize },
    Q8 { nx: usize, ny: usize },
    Nurbs { degree: usize, control_x: usize, control_y: usize },
}

fn one() -> f64 {
    1.0
}
fn ten() -> f64 {
    10.0
}
fn hundred() -> usize {
    100
}
fn default_e() -> f64 {
    30e6
}
fn default_nu() -> f64 {
    0.3
}
fn default_kappa() -> f64 {
    5.0 / 6.0
}
fn default_plate_bc() -> PlateBc {
    PlateBc::SsssHard
}

/// Sweep axes; the cases are the Cartesian product of the non-empty ones.
///
/// `mu` is `(e0a)^2` for every model. `length` scales the whole plate,
/// keeping `a/b` and `a/h`. `aspect` is `L/h` (beam) or `a/h` (plate).
/// `position` and `severity` edit the rod crack. `mesh` sets the element
/// count (rod, beam, Q4/Q8 per direction) or control points per direction
/// (NURBS plate). `degree` sets the NURBS degree.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mu: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub length: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aspect: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub position: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub severity: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mesh: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub degree: Vec<usize>,
}

impl SweepConfig {
    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
            && self.length.is_empty()
            && self.aspect.is_empty()
            && self.position.is_empty()
            && self.severity.is_empty()
            && self.mesh.is_empty()
            && self.degree.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// CSV destination; `--out` overrides it. Stdout when neither is set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    /// JSON summary destination. Defaults to the CSV path with `.json`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
    /// Also solve the local (`mu = 0`) twin of each case and report the ratio.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub ratio: bool,
}

impl OutputConfig {
    pub fn is_default(&self) -> bool {
        *self == Self::default()
    }
}

impl CaseConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let cfg: CaseConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> anyhow::Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// Field-level checks that serde cannot express.
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.modes == 0 {
            bail!("modes: must be at least 1");
        }
        if let Some(t) = self.table {
            if !(1..=6).contains(&t) {
                bail!("table: {t} is not one of 1..=6");
            }
        }
        let s = &self.sweep;
        let rod = matches!(self.model, ModelConfig::Rod(_));
        if !rod && !(s.position.is_empty() && s.severity.is_empty()) {
            bail!("sweep.position/sweep.severity: only a rod has a crack");
        }
        if rod && !s.aspect.is_empty() {
            bail!("sweep.aspect: a rod has no thickness");
        }
        if let ModelConfig::Rod(r) = &self.model {
            if r.crack.is_none() && !(s.position.is_empty() && s.severity.is_empty()) {
                bail!("sweep.position/sweep.severity: model.crack must be given");
            }
        }
        if !s.degree.is_empty() && !self.model.is_nurbs() {
            bail!("sweep.degree: discretization is not NURBS");
        }
        if s.mu.iter().chain(&s.length).chain(&s.aspect).chain(&s.severity).any(|v| !v.is_finite()) {
            bail!("sweep: values must be finite");
        }
        // Build the base case so model-level errors surface at load time.
        self.model.build()?;
        Ok(())
    }
}

/// A fully specified structural model ready to assemble.
#[derive(Debug, Clone)]
pub enum Model {
    Rod(RodModel),
    Beam(BeamModel),
    Plate(PlateModel),
}

impl ModelConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelConfig::Rod(_) => "rod",
            ModelConfig::Beam(_) => "beam",
            ModelConfig::Plate(_) => "plate",
        }
    }

    pub fn is_nurbs(&self) -> bool {
        matches!(
            self,
            ModelConfig::Beam(BeamConfig { discretization: BeamMesh::Nurbs { .. }, .. })
                | ModelConfig::Plate(PlateConfig { discretization: PlateMesh::Nurbs { .. }, .. })
        )
    }

    pub fn bc_label(&self) -> String {
        let v = match self {
            ModelConfig::Rod(r) => serde_json::to_value(r.bc),
            ModelConfig::Beam(b) => serde_json::to_value(b.bc),
            ModelConfig::Plate(p) => serde_json::to_value(p.bc),
        };
        v.ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
    }

    /// `(e0a)^2`.
    pub fn mu(&self) -> f64 {
        match self {
            ModelConfig::Rod(r) => r.e0a * r.e0a,
            ModelConfig::Beam(b) => b.mu,
            ModelConfig::Plate(p) => p.mu,
        }
    }

    pub fn set_mu(&mut self, mu: f64) -> anyhow::Result<()> {
        if !(mu >= 0.0) {
            bail!("mu: {mu} must be >= 0");
        }
        match self {
            ModelConfig::Rod(r) => r.e0a = mu.sqrt(),
            ModelConfig::Beam(b) => b.mu = mu,
            ModelConfig::Plate(p) => p.mu = mu,
        }
        Ok(())
    }

    pub fn length(&self) -> f64 {
        match self {
            ModelConfig::Rod(r) => r.length,
            ModelConfig::Beam(b) => b.length,
            ModelConfig::Plate(p) => p.a,
        }
    }

    pub fn set_length(&mut self, length: f64) {
        match self {
            ModelConfig::Rod(r) => r.length = length,
            ModelConfig::Beam(b) => b.length = length,
            ModelConfig::Plate(p) => {
                let s = length / p.a;
                p.a = length;
                p.b *= s;
                p.h *= s;
            }
        }
    }

    pub fn aspect(&self) -> Option<f64> {
        match self {
            ModelConfig::Rod(_) => None,
            ModelConfig::Beam(b) => Some(b.aspect),
            ModelConfig::Plate(p) => Some(p.a / p.h),
        }
    }

    pub fn set_aspect(&mut self, aspect: f64) -> anyhow::Result<()> {
        match self {
            ModelConfig::Rod(_) => bail!("aspect: a rod has no thickness"),
            ModelConfig::Beam(b) => b.aspect = aspect,
            ModelConfig::Plate(p) => p.h = p.a / aspect,
        }
        Ok(())
    }

    pub fn crack(&self) -> Option<CrackConfig> {
        match self {
            ModelConfig::Rod(r) => r.crack,
            _ => None,
        }
    }

    pub fn crack_mut(&mut self) -> anyhow::Result<&mut CrackConfig> {
        match self {
            ModelConfig::Rod(RodConfig { crack: Some(c), .. }) => Ok(c),
            _ => bail!("crack: model has no crack"),
        }
    }

    /// Element count, or `NxM` for plates.
    pub fn mesh_label(&self) -> String {
        match self {
            ModelConfig::Rod(r) => r.n_elements.to_string(),
            ModelConfig::Beam(b) => match b.discretization {
                BeamMesh::Lagrange { n_elements } | BeamMesh::Nurbs { n_elements, .. } => n_elements.to_string(),
            },
            ModelConfig::Plate(p) => match p.discretization {
                PlateMesh::Q4 { nx, ny } | PlateMesh::Q8 { nx, ny } => format!("{nx}x{ny}"),
                PlateMesh::Nurbs { control_x, control_y, .. } => format!("{control_x}x{control_y}"),
            },
        }
    }

    pub fn set_mesh(&mut self, n: usize) {
        match self {
            ModelConfig::Rod(r) => r.n_elements = n,
            ModelConfig::Beam(b) => match &mut b.discretization {
                BeamMesh::Lagrange { n_elements } | BeamMesh::Nurbs { n_elements, .. } => *n_elements = n,
            },
            ModelConfig::Plate(p) => match &mut p.discretization {
                PlateMesh::Q4 { nx, ny } | PlateMesh::Q8 { nx, ny } => (*nx, *ny) = (n, n),
                PlateMesh::Nurbs { control_x, control_y, .. } => (*control_x, *control_y) = (n, n),
            },
        }
    }

    /// NURBS degree, if the discretization is NURBS.
    pub fn degree(&self) -> Option<usize> {
        match self {
            ModelConfig::Beam(BeamConfig { discretization: BeamMesh::Nurbs { degree, .. }, .. })
            | ModelConfig::Plate(PlateConfig { discretization: PlateMesh::Nurbs { degree, .. }, .. }) => Some(*degree),
            _ => None,
        }
    }

    pub fn set_degree(&mut self, p: usize) -> anyhow::Result<()> {
        match self {
            ModelConfig::Beam(BeamConfig { discretization: BeamMesh::Nurbs { degree, .. }, .. })
            | ModelConfig::Plate(PlateConfig { discretization: PlateMesh::Nurbs { degree, .. }, .. }) => *degree = p,
            _ => bail!("degree: discretization is not NURBS"),
        }
        Ok(())
    }

    pub fn build(&self) -> anyhow::Result<Model> {
        Ok(match self {
            ModelConfig::Rod(r) => {
                let crack = match r.crack {
                    Some(c) => Some(CrackSpec::new(c.position, c.severity).context("model.crack")?),
                    None => None,
                };
                let m = RodModel {
                    length: r.length,
                    ea: r.ea,
                    rho_a: r.rho_a,
                    nonlocal: NonlocalParams::new(r.e0a, r.length).context("model.e0a")?,
                    n_elements: r.n_elements,
                    crack,
                    bc: r.bc,
                };
                m.validate().context("model")?;
                Model::Rod(m)
            }
            ModelConfig::Beam(b) => {
                let m = BeamModel {
                    length: b.length,
                    aspect: b.aspect,
                    e: b.e,
                    nu: b.nu,
                    rho: b.rho,
                    kappa: b.kappa,
                    nonlocal: NonlocalParams::from_mu(b.mu, b.length).context("model.mu")?,
                    discretization: match b.discretization {
                        BeamMesh::Lagrange { n_elements } => BeamDiscretization::Lagrange { n_elements },
                        BeamMesh::Nurbs { degree, n_elements } => BeamDiscretization::Nurbs { degree, n_elements },
                    },
                    bc: b.bc,
                };
                m.validate().context("model")?;
                Model::Beam(m)
            }
            ModelConfig::Plate(p) => {
                let m = PlateModel {
                    a: p.a,
                    b: p.b,
                    h: p.h,
                    e: p.e,
                    nu: p.nu,
                    rho: p.rho,
                    kappa: p.kappa,
                    nonlocal: NonlocalParams::from_mu(p.mu, p.a).context("model.mu")?,
                    discretization: match p.discretization {
                        PlateMesh::Q4 { nx, ny } => PlateDiscretization::Q4 { nx, ny },
                        PlateMesh::Q8 { nx, ny } => PlateDiscretization::Q8 { nx, ny },
                        PlateMesh::Nurbs { degree, control_x, control_y } => {
                            PlateDiscretization::Nurbs { degree, control_x, control_y }
                        }
                    },
                    bc: p.bc,
                    shear: p.shear,
                };
                m.validate().context("model")?;
                Model::Plate(m)
            }
        })
    }
}
