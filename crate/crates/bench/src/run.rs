//! Single cases, parameter sweeps and mesh-convergence studies.

use anyhow::{bail, Context};
use nanovib_core::beam::assemble_beam;
use nanovib_core::oracle::{beta_uncracked, solve_char, CharEqProblem};
use nanovib_core::plate::assemble_plate_flexural;
use nanovib_core::rod::assemble_rod;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{CaseConfig, Model, ModelConfig};
use crate::report::{Check, Criterion, Quantity, ReportRow};

/// Nondimensional frequencies of the `modes` lowest modes.
pub fn solve_model(model: &ModelConfig, modes: usize) -> anyhow::Result<Vec<f64>> {
    let sys = match model.build()? {
        Model::Rod(m) => assemble_rod(&m)?,
        Model::Beam(m) => assemble_beam(&m)?,
        Model::Plate(m) => assemble_plate_flexural(&m)?,
    };
    Ok(sys.solve(modes)?.dimensionless)
}

/// One point of a sweep: indices into each axis give the ordering key.
#[derive(Debug, Clone)]
pub struct Cell {
    pub key: Vec<usize>,
    pub label: String,
    pub model: ModelConfig,
}

/// Cartesian product of the sweep axes in the order mu, length, aspect,
/// position, severity, mesh, degree. An empty sweep yields the base case.
pub fn expand(config: &CaseConfig) -> anyhow::Result<Vec<Cell>> {
    let s = &config.sweep;
    let mut cells = vec![Cell {
        key: Vec::new(),
        label: config.name.clone(),
        model: config.model.clone(),
    }];
    let mut axis = |name: &str, n: usize, apply: &dyn Fn(&mut ModelConfig, usize) -> anyhow::Result<String>| {
        if n == 0 {
            return Ok::<_, anyhow::Error>(());
        }
        let mut next = Vec::with_capacity(cells.len() * n);
        for c in &cells {
            for i in 0..n {
                let mut model = c.model.clone();
                let v = apply(&mut model, i).with_context(|| format!("sweep.{name}[{i}]"))?;
                let mut key = c.key.clone();
                key.push(i);
                next.push(Cell {
                    key,
                    label: format!("{}/{name}={v}", c.label),
                    model,
                });
            }
        }
        cells = next;
        Ok(())
    };
    axis("mu", s.mu.len(), &|m, i| m.set_mu(s.mu[i]).map(|_| s.mu[i].to_string()))?;
    axis("length", s.length.len(), &|m, i| {
        m.set_length(s.length[i]);
        Ok(s.length[i].to_string())
    })?;
    axis("aspect", s.aspect.len(), &|m, i| m.set_aspect(s.aspect[i]).map(|_| s.aspect[i].to_string()))?;
    axis("position", s.position.len(), &|m, i| {
        m.crack_mut()?.position = s.position[i];
        Ok(s.position[i].to_string())
    })?;
    axis("severity", s.severity.len(), &|m, i| {
        m.crack_mut()?.severity = s.severity[i];
        Ok(s.severity[i].to_string())
    })?;
    axis("mesh", s.mesh.len(), &|m, i| {
        m.set_mesh(s.mesh[i]);
        Ok(s.mesh[i].to_string())
    })?;
    axis("degree", s.degree.len(), &|m, i| m.set_degree(s.degree[i]).map(|_| s.degree[i].to_string()))?;
    for c in &cells {
        c.model.build().with_context(|| format!("case {}", c.label))?;
    }
    Ok(cells)
}

fn local_twin(model: &ModelConfig) -> ModelConfig {
    let mut m = model.clone();
    m.set_mu(0.0).expect("zero is a valid mu");
    m
}

fn rows_for(cell: &Cell, modes: usize, ratio: bool) -> anyhow::Result<Vec<ReportRow>> {
    let omegas = solve_model(&cell.model, modes).with_context(|| format!("case {}", cell.label))?;
    let local = if ratio {
        Some(solve_model(&local_twin(&cell.model), modes).with_context(|| format!("local twin of {}", cell.label))?)
    } else {
        None
    };
    Ok(omegas
        .iter()
        .enumerate()
        .map(|(i, &w)| base_row(&cell.label, &cell.model, i + 1, w, local.as_ref().map(|l| w / l[i])))
        .collect())
}

pub fn base_row(case: &str, model: &ModelConfig, mode: usize, omega: f64, ratio: Option<f64>) -> ReportRow {
    let crack = model.crack();
    ReportRow {
        case: case.into(),
        model: model.kind().into(),
        bc: model.bc_label(),
        mode,
        mu: model.mu(),
        length: model.length(),
        aspect: model.aspect(),
        position: crack.map(|c| c.position),
        severity: crack.map(|c| c.severity),
        mesh: model.mesh_label(),
        degree: model.degree(),
        omega,
        ratio,
        quantity: Quantity::Omega,
        check: None,
    }
}

/// The base case alone; sweep axes are ignored.
pub fn run_case(config: &CaseConfig) -> anyhow::Result<Vec<ReportRow>> {
    let cell = Cell {
        key: Vec::new(),
        label: config.name.clone(),
        model: config.model.clone(),
    };
    rows_for(&cell, config.modes, config.output.ratio)
}

/// Every sweep cell, solved concurrently and reported in key order.
pub fn run_sweep(config: &CaseConfig) -> anyhow::Result<Vec<ReportRow>> {
    if config.sweep.is_empty() {
        bail!("sweep: no axis given");
    }
    let cells = expand(config)?;
    let mut solved: Vec<(Vec<usize>, Vec<ReportRow>)> = cells
        .par_iter()
        .map(|c| rows_for(c, config.modes, config.output.ratio).map(|r| (c.key.clone(), r)))
        .collect::<anyhow::Result<_>>()?;
    solved.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(solved.into_iter().flat_map(|(_, r)| r).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceKind {
    /// Rod characteristic-equation root.
    Oracle,
    /// Richardson extrapolation of the three finest levels.
    Extrapolated,
    /// Finest level as is (extrapolation not possible).
    Finest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeConvergence {
    pub mode: usize,
    pub reference: f64,
    pub reference_kind: ReferenceKind,
    pub errors: Vec<f64>,
    /// `None` when the error sequence is not monotone.
    pub order: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub rows: Vec<ReportRow>,
    pub modes: Vec<ModeConvergence>,
}

impl ConvergenceReport {
    pub fn criteria(&self) -> Vec<Criterion> {
        self.modes
            .iter()
            .map(|m| Criterion {
                name: format!("mode {} order", m.mode),
                pass: m.order.is_some(),
                detail: match m.order {
                    Some(p) => format!("order {p:.3} against {:?} reference {}", m.reference_kind, m.reference),
                    None => "error sequence not monotone; no order estimate".into(),
                },
            })
            .collect()
    }
}

/// Rod reference roots from the characteristic equation.
fn rod_reference(model: &ModelConfig, modes: usize) -> anyhow::Result<Vec<f64>> {
    let ModelConfig::Rod(r) = model else {
        unreachable!("caller checks the model kind")
    };
    let mu_bar = (r.e0a / r.length).powi(2);
    match r.crack {
        Some(c) if c.severity > 0.0 => {
            let roots = solve_char(&CharEqProblem::new(r.bc, c.severity, c.position, mu_bar)?, modes)?;
            if roots.shortfall {
                bail!("oracle found only {} of {modes} roots below the nonlocal cutoff", roots.roots.len());
            }
            Ok(roots.roots)
        }
        _ => (1..=modes).map(|n| Ok(beta_uncracked(r.bc, n, mu_bar)?)).collect(),
    }
}

/// Log-ratio order from the two finest errors; `None` unless the errors
/// shrink strictly at every level.
fn observed_order(meshes: &[usize], errors: &[f64]) -> Option<f64> {
    if errors.windows(2).any(|w| !(w[1] < w[0])) || errors.iter().any(|&e| !(e > 0.0)) {
        return None;
    }
    let n = errors.len();
    let r = meshes[n - 1] as f64 / meshes[n - 2] as f64;
    Some((errors[n - 2] / errors[n - 1]).ln() / r.ln())
}

/// Per-level frequencies against the rod oracle or, for beams and plates,
/// the Richardson extrapolation of the three finest levels.
pub fn convergence_study(config: &CaseConfig) -> anyhow::Result<ConvergenceReport> {
    let meshes = &config.sweep.mesh;
    if meshes.len() < 3 {
        bail!("sweep.mesh: a convergence study needs at least 3 levels");
    }
    if meshes.windows(2).any(|w| w[1] <= w[0]) {
        bail!("sweep.mesh: levels must increase strictly");
    }
    let mut only_mesh = config.sweep.clone();
    only_mesh.mesh.clear();
    if !only_mesh.is_empty() {
        bail!("sweep: a convergence study varies the mesh only");
    }
    let cells = expand(config)?;
    let levels: Vec<Vec<f64>> = cells
        .par_iter()
        .map(|c| solve_model(&c.model, config.modes).with_context(|| format!("case {}", c.label)))
        .collect::<anyhow::Result<_>>()?;

    let oracle = match config.model {
        ModelConfig::Rod(_) => Some(rod_reference(&config.model, config.modes)?),
        _ => None,
    };
    let mut summaries = Vec::new();
    for mode in 0..config.modes {
        let values: Vec<f64> = levels.iter().map(|l| l[mode]).collect();
        let (reference, kind, order) = match &oracle {
            Some(o) => {
                let errs: Vec<f64> = values.iter().map(|v| (v - o[mode]).abs()).collect();
                (o[mode], ReferenceKind::Oracle, observed_order(meshes, &errs))
            }
            None => richardson(meshes, &values),
        };
        let errors: Vec<f64> = values.iter().map(|v| (v - reference).abs()).collect();
        summaries.push(ModeConvergence {
            mode: mode + 1,
            reference,
            reference_kind: kind,
            errors,
            order,
        });
    }
    let mut rows = Vec::new();
    for (cell, omegas) in cells.iter().zip(&levels) {
        for (mode, s) in summaries.iter().enumerate() {
            let mut row = base_row(&cell.label, &cell.model, mode + 1, omegas[mode], None);
            row.check = Some(Check {
                reference: s.reference,
                source: match s.reference_kind {
                    ReferenceKind::Oracle => "oracle",
                    ReferenceKind::Extrapolated => "extrapolated",
                    ReferenceKind::Finest => "finest",
                }
                .into(),
                tolerance: None,
            });
            rows.push(row);
        }
    }
    Ok(ConvergenceReport { rows, modes: summaries })
}

/// Extrapolated limit and order from the three finest levels, which must
/// share one refinement ratio.
fn richardson(meshes: &[usize], values: &[f64]) -> (f64, ReferenceKind, Option<f64>) {
    let n = values.len();
    let finest = values[n - 1];
    let (m1, m2, m3) = (meshes[n - 3] as f64, meshes[n - 2] as f64, meshes[n - 1] as f64);
    let r = m2 / m1;
    let d1 = values[n - 2] - values[n - 3];
    let d2 = values[n - 1] - values[n - 2];
    let same_ratio = ((m3 / m2) - r).abs() < 1e-12 * r;
    if !same_ratio || d1 == 0.0 || d2 == 0.0 || d1.signum() != d2.signum() || d2.abs() >= d1.abs() {
        return (finest, ReferenceKind::Finest, None);
    }
    let p = (d1 / d2).ln() / r.ln();
    (finest + d2 / (r.powf(p) - 1.0), ReferenceKind::Extrapolated, Some(p))
}
