//! Reference frequency tables and their reproduction.
//!
//! Every cell the crate can model is recomputed and compared against its
//! tabulated value. Columns that come from closed-form or transcendental
//! solutions are checked with an absolute tolerance, columns from another
//! discretization with a relative one.

use anyhow::bail;
use nanovib_core::beam::BeamBc;
use nanovib_core::oracle::{solve_char, CharEqProblem};
use nanovib_core::plate::{PlateBc, ShearInterpolation};
use nanovib_core::rod::RodBc;
use rayon::prelude::*;

use crate::config::{BeamConfig, BeamMesh, CrackConfig, ModelConfig, PlateConfig, PlateMesh, RodConfig};
use crate::report::{Check, Quantity, ReportRow, ToleranceClass};
use crate::run::{base_row, solve_model};

pub const ROD_ELEMENTS: usize = 100;
pub const BEAM_NURBS: BeamMesh = BeamMesh::Nurbs { degree: 3, n_elements: 82 };
pub const BEAM_LAGRANGE: BeamMesh = BeamMesh::Lagrange { n_elements: 100 };
pub const PLATE_Q4: PlateMesh = PlateMesh::Q4 { nx: 40, ny: 40 };
pub const PLATE_Q8: PlateMesh = PlateMesh::Q8 { nx: 8, ny: 8 };
pub const PLATE_NURBS: PlateMesh = PlateMesh::Nurbs { degree: 3, control_x: 5, control_y: 5 };

pub const T1_CRACK: CrackConfig = CrackConfig { position: 0.2002, severity: 0.1144 };
pub const T1_XFEM: [f64; 4] = [1.4228, 4.4429, 7.8559, 10.4289];
pub const T1_REF_A: [f64; 4] = [1.4278, 4.5579, 7.8540, 10.4471];
/// Third entry tabulated as 8.8540; read as 7.8540.
pub const T1_REF_B: [f64; 4] = [1.4278, 4.5576, 7.8540, 10.4486];

pub const T2_POSITION: f64 = 0.25;
pub const T2_E0A: [f64; 2] = [0.2, 0.4];
pub const T2_SEVERITY: [f64; 3] = [0.065, 0.35, 2.0];
pub const T2_XFEM: [[f64; 3]; 2] = [[2.6144, 2.4649, 2.1503], [1.9455, 1.9060, 1.7660]];
pub const T2_REF: [[f64; 3]; 2] = [[2.6173, 2.4668, 2.1506], [1.9467, 1.9071, 1.7663]];

pub const BEAM_ASPECTS: [f64; 3] = [100.0, 20.0, 10.0];
pub const T3_MU: [f64; 3] = [0.0, 1.0, 5.0];
/// `[a/h][mu]`.
pub const T3_NURBS: [[f64; 3]; 3] = [[9.8680, 9.4144, 8.0748], [9.8281, 9.3763, 8.0421], [9.7075, 9.2612, 7.9434]];
pub const T3_FEM: [[f64; 3]; 3] = [[9.8630, 9.4096, 8.0706], [9.7955, 9.3452, 8.0154], [9.5886, 9.1460, 7.8445]];

pub const T4_MU: [f64; 4] = [0.0, 1.0, 2.0, 5.0];
pub const T4_BC: [BeamBc; 3] = [BeamBc::Ss, BeamBc::Cc, BeamBc::Cf];
/// `[a/h][mu][bc]`. The last cell is a tabulated frequency, not pi.
#[allow(clippy::approx_constant)]
pub const T4: [[[f64; 3]; 4]; 3] = [
    [[9.8680, 22.3892, 3.5178], [9.4144, 21.1228, 3.4385], [9.0180, 20.0450, 3.3639], [8.0748, 17.5791, 3.1646]],
    [[9.8281, 21.9967, 3.5091], [9.3763, 20.7595, 3.4303], [8.9816, 19.7049, 3.3561], [8.0421, 17.2877, 3.1577]],
    [[9.7075, 20.9726, 3.4884], [9.2612, 19.8083, 3.4107], [8.8713, 18.8124, 3.3375], [7.9434, 16.5200, 3.1415]],
];

pub const PLATE_A: f64 = 10.0;
/// Plate widths `b` for the two planform rows.
pub const T5_B: [f64; 2] = [10.0, 20.0];
pub const T5_ASPECT: [f64; 2] = [10.0, 20.0];
pub const T5_MU: [f64; 3] = [0.0, 1.0, 5.0];
/// `[planform][a/h][mu][Q4, Q8, NURBS]`, with the tabulated 0.4620 read
/// as 0.0462.
pub const T5: [[[[f64; 3]; 3]; 2]; 2] = [
    [
        [[0.0927, 0.0926, 0.0929], [0.0847, 0.0846, 0.0849], [0.0657, 0.0657, 0.0659]],
        [[0.0240, 0.0238, 0.0239], [0.0219, 0.0218, 0.0219], [0.0170, 0.0169, 0.0170]],
    ],
    [
        [[0.0588, 0.0587, 0.0590], [0.0554, 0.0554, 0.0556], [0.0462, 0.0462, 0.0464]],
        [[0.0150, 0.0150, 0.0151], [0.0141, 0.0141, 0.0141], [0.0118, 0.0118, 0.0118]],
    ],
];

pub const T6_H: f64 = 0.34;
pub const T6_MU: [f64; 4] = [0.0, 1.0, 2.0, 3.0];
/// `[mu][Q4, Q8, NURBS]`.
pub const T6: [[f64; 3]; 4] = [[1.0, 1.0, 1.0], [0.9099, 0.9107, 0.9107], [0.8393, 0.8468, 0.8468], [0.7857, 0.7928, 0.7928]];

pub const TOL_T1_ORACLE: f64 = 5e-4;
pub const TOL_T1_ORACLE_B: f64 = 2e-3;
pub const TOL_T1_XFEM_FIRST: f64 = 5e-3;
pub const TOL_T1_XFEM_HIGHER: f64 = 3e-2;
pub const TOL_T2_ORACLE: f64 = 1e-3;
pub const TOL_T2_XFEM: f64 = 5e-3;
pub const TOL_T3_NURBS: f64 = 1e-3;
pub const TOL_T3_FEM: f64 = 3e-3;
pub const TOL_T4: f64 = 2e-3;
pub const TOL_T5: f64 = 1e-2;
pub const TOL_T6: f64 = 3e-3;
pub const TOL_T6_Q4: f64 = 1e-2;

#[derive(Debug, Clone)]
pub struct TableReport {
    pub id: u8,
    pub rows: Vec<ReportRow>,
    /// Reading decisions applied to tabulated values.
    pub flags: Vec<String>,
}

impl TableReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass() != Some(false))
    }
}

fn check(reference: f64, source: &str, class: ToleranceClass, tol: f64) -> Option<Check> {
    Some(Check {
        reference,
        source: source.into(),
        tolerance: Some((class, tol)),
    })
}

pub fn rod(bc: RodBc, e0a: f64, crack: CrackConfig) -> ModelConfig {
    ModelConfig::Rod(RodConfig {
        length: 1.0,
        ea: 1.0,
        rho_a: 1.0,
        e0a,
        n_elements: ROD_ELEMENTS,
        bc,
        crack: Some(crack),
    })
}

pub fn beam(aspect: f64, mu: f64, mesh: BeamMesh, bc: BeamBc) -> ModelConfig {
    ModelConfig::Beam(BeamConfig {
        length: 10.0,
        aspect,
        e: 30e6,
        nu: 0.3,
        rho: 1.0,
        kappa: 5.0 / 6.0,
        mu,
        discretization: mesh,
        bc,
    })
}

/// Plate tables use the hard simple support (tangential rotation held).
pub fn plate(b: f64, h: f64, mu: f64, mesh: PlateMesh) -> ModelConfig {
    ModelConfig::Plate(PlateConfig {
        a: PLATE_A,
        b,
        h,
        e: 30e6,
        nu: 0.3,
        rho: 1.0,
        kappa: 5.0 / 6.0,
        mu,
        discretization: mesh,
        bc: PlateBc::SsssHard,
        shear: ShearInterpolation::Consistent,
    })
}

type Job = Box<dyn Fn() -> anyhow::Result<Vec<ReportRow>> + Send + Sync>;

fn run_jobs(jobs: Vec<Job>) -> anyhow::Result<Vec<ReportRow>> {
    let parts: Vec<Vec<ReportRow>> = jobs.par_iter().map(|j| j()).collect::<anyhow::Result<_>>()?;
    Ok(parts.into_iter().flatten().collect())
}

fn oracle_roots(bc: RodBc, crack: CrackConfig, mu_bar: f64, n: usize) -> anyhow::Result<Vec<f64>> {
    let roots = solve_char(&CharEqProblem::new(bc, crack.severity, crack.position, mu_bar)?, n)?;
    if roots.shortfall {
        bail!("oracle found {} of {n} roots", roots.roots.len());
    }
    Ok(roots.roots)
}

fn oracle_row(case: &str, model: &ModelConfig, mode: usize, omega: f64, check: Option<Check>) -> ReportRow {
    let mut r = base_row(case, model, mode, omega, None);
    r.mesh = String::new();
    r.check = check;
    r
}

pub fn reproduce_table(id: u8) -> anyhow::Result<TableReport> {
    let (rows, flags) = match id {
        1 => (table1()?, vec!["table 1: third-mode entry 8.8540 of the second reference column read as 7.8540".into()]),
        2 => (table2()?, Vec::new()),
        3 => (table3()?, Vec::new()),
        4 => (table4()?, Vec::new()),
        5 => (
            table5()?,
            vec![
                "table 5: Q4 entry 0.4620 (a/b row 2, a/h 10, mu 5) read as 0.0462".into(),
                "table 5: plates use hard simple support; the two planforms are 10x10 and 10x20".into(),
                "table 5: frequencies are the lowest flexural modes; membrane modes are excluded".into(),
            ],
        ),
        6 => (table6()?, vec!["table 6: hard simple support; lowest flexural mode".into()]),
        _ => bail!("table: {id} is not one of 1..=6"),
    };
    Ok(TableReport { id, rows, flags })
}

fn table1() -> anyhow::Result<Vec<ReportRow>> {
    let model = rod(RodBc::ClampedFree, 0.0, T1_CRACK);
    let xfem = solve_model(&model, 4)?;
    let exact = oracle_roots(RodBc::ClampedFree, T1_CRACK, 0.0, 4)?;
    let mut rows = Vec::new();
    for i in 0..4 {
        let tol = if i == 0 { TOL_T1_XFEM_FIRST } else { TOL_T1_XFEM_HIGHER };
        let mut r = base_row("t1/xfem", &model, i + 1, xfem[i], None);
        r.check = check(T1_XFEM[i], "t1:xfem", ToleranceClass::Numerical, tol);
        rows.push(r);
    }
    for i in 0..4 {
        let c = check(T1_REF_A[i], "t1:ref-a", ToleranceClass::Analytical, TOL_T1_ORACLE);
        rows.push(oracle_row("t1/oracle", &model, i + 1, exact[i], c));
    }
    for i in 0..4 {
        let c = check(T1_REF_B[i], "t1:ref-b", ToleranceClass::Analytical, TOL_T1_ORACLE_B);
        rows.push(oracle_row("t1/oracle", &model, i + 1, exact[i], c));
    }
    Ok(rows)
}

fn table2() -> anyhow::Result<Vec<ReportRow>> {
    let mut jobs: Vec<Job> = Vec::new();
    for (i, &e0a) in T2_E0A.iter().enumerate() {
        for (j, &k) in T2_SEVERITY.iter().enumerate() {
            jobs.push(Box::new(move || {
                let crack = CrackConfig { position: T2_POSITION, severity: k };
                let model = rod(RodBc::ClampedClamped, e0a, crack);
                let xfem = solve_model(&model, 1)?[0];
                let exact = oracle_roots(RodBc::ClampedClamped, crack, e0a * e0a, 1)?[0];
                let mut r = base_row("t2/xfem", &model, 1, xfem, None);
                r.check = check(T2_XFEM[i][j], "t2:xfem", ToleranceClass::Numerical, TOL_T2_XFEM);
                let c = check(T2_REF[i][j], "t2:ref", ToleranceClass::Analytical, TOL_T2_ORACLE);
                Ok(vec![r, oracle_row("t2/oracle", &model, 1, exact, c)])
            }));
        }
    }
    run_jobs(jobs)
}

fn table3() -> anyhow::Result<Vec<ReportRow>> {
    let mut jobs: Vec<Job> = Vec::new();
    for (i, &ah) in BEAM_ASPECTS.iter().enumerate() {
        for (j, &mu) in T3_MU.iter().enumerate() {
            jobs.push(Box::new(move || {
                let mut rows = Vec::new();
                for (mesh, tag, refs, tol) in
                    [(BEAM_NURBS, "nurbs", &T3_NURBS, TOL_T3_NURBS), (BEAM_LAGRANGE, "fem", &T3_FEM, TOL_T3_FEM)]
                {
                    let model = beam(ah, mu, mesh, BeamBc::Ss);
                    let w = solve_model(&model, 1)?[0];
                    let mut r = base_row(&format!("t3/{tag}"), &model, 1, w, None);
                    r.check = check(refs[i][j], &format!("t3:{tag}"), ToleranceClass::Numerical, tol);
                    rows.push(r);
                }
                Ok(rows)
            }));
        }
    }
    run_jobs(jobs)
}

fn table4() -> anyhow::Result<Vec<ReportRow>> {
    let mut jobs: Vec<Job> = Vec::new();
    for (i, &ah) in BEAM_ASPECTS.iter().enumerate() {
        for (j, &mu) in T4_MU.iter().enumerate() {
            for (k, &bc) in T4_BC.iter().enumerate() {
                jobs.push(Box::new(move || {
                    let model = beam(ah, mu, BEAM_NURBS, bc);
                    let w = solve_model(&model, 1)?[0];
                    let mut r = base_row("t4/nurbs", &model, 1, w, None);
                    r.check = check(T4[i][j][k], "t4:nurbs", ToleranceClass::Numerical, TOL_T4);
                    Ok(vec![r])
                }));
            }
        }
    }
    run_jobs(jobs)
}

const PLATE_METHODS: [(PlateMesh, &str); 3] = [(PLATE_Q4, "q4"), (PLATE_Q8, "q8"), (PLATE_NURBS, "nurbs")];

fn table5() -> anyhow::Result<Vec<ReportRow>> {
    let mut jobs: Vec<Job> = Vec::new();
    for (p, &b) in T5_B.iter().enumerate() {
        for (i, &ah) in T5_ASPECT.iter().enumerate() {
            for (j, &mu) in T5_MU.iter().enumerate() {
                for (k, &(mesh, tag)) in PLATE_METHODS.iter().enumerate() {
                    jobs.push(Box::new(move || {
                        let model = plate(b, PLATE_A / ah, mu, mesh);
                        let w = solve_model(&model, 1)?[0];
                        let mut r = base_row(&format!("t5/{tag}"), &model, 1, w, None);
                        r.check = check(T5[p][i][j][k], &format!("t5:{tag}"), ToleranceClass::Numerical, TOL_T5);
                        Ok(vec![r])
                    }));
                }
            }
        }
    }
    run_jobs(jobs)
}

fn table6() -> anyhow::Result<Vec<ReportRow>> {
    let mut jobs: Vec<Job> = Vec::new();
    for (k, &(mesh, tag)) in PLATE_METHODS.iter().enumerate() {
        jobs.push(Box::new(move || {
            let omegas: Vec<f64> = T6_MU
                .iter()
                .map(|&mu| Ok(solve_model(&plate(PLATE_A, T6_H, mu, mesh), 1)?[0]))
                .collect::<anyhow::Result<_>>()?;
            let tol = if tag == "q4" { TOL_T6_Q4 } else { TOL_T6 };
            Ok(T6_MU
                .iter()
                .enumerate()
                .map(|(j, &mu)| {
                    let model = plate(PLATE_A, T6_H, mu, mesh);
                    let mut r = base_row(&format!("t6/{tag}"), &model, 1, omegas[j], Some(omegas[j] / omegas[0]));
                    r.quantity = Quantity::Ratio;
                    r.check = check(T6[j][k], &format!("t6:{tag}"), ToleranceClass::Numerical, tol);
                    r
                })
                .collect())
        }));
    }
    run_jobs(jobs)
}
