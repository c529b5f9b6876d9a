//! The ten acceptance criteria, each evaluated end to end with its
//! tolerance pinned below. `cargo test -p nanovib-validation` prints one
//! PASS/FAIL line per criterion.

use std::time::{Duration, Instant};

use nanovib_bench::config::{BeamMesh, CrackConfig, PlateMesh};
use nanovib_bench::report::ReportRow;
use nanovib_bench::run::{convergence_study, solve_model};
use nanovib_bench::tables::{self, reproduce_table};
use nanovib_bench::CaseConfig;
use nanovib_core::basis::{bspline_eval, lagrange_1d, nurbs_eval, quad_shape, KnotVector, NurbsPatch, QuadKind};
use nanovib_core::beam::{assemble_beam, BeamBc};
use nanovib_core::eigen::{apply_constraints, solve_smallest, SolverPath, DENSE_LIMIT};
use nanovib_core::oracle::{beta_uncracked, solve_char, CharEqProblem};
use nanovib_core::plate::assemble_plate_flexural;
use nanovib_core::rod::{assemble_rod, RodBc};
use nanovib_core::sparse::SkylineLdl;
use nanovib_core::AssembledSystem;

pub const C1_TOL: f64 = 5e-4;
pub const C1_TIME: Duration = Duration::from_secs(1);
pub const C2_FIRST: f64 = 5e-3;
pub const C2_HIGHER: f64 = 3e-2;
pub const C2_FIRST_REF: f64 = 1.4228;
pub const C4_TOL: f64 = 1e-9;
pub const C4_MU_BAR: [f64; 3] = [0.0, 0.04, 0.16];
pub const C5_TIME: Duration = Duration::from_secs(10);
pub const C7_TIME: Duration = Duration::from_secs(300);
pub const C9_SUM: f64 = 1e-12;
pub const C9_DERIV: f64 = 1e-10;
pub const C9_SYM: f64 = 1e-12;
pub const C9_MODAL: f64 = 1e-8;
pub const C9_ORDER: (f64, f64) = (2.0, 0.2);
pub const C10_LENGTHS: [f64; 6] = [5.0, 10.0, 20.0, 40.0, 80.0, 160.0];
pub const C10_LIMIT: f64 = 1e-3;
pub const C10_POSITIONS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
pub const C10_SEVERITY: [f64; 3] = [0.065, 0.35, 2.0];
pub const C10_MU_BAR: [f64; 2] = [0.0, 0.04];
pub const C10_SYMMETRY: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u8,
    pub pass: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "criterion {:>2}: {} ({:.2} s) {}",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

fn timed(id: u8, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let t = Instant::now();
    let (pass, detail) = f();
    Outcome {
        id,
        pass,
        detail,
        elapsed: t.elapsed(),
    }
}

fn failed_cells(rows: &[ReportRow]) -> Vec<String> {
    rows.iter()
        .filter(|r| r.pass() == Some(false))
        .map(|r| {
            let c = r.check.as_ref().unwrap();
            format!(
                "{}[mu={} a/h={:.4} mesh={}] {:.5} vs {:.5} ({:.2}%)",
                c.source,
                r.mu,
                r.aspect.unwrap_or(f64::NAN),
                r.mesh,
                r.compared(),
                c.reference,
                100.0 * r.deviation().unwrap()
            )
        })
        .collect()
}

fn table_outcome(rows: &[ReportRow]) -> (bool, String) {
    let bad = failed_cells(rows);
    let n = rows.iter().filter(|r| r.pass().is_some()).count();
    if bad.is_empty() {
        (true, format!("{n}/{n} cells in tolerance"))
    } else {
        (false, format!("{}/{n} cells out of tolerance: {}", bad.len(), bad.join("; ")))
    }
}

pub fn criterion_1() -> Outcome {
    timed(1, || {
        let t = Instant::now();
        let p = CharEqProblem::new(RodBc::ClampedFree, 0.1144, 0.2002, 0.0).unwrap();
        let roots = solve_char(&p, 4).unwrap().roots;
        let dt = t.elapsed();
        let worst = roots.iter().zip(tables::T1_REF_A).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        (
            worst <= C1_TOL && dt < C1_TIME,
            format!("roots {roots:.5?}, worst |diff| {worst:.2e} (tol {C1_TOL:e}), solve {:.3} s", dt.as_secs_f64()),
        )
    })
}

pub fn criterion_2() -> Outcome {
    timed(2, || {
        let model = tables::rod(RodBc::ClampedFree, 0.0, tables::T1_CRACK);
        let w = solve_model(&model, 4).unwrap();
        let dev: Vec<f64> = w.iter().zip(tables::T1_XFEM).map(|(a, b)| (a - b).abs() / b).collect();
        let first = (w[0] - C2_FIRST_REF).abs() / C2_FIRST_REF;
        let pass = first <= C2_FIRST && dev[1..].iter().all(|&d| d <= C2_HIGHER);
        (pass, format!("modes {w:.5?}, relative deviations {dev:.4?}"))
    })
}

pub fn criterion_3() -> Outcome {
    timed(3, || table_outcome(&reproduce_table(2).unwrap().rows))
}

pub fn criterion_4() -> Outcome {
    timed(4, || {
        let mut worst = 0.0f64;
        for bc in [RodBc::ClampedFree, RodBc::ClampedClamped] {
            for mu_bar in C4_MU_BAR {
                let roots = solve_char(&CharEqProblem::new(bc, 0.0, 0.5, mu_bar).unwrap(), 4).unwrap().roots;
                for n in 1..=4 {
                    worst = worst.max((beta_uncracked(bc, n, mu_bar).unwrap() - roots[n - 1]).abs());
                }
            }
        }
        (worst <= C4_TOL, format!("worst |closed form - root| {worst:.2e} over 24 cases (tol {C4_TOL:e})"))
    })
}

pub fn criterion_5() -> Outcome {
    timed(5, || {
        let t = Instant::now();
        let rows = reproduce_table(3).unwrap().rows;
        let dt = t.elapsed();
        let (pass, detail) = table_outcome(&rows);
        (pass && dt < C5_TIME, format!("{detail}; {:.2} s", dt.as_secs_f64()))
    })
}

pub fn criterion_6() -> Outcome {
    timed(6, || table_outcome(&reproduce_table(4).unwrap().rows))
}

pub fn criterion_7() -> Outcome {
    timed(7, || {
        let t = Instant::now();
        let rows = reproduce_table(5).unwrap().rows;
        let dt = t.elapsed();
        // The Q4 40x40 flexural system is past the dense limit, so the
        // iterative path is part of the timing.
        let q4 = tables::plate(10.0, 1.0, 0.0, tables::PLATE_Q4);
        let nanovib_bench::config::Model::Plate(m) = q4.build().unwrap() else { unreachable!() };
        let sys = assemble_plate_flexural(&m).unwrap();
        let free = sys.n() - sys.constrained.len();
        let (pass, detail) = table_outcome(&rows);
        (
            pass && dt < C7_TIME && free > DENSE_LIMIT,
            format!("{detail}; {:.1} s; Q4 free unknowns {free} (iterative above {DENSE_LIMIT})", dt.as_secs_f64()),
        )
    })
}

pub fn criterion_8() -> Outcome {
    timed(8, || {
        let rows: Vec<ReportRow> = reproduce_table(6)
            .unwrap()
            .rows
            .into_iter()
            .filter(|r| r.case != "t6/q4")
            .collect();
        table_outcome(&rows)
    })
}

fn sums_ok<const D: usize>(values: &[f64], grads: &[[f64; D]]) -> (f64, f64) {
    let s: f64 = values.iter().sum();
    let mut g = [0.0; D];
    for gr in grads {
        for d in 0..D {
            g[d] += gr[d];
        }
    }
    ((s - 1.0).abs(), g.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

fn partition_of_unity() -> Result<(), String> {
    let mut worst = (0.0f64, 0.0f64);
    let mut take = |(a, b): (f64, f64)| worst = (worst.0.max(a), worst.1.max(b));
    let grid: Vec<f64> = (0..=40).map(|i| -1.0 + i as f64 / 20.0).collect();
    for &x in &grid {
        for deg in [1, 2] {
            let s = lagrange_1d(deg, x).unwrap();
            take(sums_ok(&s.values, &s.gradients));
        }
        for &y in &grid {
            for kind in [QuadKind::Q4, QuadKind::Q8] {
                let s = quad_shape(kind, [x, y]).unwrap();
                take(sums_ok(&s.values, &s.gradients));
            }
        }
    }
    let knots = [0.0, 0.13, 0.2, 0.2, 0.55, 0.61, 0.9];
    for p in 1..=4 {
        let mut k = vec![0.0; p];
        k.extend(knots);
        k.extend(std::iter::repeat_n(1.0, p + 1));
        let kv = KnotVector::new(k, p).unwrap();
        for i in 0..=200 {
            let s = bspline_eval(&kv, i as f64 / 200.0).unwrap();
            // Derivative sums scale with the knot spacing.
            let (a, b) = sums_ok(&s.values, &s.gradients);
            let scale = s.gradients.iter().map(|g| g[0].abs()).sum::<f64>().max(1.0);
            take((a, b / scale));
        }
        let n = kv.n_basis();
        let mut patch = NurbsPatch::rectangle(kv.clone(), kv.clone(), 3.0, 2.0).unwrap();
        patch.weights = (0..n * n).map(|i| 0.5 + ((i * 7919) % 13) as f64 / 6.0).collect();
        for i in 0..=20 {
            for j in 0..=20 {
                let s = nurbs_eval(&patch, [i as f64 / 20.0, j as f64 / 20.0]).unwrap();
                let (a, b) = sums_ok(&s.values, &s.gradients);
                let scale = s.gradients.iter().map(|g| g[0].abs() + g[1].abs()).sum::<f64>().max(1.0);
                take((a, b / scale));
            }
        }
    }
    if worst.0 <= C9_SUM && worst.1 <= C9_DERIV {
        Ok(())
    } else {
        Err(format!("partition of unity {:.1e}, derivative sum {:.1e}", worst.0, worst.1))
    }
}

fn systems(mu: f64) -> Vec<(String, AssembledSystem)> {
    use nanovib_bench::config::Model;
    let mut out = Vec::new();
    let models = [
        ("rod", tables::rod(RodBc::ClampedClamped, mu.sqrt() / 10.0, CrackConfig { position: 0.37, severity: 0.5 })),
        ("beam-lagrange", tables::beam(20.0, mu, BeamMesh::Lagrange { n_elements: 30 }, BeamBc::Cf)),
        ("beam-nurbs", tables::beam(20.0, mu, BeamMesh::Nurbs { degree: 3, n_elements: 12 }, BeamBc::Cc)),
        ("plate-q4", tables::plate(10.0, 1.0, mu, PlateMesh::Q4 { nx: 8, ny: 8 })),
        ("plate-q8", tables::plate(10.0, 1.0, mu, PlateMesh::Q8 { nx: 4, ny: 4 })),
        ("plate-nurbs", tables::plate(10.0, 1.0, mu, PlateMesh::Nurbs { degree: 3, control_x: 6, control_y: 6 })),
    ];
    for (name, cfg) in models {
        let sys = match cfg.build().unwrap() {
            Model::Rod(m) => assemble_rod(&m).unwrap(),
            Model::Beam(m) => assemble_beam(&m).unwrap(),
            Model::Plate(m) => assemble_plate_flexural(&m).unwrap(),
        };
        out.push((name.to_string(), sys));
    }
    out
}

fn symmetry_and_modes() -> Result<(), String> {
    for (name, sys) in systems(2.0) {
        let (ak, am) = (sys.k.asymmetry(), sys.m.asymmetry());
        if ak > C9_SYM || am > C9_SYM {
            return Err(format!("{name}: asymmetry K {ak:.1e}, M {am:.1e}"));
        }
        let red = apply_constraints(&sys.k, &sys.m, &sys.constrained).unwrap();
        let m_ok = SkylineLdl::factor(&red.m).map(|f| f.pivots().all(|p| p > 0.0)).unwrap_or(false);
        let k_ok = SkylineLdl::factor(&red.k).map(|f| f.pivots().all(|p| p > 0.0)).unwrap_or(false);
        if !(m_ok && k_ok) {
            return Err(format!("{name}: constrained K or M not positive definite"));
        }
        let res = solve_smallest(&red, 4, SolverPath::Auto).unwrap();
        for (i, phi) in res.modes.iter().enumerate() {
            let kv = sys.k.mul_vec(phi);
            let mv = sys.m.mul_vec(phi);
            let lam = res.eigenvalues[i];
            let (mut r2, mut k2) = (0.0, 0.0);
            for &f in &red.free {
                r2 += (kv[f] - lam * mv[f]).powi(2);
                k2 += kv[f].powi(2);
            }
            if r2.sqrt() > C9_MODAL * k2.sqrt() {
                return Err(format!("{name}: mode {} residual {:.1e}", i + 1, r2.sqrt() / k2.sqrt()));
            }
            for (j, psi) in res.modes.iter().enumerate() {
                let g = sys.m.bilinear(phi, psi) - if i == j { 1.0 } else { 0.0 };
                if g.abs() > C9_MODAL {
                    return Err(format!("{name}: M-orthonormality ({i},{j}) off by {g:.1e}"));
                }
            }
        }
    }
    Ok(())
}

fn mu_monotone() -> Result<(), String> {
    let mus = [0.0, 0.5, 1.0, 2.0, 5.0];
    let per_mu: Vec<Vec<(String, f64)>> = mus
        .iter()
        .map(|&mu| systems(mu).into_iter().map(|(n, s)| (n, s.solve(1).unwrap().dimensionless[0])).collect())
        .collect();
    for k in 0..per_mu[0].len() {
        let seq: Vec<f64> = per_mu.iter().map(|v| v[k].1).collect();
        if seq.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(format!("{}: Omega not decreasing in mu: {seq:?}", per_mu[0][k].0));
        }
    }
    Ok(())
}

fn dense_vs_iterative() -> Result<(), String> {
    let cfg = tables::beam(20.0, 2.0, BeamMesh::Lagrange { n_elements: 399 }, BeamBc::Cf);
    let nanovib_bench::config::Model::Beam(m) = cfg.build().unwrap() else { unreachable!() };
    let sys = assemble_beam(&m).unwrap();
    let d = sys.solve_with(6, SolverPath::Dense).unwrap().eigenvalues;
    let it = sys.solve_with(6, SolverPath::Iterative).unwrap().eigenvalues;
    let worst = d.iter().zip(&it).map(|(a, b)| (a - b).abs() / a.abs()).fold(0.0, f64::max);
    if worst <= C9_MODAL {
        Ok(())
    } else {
        Err(format!("dense vs iterative relative gap {worst:.1e}"))
    }
}

fn rod_order() -> Result<(), String> {
    let cfg = CaseConfig::from_toml("[model.rod]\nbc = \"clamped-free\"\n[sweep]\nmesh = [10, 20, 40, 80]\n").unwrap();
    let p = convergence_study(&cfg).unwrap().modes[0].order;
    match p {
        Some(p) if (p - C9_ORDER.0).abs() <= C9_ORDER.1 => Ok(()),
        _ => Err(format!("rod convergence order {p:?}")),
    }
}

pub fn criterion_9() -> Outcome {
    timed(9, || {
        let checks: [(&str, fn() -> Result<(), String>); 5] = [
            ("partition of unity", partition_of_unity),
            ("symmetry, definiteness, modal residuals", symmetry_and_modes),
            ("mu monotonicity", mu_monotone),
            ("dense vs iterative", dense_vs_iterative),
            ("rod order", rod_order),
        ];
        let errs: Vec<String> = checks.iter().filter_map(|(n, f)| f().err().map(|e| format!("{n}: {e}"))).collect();
        if errs.is_empty() {
            (true, "basis sums, K/M symmetry and definiteness, mu monotonicity, modal residuals, solver agreement, rod order".into())
        } else {
            (false, errs.join("; "))
        }
    })
}

fn rod_omega(bc: RodBc, position: f64, severity: f64, mu_bar: f64) -> f64 {
    solve_model(&tables::rod(bc, mu_bar.sqrt(), CrackConfig { position, severity }), 1).unwrap()[0]
}

pub fn criterion_10() -> Outcome {
    timed(10, || {
        let mut notes = Vec::new();
        let mut pass = true;

        // Length effect at fixed e0a = 1.
        let ratios: Vec<f64> = C10_LENGTHS
            .iter()
            .map(|&l| {
                let mut nl = tables::beam(20.0, 1.0, BeamMesh::Nurbs { degree: 3, n_elements: 40 }, BeamBc::Ss);
                nl.set_length(l);
                let mut loc = nl.clone();
                loc.set_mu(0.0).unwrap();
                solve_model(&nl, 1).unwrap()[0] / solve_model(&loc, 1).unwrap()[0]
            })
            .collect();
        let rises = ratios.windows(2).all(|w| w[1] > w[0]) && ratios.iter().all(|&r| r < 1.0);
        let close = 1.0 - ratios.last().unwrap() < C10_LIMIT;
        pass &= rises && close;
        notes.push(format!("length: ratios {ratios:.4?} {}", if rises && close { "ok" } else { "NOT monotone to 1" }));

        // Crack location. Ordering claims: a clamped-free rod loses more
        // frequency as the crack moves toward the free end; a
        // clamped-clamped rod loses most at mid-span and mirrors about it.
        let (mut cf_ok, mut cc_mid_ok, mut cc_sym) = (true, true, 0.0f64);
        let mut cf_example = String::new();
        let mut cc_example = String::new();
        for &k in &C10_SEVERITY {
            for &mb in &C10_MU_BAR {
                let cf: Vec<f64> = C10_POSITIONS.iter().map(|&b| rod_omega(RodBc::ClampedFree, b, k, mb)).collect();
                if cf.windows(2).any(|w| w[1] > w[0]) {
                    cf_ok = false;
                    if cf_example.is_empty() {
                        cf_example = format!("K={k} mu_bar={mb}: {cf:.4?}");
                    }
                }
                let cc: Vec<f64> = C10_POSITIONS.iter().map(|&b| rod_omega(RodBc::ClampedClamped, b, k, mb)).collect();
                let mid = cc[C10_POSITIONS.len() / 2];
                if cc.iter().any(|&w| w < mid) {
                    cc_mid_ok = false;
                    if cc_example.is_empty() {
                        cc_example = format!("K={k} mu_bar={mb}: {cc:.4?}");
                    }
                }
                for i in 0..cc.len() {
                    cc_sym = cc_sym.max((cc[i] - cc[cc.len() - 1 - i]).abs() / cc[i]);
                }
            }
        }
        pass &= cf_ok && cc_mid_ok && cc_sym <= C10_SYMMETRY;
        notes.push(if cf_ok {
            "CF: frequency falls toward the free end, ok".into()
        } else {
            format!("CF: frequency RISES toward the free end ({cf_example})")
        });
        notes.push(if cc_mid_ok {
            "CC: minimum at mid-span, ok".into()
        } else {
            format!("CC: mid-span is NOT the minimum ({cc_example})")
        });
        notes.push(format!("CC mirror symmetry {cc_sym:.1e} (tol {C10_SYMMETRY:e})"));
        (pass, notes.join("; "))
    })
}

pub fn all() -> Vec<fn() -> Outcome> {
    vec![
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
    ]
}
