use nanovib_bench::config::{BeamMesh, CaseConfig, ModelConfig};
use nanovib_bench::report::{csv_string, Quantity};
use nanovib_bench::run::{convergence_study, expand, run_sweep, ReferenceKind};
use nanovib_bench::tables::reproduce_table;

fn rod_convergence(e0a: f64, meshes: &str) -> CaseConfig {
    CaseConfig::from_toml(&format!(
        "modes = 3\n[model.rod]\nbc = \"clamped-free\"\ne0a = {e0a}\n[sweep]\nmesh = {meshes}\n"
    ))
    .unwrap()
}

#[test]
fn rod_convergence_order_two() {
    let r = convergence_study(&rod_convergence(0.0, "[10, 20, 40, 80]")).unwrap();
    for m in &r.modes {
        assert_eq!(m.reference_kind, ReferenceKind::Oracle);
        let p = m.order.unwrap();
        assert!((p - 2.0).abs() < 0.2, "mode {} order {p}", m.mode);
    }
    assert_eq!(r.rows.len(), 12);
}

#[test]
fn nonlocal_rod_approaches_nonlocal_root() {
    let r = convergence_study(&rod_convergence(0.1f64.sqrt(), "[10, 20, 40, 80]")).unwrap();
    for m in &r.modes {
        assert!(m.errors.windows(2).all(|w| w[1] < w[0]), "{:?}", m.errors);
        assert!(m.errors.last().unwrap() / m.reference < 1e-3);
    }
}

#[test]
fn convergence_needs_three_increasing_levels() {
    assert!(convergence_study(&rod_convergence(0.0, "[10, 20]")).is_err());
    assert!(convergence_study(&rod_convergence(0.0, "[10, 40, 20]")).is_err());
}

#[test]
fn beam_convergence_extrapolates() {
    let cfg = CaseConfig::from_toml(
        "[model.beam]\naspect = 20.0\nbc = \"ss\"\ndiscretization = { lagrange = { n_elements = 10 } }\n[sweep]\nmesh = [10, 20, 40, 80]\n",
    )
    .unwrap();
    let r = convergence_study(&cfg).unwrap();
    let m = &r.modes[0];
    assert_eq!(m.reference_kind, ReferenceKind::Extrapolated);
    assert!((m.order.unwrap() - 2.0).abs() < 0.2);
    // Finest NURBS result agrees with the extrapolated Lagrange limit.
    let nurbs = reproduce_table(3).unwrap().rows.iter().find(|r| r.case == "t3/nurbs" && r.aspect == Some(20.0) && r.mu == 0.0).unwrap().omega;
    assert!((m.reference - nurbs).abs() / nurbs < 1e-4, "{} vs {nurbs}", m.reference);
}

#[test]
fn nurbs_degree_elevation_reduces_error() {
    let cfg = CaseConfig::from_toml(
        "[model.beam]\naspect = 100.0\nbc = \"ss\"\ndiscretization = { nurbs = { degree = 2, n_elements = 4 } }\n[sweep]\ndegree = [2, 3, 4]\n",
    )
    .unwrap();
    let rows = run_sweep(&cfg).unwrap();
    let mut fine = cfg.model.clone();
    if let ModelConfig::Beam(b) = &mut fine {
        b.discretization = BeamMesh::Nurbs { degree: 4, n_elements: 64 };
    }
    let exact = nanovib_bench::run::solve_model(&fine, 1).unwrap()[0];
    let errs: Vec<f64> = rows.iter().map(|r| (r.omega - exact).abs()).collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}

#[test]
fn sweep_order_is_independent_of_scheduling() {
    let cfg = CaseConfig::from_toml(
        "name = \"s\"\nmodes = 2\n[model.rod]\nbc = \"clamped-clamped\"\n[model.rod.crack]\nposition = 0.3\nseverity = 0.2\n[sweep]\nposition = [0.7, 0.3, 0.5]\nseverity = [1.0, 0.0]\nmu = [0.0, 0.01]\n",
    )
    .unwrap();
    let a = csv_string(&run_sweep(&cfg).unwrap()).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| csv_string(&run_sweep(&cfg).unwrap()).unwrap());
    assert_eq!(a, b);
    let keys: Vec<String> = expand(&cfg).unwrap().into_iter().map(|c| c.label).collect();
    assert_eq!(keys[0], "s/mu=0/position=0.7/severity=1");
    assert_eq!(keys[1], "s/mu=0/position=0.7/severity=0");
    assert_eq!(keys.len(), 12);
    assert_eq!(a.lines().count(), 1 + 24);
}

#[test]
fn ratio_column_uses_local_twin() {
    let cfg = CaseConfig::from_toml(
        "[model.beam]\naspect = 20.0\nbc = \"cc\"\ndiscretization = { nurbs = { degree = 3, n_elements = 20 } }\n[sweep]\nmu = [0.0, 2.0]\n[output]\nratio = true\n",
    )
    .unwrap();
    let rows = run_sweep(&cfg).unwrap();
    assert_eq!(rows[0].ratio, Some(1.0));
    assert!((rows[1].ratio.unwrap() - rows[1].omega / rows[0].omega).abs() < 1e-14);
}

#[test]
fn table_shapes_and_flags() {
    for (id, n) in [(1, 12), (2, 12), (4, 36), (6, 12)] {
        let t = reproduce_table(id).unwrap();
        assert_eq!(t.rows.len(), n, "table {id}");
        assert!(t.rows.iter().all(|r| r.check.is_some() && r.pass().is_some()));
        for r in &t.rows {
            let c = r.check.as_ref().unwrap();
            let dev = (r.compared() - c.reference).abs() / c.reference;
            assert_eq!(r.deviation(), Some(dev));
        }
    }
    let t6 = reproduce_table(6).unwrap();
    assert!(t6.rows.iter().all(|r| r.quantity == Quantity::Ratio));
    assert!(t6.rows.iter().filter(|r| r.mu == 0.0).all(|r| r.ratio == Some(1.0)));
    assert!(reproduce_table(0).is_err());
}

#[test]
fn table5_flags_the_corrected_entry() {
    let t = reproduce_table(5).unwrap();
    assert_eq!(t.rows.len(), 36);
    assert!(t.flags.iter().any(|f| f.contains("0.4620") && f.contains("0.0462")));
    let cell = t
        .rows
        .iter()
        .find(|r| r.case == "t5/q4" && r.mu == 5.0 && r.aspect == Some(10.0) && r.mesh == "40x40" && r.length == 10.0 && r.check.as_ref().unwrap().reference < 0.05)
        .unwrap();
    assert_eq!(cell.check.as_ref().unwrap().reference, 0.0462);
}
