use std::path::Path;

use nanovib_bench::config::*;
use nanovib_core::beam::BeamBc;
use nanovib_core::plate::{PlateBc, ShearInterpolation};
use nanovib_core::rod::RodBc;
use proptest::prelude::*;

fn presets() -> Vec<std::path::PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("presets");
    let mut v: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

#[test]
fn every_preset_loads_and_round_trips() {
    let files = presets();
    assert!(files.len() >= 6);
    for p in files {
        let cfg = CaseConfig::load(&p).unwrap_or_else(|e| panic!("{}: {e:#}", p.display()));
        let back = CaseConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, back, "{}", p.display());
    }
}

#[test]
fn table_presets_cover_every_table() {
    let mut ids: Vec<u8> = presets().iter().filter_map(|p| CaseConfig::load(p).unwrap().table).collect();
    ids.sort();
    assert_eq!(ids, vec![1, 2, 3, 4, 5, 6]);
}

#[test]
fn defaults_are_documented_values() {
    let cfg = CaseConfig::from_toml("[model.rod]\nbc = \"clamped-free\"\n").unwrap();
    assert_eq!(cfg.name, "case");
    assert_eq!(cfg.modes, 1);
    let ModelConfig::Rod(r) = &cfg.model else { panic!() };
    assert_eq!((r.length, r.ea, r.rho_a, r.e0a, r.n_elements), (1.0, 1.0, 1.0, 0.0, 100));
    let cfg = CaseConfig::from_toml(
        "[model.plate]\nh = 1.0\ndiscretization = { q4 = { nx = 4, ny = 4 } }\n",
    )
    .unwrap();
    let ModelConfig::Plate(p) = &cfg.model else { panic!() };
    assert_eq!((p.a, p.b, p.e, p.nu, p.rho), (10.0, 10.0, 30e6, 0.3, 1.0));
    assert_eq!(p.kappa, 5.0 / 6.0);
    assert_eq!(p.bc, PlateBc::SsssHard);
    assert_eq!(p.shear, ShearInterpolation::Consistent);
}

const BASE: &str = r#"
name = "x"
[model.rod]
bc = "clamped-free"
[model.rod.crack]
position = 0.3
severity = 0.1
[sweep]
mu = [0.0, 0.01]
[output]
ratio = true
"#;

#[test]
fn unknown_keys_rejected_at_every_level() {
    assert!(CaseConfig::from_toml(BASE).is_ok());
    let cases = [
        ("name = \"x\"", "name = \"x\"\ncolour = 1"),
        ("bc = \"clamped-free\"", "bc = \"clamped-free\"\nlenght = 2.0"),
        ("severity = 0.1", "severity = 0.1\ndepth = 0.2"),
        ("mu = [0.0, 0.01]", "mu = [0.0, 0.01]\nnu = [0.3]"),
        ("ratio = true", "ratio = true\nplot = true"),
    ];
    for (from, to) in cases {
        let text = BASE.replace(from, to);
        let err = CaseConfig::from_toml(&text).unwrap_err();
        let msg = format!("{err:#}");
        assert!(msg.contains("unknown field"), "{msg}");
        // toml diagnostics carry the line and a caret at the offending key.
        assert!(msg.contains('|') && msg.contains('^'), "{msg}");
    }
    let beam = "[model.beam]\naspect = 10.0\nbc = \"ss\"\ndiscretization = { nurbs = { degree = 3, n_elements = 8, knots = 1 } }\n";
    // Inline tables word it differently but still point at the key.
    let msg = format!("{:#}", CaseConfig::from_toml(beam).unwrap_err());
    assert!(msg.contains("unexpected keys") && msg.contains("knots") && msg.contains('^'), "{msg}");
}

#[test]
fn invalid_values_name_the_field() {
    let msg = |t: &str| format!("{:#}", CaseConfig::from_toml(t).unwrap_err());
    assert!(msg(&BASE.replace("position = 0.3", "position = 1.3")).contains("model.crack"));
    assert!(msg(&format!("modes = 0\n{BASE}")).contains("modes"));
    assert!(msg(&BASE.replace("mu = [0.0, 0.01]", "aspect = [10.0]")).contains("sweep.aspect"));
    assert!(msg(&format!("table = 9\n{BASE}")).contains("table"));
    assert!(msg(&BASE.replace("[model.rod]", "[model.shell]")).contains("shell"));
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        proptest::num::f64::NORMAL | proptest::num::f64::ZERO | proptest::num::f64::SUBNORMAL,
        -1e3f64..1e3,
    ]
}

fn model() -> impl Strategy<Value = ModelConfig> {
    let rod = (
        (finite(), finite(), finite(), finite()),
        0usize..10_000,
        prop_oneof![Just(RodBc::ClampedFree), Just(RodBc::ClampedClamped)],
        proptest::option::of((finite(), finite()).prop_map(|(position, severity)| CrackConfig { position, severity })),
    )
        .prop_map(|((length, ea, rho_a, e0a), n_elements, bc, crack)| {
            ModelConfig::Rod(RodConfig { length, ea, rho_a, e0a, n_elements, bc, crack })
        });
    let beam = (
        (finite(), finite(), finite(), finite(), finite(), finite(), finite()),
        prop_oneof![
            (0usize..500).prop_map(|n_elements| BeamMesh::Lagrange { n_elements }),
            (0usize..8, 0usize..500).prop_map(|(degree, n_elements)| BeamMesh::Nurbs { degree, n_elements }),
        ],
        prop_oneof![Just(BeamBc::Ss), Just(BeamBc::Cc), Just(BeamBc::Cf)],
    )
        .prop_map(|((length, aspect, e, nu, rho, kappa, mu), discretization, bc)| {
            ModelConfig::Beam(BeamConfig { length, aspect, e, nu, rho, kappa, mu, discretization, bc })
        });
    let plate = (
        (finite(), finite(), finite(), finite(), finite(), finite(), finite(), finite()),
        prop_oneof![
            (0usize..50, 0usize..50).prop_map(|(nx, ny)| PlateMesh::Q4 { nx, ny }),
            (0usize..50, 0usize..50).prop_map(|(nx, ny)| PlateMesh::Q8 { nx, ny }),
            (0usize..5, 0usize..50, 0usize..50)
                .prop_map(|(degree, control_x, control_y)| PlateMesh::Nurbs { degree, control_x, control_y }),
        ],
        prop_oneof![Just(PlateBc::Ssss), Just(PlateBc::SsssHard), Just(PlateBc::Cccc)],
        prop_oneof![Just(ShearInterpolation::Consistent), Just(ShearInterpolation::Naive)],
    )
        .prop_map(|((a, b, h, e, nu, rho, kappa, mu), discretization, bc, shear)| {
            ModelConfig::Plate(PlateConfig { a, b, h, e, nu, rho, kappa, mu, discretization, bc, shear })
        });
    prop_oneof![rod, beam, plate]
}

fn sweep() -> impl Strategy<Value = SweepConfig> {
    let v = || proptest::collection::vec(finite(), 0..4);
    let u = || proptest::collection::vec(0usize..1000, 0..4);
    (v(), v(), v(), v(), v(), u(), u()).prop_map(|(mu, length, aspect, position, severity, mesh, degree)| SweepConfig {
        mu,
        length,
        aspect,
        position,
        severity,
        mesh,
        degree,
    })
}

fn case() -> impl Strategy<Value = CaseConfig> {
    (
        "[a-z][a-z0-9_-]{0,12}",
        0usize..100,
        proptest::option::of(0u8..10),
        model(),
        sweep(),
        (proptest::option::of("[a-z]{1,8}\\.csv"), proptest::option::of("[a-z]{1,8}\\.json"), any::<bool>()),
    )
        .prop_map(|(name, modes, table, model, sweep, (csv, json, ratio))| CaseConfig {
            name,
            modes,
            table,
            model,
            sweep,
            output: OutputConfig { csv: csv.map(Into::into), json: json.map(Into::into), ratio },
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    // Structural round trip; no physical validation involved.
    #[test]
    fn serialize_then_parse_is_identity(cfg in case()) {
        let text = cfg.to_toml().unwrap();
        let back: CaseConfig = toml::from_str(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_toml().unwrap(), text);
    }
}
