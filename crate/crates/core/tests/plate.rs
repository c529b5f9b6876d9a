use nalgebra::{DMatrix, Matrix3, SymmetricEigen};
use nanovib_core::basis::{quad_shape, substitute_shear_shape, QuadKind};
use nanovib_core::plate::*;
use nanovib_core::quadrature::gauss_rule;
use nanovib_core::sparse::SkylineLdl;
use nanovib_core::system::Field;
use proptest::prelude::*;

const Q4: PlateDiscretization = PlateDiscretization::Q4 { nx: 40, ny: 40 };
const Q8: PlateDiscretization = PlateDiscretization::Q8 { nx: 8, ny: 8 };
const NURBS: PlateDiscretization = PlateDiscretization::Nurbs {
    degree: 3,
    control_x: 5,
    control_y: 5,
};

fn model(a: f64, b: f64, h: f64, mu: f64, disc: PlateDiscretization, bc: PlateBc) -> PlateModel {
    PlateModel::reference(a, b, h, mu, disc, bc).unwrap()
}

fn fundamental(m: &PlateModel) -> f64 {
    assemble_plate_flexural(m).unwrap().solve(1).unwrap().dimensionless[0]
}

/// Lowest Navier frequency `(m, n) = (1, 1)` of a hard simply supported plate.
fn navier(m: &PlateModel) -> f64 {
    let c = constitutive(m).unwrap();
    let (al, be) = (std::f64::consts::PI / m.a, std::f64::consts::PI / m.b);
    let s = c.e_s[(0, 0)];
    let (d11, d12, d66) = (c.d_b[(0, 0)], c.d_b[(0, 1)], c.d_b[(2, 2)]);
    let k = Matrix3::new(
        s * (al * al + be * be),
        s * al,
        s * be,
        s * al,
        d11 * al * al + d66 * be * be + s,
        (d12 + d66) * al * be,
        s * be,
        (d12 + d66) * al * be,
        d11 * be * be + d66 * al * al + s,
    );
    let f = 1.0 + m.nonlocal.mu() * (al * al + be * be);
    let minv = Matrix3::from_diagonal(&nalgebra::Vector3::new(c.i11, c.i22, c.i22).map(|v| 1.0 / (v * f).sqrt()));
    let eig = SymmetricEigen::new(minv * k * minv).eigenvalues;
    eig.min().sqrt() * m.nondim().scale()
}

#[test]
fn d11_closed_form() {
    let c = constitutive(&model(10.0, 10.0, 1.0, 0.0, Q4, PlateBc::Ssss)).unwrap();
    assert!((c.d_b[(0, 0)] - 2.7473e6).abs() / 2.7473e6 < 1e-4);
    assert_eq!(c.b_be, Matrix3::zeros());
    assert_eq!(c.i12, 0.0);
}

#[test]
fn refined_meshes_approach_navier() {
    for (h, mu) in [(1.0, 0.0), (1.0, 3.0), (0.5, 1.0)] {
        let exact = navier(&model(10.0, 10.0, h, mu, Q4, PlateBc::SsssHard));
        let q8 = fundamental(&model(10.0, 10.0, h, mu, PlateDiscretization::Q8 { nx: 16, ny: 16 }, PlateBc::SsssHard));
        let nurbs = fundamental(&model(
            10.0,
            10.0,
            h,
            mu,
            PlateDiscretization::Nurbs {
                degree: 3,
                control_x: 12,
                control_y: 12,
            },
            PlateBc::SsssHard,
        ));
        assert!((q8 - exact).abs() / exact < 2e-4, "{q8} vs {exact}");
        assert!((nurbs - exact).abs() / exact < 2e-4, "{nurbs} vs {exact}");
    }
}

#[test]
fn q8_agrees_with_fine_q4() {
    for bc in [PlateBc::Ssss, PlateBc::SsssHard, PlateBc::Cccc] {
        let a = fundamental(&model(10.0, 10.0, 1.0, 1.0, Q4, bc));
        let b = fundamental(&model(10.0, 10.0, 1.0, 1.0, Q8, bc));
        assert!((a - b).abs() / a < 5e-3, "{bc:?}: {a} vs {b}");
    }
}

#[test]
fn clamped_above_simply_supported() {
    for mu in [0.0, 2.0] {
        for disc in [Q8, NURBS] {
            let ss = fundamental(&model(10.0, 10.0, 0.5, mu, disc, PlateBc::SsssHard));
            let cc = fundamental(&model(10.0, 10.0, 0.5, mu, disc, PlateBc::Cccc));
            assert!(cc > ss);
        }
    }
}

#[test]
fn rectangular_below_square() {
    for ah in [10.0, 20.0] {
        let sq = fundamental(&model(10.0, 10.0, 10.0 / ah, 1.0, Q8, PlateBc::SsssHard));
        let rect = fundamental(&model(10.0, 20.0, 10.0 / ah, 1.0, Q8, PlateBc::SsssHard));
        assert!(rect < sq);
    }
}

#[test]
fn thin_plate_locking() {
    let fine_nurbs = PlateDiscretization::Nurbs {
        degree: 3,
        control_x: 12,
        control_y: 12,
    };
    let gap = |h: f64, disc| {
        let consistent = model(10.0, 10.0, h, 0.0, disc, PlateBc::SsssHard);
        let mut naive = consistent.clone();
        naive.shear = ShearInterpolation::Naive;
        let reference = fundamental(&model(10.0, 10.0, h, 0.0, fine_nurbs, PlateBc::SsssHard));
        let c = fundamental(&consistent);
        assert!((c - reference).abs() / reference < 2e-2, "{disc:?}: {c} vs {reference}");
        fundamental(&naive) / c
    };
    let q4 = PlateDiscretization::Q4 { nx: 16, ny: 16 };
    assert!(gap(0.1, q4) > 2.0);
    assert!(gap(0.1, Q4) > 1.3);
    // Fully integrated Q8 locks mildly, and more so as the plate thins.
    let (thick, thin) = (gap(0.1, Q8), gap(0.01, Q8));
    assert!(thick > 1.0 && thin > thick, "{thick} {thin}");
}

#[test]
fn membrane_pinning_does_not_touch_bending() {
    // Fixing all in-plane unknowns instead of three pins leaves the flexural
    // spectrum unchanged.
    let m = model(10.0, 10.0, 1.0, 1.0, PlateDiscretization::Q4 { nx: 10, ny: 10 }, PlateBc::Ssss);
    let sys = assemble_plate(&m).unwrap();
    let flex = flexural_part(&sys).unwrap();
    let a = flex.solve(4).unwrap().omegas;
    // Same spectrum from the full system, keeping only bending-dominated modes.
    let full = sys.solve(40).unwrap();
    let bending: Vec<f64> = full
        .omegas
        .iter()
        .zip(&full.modes)
        .filter(|(_, v)| {
            let inplane: f64 = v
                .iter()
                .zip(&sys.dofs)
                .filter(|(_, d)| matches!(d.field, Field::U0 | Field::V0))
                .map(|(x, _)| x * x)
                .sum();
            let total: f64 = v.iter().map(|x| x * x).sum();
            inplane < 1e-12 * total
        })
        .map(|(w, _)| *w)
        .take(4)
        .collect();
    assert_eq!(bending.len(), 4);
    for (x, y) in a.iter().zip(&bending) {
        assert!((x - y).abs() / x < 1e-9);
    }
}

#[test]
fn coupled_section_is_not_separable() {
    let m = model(10.0, 10.0, 1.0, 0.0, PlateDiscretization::Q4 { nx: 2, ny: 2 }, PlateBc::Ssss);
    let mut sys = assemble_plate(&m).unwrap();
    let mut t = nanovib_core::sparse::TripletBuilder::new(sys.n());
    for i in 0..sys.n() {
        for (j, v) in sys.k.row(i) {
            t.add(i, j, v);
        }
    }
    t.add(0, 2, 1.0);
    t.add(2, 0, 1.0);
    sys.k = t.build();
    assert!(flexural_part(&sys).is_err());
}

#[test]
fn symmetric_and_definite() {
    for disc in [PlateDiscretization::Q4 { nx: 4, ny: 4 }, PlateDiscretization::Q8 { nx: 3, ny: 3 }, NURBS] {
        let sys = assemble_plate(&model(10.0, 10.0, 1.0, 2.0, disc, PlateBc::Ssss)).unwrap();
        let kmax = sys.k.diagonal().iter().fold(0.0f64, |a, &b| a.max(b));
        assert!(sys.k.asymmetry() < 1e-12 * kmax);
        assert!(sys.m.asymmetry() < 1e-14);
        SkylineLdl::factor(&sys.m).unwrap();
        let k = SymmetricEigen::new(sys.k.to_dense()).eigenvalues;
        assert!(k.iter().all(|&v| v > -1e-9 * kmax));
    }
}

#[test]
fn length_growth_restores_local_frequency() {
    // e0a fixed at 1 while the square plate grows at a/h = 10.
    let mut last = 0.0;
    for a in [5.0, 10.0, 20.0, 40.0, 80.0] {
        let f = |mu| fundamental(&model(a, a, a / 10.0, mu, PlateDiscretization::Q8 { nx: 6, ny: 6 }, PlateBc::SsssHard));
        let r = f(1.0) / f(0.0);
        assert!(r > last && r < 1.0);
        last = r;
    }
    assert!(1.0 - last < 2e-3);
}

#[test]
fn q4_element_matches_fine_quadrature() {
    // Unit square element, 10 x 10 Gauss reference integration.
    let m = model(1.0, 1.0, 0.1, 0.3, PlateDiscretization::Q4 { nx: 1, ny: 1 }, PlateBc::Ssss);
    let c = constitutive(&m).unwrap();
    let el = plate_element_matrices(0, &m, &c).unwrap();
    let mu = m.nonlocal.mu();
    let mut k = DMatrix::<f64>::zeros(20, 20);
    let mut mm = DMatrix::<f64>::zeros(20, 20);
    for (x, y, w) in gauss_rule(10).unwrap().tensor() {
        let s = quad_shape(QuadKind::Q4, [x, y]).unwrap();
        let sub = substitute_shear_shape(QuadKind::Q4, [x, y]).unwrap();
        // Physical gradient on [0, 1]^2 is twice the parent one; dA = w / 4.
        let dn: Vec<[f64; 2]> = s.gradients.iter().map(|g| [2.0 * g[0], 2.0 * g[1]]).collect();
        let f = w / 4.0;
        let mut bp = DMatrix::<f64>::zeros(3, 20);
        let mut bb = DMatrix::<f64>::zeros(3, 20);
        let mut bs = DMatrix::<f64>::zeros(2, 20);
        for a in 0..4 {
            let o = 5 * a;
            bp[(0, o)] = dn[a][0];
            bp[(1, o + 1)] = dn[a][1];
            bp[(2, o)] = dn[a][1];
            bp[(2, o + 1)] = dn[a][0];
            bb[(0, o + 3)] = dn[a][0];
            bb[(1, o + 4)] = dn[a][1];
            bb[(2, o + 3)] = dn[a][1];
            bb[(2, o + 4)] = dn[a][0];
            bs[(0, o + 2)] = dn[a][0];
            bs[(0, o + 3)] = sub.theta_x.values[a];
            bs[(1, o + 2)] = dn[a][1];
            bs[(1, o + 4)] = sub.theta_y.values[a];
        }
        let to = |m: &Matrix3<f64>| DMatrix::from_fn(3, 3, |i, j| m[(i, j)]);
        let es = DMatrix::from_fn(2, 2, |i, j| c.e_s[(i, j)]);
        k += (bp.transpose() * to(&c.a_e) * &bp + bb.transpose() * to(&c.d_b) * &bb + bs.transpose() * es * &bs) * f;
        for a in 0..4 {
            for b in 0..4 {
                let g = s.values[a] * s.values[b] + mu * (dn[a][0] * dn[b][0] + dn[a][1] * dn[b][1]);
                for fld in 0..5 {
                    let i = if fld < 3 { c.i11 } else { c.i22 };
                    mm[(5 * a + fld, 5 * b + fld)] += i * g * f;
                }
            }
        }
    }
    assert!((&k - &el.k).abs().max() < 1e-9 * k.abs().max());
    assert!((&mm - &el.m).abs().max() < 1e-14 * mm.abs().max().max(1.0));
}

#[test]
fn w_translation_is_free_before_constraints() {
    for disc in [PlateDiscretization::Q4 { nx: 3, ny: 3 }, PlateDiscretization::Q8 { nx: 2, ny: 2 }, NURBS] {
        let sys = assemble_plate(&model(10.0, 10.0, 1.0, 0.0, disc, PlateBc::Cccc)).unwrap();
        let v: Vec<f64> = sys.dofs.iter().map(|d| if d.field == Field::W0 { 1.0 } else { 0.0 }).collect();
        let kmax = sys.k.diagonal().iter().fold(0.0f64, |a, &b| a.max(b));
        assert!(sys.k.bilinear(&v, &v).abs() < 1e-10 * kmax);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn frequencies_fall_with_nonlocality(ah in 5.0f64..50.0, which in 0usize..3, clamped in any::<bool>()) {
        let disc = [
            PlateDiscretization::Q4 { nx: 8, ny: 8 },
            PlateDiscretization::Q8 { nx: 4, ny: 4 },
            NURBS,
        ][which];
        let bc = if clamped { PlateBc::Cccc } else { PlateBc::SsssHard };
        let mut last = f64::INFINITY;
        for mu in [0.0, 0.5, 1.0, 2.0, 4.0] {
            let w = fundamental(&model(10.0, 10.0, 10.0 / ah, mu, disc, bc));
            prop_assert!(w < last);
            last = w;
        }
    }
}
