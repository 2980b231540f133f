use std::f64::consts::PI;

use cfr_core::genus::{q_infinity_estimate, Chart, Lambda, SurfaceModel};
use cfr_core::green::{
    fredholm_solve_r, green_value, BiPoly, BoundaryCurve, CurveModel, DiscPrincipalGreen, GreenFunction,
    PrincipalGreen, QuadOptions, UnitDiscPatchGreen,
};
use cfr_core::linalg::Mat;
use cfr_core::{Complex64 as C, Error};

fn flat_disc() -> CurveModel<f64> {
    CurveModel::new(
        BiPoly::new(vec![(0, 1, C::new(1.0, 0.0))]),
        C::new(0.0, 0.0),
        1.0,
        C::new(0.0, 0.0),
    )
    .unwrap()
}

#[test]
fn parabola_green_has_a_harmonic_regular_part() {
    let phi = BiPoly::new(vec![(0, 1, C::new(1.0, 0.0)), (2, 0, C::new(-1.0, 0.0))]);
    let m = CurveModel::new(phi, C::new(0.0, 0.0), 1.0, C::new(0.3, 0.0)).unwrap();
    assert!(m.z2_center.norm() < 1e-15);
    let o = QuadOptions::default();
    let qs = C::new(0.1, 0.05);
    let reg = |p: C| green_value(&m, qs, p, &o).unwrap() - (p - qs).norm().ln() / (2.0 * PI);
    let (z, h) = (C::new(-0.2, 0.1), 0.05);
    let i = C::new(0.0, h);
    let lap = (reg(z + h) + reg(z - h) + reg(z + i) + reg(z - i) - 4.0 * reg(z)) / (h * h);
    assert!(lap.abs() < 1e-3, "laplacian {lap}");
    let g = |r: f64| green_value(&m, qs, qs + C::new(r, 0.0), &o).unwrap();
    let slope = (g(0.04) - g(0.01)) / 4f64.ln();
    assert!((slope - 0.5 / PI).abs() < 1e-3, "slope {slope}");
}

#[test]
fn quadrature_errors() {
    let m = flat_disc();
    let o = QuadOptions::default();
    let a = C::new(0.2, 0.1);
    assert_eq!(green_value(&m, a, a, &o), Err(Error::Coincident));
    assert!(matches!(
        green_value(&m, a, C::new(1.5, 0.0), &o),
        Err(Error::InvalidInput(_))
    ));
    let coarse = QuadOptions {
        angles: 8,
        nodes_per_panel: 4,
        tolerance: Some(1e-12),
        ..o
    };
    assert!(matches!(
        green_value(&m, a, C::new(-0.1, 0.3), &coarse),
        Err(Error::MeshTooCoarse(_))
    ));
    let chartless = BiPoly::new(vec![(1, 0, C::new(1.0, 0.0))]);
    assert!(CurveModel::new(chartless, C::new(0.0, 0.0), 1.0, C::new(0.0, 0.0)).is_err());
}

#[test]
fn fredholm_edge_cases() {
    let v = [1.0f64, -2.0, 0.5];
    let r: Vec<f64> = fredholm_solve_r(&v, &Mat::zeros(3, 3)).unwrap();
    assert!(r.iter().zip(&v).all(|(a, b)| (a - b).abs() < 1e-15));
    let mut minus_i = Mat::zeros(3, 3);
    for k in 0..3 {
        minus_i[(k, k)] = C::new(-1.0, 0.0);
    }
    assert!(matches!(
        fredholm_solve_r(&v, &minus_i),
        Err(Error::SingularFredholm(_))
    ));
}

#[test]
fn principal_green_of_a_subdisc() {
    let r = 0.6;
    let p = PrincipalGreen::new(&UnitDiscPatchGreen, BoundaryCurve::circle(C::new(0.0, 0.0), r, 96)).unwrap();
    let exact = DiscPrincipalGreen { radius: r };
    for (q, z) in [
        (C::new(0.1, 0.2), C::new(-0.3, 0.1)),
        (C::new(-0.4, -0.1), C::new(0.2, 0.35)),
    ] {
        let v = p.value(q, z).unwrap();
        assert!((v - exact.value(q, z).unwrap()).abs() < 1e-10);
        assert!((v - p.value(z, q).unwrap()).abs() < 1e-10);
    }
    assert!(p.cond() < 10.0);
}

#[test]
fn genus_arithmetic() {
    assert_eq!(q_infinity_estimate(0.0, 0, 2), Ok(0));
    assert_eq!(q_infinity_estimate(2.0 + 1e-9, 0, 1), Ok(1));
    assert!(SurfaceModel::new(Chart::Annulus { inner: 1.0, outer: 0.5 }, Lambda::<f64>::Flat, 64).is_err());
}
