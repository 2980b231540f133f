use cfr_core::geometry::{rho, LineParam};
use cfr_core::io::{BoundaryJson, GermJson, GermsJson};
use cfr_core::linsys::{fit_infinity, FitSetup, Solution, DEFAULT_R_MAX};
use cfr_core::reconstruct::{corrections, fiber, n_qk, pipeline, GridSpec};
use cfr_core::series::Trunc;
use cfr_core::{oracles, Complex64 as C, Error, Poly};

fn boundary(name: &str) -> cfr_core::BoundaryData {
    oracles::by_name(name, None, None, 512).unwrap().to_boundary().unwrap()
}

#[test]
fn fixtures_round_trip_through_json() {
    let j = serde_json::to_string(&oracles::conic(64)).unwrap();
    let back: BoundaryJson = serde_json::from_str(&j).unwrap();
    for s in &back.loops[0].samples {
        let w = s.w.map(|p| C::new(p[0], p[1]));
        assert!((w[1] * w[1] - w[0] * w[2]).norm() < 1e-12);
    }
    assert_eq!(oracles::exterior_line(0.5, 16).loops[0].orientation, -1);
    assert!(matches!(
        oracles::by_name("cubic", None, None, 16),
        Err(Error::UnknownOracle(_))
    ));
}

#[test]
fn interior_line_cloud_lies_on_the_line() {
    let b = boundary("interior-line");
    let grid = GridSpec {
        radii: vec![2.5 * rho(&b)],
        angles: 12,
        xfrac: vec![0.0, 0.5],
        offset: 0.1,
    };
    let res = pipeline(&b, &grid, None, Trunc::default()).unwrap();
    assert_eq!((res.delta, res.p), (1, 1));
    assert!(!res.cloud.points.is_empty());
    for p in &res.cloud.points {
        let w = p.point.w();
        assert!((w[2] / w[0] - 1.0 - 0.5 * w[1] / w[0]).norm() < 1e-7);
    }
    let csv = res.cloud.to_csv();
    assert!(csv.starts_with("w0_re,w0_im,w1_re,w1_im,w2_re,w2_im,src_x_re,src_x_im,src_y_re,src_y_im\n"));
    assert_eq!(csv.lines().count(), res.cloud.points.len() + 1);
}

#[test]
fn exterior_line_has_no_sheets() {
    let b = boundary("exterior-line");
    let grid = GridSpec {
        radii: vec![3.0 * rho(&b)],
        angles: 8,
        xfrac: vec![0.0, 0.4],
        offset: 0.0,
    };
    let res = pipeline(&b, &grid, None, Trunc::default()).unwrap();
    assert_eq!((res.delta, res.p, res.fit.solution.r), (-1, 0, 1));
    assert!(res.cloud.points.is_empty());
    // G_1 − P_1 vanishes identically once the fitted correction is removed.
    let pk = corrections(&res.fit.solution, 1, None).unwrap().unwrap();
    let z = LineParam::new(C::new(0.1, 0.2), C::new(0.0, 2.0));
    assert!(n_qk(&b, &z, 1, Some(&pk)).unwrap().norm() < 1e-10);
}

#[test]
fn germ_file_matches_the_fitted_correction() {
    let b = boundary("exterior-line");
    let g = oracles::exterior_line_germ(0.5);
    let file = GermsJson {
        germs: vec![GermJson {
            b: [g.b.re, g.b.im],
            taylor: g.taylor.iter().map(|t| [t.re, t.im]).collect(),
        }],
    };
    let germs = file.to_germs();
    let setup = FitSetup::from_boundary(&b, C::new(1.0, 0.0), Trunc::default()).unwrap();
    let fit = fit_infinity(&setup, DEFAULT_R_MAX).unwrap().solution;
    let from_germs = corrections(&fit, 1, Some(&germs)).unwrap().unwrap();
    let from_fit = corrections(&fit, 1, None).unwrap().unwrap();
    for (x, y) in [(0.1, 1.7), (-0.3, -2.2)] {
        let (x, y) = (C::new(x, 0.05), C::new(y, 0.4));
        assert!((from_germs[1].eval(x, y) - from_fit[1].eval(x, y)).norm() < 1e-10);
        assert!((from_germs[0].eval(x, y) + 1.0).norm() < 1e-15);
    }
}

#[test]
fn two_line_fit_flags_the_free_constant() {
    let b = boundary("two-line");
    let setup = FitSetup::from_boundary(&b, C::new(1.0, 0.0), Trunc::default()).unwrap();
    let fit = fit_infinity(&setup, DEFAULT_R_MAX).unwrap().solution;
    assert_eq!((fit.d, fit.r), (2, 0));
    assert!(fit.rank_deficient && fit.residual < 1e-10);
}

#[test]
fn corrections_need_germs_for_several_sheets() {
    let sol = Solution::<f64> {
        d: 1,
        r: 1,
        mu: vec![],
        a: Poly::constant(C::new(2.0, 0.0)),
        b: Poly::new(vec![C::new(1.0, 0.0), C::new(2.0, 0.0)]),
        residual: 0.0,
        rank: 0,
        cond: 1.0,
        rank_deficient: false,
    };
    assert!(matches!(corrections(&sol, 2, None), Err(Error::InvalidInput(_))));
    assert!(corrections(&sol, 1, None).unwrap().is_some());
}

#[test]
fn lines_outside_the_domain_are_rejected() {
    let b = boundary("conic");
    let z = LineParam::new(C::new(0.0, 0.0), C::new(0.5 * rho(&b), 0.0));
    assert!(matches!(fiber(&b, &z, 1, None), Err(Error::OutsideDomain { .. })));
}
