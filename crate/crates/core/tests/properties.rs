use cfr_core::genus::{chern_boundary_integral, Chart, Lambda, OmegaForm, SurfaceModel};
use cfr_core::green::{harmonic_extension_t, kernel_k, psi_of, BiPoly, BoundaryCurve, DiscPrincipalGreen};
use cfr_core::series::{BiSeries, Trunc};
use cfr_core::symmetric::{elementary_to_power, monic_from_elementary, power_to_elementary, roots};
use cfr_core::{Complex64 as C, Poly};
use proptest::prelude::*;

fn cplx() -> impl Strategy<Value = C> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| C::new(a, b))
}

fn series(tr: Trunc) -> impl Strategy<Value = BiSeries<f64>> {
    prop::collection::vec(cplx(), 9)
        .prop_map(move |c| BiSeries::from_fn(tr, 2, 1, 3, None, |n, m| c[n * 3 + (m as usize - 1)] * 0.5))
}

const TR: Trunc = Trunc { nx: 6, mhi: 12 };

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn newton_identities_invert(h in prop::collection::vec(cplx(), 1..=8)) {
        let n: Vec<C> = (1..=h.len()).map(|k| h.iter().map(|z| z.powu(k as u32)).sum()).collect();
        let back = elementary_to_power(&power_to_elementary(&n));
        for (a, b) in n.iter().zip(&back) {
            prop_assert!((a - b).norm() < 1e-11);
        }
    }

    #[test]
    fn monic_assembly_vanishes_at_roots(h in prop::collection::vec(cplx(), 1..=8)) {
        let n: Vec<C> = (1..=h.len()).map(|k| h.iter().map(|z| z.powu(k as u32)).sum()).collect();
        let p = monic_from_elementary(&power_to_elementary(&n));
        prop_assert_eq!(p.degree(), h.len());
        for z in &h {
            prop_assert!(p.eval(*z).norm() < 1e-11);
        }
    }

    #[test]
    fn computed_roots_are_roots(h in prop::collection::vec(cplx(), 1..=6)) {
        let p = Poly::from_roots(&h);
        let r = roots(&p).unwrap();
        prop_assert_eq!(r.len(), h.len());
        for z in r {
            prop_assert!(p.eval(z).norm() < 1e-9);
        }
    }

    #[test]
    fn series_product_rules(a in series(TR), b in series(TR)) {
        prop_assert!(a.mul(&b).max_diff(&b.mul(&a)) < 1e-14);
        let lhs = a.mul(&b).dx();
        let rhs = a.dx().mul(&b).add(&a.mul(&b.dx()));
        prop_assert!(lhs.max_diff(&rhs) < 1e-13);
        let lhs = a.mul(&b).dy();
        let rhs = a.dy().mul(&b).add(&a.mul(&b.dy()));
        prop_assert!(lhs.max_diff(&rhs) < 1e-13);
    }

    #[test]
    fn exp_of_negation_is_inverse(a in series(TR)) {
        let one = a.exp().mul(&a.neg().exp());
        let (x, y) = (C::new(0.1, -0.05), C::new(0.0, 4.0));
        prop_assert!((one.eval(x, y) - 1.0).norm() < 1e-10);
    }

    #[test]
    fn primitive_differentiates_back(a in series(TR)) {
        // Remove the y⁻¹ column, which has no primitive without a logarithm.
        let a = a.sub(&BiSeries::from_fn(TR, 2, 1, 1, None, |n, m| a.get(n, m)));
        let p = a.primitivize(C::new(-3.0, 0.0)).unwrap();
        prop_assert!(p.dy().max_diff(&a) < 1e-13);
        prop_assert!(p.eval(C::new(0.2, 0.0), C::new(-3.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn psi_divides_the_difference(
        c in prop::collection::vec(cplx(), 6),
        zp in (cplx(), cplx()),
        z in (cplx(), cplx()),
    ) {
        let phi = BiPoly::new(vec![(0, 1, c[0]), (2, 0, c[1]), (1, 1, c[2]), (0, 3, c[3]), (3, 2, c[4]), (0, 0, c[5])]);
        let psi = psi_of(&phi);
        let (zp, z) = ([zp.0, zp.1], [z.0, z.1]);
        let p = psi.eval(zp, z);
        let lhs = phi.eval(zp[0], zp[1]) - phi.eval(z[0], z[1]);
        prop_assert!((lhs - p[0] * (zp[0] - z[0]) - p[1] * (zp[1] - z[1])).norm() < 1e-12);
        let q = psi.eval(z, zp);
        prop_assert!((p[0] - q[0]).norm() < 1e-12 && (p[1] - q[1]).norm() < 1e-12);
        if (zp[0] - z[0]).norm() + (zp[1] - z[1]).norm() > 1e-3 {
            let k1 = kernel_k(zp, z, &psi).unwrap();
            let k2 = kernel_k(z, zp, &psi).unwrap();
            prop_assert!((k1 + k2).norm() < 1e-9 * (1.0 + k1.norm()));
        }
    }

    #[test]
    fn t_reproduces_trig_polynomials(c in prop::collection::vec(-1.0..1.0f64, 4), q in cplx()) {
        let q = q * 0.6;
        let curve = BoundaryCurve::circle(C::new(0.0, 0.0), 1.0, 128);
        let v: Vec<f64> = (0..curve.len())
            .map(|j| { let t = curve.t(j); c[0] + c[1] * t.cos() + c[2] * (2.0 * t).sin() + c[3] * (3.0 * t).cos() })
            .collect();
        let u = harmonic_extension_t(&curve, &v, &DiscPrincipalGreen { radius: 1.0 }, q).unwrap();
        let exact = c[0] + c[1] * q.re + c[2] * (q * q).im + c[3] * q.powu(3).re;
        prop_assert!((u - exact).abs() < 1e-10);
    }

    #[test]
    fn winding_reduction(k in 0i32..4, kappa in -0.5..0.5f64) {
        // κ(r) = kappa (r² − 1)² has zero radial derivative at r = 1.
        let lam = Lambda::Conformal { base: Box::new(Lambda::FubiniStudy), kappa: vec![kappa, 0.0, -2.0 * kappa, 0.0, kappa] };
        let m = SurfaceModel::new(Chart::Disc { radius: 1.0 }, lam, 128).unwrap();
        let w = chern_boundary_integral(&OmegaForm::monomial(k), &m).unwrap().value;
        let w0 = chern_boundary_integral(&OmegaForm::monomial(0), &m).unwrap().value;
        prop_assert!((w - w0 - k as f64).abs() < 1e-6);
    }

    #[test]
    fn tangent_rescaling_keeps_the_integral(kappa in -0.5..0.5f64) {
        // On the annulus ½ < r < 1 use κ = kappa ((r − ½)(r − 1))², flat at both circles.
        let q = [0.5, -1.5, 1.0];
        let mut sq = vec![0.0; 5];
        for i in 0..3 { for j in 0..3 { sq[i + j] += kappa * q[i] * q[j]; } }
        let chart = Chart::Annulus { inner: 0.5, outer: 1.0 };
        let base = SurfaceModel::new(chart, Lambda::Flat, 128).unwrap();
        let scaled = SurfaceModel::new(chart, Lambda::Conformal { base: Box::new(Lambda::Flat), kappa: sq }, 128).unwrap();
        let om = OmegaForm::monomial(-1);
        let a = chern_boundary_integral(&om, &base).unwrap();
        let b = chern_boundary_integral(&om, &scaled).unwrap();
        prop_assert!(b.tangent);
        prop_assert!((a.value - b.value).abs() < 1e-6);
    }
}
