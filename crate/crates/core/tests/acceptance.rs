//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use cfr_core::genus::{chern_boundary_integral, genus_of_double, Chart, Lambda, OmegaForm, SurfaceModel};
use cfr_core::geometry::{m_of_y, rho, M_DEFLATION};
use cfr_core::green::{
    green_value, harmonic_extension_t, BiPoly, BoundaryCurve, CurveModel, DiscPrincipalGreen, GreenFunction,
    PrincipalGreen, QuadOptions, UnitDiscPatchGreen,
};
use cfr_core::indicators::{delta, g_k, g_many};
use cfr_core::infinity::p1;
use cfr_core::io::to_string_17;
use cfr_core::linsys::{assemble, fit_infinity, shock_series, solve, AbSpec, Family, FitSetup, DEFAULT_R_MAX};
use cfr_core::reconstruct::{detect_algebraic, fiber, fiber_field_residuals, pipeline, GridSpec, SampleSpec};
use cfr_core::series::{BiSeries, Trunc};
use cfr_core::shock::{chain_residual, e_decomposition, op_e, s_k_from_mu, ZGrid};
use cfr_core::symmetric::{elementary_to_power, monic_from_elementary, power_to_elementary, roots};
use cfr_core::{oracles, BoundaryData, Complex64 as C, LineParam, Poly};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<(bool, String), String>;
type Criterion = (&'static str, fn() -> Outcome);

fn boundary(name: &str, n: usize) -> BoundaryData {
    oracles::by_name(name, None, None, n).unwrap().to_boundary().unwrap()
}

fn cx(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// 5×5 lines: `|y| = 2.5ρ` at five angles, five `x` fractions of `m(y)`.
fn z_grid(b: &BoundaryData) -> Vec<LineParam> {
    let r = rho(b);
    let mut out = Vec::new();
    for a in 0..5 {
        let y = C::from_polar(2.5 * r, TAU * (a as f64 + 0.1) / 5.0);
        let m = m_of_y(b, y).unwrap();
        for i in 0..5 {
            let x = C::from_polar(0.9 * M_DEFLATION * m * i as f64 / 5.0, 1.1 * i as f64);
            out.push(LineParam::new(x, y));
        }
    }
    out
}

fn criterion1() -> Outcome {
    let b = boundary("interior-line", 1024);
    let d = delta(&b).map_err(|e| e.to_string())?;
    let (mut e0, mut e1) = (0.0f64, 0.0f64);
    for z in z_grid(&b) {
        let g = g_many(&b, &z, 1).map_err(|e| e.to_string())?;
        e0 = e0.max((g[0] - 1.0).norm());
        e1 = e1.max((g[1] + (z.x + 1.0) / (z.y + 0.5)).norm());
    }
    Ok((
        e0 < 1e-8 && e1 < 1e-8 && d == 1,
        format!("|G0-1| {e0:.1e}, |G1-oracle| {e1:.1e}, delta {d}"),
    ))
}

fn criterion2() -> Outcome {
    let b = boundary("exterior-line", 1024);
    let germ = [oracles::exterior_line_germ(0.5)];
    let p1 = p1(&germ);
    let mut err = 0.0f64;
    for z in z_grid(&b) {
        let g1 = g_k(&b, &z, 1).map_err(|e| e.to_string())?;
        let exact = (z.x + 1.0) / (z.y + 0.5);
        err = err
            .max((g1 - p1.eval(z.x, z.y)).norm())
            .max((p1.eval(z.x, z.y) - exact).norm());
    }
    let d = delta(&b).map_err(|e| e.to_string())?;
    let p = d + germ.len() as i64;
    Ok((
        err < 1e-8 && p == 0,
        format!("|G1-P1| {err:.1e}, p = {d} + {} = {p}", germ.len()),
    ))
}

fn criterion3() -> Outcome {
    let b = boundary("two-line", 1024);
    let mut ferr = 0.0f64;
    for z in z_grid(&b) {
        let f = fiber(&b, &z, 2, None).map_err(|e| e.to_string())?;
        let exact = [-(z.x + 1.0) / (z.y + 0.5), -(z.x + 1.0) / (z.y - 1.0 / 3.0)];
        for e in exact {
            ferr = ferr.max(f.roots.iter().map(|r| (r - e).norm()).fold(f64::INFINITY, f64::min));
        }
    }
    let grid = GridSpec::default_for(rho(&b));
    let res = pipeline(&b, &grid, None, Trunc::default()).map_err(|e| e.to_string())?;
    let mut cerr = 0.0f64;
    for p in &res.cloud.points {
        let w = p.point.w();
        let (z1, z2) = (w[1] / w[0], w[2] / w[0]);
        let on = [0.5, -1.0 / 3.0].map(|a: f64| (z2 - 1.0 - z1 * a).norm());
        cerr = cerr.max(on[0].min(on[1]));
    }
    let alg = detect_algebraic(&b, &SampleSpec::default()).map_err(|e| e.to_string())?;
    let ok = ferr < 1e-7 && cerr < 1e-6 && alg.algebraic && res.p == 2 && !res.cloud.points.is_empty();
    Ok((
        ok,
        format!(
            "fiber err {ferr:.1e}, {} cloud points off-line {cerr:.1e}, algebraic {}",
            res.cloud.points.len(),
            alg.algebraic
        ),
    ))
}

fn criterion4() -> Outcome {
    let b = boundary("conic", 1024);
    let mut err = 0.0f64;
    for z in z_grid(&b) {
        let f = fiber(&b, &z, 1, None).map_err(|e| e.to_string())?;
        let disc = (z.y * z.y - 4.0 * z.x).sqrt();
        let t = [(-z.y + disc) / 2.0, (-z.y - disc) / 2.0];
        let small = if t[0].norm() < t[1].norm() { t[0] } else { t[1] };
        err = err.max((f.roots[0] - small).norm());
    }
    let r = rho(&b);
    let grid = ZGrid::centred(cx(0.0, 0.0), cx(2.5 * r, 0.4), 0.01 * r, 9);
    let chk = fiber_field_residuals(&b, 1, None, &grid).map_err(|e| e.to_string())?;
    let shock = chk.shock.unwrap_or(f64::INFINITY);
    let alg = detect_algebraic(&b, &SampleSpec::default()).map_err(|e| e.to_string())?;
    Ok((
        err < 1e-7 && shock < 1e-5 && !alg.algebraic,
        format!(
            "root err {err:.1e}, shock residual {shock:.1e}, algebraic {} (fit residual {:.1e})",
            alg.algebraic, alg.residual
        ),
    ))
}

fn criterion5() -> Outcome {
    let mut rng = StdRng::seed_from_u64(5);
    let (mut rt, mut asm) = (0.0f64, 0.0f64);
    for case in 0..100 {
        let p = 1 + case % 8;
        let h: Vec<C> = (0..p)
            .map(|_| cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let n: Vec<C> = (1..=p).map(|k| h.iter().map(|z| z.powu(k as u32)).sum()).collect();
        let s = power_to_elementary(&n);
        let back = elementary_to_power(&s);
        let scale = n.iter().fold(1.0f64, |a, z| a.max(z.norm()));
        rt = rt.max(n.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale);
        // Expand Π(T − h_j) by repeated multiplication, ascending coefficients.
        let mut brute = vec![cx(1.0, 0.0)];
        for &r in &h {
            let mut next = vec![cx(0.0, 0.0); brute.len() + 1];
            for (i, &c) in brute.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= c * r;
            }
            brute = next;
        }
        let m = monic_from_elementary(&s);
        asm = asm.max(brute.iter().zip(&m.c).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max));
    }
    Ok((
        rt < 1e-10 && asm < 1e-10,
        format!("round trip {rt:.1e}, monic assembly {asm:.1e}"),
    ))
}

fn criterion6() -> Outcome {
    let b = boundary("interior-line", 1024);
    let setup = FitSetup::from_boundary(&b, cx(1.0, 0.0), Trunc::default()).map_err(|e| e.to_string())?;
    let h = &setup.h;
    let tr = h.trunc();
    let table = e_decomposition(4, h).map_err(|e| e.to_string())?;
    let f = [cx(0.3, -0.1), cx(1.0, 0.2), cx(-0.5, 0.0), cx(0.25, 0.4)];
    let deriv = |c: &[C]| -> Vec<C> { c.iter().enumerate().skip(1).map(|(i, &a)| a * i as f64).collect() };
    let mut op = 0.0f64;
    let mut lhs = BiSeries::from_x_poly(tr, &f);
    for k in 1..=4 {
        lhs = op_e(&lhs, h).map_err(|e| e.to_string())?;
        let mut rhs = BiSeries::zero(tr);
        let mut fj = f.to_vec();
        for j in 0..=k {
            if !fj.is_empty() {
                rhs = rhs.add(&BiSeries::from_x_poly(tr, &fj).mul(table.get(k, j)));
            }
            fj = deriv(&fj);
        }
        op = op.max(lhs.max_diff(&rhs));
    }
    // s_k from random μ with B = 1 + 2y (root −½, well inside |ω|).
    let mut rng = StdRng::seed_from_u64(6);
    let mu: Vec<Vec<C>> = (0..3)
        .map(|_| {
            (0..4)
                .map(|_| cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect()
        })
        .collect();
    let bpoly = Poly::new(vec![cx(1.0, 0.0), cx(2.0, 0.0)]);
    let s = s_k_from_mu(&mu, &bpoly, h).map_err(|e| e.to_string())?;
    let r = setup.rho;
    let grid = ZGrid::centred(cx(0.0, 0.0), cx(0.0, 3.0 * r), 0.01, 9);
    let vals: Vec<Vec<C>> = s.s.iter().map(|sk| grid.sample(|x, y| sk.eval(x, y))).collect();
    let db = bpoly.derivative();
    let n_x = grid.sample(|x, y| h.dh_dy(x, y) - db.eval(y) / bpoly.eval(y));
    let chain = chain_residual(&grid, &vals, Some(&n_x)).map_err(|e| e.to_string())?;
    Ok((
        op < 1e-9 && chain < 1e-8,
        format!("E^k identity {op:.1e}, EqSym1 chain {chain:.1e}"),
    ))
}

fn criterion7() -> Outcome {
    let b = boundary("exterior-line", 1024);
    let setup = FitSetup::from_boundary(&b, cx(1.0, 0.0), Trunc::default()).map_err(|e| e.to_string())?;
    let fixed = |a: f64, b1: f64| -> Result<f64, String> {
        let spec = AbSpec::Fixed {
            a: Poly::constant(cx(a, 0.0)),
            b: Poly::new(vec![cx(1.0, 0.0), cx(b1, 0.0)]),
        };
        Ok(solve(&assemble(&setup, Family::E0, &spec).map_err(|e| e.to_string())?).residual)
    };
    let good = fixed(2.0, 2.0)?;
    let bad = fixed(2.5, 2.5)?;
    let fit = fit_infinity(&setup, DEFAULT_R_MAX).map_err(|e| e.to_string())?;
    let rts = roots(&fit.solution.b).map_err(|e| e.to_string())?;
    let rerr = rts.iter().map(|z| (z + 0.5).norm()).fold(f64::INFINITY, f64::min);
    let ok = good < 1e-7 && bad > 1e-3 && rts.len() == 1 && rerr < 1e-4 && fit.confined;
    Ok((
        ok,
        format!(
            "residual true {good:.1e}, displaced {bad:.1e}, root error {rerr:.1e}, confined {}",
            fit.confined
        ),
    ))
}

fn criterion8() -> Outcome {
    let phi = BiPoly::new(vec![(0, 1, cx(1.0, 0.0))]);
    let model = CurveModel::new(phi, cx(0.0, 0.0), 1.0, cx(0.0, 0.0)).map_err(|e| e.to_string())?;
    let opts = QuadOptions::default();
    let g = |a: C, b: C| green_value(&model, a, b, &opts).map_err(|e| e.to_string());
    let pts = [cx(0.1, 0.2), cx(-0.3, 0.1), cx(0.5, -0.4), cx(-0.2, -0.6)];
    let mut sym = 0.0f64;
    let mut closed = 0.0f64;
    for (i, &a) in pts.iter().enumerate() {
        for &bb in &pts[i + 1..] {
            let (ab, ba) = (g(a, bb)?, g(bb, a)?);
            sym = sym.max((ab - ba).abs());
            closed = closed.max((ab - UnitDiscPatchGreen.value(a, bb).unwrap()).abs());
        }
    }
    // Slope of the circle average of g(q*, ·) against ln r.
    let qs = cx(0.15, -0.1);
    let avg = |r: f64| -> Result<f64, String> {
        let mut s = 0.0;
        for k in 0..8 {
            s += g(qs, qs + C::from_polar(r, TAU * k as f64 / 8.0))?;
        }
        Ok(s / 8.0)
    };
    let (r1, r2) = (0.01, 0.04);
    let slope = (avg(r2)? - avg(r1)?) / (r2 / r1).ln();
    // T with the principal Green function of the unit disc.
    let curve = BoundaryCurve::circle(cx(0.0, 0.0), 1.0, 256);
    let pg = DiscPrincipalGreen { radius: 1.0 };
    let mut terr = 0.0f64;
    for mode in [1u32, 2] {
        let v: Vec<f64> = (0..curve.len()).map(|j| (curve.t(j) * mode as f64).cos()).collect();
        for q in [cx(0.3, 0.4), cx(-0.7, 0.1), cx(0.0, -0.9)] {
            let t = harmonic_extension_t(&curve, &v, &pg, q).map_err(|e| e.to_string())?;
            terr = terr.max((t - q.powu(mode).re).abs());
        }
    }
    // Principal Green of |z| < 0.8 from the patch Green function.
    let r = 0.8;
    let p = PrincipalGreen::new(&UnitDiscPatchGreen, BoundaryCurve::circle(cx(0.0, 0.0), r, 128))
        .map_err(|e| e.to_string())?;
    let mut bv = 0.0f64;
    for q in [cx(0.2, 0.1), cx(-0.5, 0.3)] {
        for t in [0.1, 1.3, 2.9, 4.4] {
            let e = C::from_polar(1.0, t);
            bv = bv.max(
                p.value_on_boundary(q, t, e * r, cx(0.0, r) * e, -e * r)
                    .map_err(|e| e.to_string())?
                    .abs(),
            );
        }
    }
    let ok = sym < 1e-4 && (slope - 0.5 / PI).abs() < 1e-3 && terr < 1e-6 && bv < 1e-6 && closed < 1e-8;
    Ok((ok, format!(
        "symmetry {sym:.1e}, log coefficient {slope:.6} (vs {:.6}), closed form {closed:.1e}, T {terr:.1e}, principal boundary {bv:.1e}",
        0.5 / PI
    )))
}

fn criterion9() -> Outcome {
    let ann = SurfaceModel::new(Chart::Annulus { inner: 0.5, outer: 1.0 }, Lambda::Flat, 256).unwrap();
    let disc = SurfaceModel::new(Chart::Disc { radius: 1.0 }, Lambda::Flat, 256).unwrap();
    let fs = SurfaceModel::new(Chart::Disc { radius: 1.0 }, Lambda::FubiniStudy, 256).unwrap();
    let (z0, z1) = (OmegaForm::monomial(0), OmegaForm::monomial(1));
    let ci = |w: &OmegaForm<f64>, m: &SurfaceModel<f64>| {
        chern_boundary_integral(w, m)
            .map(|c| c.value)
            .map_err(|e| e.to_string())
    };
    let flat = ci(&z0, &ann)?;
    let wd_disc = ci(&z1, &disc)? - ci(&z0, &disc)?;
    let wd_fs = ci(&z1, &fs)? - ci(&z0, &fs)?;
    let wd_ann = ci(&z1, &ann)? - ci(&z0, &ann)?;
    let table = (0..3u64).all(|g| (1..4u64).all(|c| genus_of_double(g, c) == Ok(2 * g + c - 1)));
    let fs_abs = ci(&z0, &fs)?;
    let ok =
        flat.abs() < 1e-6 && (wd_disc - 1.0).abs() < 1e-6 && (wd_fs - 1.0).abs() < 1e-6 && wd_ann.abs() < 1e-6 && table;
    Ok((ok, format!(
        "annulus flat {flat:.1e}, winding difference disc {wd_disc:.9} / FS {wd_fs:.9}, annulus {wd_ann:.1e}, double table {table}; recorded: FS disc dz = {fs_abs:.9}"
    )))
}

fn criterion10() -> Outcome {
    let mut worst: Vec<(&str, f64)> = Vec::new();
    // Boundary samples.
    for name in oracles::NAMES {
        let (b1, b2) = (boundary(name, 1024), boundary(name, 2048));
        let mut d = 0.0f64;
        for z in z_grid(&b1) {
            let (g1, g2) = (g_many(&b1, &z, 2).unwrap(), g_many(&b2, &z, 2).unwrap());
            d = d.max(g1.iter().zip(&g2).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max));
        }
        worst.push(("samples", d));
    }
    // Series truncations: the fitted rational part and closure of the shock series.
    for name in ["interior-line", "exterior-line", "conic"] {
        let b = boundary(name, 1024);
        let fit = |tr: Trunc| {
            let s = FitSetup::from_boundary(&b, cx(1.0, 0.0), tr).unwrap();
            let f = fit_infinity(&s, DEFAULT_R_MAX).unwrap().solution;
            let y = cx(0.3, 3.0 * s.rho);
            let x = cx(0.05, 0.02);
            let sk = shock_series(&s, &f)
                .unwrap()
                .map(|ss| ss.s[0].eval(x, y))
                .unwrap_or_default();
            (f.a.eval(y) / f.b.eval(y), f.b.derivative().eval(y) / f.b.eval(y), sk)
        };
        let base = Trunc { nx: 12, mhi: 22 };
        let (a, b2) = (fit(base), fit(base.doubled()));
        worst.push((
            "truncation",
            (a.0 - b2.0).norm().max((a.1 - b2.1).norm()).max((a.2 - b2.2).norm()),
        ));
    }
    // Grid densities: Green quadrature angles and genus nodes.
    let model = CurveModel::new(BiPoly::new(vec![(0, 1, cx(1.0, 0.0))]), cx(0.0, 0.0), 1.0, cx(0.0, 0.0)).unwrap();
    let q = |n| {
        green_value(
            &model,
            cx(0.1, 0.2),
            cx(-0.3, 0.1),
            &QuadOptions {
                angles: n,
                ..Default::default()
            },
        )
        .unwrap()
    };
    worst.push(("green angles", (q(128) - q(256)).abs()));
    let gm = |n| -> f64 {
        let m = SurfaceModel::new(Chart::Annulus { inner: 0.5, outer: 1.0 }, Lambda::FubiniStudy, n).unwrap();
        chern_boundary_integral(&OmegaForm::monomial(1), &m).unwrap().value
    };
    worst.push(("genus nodes", (gm(256) - gm(512)).abs()));
    // Repeated runs.
    let b = boundary("two-line", 1024);
    let grid = GridSpec {
        radii: vec![2.0 * rho(&b)],
        angles: 16,
        xfrac: vec![0.0, 0.5],
        offset: 0.0,
    };
    let run = || to_string_17(&pipeline(&b, &grid, None, Trunc::default()).unwrap().cloud.to_json());
    let identical = run() == run();
    let max = worst.iter().fold(0.0f64, |a, w| a.max(w.1));
    let which = worst.iter().fold(("", 0.0), |a, w| if w.1 >= a.1 { *w } else { a });
    Ok((
        max < 1e-8 && identical,
        format!("largest change {max:.1e} ({}), byte-identical {identical}", which.0),
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("interior-line indicators", criterion1),
        ("exterior-line germ P1", criterion2),
        ("two-line nodal fibers", criterion3),
        ("conic fibers", criterion4),
        ("Newton identities", criterion5),
        ("operator identity and s_k closure", criterion6),
        ("E0 discrimination", criterion7),
        ("Green module", criterion8),
        ("genus module", criterion9),
        ("convergence and determinism", criterion10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match out {
            Ok((true, msg)) => println!("PASS {:>2} {name}: {msg} [{secs:.1}s]", i + 1),
            Ok((false, msg)) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {msg} [{secs:.1}s]", i + 1);
            }
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name}: error {msg} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
