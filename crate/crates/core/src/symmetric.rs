//! Newton identities, monic assembly, polynomial roots and discriminants.

use crate::error::{Error, Result};
use crate::linalg::{det, hessenberg_eigenvalues, Mat};
use crate::poly::Poly;
use crate::scalar::{cis, cone, czero, from_usize, lit, Real, C};

/// Power sums `N_1..N_p` to elementary symmetric functions `S_1..S_p`.
pub fn power_to_elementary<S: Real>(n: &[C<S>]) -> Vec<C<S>> {
    let mut s: Vec<C<S>> = Vec::with_capacity(n.len());
    for k in 1..=n.len() {
        let kf = from_usize::<S>(k);
        let sign = |e: usize| if e.is_multiple_of(2) { S::one() } else { -S::one() };
        let mut acc = n[k - 1] * sign(k - 1);
        for j in 1..k {
            acc = acc + s[j - 1] * n[k - j - 1] * sign(k - j - 1);
        }
        s.push(acc / kf);
    }
    s
}

/// Elementary symmetric functions to power sums.
pub fn elementary_to_power<S: Real>(s: &[C<S>]) -> Vec<C<S>> {
    let mut n: Vec<C<S>> = Vec::with_capacity(s.len());
    for k in 1..=s.len() {
        let sign = |e: usize| if e.is_multiple_of(2) { S::one() } else { -S::one() };
        let mut acc = s[k - 1] * from_usize::<S>(k) * sign(k - 1);
        for j in 1..k {
            acc = acc + s[j - 1] * n[k - j - 1] * sign(j - 1);
        }
        n.push(acc);
    }
    n
}

/// `T^p − S_1 T^{p−1} + S_2 T^{p−2} − …`.
pub fn monic_from_elementary<S: Real>(s: &[C<S>]) -> Poly<S> {
    let mut desc = vec![cone()];
    for (k, &v) in s.iter().enumerate() {
        desc.push(if k % 2 == 0 { -v } else { v });
    }
    Poly::from_desc(&desc)
}

const MAX_ITER: usize = 200;

fn monic<S: Real>(p: &Poly<S>) -> Result<Poly<S>> {
    let d = p.degree();
    if d == 0 {
        return Err(Error::InvalidInput("root finding needs degree ≥ 1".into()));
    }
    let lead = p.c[d];
    Ok(Poly::new(p.c[..=d].iter().map(|&a| a / lead).collect()))
}

fn residual_ok<S: Real>(p: &Poly<S>, z: C<S>) -> bool {
    let cnorm = p.c.iter().fold(S::zero(), |a, c| a + c.norm());
    let zabs = z.norm();
    let scale =
        p.c.iter()
            .rev()
            .fold(S::zero(), |acc, c| acc * zabs + c.norm())
            .max(S::one() + cnorm);
    let tol = if S::epsilon() > lit(1e-10) {
        lit::<S>(1e-4)
    } else {
        lit::<S>(1e-9)
    };
    p.eval(z).norm() < tol * scale
}

fn aberth<S: Real>(p: &Poly<S>) -> Option<Vec<C<S>>> {
    let n = p.degree();
    let dp = p.derivative();
    let radius = S::one() + p.c[..n].iter().fold(S::zero(), |m, a| m.max(a.norm()));
    let two_pi = S::PI() + S::PI();
    let mut z: Vec<C<S>> = (0..n)
        .map(|k| cis(two_pi * from_usize::<S>(k) / from_usize::<S>(n) + lit(0.4)) * radius)
        .collect();
    for _ in 0..MAX_ITER {
        let mut biggest = S::zero();
        for k in 0..n {
            let pv = p.eval(z[k]);
            if pv == czero() {
                continue;
            }
            let ratio = pv / dp.eval(z[k]);
            let sum = (0..n)
                .filter(|&j| j != k)
                .fold(czero(), |acc, j| acc + cone::<S>() / (z[k] - z[j]));
            let w = ratio / (cone::<S>() - ratio * sum);
            if w.re.is_finite() && w.im.is_finite() {
                z[k] = z[k] - w;
                biggest = biggest.max(w.norm() / (S::one() + z[k].norm()));
            }
        }
        if biggest < S::epsilon() * lit(4.0) {
            break;
        }
    }
    for zk in z.iter_mut() {
        for _ in 0..2 {
            let d = dp.eval(*zk);
            if d.norm() > S::zero() {
                let step = p.eval(*zk) / d;
                if step.re.is_finite() && step.im.is_finite() {
                    let cand = *zk - step;
                    if p.eval(cand).norm() < p.eval(*zk).norm() {
                        *zk = cand;
                    }
                }
            }
        }
    }
    if z.iter().all(|&r| residual_ok(p, r)) {
        Some(z)
    } else {
        None
    }
}

fn companion_roots<S: Real>(p: &Poly<S>) -> Result<Vec<C<S>>> {
    let n = p.degree();
    let mut h = Mat::zeros(n, n);
    for j in 0..n {
        h[(0, j)] = -p.c[n - 1 - j];
    }
    for i in 1..n {
        h[(i, i - 1)] = cone();
    }
    let z = hessenberg_eigenvalues(h)?;
    if z.iter().all(|&r| residual_ok(p, r)) {
        Ok(z)
    } else {
        Err(Error::NoConvergence)
    }
}

/// All roots of a polynomial (made monic first), sorted by real then imaginary part.
pub fn roots<S: Real>(p: &Poly<S>) -> Result<Vec<C<S>>> {
    let p = monic(p)?;
    let mut z = if p.degree() == 1 {
        vec![-p.c[0]]
    } else {
        match aberth(&p) {
            Some(z) => z,
            None => companion_roots(&p)?,
        }
    };
    z.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
    Ok(z)
}

/// Resultant of two polynomials via the Sylvester determinant.
pub fn resultant<S: Real>(p: &Poly<S>, q: &Poly<S>) -> C<S> {
    let (m, n) = (p.degree(), q.degree());
    if m == 0 && n == 0 {
        return cone();
    }
    let size = m + n;
    let pd = p.coeffs_desc();
    let qd = q.coeffs_desc();
    let mut s = Mat::zeros(size, size);
    for i in 0..n {
        for (j, &a) in pd.iter().enumerate() {
            s[(i, i + j)] = a;
        }
    }
    for i in 0..m {
        for (j, &a) in qd.iter().enumerate() {
            s[(n + i, i + j)] = a;
        }
    }
    det(&s)
}

/// `(−1)^{n(n−1)/2} Res(p, p′) / a_n`.
pub fn discriminant<S: Real>(p: &Poly<S>) -> Result<C<S>> {
    let n = p.degree();
    if n < 2 {
        return Err(Error::InvalidInput("discriminant needs degree ≥ 2".into()));
    }
    let r = resultant(p, &p.derivative()) / p.c[n];
    Ok(if (n * (n - 1) / 2).is_multiple_of(2) { r } else { -r })
}

/// Magnitude against which a discriminant is judged numerically zero.
pub fn discriminant_scale<S: Real>(p: &Poly<S>) -> S {
    let n = p.degree();
    let lead = p.c[n].norm();
    let m = p.c.iter().fold(S::zero(), |a, c| a.max(c.norm())) / lead;
    (S::one() + m).powi(2 * n as i32 - 2)
}

/// Threshold policy for non-transverse lines: `|disc| < 1e−12·scale`.
pub fn is_near_degenerate<S: Real>(p: &Poly<S>, disc: C<S>) -> bool {
    disc.norm() < lit::<S>(1e-12) * discriminant_scale(p)
}
