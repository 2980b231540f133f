//! Small dense complex linear algebra: pivoted Householder least squares,
//! LU solves and a Hessenberg QR eigenvalue iteration.

use crate::error::{Error, Result};
use crate::scalar::{cone, czero, lit, Real, C};

#[derive(Debug, Clone, PartialEq)]
pub struct Mat<S: Real> {
    pub rows: usize,
    pub cols: usize,
    pub a: Vec<C<S>>,
}

impl<S: Real> Mat<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            a: vec![czero::<S>(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = cone();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C<S>>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Mat::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged matrix rows");
            m.a[i * cols..(i + 1) * cols].copy_from_slice(r);
        }
        m
    }

    pub fn mul_vec(&self, x: &[C<S>]) -> Vec<C<S>> {
        (0..self.rows)
            .map(|i| {
                self.a[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(x)
                    .fold(czero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    fn col_norm(&self, j: usize, from: usize) -> S {
        (from..self.rows)
            .fold(S::zero(), |acc, i| acc + self[(i, j)].norm_sqr())
            .sqrt()
    }

    fn swap_cols(&mut self, p: usize, q: usize) {
        if p == q {
            return;
        }
        for i in 0..self.rows {
            self.a.swap(i * self.cols + p, i * self.cols + q);
        }
    }
}

impl<S: Real> std::ops::Index<(usize, usize)> for Mat<S> {
    type Output = C<S>;
    fn index(&self, (i, j): (usize, usize)) -> &C<S> {
        &self.a[i * self.cols + j]
    }
}

impl<S: Real> std::ops::IndexMut<(usize, usize)> for Mat<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<S> {
        &mut self.a[i * self.cols + j]
    }
}

pub fn vec_norm<S: Real>(v: &[C<S>]) -> S {
    v.iter().fold(S::zero(), |acc, a| acc + a.norm_sqr()).sqrt()
}

/// Householder reflector `I − 2 v vᴴ / (vᴴ v)` acting on rows `k..`.
struct Reflector<S: Real> {
    k: usize,
    v: Vec<C<S>>,
    vnorm2: S,
}

impl<S: Real> Reflector<S> {
    fn apply(&self, x: &mut [C<S>]) {
        if self.vnorm2 == S::zero() {
            return;
        }
        let w = self
            .v
            .iter()
            .zip(&x[self.k..])
            .fold(czero(), |acc, (v, b)| acc + v.conj() * b);
        let f = w * lit::<S>(2.0) / self.vnorm2;
        for (xi, vi) in x[self.k..].iter_mut().zip(&self.v) {
            *xi = *xi - f * vi;
        }
    }
}

/// In-place Householder QR of `m`; returns the reflectors and the column order.
fn householder_qr<S: Real>(m: &mut Mat<S>, pivot: bool) -> (Vec<Reflector<S>>, Vec<usize>) {
    let (rows, cols) = (m.rows, m.cols);
    let mut perm: Vec<usize> = (0..cols).collect();
    let mut refl = Vec::new();
    for k in 0..rows.min(cols) {
        if pivot {
            let best = (k..cols)
                .map(|j| (j, m.col_norm(j, k)))
                .fold((k, -S::one()), |b, c| if c.1 > b.1 { c } else { b })
                .0;
            m.swap_cols(k, best);
            perm.swap(k, best);
        }
        let x: Vec<C<S>> = (k..rows).map(|i| m[(i, k)]).collect();
        let xnorm = vec_norm(&x);
        let phase = if x[0].norm() > S::zero() {
            x[0] / x[0].norm()
        } else {
            cone()
        };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] = v[0] - alpha;
        let vnorm2 = v.iter().fold(S::zero(), |acc, a| acc + a.norm_sqr());
        let r = Reflector { k, v, vnorm2 };
        for j in k + 1..cols {
            let mut col: Vec<C<S>> = (0..rows).map(|i| m[(i, j)]).collect();
            r.apply(&mut col);
            for i in k..rows {
                m[(i, j)] = col[i];
            }
        }
        m[(k, k)] = if vnorm2 == S::zero() { m[(k, k)] } else { alpha };
        for i in k + 1..rows {
            m[(i, k)] = czero();
        }
        refl.push(r);
    }
    (refl, perm)
}

/// Outcome of a least-squares solve.
#[derive(Debug, Clone)]
pub struct Lstsq<S: Real> {
    pub x: Vec<C<S>>,
    pub rank: usize,
    /// Ratio of extreme diagonal entries of the pivoted R factor after column equilibration.
    pub cond: S,
    pub residual: S,
    pub rhs_norm: S,
}

impl<S: Real> Lstsq<S> {
    /// Residual relative to the right-hand side, absolute when the right-hand side vanishes.
    pub fn relative_residual(&self) -> S {
        if self.rhs_norm > S::zero() {
            self.residual / self.rhs_norm
        } else {
            self.residual
        }
    }
}

/// Minimum-norm least-squares solution of `a x ≈ b` by column-pivoted QR
/// followed by a complete orthogonal decomposition when rank deficient.
pub fn lstsq<S: Real>(a: &Mat<S>, b: &[C<S>]) -> Lstsq<S> {
    let (m, n) = (a.rows, a.cols);
    assert_eq!(b.len(), m);
    let rhs_norm = vec_norm(b);
    if n == 0 {
        return Lstsq {
            x: vec![],
            rank: 0,
            cond: S::one(),
            residual: rhs_norm,
            rhs_norm,
        };
    }
    let scale: Vec<S> = (0..n)
        .map(|j| {
            let s = a.col_norm(j, 0);
            if s > S::zero() {
                S::one() / s
            } else {
                S::one()
            }
        })
        .collect();
    let mut w = a.clone();
    for i in 0..m {
        for j in 0..n {
            w[(i, j)] = w[(i, j)] * scale[j];
        }
    }
    let (refl, perm) = householder_qr(&mut w, true);
    let mut qb = b.to_vec();
    for r in &refl {
        r.apply(&mut qb);
    }
    let kmax = m.min(n);
    let r00 = w[(0, 0)].norm();
    let tol = S::epsilon() * lit::<S>(10.0 * m.max(n) as f64) * r00;
    let rank = (0..kmax).take_while(|&k| w[(k, k)].norm() > tol).count();
    let cond = if rank == 0 {
        S::infinity()
    } else {
        r00 / w[(rank - 1, rank - 1)].norm()
    };

    let mut y = vec![czero::<S>(); n];
    if rank == n {
        for k in (0..n).rev() {
            let mut acc = qb[k];
            for j in k + 1..n {
                acc = acc - w[(k, j)] * y[j];
            }
            y[k] = acc / w[(k, k)];
        }
    } else if rank > 0 {
        // Minimum-norm solution of the trapezoidal system R[..rank, ..] y = qb[..rank].
        let mut mh = Mat::zeros(n, rank);
        for i in 0..rank {
            for j in i..n {
                mh[(j, i)] = w[(i, j)].conj();
            }
        }
        let (refl2, _) = householder_qr(&mut mh, false);
        let mut u = vec![czero::<S>(); n];
        for i in 0..rank {
            let mut acc = qb[i];
            for j in 0..i {
                acc = acc - mh[(j, i)].conj() * u[j];
            }
            u[i] = acc / mh[(i, i)].conj();
        }
        for r in refl2.iter().rev() {
            r.apply(&mut u);
        }
        y = u;
    }
    let mut x = vec![czero::<S>(); n];
    for (k, &p) in perm.iter().enumerate() {
        x[p] = y[k] * scale[p];
    }
    let ax = a.mul_vec(&x);
    let residual = vec_norm(&ax.iter().zip(b).map(|(u, v)| u - v).collect::<Vec<_>>());
    Lstsq {
        x,
        rank,
        cond,
        residual,
        rhs_norm,
    }
}

/// LU factorization with partial pivoting.
#[derive(Debug, Clone)]
pub struct Lu<S: Real> {
    lu: Mat<S>,
    piv: Vec<usize>,
    sign: S,
}

impl<S: Real> Lu<S> {
    pub fn new(mut a: Mat<S>) -> Option<Self> {
        let n = a.rows;
        assert_eq!(n, a.cols, "LU needs a square matrix");
        let mut piv: Vec<usize> = (0..n).collect();
        let mut sign = S::one();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[(i, k)].norm().partial_cmp(&a[(j, k)].norm()).unwrap())
                .unwrap();
            if a[(p, k)].norm() == S::zero() {
                return None;
            }
            if p != k {
                for j in 0..n {
                    a.a.swap(k * n + j, p * n + j);
                }
                piv.swap(k, p);
                sign = -sign;
            }
            let d = a[(k, k)];
            for i in k + 1..n {
                let f = a[(i, k)] / d;
                a[(i, k)] = f;
                for j in k + 1..n {
                    let t = a[(k, j)];
                    a[(i, j)] = a[(i, j)] - f * t;
                }
            }
        }
        Some(Lu { lu: a, piv, sign })
    }

    pub fn solve(&self, b: &[C<S>]) -> Vec<C<S>> {
        let n = self.lu.rows;
        let mut x: Vec<C<S>> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] = x[i] - self.lu[(i, j)] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] = x[i] - self.lu[(i, j)] * x[j];
            }
            x[i] = x[i] / self.lu[(i, i)];
        }
        x
    }

    pub fn det(&self) -> C<S> {
        (0..self.lu.rows).fold(C::new(self.sign, S::zero()), |acc, i| acc * self.lu[(i, i)])
    }

    /// 1-norm condition number computed from the explicit inverse.
    pub fn cond1(&self, a: &Mat<S>) -> S {
        let n = a.rows;
        let norm1 = |col: &dyn Fn(usize, usize) -> C<S>| {
            (0..n)
                .map(|j| (0..n).fold(S::zero(), |acc, i| acc + col(i, j).norm()))
                .fold(S::zero(), S::max)
        };
        let mut inv = Mat::zeros(n, n);
        for j in 0..n {
            let mut e = vec![czero::<S>(); n];
            e[j] = cone();
            for (i, v) in self.solve(&e).into_iter().enumerate() {
                inv[(i, j)] = v;
            }
        }
        norm1(&|i, j| a[(i, j)]) * norm1(&|i, j| inv[(i, j)])
    }
}

pub fn det<S: Real>(a: &Mat<S>) -> C<S> {
    Lu::new(a.clone()).map_or(czero(), |lu| lu.det())
}

/// Eigenvalues of an upper Hessenberg matrix by shifted QR with Givens rotations.
pub fn hessenberg_eigenvalues<S: Real>(mut h: Mat<S>) -> Result<Vec<C<S>>> {
    let n = h.rows;
    let mut eig = vec![czero::<S>(); n];
    if n == 0 {
        return Ok(eig);
    }
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let s = h[(l, l)].norm() + h[(l - 1, l - 1)].norm();
            if h[(l, l - 1)].norm() <= S::epsilon() * s {
                h[(l, l - 1)] = czero();
                break;
            }
            l -= 1;
        }
        if l == hi {
            eig[hi] = h[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > 60 * n {
            return Err(Error::NoConvergence);
        }
        let (a, b, c, d) = (h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)]);
        let mut mu = if iter % 11 == 10 {
            d + c.norm() * lit::<S>(0.75)
        } else {
            let half = lit::<S>(0.5);
            let disc = ((a - d) * (a - d) * lit::<S>(0.25) + b * c).sqrt();
            let m1 = (a + d) * half + disc;
            let m2 = (a + d) * half - disc;
            if (m1 - d).norm() < (m2 - d).norm() {
                m1
            } else {
                m2
            }
        };
        if !mu.re.is_finite() || !mu.im.is_finite() {
            mu = d;
        }
        for k in l..=hi {
            h[(k, k)] = h[(k, k)] - mu;
        }
        let mut rots = Vec::with_capacity(hi - l);
        for k in l..hi {
            let (x, y) = (h[(k, k)], h[(k + 1, k)]);
            let nrm = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let (cs, sn) = if nrm == S::zero() {
                (S::one(), czero())
            } else if x.norm() == S::zero() {
                (S::zero(), y.conj() / y.norm())
            } else {
                (x.norm() / nrm, (x / x.norm()) * y.conj() / nrm)
            };
            for j in k..n {
                let (u, v) = (h[(k, j)], h[(k + 1, j)]);
                h[(k, j)] = u * cs + sn * v;
                h[(k + 1, j)] = -sn.conj() * u + v * cs;
            }
            rots.push((k, cs, sn));
        }
        for &(k, cs, sn) in &rots {
            for i in 0..=(k + 2).min(hi) {
                let (u, v) = (h[(i, k)], h[(i, k + 1)]);
                h[(i, k)] = u * cs + sn.conj() * v;
                h[(i, k + 1)] = -sn * u + v * cs;
            }
        }
        for k in l..=hi {
            h[(k, k)] = h[(k, k)] + mu;
        }
    }
    eig[0] = h[(0, 0)];
    Ok(eig)
}

#[cfg(test)]
mod tests {
    use super::*;
    fn cr(v: f64) -> crate::scalar::C<f64> {
        crate::scalar::cr(v)
    }

    #[test]
    fn overdetermined_consistent_system_is_solved_exactly() {
        let a = Mat::from_rows(&[vec![cr(1.0), cr(1.0)], vec![cr(1.0), cr(2.0)], vec![cr(1.0), cr(3.0)]]);
        let sol = lstsq(&a, &[cr(3.0), cr(5.0), cr(7.0)]);
        assert_eq!(sol.rank, 2);
        assert!((sol.x[0] - cr(1.0)).norm() < 1e-13);
        assert!((sol.x[1] - cr(2.0)).norm() < 1e-13);
        assert!(sol.residual < 1e-12);
    }

    #[test]
    fn rank_deficient_gives_minimum_norm() {
        let a = Mat::from_rows(&[vec![cr(1.0), cr(1.0)], vec![cr(2.0), cr(2.0)]]);
        let sol = lstsq(&a, &[cr(2.0), cr(4.0)]);
        assert_eq!(sol.rank, 1);
        assert!((sol.x[0] - cr(1.0)).norm() < 1e-12);
        assert!((sol.x[1] - cr(1.0)).norm() < 1e-12);
    }

    #[test]
    fn lu_determinant_and_solve() {
        let a = Mat::from_rows(&[vec![cr(0.0), cr(2.0)], vec![cr(3.0), cr(1.0)]]);
        let lu = Lu::new(a.clone()).unwrap();
        assert!((lu.det() - cr(-6.0)).norm() < 1e-14);
        let x = lu.solve(&[cr(2.0), cr(4.0)]);
        assert!((x[0] - cr(1.0)).norm() < 1e-14 && (x[1] - cr(1.0)).norm() < 1e-14);
    }

    #[test]
    fn companion_eigenvalues() {
        // T^3 - 6T^2 + 11T - 6
        let h = Mat::from_rows(&[
            vec![cr(6.0), cr(-11.0), cr(6.0)],
            vec![cr(1.0), cr(0.0), cr(0.0)],
            vec![cr(0.0), cr(1.0), cr(0.0)],
        ]);
        let mut e: Vec<f64> = hessenberg_eigenvalues(h).unwrap().iter().map(|z| z.re).collect();
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in e.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-10);
        }
    }
}
