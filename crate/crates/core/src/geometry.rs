//! Projective-plane primitives, sampled boundary loops and the admissible
//! line-parameter domain `Z`.

use crate::error::{Error, Result};
use crate::scalar::{cone, czero, from_usize, lit, Real, C};

const COORD_FLOOR: f64 = 1e-12;

/// Point of CP² stored with its largest-modulus coordinate scaled to exactly 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjPoint<S: Real> {
    w: [C<S>; 3],
}

fn pivot_index<S: Real>(w: &[C<S>; 3]) -> usize {
    let mut k = 0;
    for i in 1..3 {
        if w[i].norm() > w[k].norm() {
            k = i;
        }
    }
    k
}

impl<S: Real> ProjPoint<S> {
    pub fn new(w: [C<S>; 3]) -> Result<Self> {
        if w.iter().all(|c| c.norm() == S::zero()) {
            return Err(Error::InvalidInput("all homogeneous coordinates vanish".into()));
        }
        if w.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite homogeneous coordinate".into()));
        }
        let s = w[pivot_index(&w)];
        Ok(ProjPoint {
            w: [w[0] / s, w[1] / s, w[2] / s],
        })
    }

    pub fn w(&self) -> [C<S>; 3] {
        self.w
    }

    /// The two remaining coordinates divided by `w_chart`, in cyclic order.
    pub fn affine_chart(&self, chart: usize) -> Result<(C<S>, C<S>)> {
        if chart > 2 {
            return Err(Error::InvalidInput(format!("chart index {chart} not in 0..=2")));
        }
        let d = self.w[chart];
        if d.norm() <= lit(COORD_FLOOR) {
            return Err(Error::ChartUndefined { chart });
        }
        Ok((self.w[(chart + 1) % 3] / d, self.w[(chart + 2) % 3] / d))
    }

    /// Fubini–Study chordal distance `sin∠(w, w′)`.
    pub fn chordal_distance(&self, o: &Self) -> S {
        let dot = (0..3).fold(czero::<S>(), |acc, i| acc + self.w[i].conj() * o.w[i]);
        let n1 = self.w.iter().fold(S::zero(), |acc, c| acc + c.norm_sqr());
        let n2 = o.w.iter().fold(S::zero(), |acc, c| acc + c.norm_sqr());
        (S::one() - dot.norm_sqr() / (n1 * n2)).max(S::zero()).sqrt()
    }
}

/// The line `L_z = {x w0 + y w1 + w2 = 0}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineParam<S: Real> {
    pub x: C<S>,
    pub y: C<S>,
}

impl<S: Real> LineParam<S> {
    pub fn new(x: C<S>, y: C<S>) -> Self {
        LineParam { x, y }
    }
}

/// Incidence residual `x w0 + y w1 + w2` in the normalized gauge.
pub fn line_eval<S: Real>(z: &LineParam<S>, p: &ProjPoint<S>) -> C<S> {
    let w = p.w();
    z.x * w[0] + z.y * w[1] + w[2]
}

/// One uniformly sampled closed boundary loop.
///
/// Besides the normalized points the loop caches the affine chart values
/// `z1 = w1/w0`, `z2 = w2/w0` and their parameter derivatives, which is all
/// the contour quadratures need.
#[derive(Debug, Clone)]
pub struct BoundaryLoop<S: Real> {
    pub orientation: i8,
    t: Vec<S>,
    points: Vec<ProjPoint<S>>,
    velocities: Vec<[C<S>; 3]>,
    z1: Vec<C<S>>,
    z2: Vec<C<S>>,
    dz1: Vec<C<S>>,
    dz2: Vec<C<S>>,
}

const FD8: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];

/// Centered 8th-order periodic finite-difference derivative.
fn periodic_derivative<S: Real>(w: &[[C<S>; 3]], h: S) -> Vec<[C<S>; 3]> {
    let n = w.len();
    (0..n)
        .map(|j| {
            let mut d = [czero(); 3];
            for (k, &c) in FD8.iter().enumerate() {
                let off = k + 1;
                let (p, m) = ((j + off) % n, (j + n - off % n) % n);
                for i in 0..3 {
                    d[i] = d[i] + (w[p][i] - w[m][i]) * lit::<S>(c);
                }
            }
            d.map(|v| v / h)
        })
        .collect()
}

impl<S: Real> BoundaryLoop<S> {
    /// Builds a loop from raw samples on `t_j = t_0 + 2πj/N`.
    ///
    /// A trailing sample at `t_0 + 2π` is accepted as a closure check and dropped.
    /// Without velocities the raw coordinates must be given in a continuous gauge.
    pub fn new(orientation: i8, mut t: Vec<S>, mut w: Vec<[C<S>; 3]>, mut dw: Option<Vec<[C<S>; 3]>>) -> Result<Self> {
        if orientation != 1 && orientation != -1 {
            return Err(Error::InvalidInput(format!("orientation {orientation} is not ±1")));
        }
        if t.len() != w.len() || dw.as_ref().is_some_and(|d| d.len() != w.len()) {
            return Err(Error::InvalidInput("sample arrays differ in length".into()));
        }
        let two_pi = S::PI() + S::PI();
        if t.len() >= 2 {
            let last = t.len() - 1;
            if (t[last] - t[0] - two_pi).abs() < lit(1e-9) {
                let a = ProjPoint::new(w[0])?;
                let b = ProjPoint::new(w[last])?;
                let gap = (0..3).fold(S::zero(), |m, i| m.max((a.w()[i] - b.w()[i]).norm()));
                if gap > lit(1e-10) {
                    return Err(Error::InvalidInput(format!("loop not closed (gap {gap})")));
                }
                t.pop();
                w.pop();
                if let Some(d) = dw.as_mut() {
                    d.pop();
                }
            }
        }
        let n = t.len();
        if n < 9 {
            return Err(Error::InvalidInput(format!("loop has {n} samples, need at least 9")));
        }
        let h = two_pi / from_usize::<S>(n);
        for (j, &tj) in t.iter().enumerate() {
            if (tj - t[0] - h * from_usize::<S>(j)).abs() > lit(1e-9) {
                return Err(Error::InvalidInput("parameter samples are not uniformly spaced".into()));
            }
        }
        let dw = match dw {
            Some(d) => d,
            None => periodic_derivative(&w, h),
        };
        let mut points = Vec::with_capacity(n);
        let mut velocities = Vec::with_capacity(n);
        let (mut z1, mut z2, mut dz1, mut dz2) = (vec![], vec![], vec![], vec![]);
        for (wj, dj) in w.iter().zip(&dw) {
            let p = ProjPoint::new(*wj)?;
            let s = wj[pivot_index(wj)];
            let v = dj.map(|c| c / s);
            let nw = p.w();
            if nw.iter().any(|c| c.norm() <= lit(COORD_FLOOR)) {
                return Err(Error::InvalidInput(
                    "boundary sample with a vanishing homogeneous coordinate".into(),
                ));
            }
            let w0 = nw[0];
            z1.push(nw[1] / w0);
            z2.push(nw[2] / w0);
            dz1.push((v[1] * w0 - nw[1] * v[0]) / (w0 * w0));
            dz2.push((v[2] * w0 - nw[2] * v[0]) / (w0 * w0));
            points.push(p);
            velocities.push(v);
        }
        Ok(BoundaryLoop {
            orientation,
            t,
            points,
            velocities,
            z1,
            z2,
            dz1,
            dz2,
        })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn t(&self) -> &[S] {
        &self.t
    }

    pub fn points(&self) -> &[ProjPoint<S>] {
        &self.points
    }

    pub fn velocities(&self) -> &[[C<S>; 3]] {
        &self.velocities
    }

    pub fn z1(&self) -> &[C<S>] {
        &self.z1
    }

    pub fn z2(&self) -> &[C<S>] {
        &self.z2
    }

    pub fn dz1(&self) -> &[C<S>] {
        &self.dz1
    }

    pub fn dz2(&self) -> &[C<S>] {
        &self.dz2
    }

    /// Trapezoid weight `2π/N`.
    pub fn step(&self) -> S {
        (S::PI() + S::PI()) / from_usize::<S>(self.len())
    }

    /// `(1/2πi) ∮ f(z1, z2, dz1/dt, dz2/dt) dt` with the loop orientation applied.
    pub fn contour<F>(&self, f: F) -> C<S>
    where
        F: Fn(C<S>, C<S>, C<S>, C<S>) -> C<S>,
    {
        let mut acc = czero::<S>();
        for j in 0..self.len() {
            acc = acc + f(self.z1[j], self.z2[j], self.dz1[j], self.dz2[j]);
        }
        let two_pi_i = C::new(S::zero(), S::PI() + S::PI());
        acc * self.step() * lit::<S>(self.orientation as f64) / two_pi_i
    }
}

/// Oriented boundary `∂Q` as a union of sampled loops.
#[derive(Debug, Clone)]
pub struct BoundaryData<S: Real> {
    pub loops: Vec<BoundaryLoop<S>>,
}

impl<S: Real> BoundaryData<S> {
    pub fn new(loops: Vec<BoundaryLoop<S>>) -> Result<Self> {
        if loops.is_empty() {
            return Err(Error::InvalidInput("boundary data needs at least one loop".into()));
        }
        Ok(BoundaryData { loops })
    }

    /// Sum of loop contour integrals `(1/2πi) ∮ f`.
    pub fn contour<F>(&self, f: F) -> C<S>
    where
        F: Fn(C<S>, C<S>, C<S>, C<S>) -> C<S> + Copy,
    {
        self.loops.iter().fold(czero(), |acc, l| acc + l.contour(f))
    }

    pub fn sample_count(&self) -> usize {
        self.loops.iter().map(|l| l.len()).sum()
    }
}

/// `ρ = max |w2/w1|` over the boundary samples.
pub fn rho<S: Real>(b: &BoundaryData<S>) -> S {
    b.loops
        .iter()
        .flat_map(|l| l.z1.iter().zip(&l.z2))
        .fold(S::zero(), |m, (z1, z2)| m.max((z2 / z1).norm()))
}

/// `m(y) = min |y z1 + z2|` over the boundary samples.
pub fn m_of_y<S: Real>(b: &BoundaryData<S>, y: C<S>) -> Result<S> {
    let r = rho(b);
    if y.norm() <= r {
        return Err(Error::OutsideDomain {
            y_abs: crate::scalar::to_f64(y.norm()),
            rho: crate::scalar::to_f64(r),
        });
    }
    Ok(raw_m_of_y(b, y))
}

pub(crate) fn raw_m_of_y<S: Real>(b: &BoundaryData<S>, y: C<S>) -> S {
    b.loops
        .iter()
        .flat_map(|l| l.z1.iter().zip(&l.z2))
        .fold(S::infinity(), |m, (z1, z2)| m.min((y * z1 + z2).norm()))
}

/// Deflation applied to the sampled minimum `m(y)` when testing membership in `Z`.
pub const M_DEFLATION: f64 = 0.98;

/// `|y| > ρ` and `|x| < 0.98 m(y)`.
pub fn in_z<S: Real>(b: &BoundaryData<S>, z: &LineParam<S>) -> bool {
    if z.y.norm() <= rho(b) {
        return false;
    }
    z.x.norm() < lit::<S>(M_DEFLATION) * raw_m_of_y(b, z.y)
}

/// Convenience for tests and fixtures: `(1 : a : b)`.
pub fn affine_point<S: Real>(z1: C<S>, z2: C<S>) -> ProjPoint<S> {
    ProjPoint::new([cone(), z1, z2]).expect("finite affine point")
}

#[cfg(test)]
mod tests {
    use super::*;
    fn cr(v: f64) -> crate::scalar::C<f64> {
        crate::scalar::cr(v)
    }

    fn p(a: [f64; 3]) -> ProjPoint<f64> {
        ProjPoint::new(a.map(cr)).unwrap()
    }

    #[test]
    fn charts() {
        let (a, b) = p([1.0, 2.0, 3.0]).affine_chart(0).unwrap();
        assert!((a - cr(2.0)).norm() < 1e-15 && (b - cr(3.0)).norm() < 1e-15);
        let (a, b) = p([0.0, 1.0, 0.5]).affine_chart(2).unwrap();
        assert!(a.norm() < 1e-15 && (b - cr(2.0)).norm() < 1e-15);
        assert_eq!(
            p([0.0, 1.0, 0.5]).affine_chart(0),
            Err(Error::ChartUndefined { chart: 0 })
        );
        let q = ProjPoint::new([cr(1.0), C::new(0.0, 1.0), cr(1.5)]).unwrap();
        let (a, b) = q.affine_chart(0).unwrap();
        assert!((a - C::new(0.0, 1.0)).norm() < 1e-15 && (b - cr(1.5)).norm() < 1e-15);
    }

    #[test]
    fn incidence_residuals() {
        let z = LineParam::new(cr(0.0), cr(0.0));
        assert!(line_eval(&z, &p([1.0, 5.0, 0.0])).norm() < 1e-15);
        let z = LineParam::new(cr(1.0), cr(1.0));
        assert!(line_eval(&z, &p([1.0, 1.0, -2.0])).norm() < 1e-15);
        let z = LineParam::new(cr(1.0), cr(0.0));
        assert!((line_eval(&z, &p([1.0, 0.0, 1.0])) - cr(2.0)).norm() < 1e-15);
    }

    #[test]
    fn chordal_distance_is_projective() {
        let a = p([1.0, 2.0, 3.0]);
        let b = ProjPoint::new([C::new(0.0, 2.0), C::new(0.0, 4.0), C::new(0.0, 6.0)]).unwrap();
        assert!(a.chordal_distance(&b) < 1e-7);
        assert!(a.chordal_distance(&p([1.0, 0.0, 0.0])) > 0.5);
    }
}
