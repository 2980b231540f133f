//! Germs of `Q` at the line `{w0 = 0}`, the polynomial `B∞` and the rational
//! corrections `P_k` in `X` with coefficients rational in `Y`.

use crate::error::{Error, Result};
use crate::geometry::LineParam;
use crate::poly::Poly;
use crate::scalar::{cone, czero, factorial, from_usize, lit, to_f64, Real, C};
use crate::series::Tps;
use crate::symmetric::roots;

/// Branch of `Q` through `(0 : b : 1)`, written `u1 = g(u0) = b + g1 u0 + g2 u0² + …`
/// in the chart `(u0, u1) = (w0/w2, w1/w2)`. Omitted Taylor coefficients are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct GermAtInfinity<S: Real> {
    pub b: C<S>,
    pub taylor: Vec<C<S>>,
}

impl<S: Real> GermAtInfinity<S> {
    fn series(&self, len: usize) -> Tps<S> {
        let mut a = vec![self.b];
        a.extend(self.taylor.iter().cloned());
        a.truncate(len);
        Tps::new(len, a)
    }
}

/// `num(Y) / B(Y)^pow` for a fixed denominator polynomial `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct RatY<S: Real> {
    pub num: Poly<S>,
    pub pow: usize,
}

impl<S: Real> RatY<S> {
    fn zero() -> Self {
        RatY {
            num: Poly::zero(),
            pow: 0,
        }
    }

    fn derivative(&self, b: &Poly<S>) -> Self {
        let j = from_usize::<S>(self.pow);
        let t1 = &self.num.derivative() * b;
        let t2 = (&self.num * &b.derivative()).scale(C::new(j, S::zero()));
        RatY {
            num: (&t1 - &t2).trimmed(),
            pow: self.pow + 1,
        }
    }

    fn scale(&self, a: C<S>) -> Self {
        RatY {
            num: self.num.scale(a),
            pow: self.pow,
        }
    }

    pub fn eval(&self, b: &Poly<S>, y: C<S>) -> C<S> {
        let mut d = cone::<S>();
        let bv = b.eval(y);
        for _ in 0..self.pow {
            d = d * bv;
        }
        self.num.eval(y) / d
    }
}

/// `Σ_m p_m(Y) Xᵐ`, each `p_m` a fraction over a power of `den`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalAffinePoly<S: Real> {
    pub den: Poly<S>,
    pub coeffs: Vec<RatY<S>>,
}

impl<S: Real> RationalAffinePoly<S> {
    pub fn zero() -> Self {
        RationalAffinePoly {
            den: Poly::one(),
            coeffs: vec![RatY::zero()],
        }
    }

    pub fn constant(c: C<S>) -> Self {
        RationalAffinePoly {
            den: Poly::one(),
            coeffs: vec![RatY {
                num: Poly::constant(c),
                pow: 0,
            }],
        }
    }

    /// `A/B + X B′/B`.
    pub fn from_ab(a: &Poly<S>, b: &Poly<S>) -> Self {
        RationalAffinePoly {
            den: b.clone(),
            coeffs: vec![
                RatY { num: a.clone(), pow: 1 },
                RatY {
                    num: b.derivative(),
                    pow: 1,
                },
            ],
        }
    }

    pub fn deg_x(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: C<S>, y: C<S>) -> C<S> {
        self.coeffs
            .iter()
            .rev()
            .fold(czero(), |acc, p| acc * x + p.eval(&self.den, y))
    }

    /// `∂/∂Y` evaluated at a point.
    pub fn eval_dy(&self, x: C<S>, y: C<S>) -> C<S> {
        self.coeffs
            .iter()
            .rev()
            .fold(czero(), |acc, p| acc * x + p.derivative(&self.den).eval(&self.den, y))
    }

    /// `∂/∂X` evaluated at a point.
    pub fn eval_dx(&self, x: C<S>, y: C<S>) -> C<S> {
        let mut acc = czero::<S>();
        for (m, p) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * x + p.eval(&self.den, y) * from_usize::<S>(m);
        }
        acc
    }
}

/// `B∞(Y) = Π (1 + Y b_q)`.
pub fn b_infinity<S: Real>(germs: &[GermAtInfinity<S>]) -> Poly<S> {
    germs
        .iter()
        .fold(Poly::one(), |acc, g| &acc * &Poly::new(vec![cone(), g.b]))
}

/// `P_1` from the germ values and first Taylor coefficients.
pub fn p1<S: Real>(germs: &[GermAtInfinity<S>]) -> RationalAffinePoly<S> {
    let den = b_infinity(germs);
    let mut p10 = Poly::zero();
    for (q, g) in germs.iter().enumerate() {
        let others = germs
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != q)
            .fold(Poly::one(), |acc, (_, h)| &acc * &Poly::new(vec![cone(), h.b]));
        let g1 = g.taylor.first().cloned().unwrap_or_else(czero);
        p10 = &p10 - &others.scale(g1);
    }
    RationalAffinePoly {
        coeffs: vec![
            RatY { num: p10, pow: 1 },
            RatY {
                num: den.derivative(),
                pow: 1,
            },
        ],
        den,
    }
}

/// Residue contribution of one germ to `P_k(z)`: the `u^{k−1}` coefficient of
/// `[x(g − u g′) − g′] g^{k−1} / (1 + x u + y g)`.
pub fn pk_residue<S: Real>(germ: &GermAtInfinity<S>, k: usize, z: &LineParam<S>) -> Result<C<S>> {
    if k == 0 {
        return Ok(-cone::<S>());
    }
    let res = (cone::<S>() + z.y * germ.b).norm();
    if res < lit(1e-9) {
        return Err(Error::ResonantY(to_f64(res)));
    }
    let len = k + 1;
    let g = germ.series(len);
    let gp = g.derivative();
    let u_gp = gp.shift();
    let num = g.sub(&u_gp).scale(z.x).sub(&gp).mul(&g.powu(k - 1));
    let mut den = g.scale(z.y);
    den.a[0] = den.a[0] + cone::<S>();
    den.a[1] = den.a[1] + z.x;
    Ok(num.mul(&den.inv()).a[k - 1])
}

/// `p_{k,0}` of one germ as a numerator over `(1 + Y b)^k`.
fn pk0_numerator<S: Real>(germ: &GermAtInfinity<S>, k: usize) -> Poly<S> {
    let len = k + 1;
    let g = germ.series(len);
    let gp = g.derivative();
    let mut gt = g.clone();
    gt.a[0] = czero();
    let base = gp.mul(&g.powu(k - 1));
    let lin = Poly::new(vec![cone(), germ.b]);
    let mut num = Poly::zero();
    let mut gt_pow = Tps::constant(len, cone());
    for n in 1..=k {
        let c = base.mul(&gt_pow).a[k - 1];
        let sign = if n % 2 == 0 { S::one() } else { -S::one() };
        let mut y_pow = vec![czero::<S>(); n];
        y_pow[n - 1] = c * sign;
        let mut term = Poly::new(y_pow);
        for _ in 0..k - n {
            term = &term * &lin;
        }
        num = &num + &term;
        gt_pow = gt_pow.mul(&gt);
    }
    num
}

/// `P_0, …, P_kmax` over the common denominator `B∞`.
///
/// `p_{k,0}` comes from the germ series; the higher `X` coefficients follow
/// from `p_{k,k} = p_{1,1}^{(k−1)}/(k−1)!` and
/// `p_{k,m} = k/(m!(k−m)) · p_{k−m,0}^{(m)}`.
pub fn pk_family<S: Real>(germs: &[GermAtInfinity<S>], kmax: usize) -> Vec<RationalAffinePoly<S>> {
    let den = b_infinity(germs);
    let q_inf = from_usize::<S>(germs.len());
    let mut out = vec![RationalAffinePoly {
        den: den.clone(),
        coeffs: vec![RatY {
            num: Poly::constant(C::new(-q_inf, S::zero())),
            pow: 0,
        }],
    }];
    let lin = |b: C<S>| Poly::new(vec![cone(), b]);
    let pk0: Vec<RatY<S>> = (0..=kmax)
        .map(|k| {
            if k == 0 {
                return RatY::zero();
            }
            let mut num = Poly::zero();
            for (q, g) in germs.iter().enumerate() {
                let mut t = pk0_numerator(g, k);
                for (i, h) in germs.iter().enumerate() {
                    if i != q {
                        for _ in 0..k {
                            t = &t * &lin(h.b);
                        }
                    }
                }
                num = &num + &t;
            }
            RatY { num, pow: k }
        })
        .collect();
    let p11 = RatY {
        num: den.derivative(),
        pow: 1,
    };
    for k in 1..=kmax {
        let mut coeffs = vec![pk0[k].clone()];
        for m in 1..k {
            let mut d = pk0[k - m].clone();
            for _ in 0..m {
                d = d.derivative(&den);
            }
            let f = from_usize::<S>(k) / (factorial::<S>(m) * from_usize::<S>(k - m));
            coeffs.push(d.scale(C::new(f, S::zero())));
        }
        let mut d = p11.clone();
        for _ in 0..k - 1 {
            d = d.derivative(&den);
        }
        coeffs.push(d.scale(C::new(S::one() / factorial::<S>(k - 1), S::zero())));
        out.push(RationalAffinePoly {
            den: den.clone(),
            coeffs,
        });
    }
    out
}

/// Every root `−1/b_q` of `B∞` lies in the closed disc of radius `ρ`.
pub fn check_confinement<S: Real>(binf: &Poly<S>, rho: S) -> Result<bool> {
    if binf.degree() == 0 {
        return Ok(true);
    }
    let slack = S::one() + lit(1e-9);
    Ok(roots(binf)?.iter().all(|r| r.norm() <= rho * slack))
}

#[cfg(test)]
mod tests {
    use super::*;
    fn cr(v: f64) -> crate::scalar::C<f64> {
        crate::scalar::cr(v)
    }

    fn germ(b: f64, t: &[f64]) -> GermAtInfinity<f64> {
        GermAtInfinity {
            b: cr(b),
            taylor: t.iter().map(|&v| cr(v)).collect(),
        }
    }

    #[test]
    fn b_infinity_examples() {
        assert_eq!(b_infinity(&[germ(2.0, &[])]).c, vec![cr(1.0), cr(2.0)]);
        assert_eq!(b_infinity::<f64>(&[]).c, vec![cr(1.0)]);
        let b = b_infinity(&[germ(2.0, &[]), germ(-1.0, &[])]);
        assert_eq!(b.c, vec![cr(1.0), cr(1.0), cr(-2.0)]);
    }

    #[test]
    fn exterior_line_p1() {
        let p = p1(&[germ(2.0, &[-2.0])]);
        let z = LineParam::new(cr(0.3), cr(10.0));
        let want = (cr(1.0) + z.x) / (z.y + cr(0.5));
        assert!((p.eval(z.x, z.y) - want).norm() < 1e-14);
        let r = pk_residue(&germ(2.0, &[-2.0]), 1, &LineParam::new(cr(0.0), cr(10.0))).unwrap();
        assert!((r - cr(2.0 / 21.0)).norm() < 1e-15);
        assert_eq!(pk_residue(&germ(2.0, &[-2.0]), 0, &z).unwrap(), cr(-1.0));
    }

    #[test]
    fn p1_of_two_germs() {
        let p = p1(&[germ(2.0, &[0.0]), germ(3.0, &[0.0])]);
        let y = cr(5.0);
        assert!(p.coeffs[0].eval(&p.den, y).norm() < 1e-15);
        let want = cr(2.0) / (cr(1.0) + y * 2.0) + cr(3.0) / (cr(1.0) + y * 3.0);
        assert!((p.coeffs[1].eval(&p.den, y) - want).norm() < 1e-14);
        assert_eq!(p1::<f64>(&[]).eval(cr(1.0), cr(2.0)), cr(0.0));
    }

    #[test]
    fn p22_is_derivative_of_p11() {
        let fam = pk_family(&[germ(2.0, &[-2.0])], 2);
        let y = cr(1.7);
        let want = cr(-4.0) / ((cr(1.0) + y * 2.0) * (cr(1.0) + y * 2.0));
        assert!((fam[2].coeffs[2].eval(&fam[2].den, y) - want).norm() < 1e-14);
    }

    #[test]
    fn confinement() {
        assert!(check_confinement(&Poly::new(vec![cr(1.0), cr(2.0)]), 1.5).unwrap());
        assert!(!check_confinement(&Poly::new(vec![cr(1.0), cr(0.1)]), 1.0).unwrap());
        assert!(check_confinement::<f64>(&Poly::one(), 0.1).unwrap());
    }
}
