use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::{cone, czero, from_usize, Real, C};

/// Dense univariate polynomial with complex coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly<S: Real> {
    pub c: Vec<C<S>>,
}

impl<S: Real> Poly<S> {
    pub fn new(mut c: Vec<C<S>>) -> Self {
        if c.is_empty() {
            c.push(czero());
        }
        Poly { c }
    }

    pub fn zero() -> Self {
        Poly { c: vec![czero()] }
    }

    pub fn one() -> Self {
        Poly { c: vec![cone()] }
    }

    pub fn constant(a: C<S>) -> Self {
        Poly { c: vec![a] }
    }

    /// Coefficients given highest degree first.
    pub fn from_desc(desc: &[C<S>]) -> Self {
        Poly::new(desc.iter().rev().cloned().collect())
    }

    pub fn coeffs_desc(&self) -> Vec<C<S>> {
        let d = self.degree();
        self.c[..=d].iter().rev().cloned().collect()
    }

    /// Π (T − r).
    pub fn from_roots(roots: &[C<S>]) -> Self {
        let mut p = Poly::one();
        for &r in roots {
            p = &p * &Poly::new(vec![-r, cone()]);
        }
        p
    }

    /// Degree ignoring exactly-zero leading coefficients (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        let mut d = self.c.len() - 1;
        while d > 0 && self.c[d] == czero() {
            d -= 1;
        }
        d
    }

    pub fn eval(&self, z: C<S>) -> C<S> {
        self.c.iter().rev().fold(czero(), |acc, &a| acc * z + a)
    }

    pub fn derivative(&self) -> Self {
        if self.c.len() <= 1 {
            return Poly::zero();
        }
        Poly::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &a)| a * from_usize::<S>(i))
                .collect(),
        )
    }

    pub fn scale(&self, a: C<S>) -> Self {
        Poly::new(self.c.iter().map(|&x| x * a).collect())
    }

    pub fn norm_inf(&self) -> S {
        self.c.iter().fold(S::zero(), |m, a| m.max(a.norm()))
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|a| *a == czero())
    }

    pub fn trimmed(&self) -> Self {
        Poly::new(self.c[..=self.degree()].to_vec())
    }
}

impl<S: Real> Add for &Poly<S> {
    type Output = Poly<S>;
    fn add(self, o: &Poly<S>) -> Poly<S> {
        let n = self.c.len().max(o.c.len());
        Poly::new(
            (0..n)
                .map(|i| self.c.get(i).cloned().unwrap_or_else(czero) + o.c.get(i).cloned().unwrap_or_else(czero))
                .collect(),
        )
    }
}

impl<S: Real> Sub for &Poly<S> {
    type Output = Poly<S>;
    fn sub(self, o: &Poly<S>) -> Poly<S> {
        self + &(-o)
    }
}

impl<S: Real> Neg for &Poly<S> {
    type Output = Poly<S>;
    fn neg(self) -> Poly<S> {
        Poly::new(self.c.iter().map(|&a| -a).collect())
    }
}

impl<S: Real> Mul for &Poly<S> {
    type Output = Poly<S>;
    fn mul(self, o: &Poly<S>) -> Poly<S> {
        let mut c = vec![czero::<S>(); self.c.len() + o.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            for (j, &b) in o.c.iter().enumerate() {
                c[i + j] = c[i + j] + a * b;
            }
        }
        Poly::new(c)
    }
}
