use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive};

/// Real scalar the numerical core is generic over (`f32` or `f64`).
pub trait Real: Float + FloatConst + FromPrimitive + Default + Debug + Display + Send + Sync + 'static {}

impl Real for f32 {}
impl Real for f64 {}

pub type C<S> = Complex<S>;

#[inline]
pub fn lit<S: Real>(x: f64) -> S {
    S::from_f64(x).expect("f64 literal representable in scalar type")
}

#[inline]
pub fn cr<S: Real>(x: f64) -> C<S> {
    C::new(lit(x), S::zero())
}

#[inline]
pub fn czero<S: Real>() -> C<S> {
    C::new(S::zero(), S::zero())
}

#[inline]
pub fn cone<S: Real>() -> C<S> {
    C::new(S::one(), S::zero())
}

#[inline]
pub fn ci<S: Real>() -> C<S> {
    C::new(S::zero(), S::one())
}

#[inline]
pub fn from_usize<S: Real>(n: usize) -> S {
    S::from_usize(n).expect("integer representable in scalar type")
}

#[inline]
pub fn from_i64<S: Real>(n: i64) -> S {
    S::from_i64(n).expect("integer representable in scalar type")
}

/// `e^{iθ}`.
#[inline]
pub fn cis<S: Real>(theta: S) -> C<S> {
    C::new(theta.cos(), theta.sin())
}

/// Integer power that also accepts negative exponents.
pub fn cpowi<S: Real>(z: C<S>, e: i32) -> C<S> {
    if e >= 0 {
        z.powu(e as u32)
    } else {
        cone::<S>() / z.powu((-e) as u32)
    }
}

pub fn to_f64<S: Real>(x: S) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn binomial<S: Real>(n: usize, k: usize) -> S {
    if k > n {
        return S::zero();
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    lit(acc.round())
}

pub fn factorial<S: Real>(n: usize) -> S {
    let mut acc = 1.0f64;
    for i in 2..=n {
        acc *= i as f64;
    }
    lit(acc)
}
