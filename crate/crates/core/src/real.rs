//! Scalar abstraction shared by plain `f64` evaluation and jet propagation.

use core::fmt::Debug;
use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Field operations needed by the geometric formulas.
///
/// Every chart, support function and test field in this crate is written once
/// against this trait. Evaluating with `f64` gives point values; evaluating
/// with [`Jet`](crate::jet::Jet) gives exact parameter derivatives.
pub trait Real:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    fn from_f64(x: f64) -> Self;
    /// Constant term.
    fn value(&self) -> f64;
    fn sqrt(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn recip(self) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn scale(self, c: f64) -> Self {
        self * Self::from_f64(c)
    }

    fn powi(self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc *= self;
        }
        acc
    }
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sqrt(self) -> Self {
        libm::sqrt(self)
    }
    fn sin(self) -> Self {
        libm::sin(self)
    }
    fn cos(self) -> Self {
        libm::cos(self)
    }
    fn recip(self) -> Self {
        1.0 / self
    }
}

/// Small fixed-size vector helpers over [`Real`].
pub mod vec3 {
    use super::Real;

    pub type V3<T> = [T; 3];

    pub fn zero<T: Real>() -> V3<T> {
        [T::zero(); 3]
    }

    pub fn from_f64<T: Real>(v: &[f64; 3]) -> V3<T> {
        [T::from_f64(v[0]), T::from_f64(v[1]), T::from_f64(v[2])]
    }

    pub fn values<T: Real>(v: &V3<T>) -> [f64; 3] {
        [v[0].value(), v[1].value(), v[2].value()]
    }

    pub fn dot<T: Real>(a: &V3<T>, b: &V3<T>) -> T {
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    }

    pub fn add<T: Real>(a: &V3<T>, b: &V3<T>) -> V3<T> {
        [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
    }

    pub fn sub<T: Real>(a: &V3<T>, b: &V3<T>) -> V3<T> {
        [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
    }

    pub fn scale<T: Real>(a: &V3<T>, c: T) -> V3<T> {
        [a[0] * c, a[1] * c, a[2] * c]
    }

    pub fn cross<T: Real>(a: &V3<T>, b: &V3<T>) -> V3<T> {
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    }

    pub fn norm<T: Real>(a: &V3<T>) -> T {
        dot(a, a).sqrt()
    }

    pub fn normalized<T: Real>(a: &V3<T>) -> V3<T> {
        scale(a, norm(a).recip())
    }

    pub fn mat_vec<T: Real>(m: &[[T; 3]; 3], v: &V3<T>) -> V3<T> {
        [dot(&m[0], v), dot(&m[1], v), dot(&m[2], v)]
    }

    pub fn norm_f64(a: &[f64; 3]) -> f64 {
        libm::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2])
    }
}
