//! Truncated bivariate Taylor polynomials.
//!
//! A [`Jet`] stores the Taylor coefficients of a function of the two chart
//! parameters `(p0, p1)` around a node, up to total order [`ORDER`]. Arithmetic
//! and the elementary functions propagate these coefficients exactly, so a
//! chart evaluated on seeded jets yields its partial derivatives up to third
//! order without any finite differencing.
//!
//! Taking a partial derivative of a jet lowers the number of trustworthy
//! orders by one; callers keep track of how many differentiations a quantity
//! has been through.

use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use crate::real::Real;

pub const ORDER: usize = 3;
/// Number of monomials `p0^a p1^b` with `a + b <= ORDER`.
pub const LEN: usize = 10;

const fn idx(a: usize, b: usize) -> usize {
    let k = a + b;
    k * (k + 1) / 2 + b
}

const EXPONENTS: [(usize, usize); LEN] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
];

const fn factorial(k: usize) -> f64 {
    match k {
        0 | 1 => 1.0,
        2 => 2.0,
        _ => 6.0,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    c: [f64; LEN],
}

impl Jet {
    pub const fn constant(v: f64) -> Self {
        let mut c = [0.0; LEN];
        c[0] = v;
        Jet { c }
    }

    /// The coordinate function `p_dir` expanded at `value`.
    pub fn variable(value: f64, dir: usize) -> Self {
        let mut j = Jet::constant(value);
        j.c[if dir == 0 { idx(1, 0) } else { idx(0, 1) }] = 1.0;
        j
    }

    pub fn coefficients(&self) -> &[f64; LEN] {
        &self.c
    }

    /// `∂^{a+b} / ∂p0^a ∂p1^b` at the expansion point.
    pub fn partial(&self, a: usize, b: usize) -> f64 {
        debug_assert!(a + b <= ORDER);
        self.c[idx(a, b)] * factorial(a) * factorial(b)
    }

    /// First partial along parameter `dir`.
    pub fn d1(&self, dir: usize) -> f64 {
        if dir == 0 {
            self.c[idx(1, 0)]
        } else {
            self.c[idx(0, 1)]
        }
    }

    /// The jet of `∂f/∂p_dir`. Its top-order coefficients are zero and must
    /// not be trusted.
    pub fn derivative(&self, dir: usize) -> Jet {
        let mut out = [0.0; LEN];
        for (k, &(a, b)) in EXPONENTS.iter().enumerate() {
            let (a1, b1) = if dir == 0 { (a + 1, b) } else { (a, b + 1) };
            if a1 + b1 <= ORDER {
                let factor = if dir == 0 { a1 } else { b1 } as f64;
                out[k] = factor * self.c[idx(a1, b1)];
            }
        }
        Jet { c: out }
    }

    /// Evaluates `g(self)` given `g` and its first three derivatives at the
    /// constant term.
    fn compose(&self, g0: f64, g1: f64, g2: f64, g3: f64) -> Jet {
        let mut delta = *self;
        delta.c[0] = 0.0;
        let d2 = delta * delta;
        let d3 = d2 * delta;
        let mut out = [0.0; LEN];
        out[0] = g0;
        for k in 1..LEN {
            out[k] = g1 * delta.c[k] + 0.5 * g2 * d2.c[k] + g3 / 6.0 * d3.c[k];
        }
        Jet { c: out }
    }
}

impl Default for Jet {
    fn default() -> Self {
        Jet::constant(0.0)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, rhs: Jet) -> Jet {
        for k in 0..LEN {
            self.c[k] += rhs.c[k];
        }
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: Jet) -> Jet {
        for k in 0..LEN {
            self.c[k] -= rhs.c[k];
        }
        self
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        for k in 0..LEN {
            self.c[k] = -self.c[k];
        }
        self
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let mut out = [0.0; LEN];
        for (i, &(a1, b1)) in EXPONENTS.iter().enumerate() {
            let x = self.c[i];
            if x == 0.0 {
                continue;
            }
            for (j, &(a2, b2)) in EXPONENTS.iter().enumerate() {
                if a1 + b1 + a2 + b2 <= ORDER {
                    out[idx(a1 + a2, b1 + b2)] += x * rhs.c[j];
                }
            }
        }
        Jet { c: out }
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet) -> Jet {
        self * rhs.recip()
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self = *self + rhs;
    }
}

impl SubAssign for Jet {
    fn sub_assign(&mut self, rhs: Jet) {
        *self = *self - rhs;
    }
}

impl MulAssign for Jet {
    fn mul_assign(&mut self, rhs: Jet) {
        *self = *self * rhs;
    }
}

impl Real for Jet {
    fn from_f64(x: f64) -> Self {
        Jet::constant(x)
    }

    fn value(&self) -> f64 {
        self.c[0]
    }

    fn sqrt(self) -> Self {
        let x = self.c[0];
        let r = libm::sqrt(x);
        self.compose(r, 0.5 / r, -0.25 / (r * x), 0.375 / (r * x * x))
    }

    fn sin(self) -> Self {
        let (s, c) = (libm::sin(self.c[0]), libm::cos(self.c[0]));
        self.compose(s, c, -s, -c)
    }

    fn cos(self) -> Self {
        let (s, c) = (libm::sin(self.c[0]), libm::cos(self.c[0]));
        self.compose(c, -s, -c, s)
    }

    fn recip(self) -> Self {
        let x = self.c[0];
        let r = 1.0 / x;
        self.compose(r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r)
    }

    fn scale(mut self, c: f64) -> Self {
        for k in 0..LEN {
            self.c[k] *= c;
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn product_rule_third_order() {
        // f = sin(x) * cos(y) * (1 + x y^2)
        let (x0, y0) = (0.3, -0.7);
        let x = Jet::variable(x0, 0);
        let y = Jet::variable(y0, 1);
        let f = x.sin() * y.cos() * (Jet::constant(1.0) + x * y * y);
        // ∂x∂y² by hand
        let g = |x: f64, y: f64| libm::sin(x) * libm::cos(y) * (1.0 + x * y * y);
        let h = 1e-3;
        let fd = (g(x0 + h, y0 + h) - 2.0 * g(x0 + h, y0) + g(x0 + h, y0 - h)
            - g(x0 - h, y0 + h)
            + 2.0 * g(x0 - h, y0)
            - g(x0 - h, y0 - h))
            / (2.0 * h * h * h);
        assert!(close(f.partial(1, 2), fd, 1e-5));
        assert!(close(f.value(), g(x0, y0), 1e-15));
    }

    #[test]
    fn sqrt_recip_consistent() {
        let x = Jet::variable(2.0, 0) + Jet::variable(0.5, 1);
        let s = x.sqrt();
        let back = s * s;
        for k in 0..LEN {
            assert!((back.c[k] - x.c[k]).abs() < 1e-14);
        }
        let one = x * x.recip();
        assert!((one.value() - 1.0).abs() < 1e-15);
        for k in 1..LEN {
            assert!(one.c[k].abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_shifts_coefficients() {
        let x = Jet::variable(1.0, 0);
        let y = Jet::variable(2.0, 1);
        let f = x * x * y; // ∂x f = 2 x y
        let d = f.derivative(0);
        assert!(close(d.value(), 4.0, 1e-15));
        assert!(close(d.partial(1, 0), 4.0, 1e-15));
        assert!(close(d.partial(0, 1), 2.0, 1e-15));
        assert!(close(d.partial(1, 1), 2.0, 1e-15));
    }
}
