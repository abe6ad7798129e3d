//! Fixed lists of low-degree harmonic polynomials used to perturb balls and to
//! build radial graphs.
//!
//! In three dimensions the list is, in order:
//! `x, y, z, xy, yz, zx, x²−y², 2z²−x²−y², x(x²−3y²), y(3x²−y²), z(x²−y²),
//! xyz, x(4z²−x²−y²), y(4z²−x²−y²), z(2z²−3x²−3y²)`.
//! In two dimensions: the real and imaginary parts of `(x + iy)^k` for
//! `k = 1..=4`.

use crate::real::Real;

/// `(coefficient, [a, b, c])` for `coefficient · x^a y^b z^c`.
type Monomial = (f64, [u32; 3]);

#[derive(Clone, Copy, Debug)]
pub struct HarmonicPolynomial {
    pub degree: u32,
    pub label: &'static str,
    terms: &'static [Monomial],
}

macro_rules! harm {
    ($deg:expr, $label:expr, [$(($c:expr, $a:expr, $b:expr, $d:expr)),* $(,)?]) => {
        HarmonicPolynomial { degree: $deg, label: $label, terms: &[$(($c, [$a, $b, $d])),*] }
    };
}

pub const HARMONICS_3D: [HarmonicPolynomial; 15] = [
    harm!(1, "x", [(1.0, 1, 0, 0)]),
    harm!(1, "y", [(1.0, 0, 1, 0)]),
    harm!(1, "z", [(1.0, 0, 0, 1)]),
    harm!(2, "xy", [(1.0, 1, 1, 0)]),
    harm!(2, "yz", [(1.0, 0, 1, 1)]),
    harm!(2, "zx", [(1.0, 1, 0, 1)]),
    harm!(2, "x2-y2", [(1.0, 2, 0, 0), (-1.0, 0, 2, 0)]),
    harm!(2, "2z2-x2-y2", [(2.0, 0, 0, 2), (-1.0, 2, 0, 0), (-1.0, 0, 2, 0)]),
    harm!(3, "x(x2-3y2)", [(1.0, 3, 0, 0), (-3.0, 1, 2, 0)]),
    harm!(3, "y(3x2-y2)", [(3.0, 2, 1, 0), (-1.0, 0, 3, 0)]),
    harm!(3, "z(x2-y2)", [(1.0, 2, 0, 1), (-1.0, 0, 2, 1)]),
    harm!(3, "xyz", [(1.0, 1, 1, 1)]),
    harm!(3, "x(4z2-x2-y2)", [(4.0, 1, 0, 2), (-1.0, 3, 0, 0), (-1.0, 1, 2, 0)]),
    harm!(3, "y(4z2-x2-y2)", [(4.0, 0, 1, 2), (-1.0, 2, 1, 0), (-1.0, 0, 3, 0)]),
    harm!(3, "z(2z2-3x2-3y2)", [(2.0, 0, 0, 3), (-3.0, 2, 0, 1), (-3.0, 0, 2, 1)]),
];

pub const HARMONICS_2D: [HarmonicPolynomial; 8] = [
    harm!(1, "x", [(1.0, 1, 0, 0)]),
    harm!(1, "y", [(1.0, 0, 1, 0)]),
    harm!(2, "x2-y2", [(1.0, 2, 0, 0), (-1.0, 0, 2, 0)]),
    harm!(2, "2xy", [(2.0, 1, 1, 0)]),
    harm!(3, "x3-3xy2", [(1.0, 3, 0, 0), (-3.0, 1, 2, 0)]),
    harm!(3, "3x2y-y3", [(3.0, 2, 1, 0), (-1.0, 0, 3, 0)]),
    harm!(4, "x4-6x2y2+y4", [(1.0, 4, 0, 0), (-6.0, 2, 2, 0), (1.0, 0, 4, 0)]),
    harm!(4, "4x3y-4xy3", [(4.0, 3, 1, 0), (-4.0, 1, 3, 0)]),
];

pub fn harmonics(dim: usize) -> &'static [HarmonicPolynomial] {
    if dim == 2 {
        &HARMONICS_2D
    } else {
        &HARMONICS_3D
    }
}

fn monomial<T: Real>(v: &[T; 3], e: [u32; 3]) -> T {
    v[0].powi(e[0]) * v[1].powi(e[1]) * v[2].powi(e[2])
}

impl HarmonicPolynomial {
    pub fn eval<T: Real>(&self, v: &[T; 3]) -> T {
        let mut acc = T::zero();
        for &(c, e) in self.terms {
            acc += monomial(v, e).scale(c);
        }
        acc
    }

    pub fn gradient<T: Real>(&self, v: &[T; 3]) -> [T; 3] {
        let mut g = [T::zero(); 3];
        for &(c, e) in self.terms {
            for (i, gi) in g.iter_mut().enumerate() {
                if e[i] == 0 {
                    continue;
                }
                let mut d = e;
                d[i] -= 1;
                *gi += monomial(v, d).scale(c * e[i] as f64);
            }
        }
        g
    }

    pub fn hessian<T: Real>(&self, v: &[T; 3]) -> [[T; 3]; 3] {
        let mut h = [[T::zero(); 3]; 3];
        for &(c, e) in self.terms {
            for i in 0..3 {
                for j in 0..3 {
                    let mut d = e;
                    if d[i] == 0 {
                        continue;
                    }
                    let mut f = c * d[i] as f64;
                    d[i] -= 1;
                    if d[j] == 0 {
                        continue;
                    }
                    f *= d[j] as f64;
                    d[j] -= 1;
                    h[i][j] += monomial(v, d).scale(f);
                }
            }
        }
        h
    }

    /// Value, gradient and Hessian of the positively 1-homogeneous extension
    /// `p(v) |v|^{1-k}` of this degree-`k` polynomial restricted to the sphere.
    pub fn homogeneous_extension<T: Real>(&self, v: &[T; 3]) -> (T, [T; 3], [[T; 3]; 3]) {
        let a = 1.0 - self.degree as f64;
        let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        let r = r2.sqrt();
        let rinv = r.recip();
        // r^a for integer a <= 0
        let ra = rinv.powi(self.degree - 1);
        let ra2 = ra * rinv * rinv;
        let ra4 = ra2 * rinv * rinv;
        let p = self.eval(v);
        let gp = self.gradient(v);
        let hp = self.hessian(v);
        let value = p * ra;
        let mut grad = [T::zero(); 3];
        for i in 0..3 {
            grad[i] = gp[i] * ra + (p * ra2 * v[i]).scale(a);
        }
        let mut hess = [[T::zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut hij = hp[i][j] * ra
                    + (ra2 * (gp[i] * v[j] + v[i] * gp[j])).scale(a)
                    + (p * ra4 * v[i] * v[j]).scale(a * (a - 2.0));
                if i == j {
                    hij += (p * ra2).scale(a);
                }
                hess[i][j] = hij;
            }
        }
        (value, grad, hess)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(h: &HarmonicPolynomial, v: [f64; 3]) -> f64 {
        let hs = h.hessian(&v);
        hs[0][0] + hs[1][1] + hs[2][2]
    }

    #[test]
    fn listed_polynomials_are_harmonic() {
        let v = [0.3, -0.8, 0.55];
        for h in HARMONICS_3D.iter().chain(HARMONICS_2D.iter()) {
            assert!(laplacian(h, v).abs() < 1e-12, "{}", h.label);
        }
    }

    #[test]
    fn extension_is_one_homogeneous() {
        let v = [0.3, -0.8, 0.55];
        let w = [0.6, -1.6, 1.1];
        for h in HARMONICS_3D.iter() {
            let (a, ga, ha) = h.homogeneous_extension(&v);
            let (b, gb, hb) = h.homogeneous_extension(&w);
            assert!((b - 2.0 * a).abs() < 1e-12);
            for i in 0..3 {
                assert!((ga[i] - gb[i]).abs() < 1e-12);
                for j in 0..3 {
                    assert!((ha[i][j] - 2.0 * hb[i][j]).abs() < 1e-12);
                }
            }
            // Euler: H v = 0 because the gradient is 0-homogeneous
            for i in 0..3 {
                let hv: f64 = (0..3).map(|j| ha[i][j] * v[j]).sum();
                assert!(hv.abs() < 1e-12, "{}", h.label);
            }
        }
    }

    #[test]
    fn extension_gradient_matches_finite_differences() {
        let v = [0.3, -0.8, 0.55];
        let step = 1e-6;
        for h in HARMONICS_3D.iter() {
            let (_, g, hs) = h.homogeneous_extension(&v);
            for i in 0..3 {
                let mut p = v;
                let mut m = v;
                p[i] += step;
                m[i] -= step;
                let fd = (h.homogeneous_extension(&p).0 - h.homogeneous_extension(&m).0) / (2.0 * step);
                assert!((fd - g[i]).abs() < 1e-8, "{}", h.label);
                let (_, gp, _) = h.homogeneous_extension(&p);
                let (_, gm, _) = h.homogeneous_extension(&m);
                for j in 0..3 {
                    let fdh = (gp[j] - gm[j]) / (2.0 * step);
                    assert!((fdh - hs[j][i]).abs() < 1e-7, "{}", h.label);
                }
            }
        }
    }
}
