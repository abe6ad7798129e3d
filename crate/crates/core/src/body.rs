//! Smooth convex gauge bodies described by their support function.
//!
//! A body `B` contains the origin in its interior and has a positively curved
//! boundary. Everything downstream uses three pieces of it: the support
//! function `h_B`, its gradient `u = ∇h_B` (the inverse of the Gauss map of
//! `∂B`) and its Hessian `du`, which restricted to `ν⊥` is symmetric positive
//! definite.
//!
//! The built-in families carry closed-form derivatives written against
//! [`Real`], so the same code evaluates on `f64` and on jets. A user supplied
//! support function only offers `f64` values; its derivatives come from
//! Richardson-extrapolated central differences and it cannot drive frame
//! computations.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::harmonics::harmonics;
use crate::quadrature::{gauss_legendre, periodic_trapezoid};
use crate::real::vec3::{self, V3};
use crate::real::Real;

/// Directions within this distance of unit length are renormalized.
pub const DIRECTION_TOLERANCE: f64 = 1e-8;

const CUSTOM_GRADIENT_STEP: f64 = 1e-5;
const CUSTOM_HESSIAN_STEP: f64 = 1e-3;

pub type SupportFn = dyn Fn(&[f64; 3]) -> f64 + Send + Sync;

#[derive(Clone)]
pub struct CustomSupport(pub Arc<SupportFn>);

impl fmt::Debug for CustomSupport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CustomSupport(..)")
    }
}

#[derive(Clone, Debug)]
pub enum Family {
    Ball {
        radius: f64,
    },
    /// `{x : xᵀ Q⁻¹ x <= 1}`, with `h(v) = sqrt(vᵀ Q v)`.
    Ellipsoid {
        q: [[f64; 3]; 3],
    },
    /// `h(ν) = r + ε Σ c_k P_k(ν)` with `P_k` from [`harmonics`].
    PerturbedBall {
        radius: f64,
        epsilon: f64,
        coeffs: Vec<f64>,
    },
    Custom(CustomSupport),
}

#[derive(Clone, Debug)]
pub struct ConvexBody {
    dim: usize,
    family: Family,
    gradient_fault: f64,
}

/// `du(ν)` as an ambient matrix together with its restriction to `ν⊥`.
#[derive(Clone, Copy, Debug)]
pub struct SupportHessian {
    /// Tangent dimension `n - 1`.
    pub m: usize,
    pub ambient: [[f64; 3]; 3],
    /// Orthonormal basis of `ν⊥` (first `m` rows valid).
    pub basis: [[f64; 3]; 2],
    pub restricted: [[f64; 2]; 2],
}

impl SupportHessian {
    pub fn apply(&self, w: &[f64; 3]) -> [f64; 3] {
        vec3::mat_vec(&self.ambient, w)
    }

    /// Ascending eigenvalues of the restriction (first `m` valid).
    pub fn eigenvalues(&self) -> [f64; 2] {
        small_symmetric_eigenvalues(self.m, &self.restricted)
    }
}

pub(crate) fn small_symmetric_eigenvalues(m: usize, a: &[[f64; 2]; 2]) -> [f64; 2] {
    if m == 1 {
        return [a[0][0], a[0][0]];
    }
    let mean = 0.5 * (a[0][0] + a[1][1]);
    let off = 0.5 * (a[0][1] + a[1][0]);
    let half = 0.5 * (a[0][0] - a[1][1]);
    let r = libm::hypot(half, off);
    [mean - r, mean + r]
}

/// Orthonormal basis of the orthogonal complement of the unit vector `nu`
/// inside `R^dim`.
pub fn complement_basis(dim: usize, nu: &[f64; 3]) -> [[f64; 3]; 2] {
    if dim == 2 {
        return [[-nu[1], nu[0], 0.0], [0.0; 3]];
    }
    let axis = if nu[0].abs() <= nu[1].abs() && nu[0].abs() <= nu[2].abs() {
        [1.0, 0.0, 0.0]
    } else if nu[1].abs() <= nu[2].abs() {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let proj = vec3::dot(&axis, nu);
    let b1 = vec3::normalized(&vec3::sub(&axis, &vec3::scale(nu, proj)));
    let b2 = vec3::cross(nu, &b1);
    [b1, b2]
}

impl ConvexBody {
    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter(format!("ball radius {radius} must be positive")));
        }
        Ok(Self::from_family(dim, Family::Ball { radius }))
    }

    /// `q` is `dim x dim`, symmetric positive definite.
    pub fn ellipsoid(dim: usize, q: &[Vec<f64>]) -> Result<Self> {
        check_dim(dim)?;
        if q.len() != dim || q.iter().any(|row| row.len() != dim) {
            return Err(Error::InvalidParameter(format!("Q must be {dim}x{dim}")));
        }
        let mut full = [[0.0; 3]; 3];
        full[2][2] = 1.0;
        for i in 0..dim {
            for j in 0..dim {
                if (q[i][j] - q[j][i]).abs() > 1e-12 * (q[i][j].abs() + 1.0) {
                    return Err(Error::InvalidParameter("Q is not symmetric".into()));
                }
                full[i][j] = q[i][j];
            }
        }
        let flat: Vec<f64> = (0..dim).flat_map(|i| (0..dim).map(move |j| (i, j))).map(|(i, j)| full[i][j]).collect();
        if crate::linalg::cholesky(&flat, dim).is_none() {
            return Err(Error::InvalidParameter("Q is not positive definite".into()));
        }
        Ok(Self::from_family(dim, Family::Ellipsoid { q: full }))
    }

    /// Builds the perturbed ball and rejects it unless it passes
    /// [`validate_body`](Self::validate_body) on a 32-node grid.
    pub fn perturbed_ball(dim: usize, radius: f64, epsilon: f64, coeffs: Vec<f64>) -> Result<Self> {
        let body = Self::perturbed_ball_unchecked(dim, radius, epsilon, coeffs)?;
        body.validate_body(32)?;
        Ok(body)
    }

    /// Same as [`perturbed_ball`](Self::perturbed_ball) without the convexity
    /// check, for exploring where convexity breaks.
    pub fn perturbed_ball_unchecked(
        dim: usize,
        radius: f64,
        epsilon: f64,
        coeffs: Vec<f64>,
    ) -> Result<Self> {
        check_dim(dim)?;
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter(format!("radius {radius} must be positive")));
        }
        let available = harmonics(dim).len();
        if coeffs.len() > available {
            return Err(Error::InvalidParameter(format!(
                "{} coefficients given, only {available} harmonics available in dimension {dim}",
                coeffs.len()
            )));
        }
        Ok(Self::from_family(
            dim,
            Family::PerturbedBall {
                radius,
                epsilon,
                coeffs,
            },
        ))
    }

    /// A support function given only through `f64` values. It must be
    /// positively 1-homogeneous.
    pub fn custom(dim: usize, support: Arc<SupportFn>) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self::from_family(dim, Family::Custom(CustomSupport(support))))
    }

    fn from_family(dim: usize, family: Family) -> Self {
        ConvexBody {
            dim,
            family,
            gradient_fault: 0.0,
        }
    }

    /// Adds `amplitude · (v_x/|v|) · v/|v|` to the gradient while leaving the
    /// support value and Hessian untouched. Test fixture for fault injection.
    #[doc(hidden)]
    pub fn with_gradient_fault(mut self, amplitude: f64) -> Self {
        self.gradient_fault = amplitude;
        self
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        !matches!(self.family, Family::Custom(_))
    }

    /// Checks the direction and renormalizes if it is within
    /// [`DIRECTION_TOLERANCE`] of unit length.
    pub fn normalize_direction(&self, nu: &[f64; 3]) -> Result<[f64; 3]> {
        if self.dim == 2 && nu[2] != 0.0 {
            return Err(Error::InvalidParameter("planar body given a direction with z != 0".into()));
        }
        let norm = vec3::norm_f64(nu);
        if !((norm - 1.0).abs() <= DIRECTION_TOLERANCE) {
            return Err(Error::InvalidDirection { norm });
        }
        Ok(vec3::scale(nu, 1.0 / norm))
    }

    /// `h_B(ν)` for a unit direction.
    pub fn support_value(&self, nu: &[f64; 3]) -> Result<f64> {
        let nu = self.normalize_direction(nu)?;
        Ok(self.support_extended(&nu))
    }

    /// The positively 1-homogeneous support function at any nonzero `v`.
    pub fn support_extended(&self, v: &[f64; 3]) -> f64 {
        match &self.family {
            Family::Custom(c) => (c.0)(v),
            _ => self.analytic::<f64>(v).0,
        }
    }

    /// `u(ν)`: the boundary point of `B` with outward normal `ν`.
    pub fn inverse_gauss(&self, nu: &[f64; 3]) -> Result<[f64; 3]> {
        let nu = self.normalize_direction(nu)?;
        Ok(self.gradient_f64(&nu))
    }

    fn gradient_f64(&self, v: &[f64; 3]) -> [f64; 3] {
        match &self.family {
            Family::Custom(c) => self.fd_gradient(&*c.0, v),
            _ => self.analytic::<f64>(v).1,
        }
    }

    fn hessian_f64(&self, v: &[f64; 3]) -> [[f64; 3]; 3] {
        match &self.family {
            Family::Custom(c) => self.fd_hessian(&*c.0, v),
            _ => self.analytic::<f64>(v).2,
        }
    }

    /// `du(ν)` restricted to `ν⊥`; fails if the restriction is not positive
    /// definite.
    pub fn inverse_gauss_jacobian(&self, nu: &[f64; 3]) -> Result<SupportHessian> {
        let nu = self.normalize_direction(nu)?;
        let hess = self.support_hessian_unchecked(&nu);
        let min = hess.eigenvalues()[0];
        if !(min > 0.0) {
            return Err(Error::NotPositivelyCurved {
                direction: nu,
                min_eigenvalue: min,
            });
        }
        Ok(hess)
    }

    fn support_hessian_unchecked(&self, nu: &[f64; 3]) -> SupportHessian {
        let ambient = self.hessian_f64(nu);
        let basis = complement_basis(self.dim, nu);
        let m = self.dim - 1;
        let mut restricted = [[0.0; 2]; 2];
        for i in 0..m {
            let hb = vec3::mat_vec(&ambient, &basis[i]);
            for j in 0..m {
                restricted[j][i] = vec3::dot(&basis[j], &hb);
            }
        }
        SupportHessian {
            m,
            ambient,
            basis,
            restricted,
        }
    }

    /// Value, gradient and Hessian of the 1-homogeneous support function,
    /// generic over the scalar type. Fails for bodies without closed forms.
    pub fn derivatives<T: Real>(&self, v: &V3<T>) -> Result<(T, V3<T>, [[T; 3]; 3])> {
        if let Family::Custom(_) = self.family {
            return Err(Error::Unsupported(
                "custom support functions have no analytic derivatives".into(),
            ));
        }
        Ok(self.analytic(v))
    }

    fn analytic<T: Real>(&self, v: &V3<T>) -> (T, V3<T>, [[T; 3]; 3]) {
        let r2 = vec3::dot(v, v);
        let r = r2.sqrt();
        let rinv = r.recip();
        let unit = vec3::scale(v, rinv);
        // r (I - v̂ v̂ᵀ) / |v| scaled by `radius`
        let ball_parts = |radius: f64| {
            let value = r.scale(radius);
            let grad = vec3::scale(&unit, T::from_f64(radius));
            let mut hess = [[T::zero(); 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    let delta = if i == j { T::one() } else { T::zero() };
                    hess[i][j] = ((delta - unit[i] * unit[j]) * rinv).scale(radius);
                }
            }
            (value, grad, hess)
        };
        let (value, mut grad, mut hess) = match &self.family {
            Family::Ball { radius } => ball_parts(*radius),
            Family::Ellipsoid { q } => {
                let qm: [[T; 3]; 3] = [vec3::from_f64(&q[0]), vec3::from_f64(&q[1]), vec3::from_f64(&q[2])];
                let qv = vec3::mat_vec(&qm, v);
                let h = vec3::dot(v, &qv).sqrt();
                let hinv = h.recip();
                let grad = vec3::scale(&qv, hinv);
                let hinv3 = hinv * hinv * hinv;
                let mut hess = [[T::zero(); 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        hess[i][j] = qm[i][j] * hinv - qv[i] * qv[j] * hinv3;
                    }
                }
                (h, grad, hess)
            }
            Family::PerturbedBall {
                radius,
                epsilon,
                coeffs,
            } => {
                let (mut value, mut grad, mut hess) = ball_parts(*radius);
                for (c, p) in coeffs.iter().zip(harmonics(self.dim)) {
                    let w = c * epsilon;
                    if w == 0.0 {
                        continue;
                    }
                    let (pv, pg, ph) = p.homogeneous_extension(v);
                    value += pv.scale(w);
                    for i in 0..3 {
                        grad[i] += pg[i].scale(w);
                        for j in 0..3 {
                            hess[i][j] += ph[i][j].scale(w);
                        }
                    }
                }
                (value, grad, hess)
            }
            Family::Custom(_) => unreachable!("custom bodies are handled by finite differences"),
        };
        if self.dim == 2 {
            grad[2] = T::zero();
            for i in 0..3 {
                hess[i][2] = T::zero();
                hess[2][i] = T::zero();
            }
        }
        if self.gradient_fault != 0.0 {
            let bump = unit[0].scale(self.gradient_fault);
            for i in 0..self.dim {
                grad[i] += bump * unit[i];
            }
        }
        (value, grad, hess)
    }

    fn axes(&self) -> usize {
        self.dim
    }

    fn fd_gradient(&self, f: &SupportFn, v: &[f64; 3]) -> [f64; 3] {
        let mut g = [0.0; 3];
        for (i, gi) in g.iter_mut().enumerate().take(self.axes()) {
            let d = |h: f64| {
                let mut p = *v;
                let mut m = *v;
                p[i] += h;
                m[i] -= h;
                (f(&p) - f(&m)) / (2.0 * h)
            };
            *gi = richardson2(d, CUSTOM_GRADIENT_STEP);
        }
        g
    }

    fn fd_hessian(&self, f: &SupportFn, v: &[f64; 3]) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        let n = self.axes();
        for i in 0..n {
            for j in i..n {
                let d = |h: f64| {
                    let at = |si: f64, sj: f64| {
                        let mut p = *v;
                        p[i] += si * h;
                        p[j] += sj * h;
                        f(&p)
                    };
                    if i == j {
                        (at(1.0, 0.0) + at(-1.0, 0.0) - 2.0 * f(v)) / (h * h)
                    } else {
                        (at(1.0, 1.0) - at(1.0, -1.0) - at(-1.0, 1.0) + at(-1.0, -1.0)) / (4.0 * h * h)
                    }
                };
                let hij = richardson2(d, CUSTOM_HESSIAN_STEP);
                out[i][j] = hij;
                out[j][i] = hij;
            }
        }
        out
    }

    /// Samples unit directions and checks every body invariant.
    pub fn validate_body(&self, grid_resolution: usize) -> Result<BodyReport> {
        let report = self.validation_report(grid_resolution)?;
        match &report.failure {
            None => Ok(report),
            Some(f) => Err(Error::BodyValidation {
                node: f.node,
                direction: f.direction,
                reason: f.reason.clone(),
            }),
        }
    }

    /// Like [`validate_body`](Self::validate_body) but returns the report even
    /// when an invariant fails.
    pub fn validation_report(&self, grid_resolution: usize) -> Result<BodyReport> {
        if grid_resolution < 8 {
            return Err(Error::InvalidParameter(format!(
                "grid resolution {grid_resolution} below 8"
            )));
        }
        let dirs = direction_grid(self.dim, grid_resolution);
        let analytic = self.has_analytic_derivatives();
        let euler_tol = if analytic { 1e-10 } else { 1e-7 };
        let gauge_tol = if analytic { 1e-9 } else { 1e-7 };
        let symmetry_tol = 1e-9;

        let supports: Vec<f64> = dirs.iter().map(|d| self.support_extended(d)).collect();
        let mut report = BodyReport {
            dimension: self.dim,
            nodes: dirs.len(),
            min_support: f64::INFINITY,
            min_hessian_eigenvalue: f64::INFINITY,
            min_eigenvalue_node: 0,
            max_euler_residual: 0.0,
            max_symmetry_residual: 0.0,
            max_gauge_residual: 0.0,
            failure: None,
        };
        let mut worst_euler = (0usize, 0.0f64);
        let mut worst_gauge = (0usize, 0.0f64);
        let mut worst_symmetry = (0usize, 0.0f64);
        let mut min_support_node = 0;
        for (k, nu) in dirs.iter().enumerate() {
            let h = supports[k];
            if h < report.min_support {
                report.min_support = h;
                min_support_node = k;
            }
            let u = self.gradient_f64(nu);
            let euler = (vec3::dot(&u, nu) - h).abs() / h.abs().max(f64::MIN_POSITIVE);
            if euler > worst_euler.1 {
                worst_euler = (k, euler);
            }
            let hess = self.support_hessian_unchecked(nu);
            let min = hess.eigenvalues()[0];
            if min < report.min_hessian_eigenvalue {
                report.min_hessian_eigenvalue = min;
                report.min_eigenvalue_node = k;
            }
            if hess.m == 2 {
                let a = hess.restricted;
                let s = (a[0][1] - a[1][0]).abs() / (a[0][1].abs() + a[1][0].abs() + a[0][0].abs()).max(1e-300);
                if s > worst_symmetry.1 {
                    worst_symmetry = (k, s);
                }
            }
            // u(ν) must lie in B: ⟨u, μ⟩ <= h(μ) for every μ, with equality at μ = ν.
            let mut sup: f64 = vec3::dot(&u, nu) / h;
            for (j, mu) in dirs.iter().enumerate() {
                sup = sup.max(vec3::dot(&u, mu) / supports[j]);
            }
            let gauge = (sup - 1.0).abs();
            if gauge > worst_gauge.1 {
                worst_gauge = (k, gauge);
            }
        }
        report.max_euler_residual = worst_euler.1;
        report.max_gauge_residual = worst_gauge.1;
        report.max_symmetry_residual = worst_symmetry.1;

        let fail = |node: usize, reason: String| {
            Some(ValidationFailure {
                node,
                direction: dirs[node],
                reason,
            })
        };
        report.failure = if !(report.min_support > 0.0) {
            fail(min_support_node, format!("support value {} is not positive", report.min_support))
        } else if !(report.min_hessian_eigenvalue > 0.0) {
            fail(
                report.min_eigenvalue_node,
                format!(
                    "tangential Hessian is not positive definite (min eigenvalue {:e})",
                    report.min_hessian_eigenvalue
                ),
            )
        } else if worst_euler.1 > euler_tol {
            fail(worst_euler.0, format!("supporting-hyperplane residual {:e}", worst_euler.1))
        } else if worst_symmetry.1 > symmetry_tol {
            fail(worst_symmetry.0, format!("Hessian asymmetry {:e}", worst_symmetry.1))
        } else if worst_gauge.1 > gauge_tol {
            fail(worst_gauge.0, format!("gauge residual {:e}", worst_gauge.1))
        } else {
            None
        };
        Ok(report)
    }

    /// Closed-form volume where one is known; used as a test oracle.
    pub fn closed_form_volume(&self) -> Option<f64> {
        use core::f64::consts::PI;
        match &self.family {
            Family::Ball { radius } => Some(if self.dim == 2 {
                PI * radius * radius
            } else {
                4.0 / 3.0 * PI * radius * radius * radius
            }),
            Family::Ellipsoid { q } => {
                let det = if self.dim == 2 {
                    q[0][0] * q[1][1] - q[0][1] * q[1][0]
                } else {
                    q[0][0] * (q[1][1] * q[2][2] - q[1][2] * q[2][1])
                        - q[0][1] * (q[1][0] * q[2][2] - q[1][2] * q[2][0])
                        + q[0][2] * (q[1][0] * q[2][1] - q[1][1] * q[2][0])
                };
                let s = libm::sqrt(det);
                Some(if self.dim == 2 { PI * s } else { 4.0 / 3.0 * PI * s })
            }
            _ => None,
        }
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("dimension {dim} not in {{2, 3}}")))
    }
}

/// Central-difference estimator refined by two Richardson levels
/// (steps `h`, `h/2`, `h/4`; error `O(h^6)`).
fn richardson2(d: impl Fn(f64) -> f64, h: f64) -> f64 {
    let (a, b, c) = (d(h), d(h / 2.0), d(h / 4.0));
    let r1 = (4.0 * b - a) / 3.0;
    let r2 = (4.0 * c - b) / 3.0;
    (16.0 * r2 - r1) / 15.0
}

/// Unit-direction grid used by body validation: `n` azimuths times `n/2`
/// Gauss-Legendre polar nodes in 3D, `n` equispaced angles in 2D.
pub fn direction_grid(dim: usize, n: usize) -> Vec<[f64; 3]> {
    let (theta, _) = periodic_trapezoid(n);
    if dim == 2 {
        return theta.iter().map(|&t| [libm::cos(t), libm::sin(t), 0.0]).collect();
    }
    let (s, _) = gauss_legendre((n / 2).max(4));
    let mut out = Vec::with_capacity(theta.len() * s.len());
    for &sj in &s {
        let sigma = libm::sqrt(1.0 - sj * sj);
        for &t in &theta {
            out.push([sigma * libm::cos(t), sigma * libm::sin(t), sj]);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationFailure {
    pub node: usize,
    pub direction: [f64; 3],
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BodyReport {
    pub dimension: usize,
    pub nodes: usize,
    pub min_support: f64,
    pub min_hessian_eigenvalue: f64,
    pub min_eigenvalue_node: usize,
    pub max_euler_residual: f64,
    pub max_symmetry_residual: f64,
    pub max_gauge_residual: f64,
    pub failure: Option<ValidationFailure>,
}

impl BodyReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn ellipsoid_411() -> ConvexBody {
        ConvexBody::ellipsoid(3, &[vec![4.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap()
    }

    #[test]
    fn ball_support_and_gauss_map() {
        let b = ConvexBody::ball(3, 2.5).unwrap();
        let nu = [0.6, 0.0, 0.8];
        assert!((b.support_value(&nu).unwrap() - 2.5).abs() < 1e-15);
        let u = b.inverse_gauss(&nu).unwrap();
        for i in 0..3 {
            assert!((u[i] - 2.5 * nu[i]).abs() < 1e-15);
        }
        let j = b.inverse_gauss_jacobian(&nu).unwrap();
        let ev = j.eigenvalues();
        assert!((ev[0] - 2.5).abs() < 1e-14 && (ev[1] - 2.5).abs() < 1e-14);
    }

    #[test]
    fn direction_normalization_policy() {
        let b = ConvexBody::ball(3, 1.0).unwrap();
        assert!(b.support_value(&[1.0 + 5e-9, 0.0, 0.0]).is_ok());
        assert!(matches!(
            b.support_value(&[1.1, 0.0, 0.0]),
            Err(Error::InvalidDirection { .. })
        ));
        let planar = ConvexBody::ball(2, 1.0).unwrap();
        assert!(planar.support_value(&[0.6, 0.0, 0.8]).is_err());
    }

    #[test]
    fn ellipsoid_axis_values() {
        let e = ellipsoid_411();
        assert!((e.support_value(&[1.0, 0.0, 0.0]).unwrap() - 2.0).abs() < 1e-15);
        let j = e.inverse_gauss_jacobian(&[1.0, 0.0, 0.0]).unwrap();
        // complementary axes: Q_jj / sqrt(Q_ii) = 1/2
        let ev = j.eigenvalues();
        assert!((ev[0] - 0.5).abs() < 1e-14 && (ev[1] - 0.5).abs() < 1e-14);
        let j = e.inverse_gauss_jacobian(&[0.0, 1.0, 0.0]).unwrap();
        let ev = j.eigenvalues();
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn ellipsoid_rejects_bad_matrices() {
        assert!(ConvexBody::ellipsoid(3, &[vec![1.0, 2.0, 0.0], vec![2.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).is_err());
        assert!(ConvexBody::ellipsoid(3, &[vec![1.0, 0.5, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).is_err());
        assert!(ConvexBody::ellipsoid(2, &[vec![1.0, 0.0, 0.0]]).is_err());
    }

    #[test]
    fn perturbed_ball_with_zero_epsilon_is_a_ball() {
        let b = ConvexBody::perturbed_ball(3, 1.5, 0.0, vec![1.0, 0.3, 0.2]).unwrap();
        let nu = [0.0, 0.6, 0.8];
        let u = b.inverse_gauss(&nu).unwrap();
        for i in 0..3 {
            assert!((u[i] - 1.5 * nu[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn validation_passes_for_builtins() {
        let r = ConvexBody::ball(3, 1.0).unwrap().validate_body(32).unwrap();
        assert!((r.min_hessian_eigenvalue - 1.0).abs() < 1e-12);
        assert!(r.max_euler_residual < 1e-14);
        let r = ellipsoid_411().validate_body(32).unwrap();
        assert!(r.min_hessian_eigenvalue > 0.0);
        let r = ConvexBody::ball(2, 3.0).unwrap().validate_body(16).unwrap();
        assert!((r.min_hessian_eigenvalue - 3.0).abs() < 1e-12);
        assert!(ConvexBody::ball(3, 1.0).unwrap().validate_body(4).is_err());
    }

    #[test]
    fn validation_names_the_node_where_convexity_breaks() {
        // Increase ε along the zonal harmonic until the Hessian goes indefinite.
        let coeffs = vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0];
        let mut eps = 0.05;
        let mut broke = None;
        while eps < 2.0 {
            let body = ConvexBody::perturbed_ball_unchecked(3, 1.0, eps, coeffs.clone()).unwrap();
            if let Err(e) = body.validate_body(32) {
                broke = Some((eps, e));
                break;
            }
            eps += 0.05;
        }
        let (eps, err) = broke.expect("large epsilon must break convexity");
        assert!(eps > 0.05);
        match err {
            Error::BodyValidation { reason, direction, .. } => {
                assert!(reason.contains("positive definite"), "{reason}");
                assert!((vec3::norm_f64(&direction) - 1.0).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(ConvexBody::perturbed_ball(3, 1.0, eps, coeffs).is_err());
    }

    #[test]
    fn custom_support_uses_finite_differences() {
        let q = [4.0, 1.0, 1.0];
        let body = ConvexBody::custom(
            3,
            Arc::new(move |v: &[f64; 3]| libm::sqrt(q[0] * v[0] * v[0] + q[1] * v[1] * v[1] + q[2] * v[2] * v[2])),
        )
        .unwrap();
        let reference = ellipsoid_411();
        let nu = vec3::normalized(&[0.3, -0.5, 0.7]);
        let a = body.inverse_gauss(&nu).unwrap();
        let b = reference.inverse_gauss(&nu).unwrap();
        for i in 0..3 {
            assert!((a[i] - b[i]).abs() < 1e-9);
        }
        let ja = body.inverse_gauss_jacobian(&nu).unwrap();
        let jb = reference.inverse_gauss_jacobian(&nu).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((ja.ambient[i][j] - jb.ambient[i][j]).abs() < 1e-7);
            }
        }
        assert!(body.derivatives::<f64>(&nu).is_err());
        assert!(body.validate_body(16).is_ok());
    }
}
