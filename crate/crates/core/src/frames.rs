//! Per-node Euclidean and Minkowski frames.
//!
//! At every sample node the chart jets give the unit normal `ξ`; the body
//! turns it into the Birkhoff normal `η = u(ξ)`, the support value
//! `⟨η, ξ⟩ = h(ξ)` and `du(ξ)`. Differentiating `η ∘ x` along the parameters
//! and projecting onto the tangent plane gives `dη`, whose eigenvalues (real
//! because `dη` is self-adjoint for the Dupin metric) are the Minkowski
//! principal curvatures.

use alloc::vec::Vec;

use crate::body::ConvexBody;
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::linalg::{generalized_symmetric_eigen, inverse_small};
use crate::real::vec3::{self, V3};
use crate::real::Real;
use crate::surface::SampledSurface;

/// Tangential residual of `dη` above this fraction of `‖dη‖` is an error.
pub const FRAME_CONSISTENCY_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct PointFrame {
    pub position: [f64; 3],
    /// Orthonormalized chart partials (first `m` valid).
    pub tangent_basis: [[f64; 3]; 2],
    /// Gram matrix of the raw chart partials.
    pub metric: [[f64; 2]; 2],
    /// `R⁻¹` where the raw partials are `P = E R` in the orthonormal basis `E`.
    /// Maps frame components to parameter components:
    /// `e_i = Σ_a ∂_a x · param_from_frame[a][i]`.
    pub param_from_frame: [[f64; 2]; 2],
    pub xi: [f64; 3],
    pub eta: [f64; 3],
    pub support_at_normal: f64,
    /// `dη` in `tangent_basis`: `dη(e_j) = Σ_i d_eta[i][j] e_i`.
    pub d_eta: [[f64; 2]; 2],
    /// `du(ξ)` restricted to the tangent plane, in `tangent_basis`.
    pub du_tangent: [[f64; 2]; 2],
    /// `b_ij = ⟨du(ξ)⁻¹ e_i, e_j⟩`.
    pub dupin_gram: [[f64; 2]; 2],
    /// Ascending.
    pub lambdas: [f64; 2],
    /// Dupin-normalized principal directions as columns, in `tangent_basis`.
    pub principal_directions: [[f64; 2]; 2],
    pub h_m: f64,
    pub k_m: f64,
    pub b_m_sq: f64,
    pub rho: f64,
    /// Normal component of `dη` relative to `‖dη‖`.
    pub normal_residual: f64,
    /// `‖b·dη − (b·dη)ᵀ‖ / ‖b·dη‖`.
    pub self_adjoint_residual: f64,
}

/// Jets kept per node for quantities that get differentiated again.
#[derive(Clone, Debug)]
pub(crate) struct NodeJets {
    pub x: [Jet; 3],
    pub partials: [[Jet; 3]; 2],
    pub xi: [Jet; 3],
    pub eta: [Jet; 3],
    pub support: Jet,
    pub du: [[Jet; 3]; 3],
}

#[derive(Clone, Debug)]
pub struct Frames {
    dim: usize,
    pub nodes: Vec<PointFrame>,
    pub(crate) jets: Vec<NodeJets>,
}

pub(crate) fn unit_normal<T: Real>(m: usize, partials: &[[T; 3]; 2]) -> V3<T> {
    if m == 1 {
        let t = partials[0];
        vec3::normalized(&[t[1], -t[0], T::zero()])
    } else {
        vec3::normalized(&vec3::cross(&partials[0], &partials[1]))
    }
}

/// Orthonormal basis `E` of the span of the partials with `P = E R`.
/// Returns `(E, R⁻¹)`.
fn orthonormalize(m: usize, p: &[[f64; 3]; 2]) -> ([[f64; 3]; 2], [[f64; 2]; 2]) {
    let mut e = [[0.0; 3]; 2];
    let mut r = [[0.0; 2]; 2];
    r[0][0] = vec3::norm_f64(&p[0]);
    e[0] = vec3::scale(&p[0], 1.0 / r[0][0]);
    if m == 2 {
        r[0][1] = vec3::dot(&e[0], &p[1]);
        let rest = vec3::sub(&p[1], &vec3::scale(&e[0], r[0][1]));
        r[1][1] = vec3::norm_f64(&rest);
        e[1] = vec3::scale(&rest, 1.0 / r[1][1]);
    }
    let mut rinv = [[0.0; 2]; 2];
    rinv[0][0] = 1.0 / r[0][0];
    if m == 2 {
        rinv[1][1] = 1.0 / r[1][1];
        rinv[0][1] = -r[0][1] / (r[0][0] * r[1][1]);
    }
    (e, rinv)
}

pub fn compute_frames(body: &ConvexBody, surf: &SampledSurface) -> Result<Frames> {
    let dim = surf.dimension();
    if body.dimension() != dim {
        return Err(Error::InvalidParameter(alloc::format!(
            "body dimension {} does not match surface dimension {dim}",
            body.dimension()
        )));
    }
    let m = dim - 1;
    let mut nodes = Vec::with_capacity(surf.len());
    let mut jets = Vec::with_capacity(surf.len());
    for (k, x) in surf.position_jets.iter().enumerate() {
        let mut partials = [[Jet::default(); 3]; 2];
        for (a, pa) in partials.iter_mut().enumerate().take(m) {
            for c in 0..3 {
                pa[c] = x[c].derivative(a);
            }
        }
        let xi = unit_normal(m, &partials);
        let (support, eta, du) = body.derivatives(&xi)?;
        let node = NodeJets {
            x: *x,
            partials,
            xi,
            eta,
            support,
            du,
        };
        let frame = point_frame(m, surf, k, &node);
        if frame.normal_residual > FRAME_CONSISTENCY_TOLERANCE {
            return Err(Error::FrameConsistency {
                node: k,
                relative_residual: frame.normal_residual,
            });
        }
        nodes.push(frame);
        jets.push(node);
    }
    Ok(Frames { dim, nodes, jets })
}

fn point_frame(m: usize, surf: &SampledSurface, k: usize, node: &NodeJets) -> PointFrame {
    let position = surf.positions[k];
    let raw = surf.first_partials[k];
    let metric = crate::surface::gram(m, &raw);
    let (e, rinv) = orthonormalize(m, &raw);
    let xi = vec3::values(&node.xi);
    let eta = vec3::values(&node.eta);
    let h = node.support.value();
    let du_amb: [[f64; 3]; 3] = [
        vec3::values(&node.du[0]),
        vec3::values(&node.du[1]),
        vec3::values(&node.du[2]),
    ];

    // parameter derivatives of η, then dη(e_j) = Σ_a η_a R⁻¹[a][j]
    let mut eta_p = [[0.0; 3]; 2];
    for (a, ep) in eta_p.iter_mut().enumerate().take(m) {
        for c in 0..3 {
            ep[c] = node.eta[c].d1(a);
        }
    }
    let mut d_eta = [[0.0; 2]; 2];
    let mut du_t = [[0.0; 2]; 2];
    let mut normal_sq = 0.0;
    let mut deta_sq = 0.0;
    for j in 0..m {
        let mut img = [0.0; 3];
        for a in 0..m {
            img = vec3::add(&img, &vec3::scale(&eta_p[a], rinv[a][j]));
        }
        let mut tangential = [0.0; 3];
        for i in 0..m {
            d_eta[i][j] = vec3::dot(&e[i], &img);
            tangential = vec3::add(&tangential, &vec3::scale(&e[i], d_eta[i][j]));
            deta_sq += d_eta[i][j] * d_eta[i][j];
        }
        let normal = vec3::sub(&img, &tangential);
        normal_sq += vec3::dot(&normal, &normal);
        let due = vec3::mat_vec(&du_amb, &e[j]);
        for i in 0..m {
            du_t[i][j] = vec3::dot(&e[i], &due);
        }
    }
    let normal_residual = libm::sqrt(normal_sq) / libm::sqrt(deta_sq).max(f64::MIN_POSITIVE);
    // symmetrize du before inverting; it is a Hessian
    let du_t = symmetrized(m, &du_t);
    let dupin = inverse_small(m, &du_t).unwrap_or([[f64::NAN; 2]; 2]);
    let dupin = symmetrized(m, &dupin);

    // b·dη is the Euclidean shape operator: symmetric in exact arithmetic.
    let mut s = [[0.0; 2]; 2];
    for i in 0..m {
        for j in 0..m {
            for l in 0..m {
                s[i][j] += dupin[i][l] * d_eta[l][j];
            }
        }
    }
    let asym = if m == 2 { (s[0][1] - s[1][0]).abs() } else { 0.0 };
    let s_norm = (0..m)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .map(|(i, j)| s[i][j] * s[i][j])
        .sum::<f64>();
    let self_adjoint_residual = asym / libm::sqrt(s_norm).max(f64::MIN_POSITIVE);
    let s = symmetrized(m, &s);

    let flat = |a: &[[f64; 2]; 2]| -> Vec<f64> {
        (0..m).flat_map(|i| (0..m).map(move |j| (i, j))).map(|(i, j)| a[i][j]).collect()
    };
    let (lambdas, principal_directions) = match generalized_symmetric_eigen(&flat(&s), &flat(&dupin), m) {
        Ok(eig) => {
            let mut l = [0.0; 2];
            let mut v = [[0.0; 2]; 2];
            for kk in 0..m {
                l[kk] = eig.values[kk];
                for i in 0..m {
                    v[i][kk] = eig.vectors[i * m + kk];
                }
            }
            if m == 1 {
                l[1] = l[0];
            }
            (l, v)
        }
        Err(_) => ([f64::NAN; 2], [[f64::NAN; 2]; 2]),
    };
    let ls = &lambdas[..m];
    let h_m = ls.iter().sum::<f64>() / m as f64;
    let k_m = ls.iter().product::<f64>();
    let b_m_sq = ls.iter().map(|l| l * l).sum::<f64>();
    let rho = vec3::dot(&position, &xi) / h;

    PointFrame {
        position,
        tangent_basis: e,
        metric,
        param_from_frame: rinv,
        xi,
        eta,
        support_at_normal: h,
        d_eta,
        du_tangent: du_t,
        dupin_gram: dupin,
        lambdas,
        principal_directions,
        h_m,
        k_m,
        b_m_sq,
        rho,
        normal_residual,
        self_adjoint_residual,
    }
}

fn symmetrized(m: usize, a: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut out = *a;
    if m == 2 {
        let off = 0.5 * (a[0][1] + a[1][0]);
        out[0][1] = off;
        out[1][0] = off;
    }
    out
}

impl PointFrame {
    /// `‖dη − V diag(λ) V⁻¹‖ / ‖dη‖` in the tangent basis.
    pub fn reconstruction_residual(&self, m: usize) -> f64 {
        let v = self.principal_directions;
        let vinv = match inverse_small(m, &v) {
            Some(x) => x,
            None => return f64::INFINITY,
        };
        let mut err = 0.0;
        let mut norm = 0.0;
        for i in 0..m {
            for j in 0..m {
                let mut r = 0.0;
                for l in 0..m {
                    r += v[i][l] * self.lambdas[l] * vinv[l][j];
                }
                err += (r - self.d_eta[i][j]).powi(2);
                norm += self.d_eta[i][j].powi(2);
            }
        }
        libm::sqrt(err) / libm::sqrt(norm).max(f64::MIN_POSITIVE)
    }

    /// `max λ − min λ`.
    pub fn curvature_spread(&self, m: usize) -> f64 {
        self.lambdas[m - 1] - self.lambdas[0]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UmbilicityReport {
    pub max_spread: f64,
    pub min_spread: f64,
    /// Node with the smallest spread.
    pub min_spread_node: usize,
    pub umbilic_nodes: usize,
    pub umbilic_fraction: f64,
    pub tolerance: f64,
}

pub const DEFAULT_UMBILIC_TOLERANCE: f64 = 1e-8;

impl Frames {
    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn tangent_dimension(&self) -> usize {
        self.dim - 1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫ values dω` where `dω = ⟨η, ξ⟩ dS`.
    pub fn integrate_domega(&self, surf: &SampledSurface, values: &[f64]) -> f64 {
        let terms: Vec<f64> = values
            .iter()
            .enumerate()
            .map(|(k, v)| v * self.nodes[k].support_at_normal * surf.area_weight(k))
            .collect();
        crate::quadrature::pairwise_sum(&terms)
    }

    pub fn minkowski_area(&self, surf: &SampledSurface) -> f64 {
        let ones = alloc::vec![1.0; self.len()];
        self.integrate_domega(surf, &ones)
    }

    /// Node is umbilic when `λ_max − λ_min <= tol (|H_m| + 1)`.
    pub fn umbilicity_report(&self, tol: f64) -> UmbilicityReport {
        let m = self.tangent_dimension();
        let mut report = UmbilicityReport {
            max_spread: 0.0,
            min_spread: f64::INFINITY,
            min_spread_node: 0,
            umbilic_nodes: 0,
            umbilic_fraction: 0.0,
            tolerance: tol,
        };
        for (k, f) in self.nodes.iter().enumerate() {
            let spread = f.curvature_spread(m);
            report.max_spread = report.max_spread.max(spread);
            if spread < report.min_spread {
                report.min_spread = spread;
                report.min_spread_node = k;
            }
            if spread <= tol * (f.h_m.abs() + 1.0) {
                report.umbilic_nodes += 1;
            }
        }
        report.umbilic_fraction = report.umbilic_nodes as f64 / self.len().max(1) as f64;
        report
    }

    /// `max H_m − min H_m` over nodes.
    pub fn mean_curvature_spread(&self) -> f64 {
        let (lo, hi) = self
            .nodes
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), f| (lo.min(f.h_m), hi.max(f.h_m)));
        hi - lo
    }

    /// Largest violation of `B_m² >= (n−1) H_m²` (positive means violated).
    pub fn lemma_b_h_violation(&self) -> f64 {
        let m = self.tangent_dimension() as f64;
        self.nodes
            .iter()
            .map(|f| m * f.h_m * f.h_m - f.b_m_sq)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Pointwise check of `e_i(ρ) = ⟨η, ξ⟩⁻¹ ⟨x − ρη, ∇_{e_i} ξ⟩`.
///
/// The left side differentiates the jet of `ρ = ⟨x, ξ⟩ / h(ξ)`; the right side
/// uses only the derivative of `ξ`. Returns the max absolute residual divided
/// by `max |∇ρ| + 1`.
pub fn check_drho_identity(frames: &Frames, _surf: &SampledSurface) -> f64 {
    let m = frames.tangent_dimension();
    let mut max_res: f64 = 0.0;
    let mut max_grad: f64 = 0.0;
    for (f, j) in frames.nodes.iter().zip(&frames.jets) {
        let rho = vec3::dot(&j.x, &j.xi) / j.support;
        let rho_v = rho.value();
        let mut grad_sq = 0.0;
        for i in 0..m {
            let mut lhs = 0.0;
            let mut dxi = [0.0; 3];
            for a in 0..m {
                let w = f.param_from_frame[a][i];
                lhs += rho.d1(a) * w;
                for c in 0..3 {
                    dxi[c] += j.xi[c].d1(a) * w;
                }
            }
            let lever = vec3::sub(&f.position, &vec3::scale(&f.eta, rho_v));
            let rhs = vec3::dot(&lever, &dxi) / f.support_at_normal;
            max_res = max_res.max((lhs - rhs).abs());
            grad_sq += lhs * lhs;
        }
        max_grad = max_grad.max(libm::sqrt(grad_sq));
    }
    max_res / (max_grad + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{make_minkowski_sphere, make_round_sphere, make_torus, sample, Resolution};
    use alloc::vec;

    #[test]
    fn euclidean_sphere_frames() {
        let body = ConvexBody::ball(3, 1.0).unwrap();
        let surf = sample(&make_round_sphere(3, 2.0, [0.0; 3]).unwrap(), Resolution::new(16, 8)).unwrap();
        let frames = compute_frames(&body, &surf).unwrap();
        for f in &frames.nodes {
            assert!((f.lambdas[0] - 0.5).abs() < 1e-13);
            assert!((f.lambdas[1] - 0.5).abs() < 1e-13);
            assert!((f.rho - 2.0).abs() < 1e-13);
            for c in 0..3 {
                assert!((f.eta[c] - f.xi[c]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn ellipsoid_boundary_has_unit_curvatures() {
        let body = ConvexBody::ellipsoid(3, &[vec![4.0, 0.0, 0.0], vec![0.0, 1.0, 0.5], vec![0.0, 0.5, 2.0]]).unwrap();
        let chart = make_minkowski_sphere(&body, 1.0, [0.0; 3]).unwrap();
        let frames = compute_frames(&body, &sample(&chart, Resolution::new(16, 8)).unwrap()).unwrap();
        for f in &frames.nodes {
            assert!((f.h_m - 1.0).abs() < 1e-11, "{}", f.h_m);
            assert!((f.k_m - 1.0).abs() < 1e-11);
            assert!((f.rho - 1.0).abs() < 1e-12);
            assert!(f.reconstruction_residual(2) < 1e-10);
        }
    }

    #[test]
    fn torus_principal_curvatures() {
        let (big, small) = (2.0, 0.5);
        let body = ConvexBody::ball(3, 1.0).unwrap();
        let surf = sample(&make_torus(big, small).unwrap(), Resolution::new(16, 16)).unwrap();
        let frames = compute_frames(&body, &surf).unwrap();
        for (k, f) in frames.nodes.iter().enumerate() {
            let phi = surf.params[k][1];
            let c = libm::cos(phi);
            let mut expected = [c / (big + small * c), 1.0 / small];
            expected.sort_by(f64::total_cmp);
            assert!((f.lambdas[0] - expected[0]).abs() < 1e-12);
            assert!((f.lambdas[1] - expected[1]).abs() < 1e-12);
        }
        let report = frames.umbilicity_report(DEFAULT_UMBILIC_TOLERANCE);
        assert_eq!(report.umbilic_nodes, 0);
    }

    #[test]
    fn corrupted_gradient_is_detected() {
        let body = ConvexBody::ball(3, 1.0).unwrap().with_gradient_fault(0.05);
        let surf = sample(&make_round_sphere(3, 1.0, [0.0; 3]).unwrap(), Resolution::new(16, 8)).unwrap();
        assert!(matches!(compute_frames(&body, &surf), Err(Error::FrameConsistency { .. })));
    }

    #[test]
    fn planar_curve_frames() {
        let body = ConvexBody::ellipsoid(2, &[vec![2.0, 0.3], vec![0.3, 1.0]]).unwrap();
        let chart = make_minkowski_sphere(&body, 0.5, [0.2, -0.1, 0.0]).unwrap();
        let frames = compute_frames(&body, &sample(&chart, Resolution::new(32, 1)).unwrap()).unwrap();
        for f in &frames.nodes {
            assert!((f.lambdas[0] - 2.0).abs() < 1e-11);
            assert!((f.h_m - 2.0).abs() < 1e-11);
        }
    }
}
