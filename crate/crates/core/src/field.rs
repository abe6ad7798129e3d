//! Smooth scalar and vector fields on a sampled surface.
//!
//! Fields are stored as one parameter jet per node, so chart-coordinate
//! derivatives of any order up to the jet order are exact rather than
//! interpolated.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::frames::Frames;
use crate::jet::Jet;
use crate::real::vec3::{self, V3};
use crate::real::Real;
use crate::surface::{parameter_direction, SampledSurface, Topology};

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    jets: Vec<Jet>,
}

/// Parameter jets at node `k`: seeded variables in the chart parameters.
pub fn parameter_jets(surf: &SampledSurface, k: usize) -> [Jet; 2] {
    let p = surf.params[k];
    if surf.chart().topology() == Topology::Circle {
        [Jet::variable(p[0], 0), Jet::constant(0.0)]
    } else {
        [Jet::variable(p[0], 0), Jet::variable(p[1], 1)]
    }
}

impl ScalarField {
    pub fn from_jets(jets: Vec<Jet>) -> Self {
        ScalarField { jets }
    }

    pub fn from_values_constant_in_parameters(values: &[f64]) -> Self {
        ScalarField {
            jets: values.iter().map(|&v| Jet::constant(v)).collect(),
        }
    }

    pub fn constant(surf: &SampledSurface, c: f64) -> Self {
        ScalarField {
            jets: alloc::vec![Jet::constant(c); surf.len()],
        }
    }

    pub fn zero(surf: &SampledSurface) -> Self {
        Self::constant(surf, 0.0)
    }

    /// Evaluates `f` on the parameter jets of every node.
    pub fn from_parameters<F: Fn(&[Jet; 2]) -> Jet>(surf: &SampledSurface, f: F) -> Self {
        ScalarField {
            jets: (0..surf.len()).map(|k| f(&parameter_jets(surf, k))).collect(),
        }
    }

    /// Deterministic pseudorandom smooth field of the given degree.
    ///
    /// Sphere-type charts get a polynomial in the chart direction `ν(θ, s)`
    /// (smooth across the poles); circles and tori get trigonometric
    /// polynomials in the angles. Coefficients are uniform in `[−1, 1]`.
    pub fn random(surf: &SampledSurface, seed: u64, degree: u32) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = surf.dimension();
        let d = degree as i32;
        match surf.chart().topology() {
            Topology::Sphere => {
                let mut terms = Vec::new();
                for a in 0..=degree {
                    for b in 0..=(degree - a) {
                        for c in 0..=(degree - a - b) {
                            terms.push(([a, b, c], rng.gen_range(-1.0..=1.0)));
                        }
                    }
                }
                Self::from_parameters(surf, |p| {
                    let nu = parameter_direction(dim, p);
                    let mut acc = Jet::zero();
                    for &(e, coeff) in &terms {
                        acc += (nu[0].powi(e[0]) * nu[1].powi(e[1]) * nu[2].powi(e[2])).scale(coeff);
                    }
                    acc
                })
            }
            Topology::Circle => {
                let terms: Vec<(f64, f64)> =
                    (0..=degree).map(|_| (rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))).collect();
                Self::from_parameters(surf, |p| {
                    let mut acc = Jet::zero();
                    for (k, &(a, b)) in terms.iter().enumerate() {
                        let arg = p[0].scale(k as f64);
                        acc += arg.cos().scale(a) + arg.sin().scale(b);
                    }
                    acc
                })
            }
            Topology::Torus => {
                let mut terms = Vec::new();
                for k in 0..=d {
                    for l in -d..=d {
                        if k + l.abs() > d || (k == 0 && l < 0) {
                            continue;
                        }
                        terms.push((k, l, rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)));
                    }
                }
                Self::from_parameters(surf, |p| {
                    let mut acc = Jet::zero();
                    for &(k, l, a, b) in &terms {
                        let arg = p[0].scale(k as f64) + p[1].scale(l as f64);
                        acc += arg.cos().scale(a) + arg.sin().scale(b);
                    }
                    acc
                })
            }
        }
    }

    /// `⟨v, ξ⟩ / ⟨η, ξ⟩`, the Birkhoff-normal speed of the translation by `v`.
    pub fn translation_component(frames: &Frames, v: &[f64; 3]) -> Self {
        let vj = vec3::from_f64::<Jet>(v);
        ScalarField {
            jets: frames.jets.iter().map(|j| vec3::dot(&vj, &j.xi) / j.support).collect(),
        }
    }

    /// `ρ = ⟨x, ξ⟩ / ⟨η, ξ⟩`.
    pub fn rho(frames: &Frames) -> Self {
        ScalarField {
            jets: frames.jets.iter().map(|j| vec3::dot(&j.x, &j.xi) / j.support).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.jets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jets.is_empty()
    }

    pub fn jets(&self) -> &[Jet] {
        &self.jets
    }

    pub fn values(&self) -> Vec<f64> {
        self.jets.iter().map(|j| j.value()).collect()
    }

    pub fn scaled(&self, c: f64) -> Self {
        ScalarField {
            jets: self.jets.iter().map(|j| j.scale(c)).collect(),
        }
    }

    pub fn plus(&self, other: &ScalarField) -> Self {
        ScalarField {
            jets: self.jets.iter().zip(&other.jets).map(|(a, b)| *a + *b).collect(),
        }
    }

    pub fn times(&self, other: &ScalarField) -> Self {
        ScalarField {
            jets: self.jets.iter().zip(&other.jets).map(|(a, b)| *a * *b).collect(),
        }
    }

    pub fn shifted(&self, c: f64) -> Self {
        ScalarField {
            jets: self.jets.iter().map(|j| *j + Jet::constant(c)).collect(),
        }
    }

    /// Divides pointwise by `⟨η, ξ⟩`.
    pub fn over_support(&self, frames: &Frames) -> Self {
        ScalarField {
            jets: self.jets.iter().zip(&frames.jets).map(|(f, j)| *f / j.support).collect(),
        }
    }

    pub fn domega_mean(&self, frames: &Frames, surf: &SampledSurface) -> f64 {
        frames.integrate_domega(surf, &self.values()) / frames.minkowski_area(surf)
    }

    /// Subtracts the `dω`-mean; returns the projected field and the mean removed.
    pub fn mean_zero(&self, frames: &Frames, surf: &SampledSurface) -> (Self, f64) {
        let mean = self.domega_mean(frames, surf);
        (self.shifted(-mean), mean)
    }

    /// Surface gradient `∇f = g^{ab} ∂_b f ∂_a x` at every node.
    pub fn gradient(&self, surf: &SampledSurface) -> Vec<[f64; 3]> {
        let m = surf.tangent_dimension();
        (0..surf.len())
            .map(|k| {
                let p = &surf.first_partials[k];
                let g = crate::surface::gram(m, p);
                let df = [self.jets[k].d1(0), self.jets[k].d1(1)];
                let up = raise(m, &g, &df);
                let mut out = [0.0; 3];
                for a in 0..m {
                    out = vec3::add(&out, &vec3::scale(&p[a], up[a]));
                }
                out
            })
            .collect()
    }

    /// Dupin gradient `∇^b f = du(ξ)(∇f)`.
    pub fn dupin_gradient(&self, frames: &Frames, surf: &SampledSurface) -> Vec<[f64; 3]> {
        self.gradient(surf)
            .iter()
            .zip(&frames.jets)
            .map(|(g, j)| {
                let du = [vec3::values(&j.du[0]), vec3::values(&j.du[1]), vec3::values(&j.du[2])];
                vec3::mat_vec(&du, g)
            })
            .collect()
    }
}

fn raise(m: usize, g: &[[f64; 2]; 2], w: &[f64; 2]) -> [f64; 2] {
    if m == 1 {
        return [w[0] / g[0][0], 0.0];
    }
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    [
        (g[1][1] * w[0] - g[0][1] * w[1]) / det,
        (g[0][0] * w[1] - g[1][0] * w[0]) / det,
    ]
}

/// Inverse metric `g^{ab}` and `√det g` as jets.
pub(crate) fn inverse_metric<T: Real>(m: usize, partials: &[[T; 3]; 2]) -> ([[T; 2]; 2], T) {
    let g00 = vec3::dot(&partials[0], &partials[0]);
    if m == 1 {
        let z = T::zero();
        return ([[g00.recip(), z], [z, z]], g00.sqrt());
    }
    let g01 = vec3::dot(&partials[0], &partials[1]);
    let g11 = vec3::dot(&partials[1], &partials[1]);
    let det = g00 * g11 - g01 * g01;
    let inv = det.recip();
    ([[g11 * inv, -(g01 * inv)], [-(g01 * inv), g00 * inv]], det.sqrt())
}

/// Ambient vector field on a sampled surface, one jet triple per node.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    jets: Vec<V3<Jet>>,
}

impl VectorField {
    pub fn from_jets(jets: Vec<V3<Jet>>) -> Self {
        VectorField { jets }
    }

    pub fn constant(surf: &SampledSurface, v: &[f64; 3]) -> Self {
        VectorField {
            jets: alloc::vec![vec3::from_f64(v); surf.len()],
        }
    }

    /// The position field `W = x`.
    pub fn position(surf: &SampledSurface) -> Self {
        VectorField {
            jets: surf.position_jets.clone(),
        }
    }

    /// `W = f η`.
    pub fn along_eta(f: &ScalarField, frames: &Frames) -> Self {
        VectorField {
            jets: f
                .jets
                .iter()
                .zip(&frames.jets)
                .map(|(fj, j)| vec3::scale(&j.eta, *fj))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.jets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jets.is_empty()
    }

    pub fn jets(&self) -> &[V3<Jet>] {
        &self.jets
    }

    pub fn values(&self) -> Vec<[f64; 3]> {
        self.jets.iter().map(vec3::values).collect()
    }

    /// First parameter partials `∂_a W` at node `k`.
    pub fn partials(&self, k: usize) -> [[f64; 3]; 2] {
        let w = &self.jets[k];
        [
            [w[0].d1(0), w[1].d1(0), w[2].d1(0)],
            [w[0].d1(1), w[1].d1(1), w[2].d1(1)],
        ]
    }

    /// `N_η(W) = ⟨W, ξ⟩ / ⟨η, ξ⟩`.
    pub fn birkhoff_component(&self, frames: &Frames) -> Vec<f64> {
        self.jets
            .iter()
            .zip(&frames.nodes)
            .map(|(w, f)| vec3::dot(&vec3::values(w), &f.xi) / f.support_at_normal)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::ConvexBody;
    use crate::frames::compute_frames;
    use crate::surface::{make_radial_graph, make_round_sphere, make_torus, sample, RadialField, Resolution};
    use alloc::vec;

    #[test]
    fn constant_field_has_zero_gradient() {
        let surf = sample(&make_torus(2.0, 0.5).unwrap(), Resolution::new(16, 16)).unwrap();
        for g in ScalarField::constant(&surf, 3.0).gradient(&surf) {
            assert!(vec3::norm_f64(&g) < 1e-14);
        }
    }

    #[test]
    fn gradient_is_tangential_and_matches_linear_function() {
        let mut coeffs = vec![0.0; 15];
        coeffs[2] = 0.1;
        let surf = sample(
            &make_radial_graph(RadialField::new(1.0, coeffs), 3).unwrap(),
            Resolution::new(24, 12),
        )
        .unwrap();
        let body = ConvexBody::ball(3, 1.0).unwrap();
        let frames = compute_frames(&body, &surf).unwrap();
        // f = ⟨a, x⟩ has ∇f = tangential projection of a
        let a = [0.3, -0.2, 0.9];
        let f = ScalarField::from_jets(surf.position_jets.iter().map(|x| vec3::dot(x, &vec3::from_f64(&a))).collect());
        for (k, g) in f.gradient(&surf).iter().enumerate() {
            let xi = frames.nodes[k].xi;
            assert!(vec3::dot(g, &xi).abs() < 1e-12);
            let proj = vec3::sub(&a, &vec3::scale(&xi, vec3::dot(&a, &xi)));
            assert!(vec3::norm_f64(&vec3::sub(g, &proj)) < 1e-12);
        }
    }

    #[test]
    fn random_fields_are_reproducible() {
        let surf = sample(&make_round_sphere(3, 1.0, [0.0; 3]).unwrap(), Resolution::new(16, 8)).unwrap();
        let a = ScalarField::random(&surf, 7, 3);
        let b = ScalarField::random(&surf, 7, 3);
        let c = ScalarField::random(&surf, 8, 3);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn mean_zero_projection() {
        let surf = sample(&make_round_sphere(3, 1.0, [0.0; 3]).unwrap(), Resolution::new(16, 8)).unwrap();
        let body = ConvexBody::ellipsoid(3, &[vec![2.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        let frames = compute_frames(&body, &surf).unwrap();
        let (f, mean) = ScalarField::random(&surf, 1, 2).mean_zero(&frames, &surf);
        assert!(mean.abs() > 1e-3);
        assert!(f.domega_mean(&frames, &surf).abs() < 1e-14);
    }
}
