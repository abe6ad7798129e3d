//! Closed parametric hypersurfaces and their tensor-grid sampling.
//!
//! Curves (`n = 2`) use the circle parameter `θ ∈ [0, 2π)`. Sphere-type
//! surfaces use `(θ, s)` with `s = cos φ ∈ (-1, 1)` and map the parameter point
//! to the unit direction `ν(θ, s) = (√(1−s²) cos θ, √(1−s²) sin θ, s)`; tori
//! use `(θ, φ) ∈ [0, 2π)²`. Periodic axes get equispaced trapezoid nodes, the
//! polar axis gets Gauss-Legendre nodes, so no node sits on a pole.
//!
//! Every chart is written against [`Real`]; sampling evaluates it on seeded
//! [`Jet`]s, which stores exact parameter derivatives up to third order at each
//! node.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use crate::body::{direction_grid, ConvexBody};
use crate::error::{Error, Result};
use crate::harmonics::harmonics;
use crate::jet::Jet;
use crate::quadrature::{gauss_legendre, pairwise_sum, periodic_trapezoid};
use crate::real::vec3::{self, V3};
use crate::real::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Topology {
    Circle,
    Sphere,
    Torus,
}

/// `r(ν) = base + Σ c_k P_k(ν)` over the fixed harmonic list of the ambient
/// dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialField {
    pub base: f64,
    pub coeffs: Vec<f64>,
}

impl RadialField {
    pub fn new(base: f64, coeffs: Vec<f64>) -> Self {
        RadialField { base, coeffs }
    }

    pub fn eval<T: Real>(&self, dim: usize, nu: &V3<T>) -> T {
        let mut r = T::from_f64(self.base);
        for (c, p) in self.coeffs.iter().zip(harmonics(dim)) {
            if *c != 0.0 {
                r += p.eval(nu).scale(*c);
            }
        }
        r
    }
}

#[derive(Clone, Debug)]
pub enum ChartKind {
    RoundSphere { radius: f64, center: [f64; 3] },
    MinkowskiSphere { body: ConvexBody, scale: f64, center: [f64; 3] },
    RadialGraph { field: RadialField },
    Torus { major: f64, minor: f64 },
    /// `scale · base(p) + offset`.
    Similarity { base: Box<SurfaceChart>, scale: f64, offset: [f64; 3] },
}

#[derive(Clone, Debug)]
pub struct SurfaceChart {
    dim: usize,
    kind: ChartKind,
}

pub fn make_round_sphere(dim: usize, radius: f64, center: [f64; 3]) -> Result<SurfaceChart> {
    check_dim(dim)?;
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!("sphere radius {radius} must be positive")));
    }
    check_center(dim, &center)?;
    Ok(SurfaceChart {
        dim,
        kind: ChartKind::RoundSphere { radius, center },
    })
}

/// `ν ↦ center + λ u(ν)`, the boundary of `center + λB`.
pub fn make_minkowski_sphere(body: &ConvexBody, scale: f64, center: [f64; 3]) -> Result<SurfaceChart> {
    if !(scale > 0.0) {
        return Err(Error::InvalidParameter(format!("scale {scale} must be positive")));
    }
    if !body.has_analytic_derivatives() {
        return Err(Error::Unsupported(
            "Minkowski spheres need a body with closed-form derivatives".into(),
        ));
    }
    body.validate_body(16)?;
    let dim = body.dimension();
    check_center(dim, &center)?;
    Ok(SurfaceChart {
        dim,
        kind: ChartKind::MinkowskiSphere {
            body: body.clone(),
            scale,
            center,
        },
    })
}

/// `ν ↦ r(ν) ν`; the radius must be positive on a 32-node direction grid.
pub fn make_radial_graph(field: RadialField, dim: usize) -> Result<SurfaceChart> {
    check_dim(dim)?;
    if field.coeffs.len() > harmonics(dim).len() {
        return Err(Error::InvalidParameter(format!(
            "radial field has {} coefficients, at most {} supported",
            field.coeffs.len(),
            harmonics(dim).len()
        )));
    }
    for (k, nu) in direction_grid(dim, 32).iter().enumerate() {
        let r = field.eval::<f64>(dim, nu);
        if !(r > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "radius {r} is not positive at validation node {k}"
            )));
        }
    }
    Ok(SurfaceChart {
        dim,
        kind: ChartKind::RadialGraph { field },
    })
}

pub fn make_torus(major: f64, minor: f64) -> Result<SurfaceChart> {
    if !(minor > 0.0 && major > minor) {
        return Err(Error::InvalidParameter(format!(
            "torus needs R > r > 0, got R = {major}, r = {minor}"
        )));
    }
    Ok(SurfaceChart {
        dim: 3,
        kind: ChartKind::Torus { major, minor },
    })
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("dimension {dim} not in {{2, 3}}")))
    }
}

fn check_center(dim: usize, c: &[f64; 3]) -> Result<()> {
    if dim == 2 && c[2] != 0.0 {
        return Err(Error::InvalidParameter("planar center with z != 0".into()));
    }
    Ok(())
}

/// Unit direction attached to a circle or sphere parameter point.
pub fn parameter_direction<T: Real>(dim: usize, p: &[T; 2]) -> V3<T> {
    if dim == 2 {
        [p[0].cos(), p[0].sin(), T::zero()]
    } else {
        let s = p[1];
        let sigma = (T::one() - s * s).sqrt();
        [sigma * p[0].cos(), sigma * p[0].sin(), s]
    }
}

impl SurfaceChart {
    pub fn dimension(&self) -> usize {
        self.dim
    }

    /// Tangent dimension `n - 1`.
    pub fn tangent_dimension(&self) -> usize {
        self.dim - 1
    }

    pub fn kind(&self) -> &ChartKind {
        &self.kind
    }

    pub fn topology(&self) -> Topology {
        match &self.kind {
            ChartKind::Torus { .. } => Topology::Torus,
            ChartKind::Similarity { base, .. } => base.topology(),
            _ => {
                if self.dim == 2 {
                    Topology::Circle
                } else {
                    Topology::Sphere
                }
            }
        }
    }

    /// All chart kinds here are embeddings.
    pub fn is_embedded(&self) -> bool {
        true
    }

    /// `scale · self + offset`.
    pub fn similarity(&self, scale: f64, offset: [f64; 3]) -> Result<SurfaceChart> {
        if !(scale > 0.0) {
            return Err(Error::InvalidParameter(format!("scale {scale} must be positive")));
        }
        check_center(self.dim, &offset)?;
        Ok(SurfaceChart {
            dim: self.dim,
            kind: ChartKind::Similarity {
                base: Box::new(self.clone()),
                scale,
                offset,
            },
        })
    }

    /// If this chart is a Minkowski sphere of `body` (possibly after a
    /// similarity), its scale and center.
    pub fn as_minkowski_sphere_of(&self, body: &ConvexBody) -> Option<(f64, [f64; 3])> {
        match &self.kind {
            ChartKind::MinkowskiSphere { body: b, scale, center } => {
                if same_body(b, body) {
                    Some((*scale, *center))
                } else {
                    None
                }
            }
            ChartKind::RoundSphere { radius, center } => match body.family() {
                crate::body::Family::Ball { radius: r } if body.dimension() == self.dim => {
                    Some((radius / r, *center))
                }
                _ => None,
            },
            ChartKind::Similarity { base, scale, offset } => {
                let (l, c) = base.as_minkowski_sphere_of(body)?;
                Some((l * scale, vec3::add(&vec3::scale(&c, *scale), offset)))
            }
            _ => None,
        }
    }

    /// Point used to orient star-shaped charts: `⟨x − c, ξ⟩ > 0`.
    pub fn star_center(&self) -> [f64; 3] {
        match &self.kind {
            ChartKind::RoundSphere { center, .. } | ChartKind::MinkowskiSphere { center, .. } => *center,
            ChartKind::RadialGraph { .. } | ChartKind::Torus { .. } => [0.0; 3],
            ChartKind::Similarity { base, scale, offset } => {
                vec3::add(&vec3::scale(&base.star_center(), *scale), offset)
            }
        }
    }

    pub fn is_star_shaped(&self) -> bool {
        match &self.kind {
            ChartKind::Torus { .. } => false,
            ChartKind::Similarity { base, .. } => base.is_star_shaped(),
            _ => true,
        }
    }

    pub fn position<T: Real>(&self, p: &[T; 2]) -> V3<T> {
        let dim = self.dim;
        match &self.kind {
            ChartKind::RoundSphere { radius, center } => {
                let nu = parameter_direction(dim, p);
                vec3::add(&vec3::scale(&nu, T::from_f64(*radius)), &vec3::from_f64(center))
            }
            ChartKind::MinkowskiSphere { body, scale, center } => {
                let nu = parameter_direction(dim, p);
                let (_, u, _) = body
                    .derivatives(&nu)
                    .expect("Minkowski sphere constructor checks for analytic derivatives");
                vec3::add(&vec3::scale(&u, T::from_f64(*scale)), &vec3::from_f64(center))
            }
            ChartKind::RadialGraph { field } => {
                let nu = parameter_direction(dim, p);
                let r = field.eval(dim, &nu);
                vec3::scale(&nu, r)
            }
            ChartKind::Torus { major, minor } => {
                let (theta, phi) = (p[0], p[1]);
                let ring = T::from_f64(*major) + phi.cos().scale(*minor);
                [ring * theta.cos(), ring * theta.sin(), phi.sin().scale(*minor)]
            }
            ChartKind::Similarity { base, scale, offset } => {
                let x = base.position(p);
                vec3::add(&vec3::scale(&x, T::from_f64(*scale)), &vec3::from_f64(offset))
            }
        }
    }

    pub fn default_resolution(&self) -> Resolution {
        if self.dim == 2 {
            Resolution::new(128, 1)
        } else {
            Resolution::new(64, 32)
        }
    }
}

fn same_body(a: &ConvexBody, b: &ConvexBody) -> bool {
    use crate::body::Family::*;
    if a.dimension() != b.dimension() {
        return false;
    }
    match (a.family(), b.family()) {
        (Ball { radius: x }, Ball { radius: y }) => x == y,
        (Ellipsoid { q: x }, Ellipsoid { q: y }) => x == y,
        (
            PerturbedBall {
                radius: r1,
                epsilon: e1,
                coeffs: c1,
            },
            PerturbedBall {
                radius: r2,
                epsilon: e2,
                coeffs: c2,
            },
        ) => r1 == r2 && e1 == e2 && c1 == c2,
        _ => false,
    }
}

/// Grid sizes: `periodic` nodes along `θ`, `second` nodes along `s` or `φ`
/// (ignored for curves).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Resolution {
    pub periodic: usize,
    pub second: usize,
}

impl Resolution {
    pub const fn new(periodic: usize, second: usize) -> Self {
        Resolution { periodic, second }
    }
}

#[derive(Clone, Debug)]
pub struct SampledSurface {
    chart: SurfaceChart,
    resolution: Resolution,
    /// Parameter point of node `k = j * periodic + i`.
    pub params: Vec<[f64; 2]>,
    /// Parameter-space quadrature weights.
    pub param_weights: Vec<f64>,
    pub position_jets: Vec<[Jet; 3]>,
    pub positions: Vec<[f64; 3]>,
    /// `first_partials[k][a] = ∂x/∂p_a`.
    pub first_partials: Vec<[[f64; 3]; 2]>,
    /// `second_partials[k][a][b] = ∂²x/∂p_a∂p_b`.
    pub second_partials: Vec<[[[f64; 3]; 2]; 2]>,
    /// `√det g` per node.
    pub area_density: Vec<f64>,
    scale: f64,
}

/// Samples a chart on its tensor grid; fails if the chart is not an immersion
/// at some node.
pub fn sample(chart: &SurfaceChart, resolution: Resolution) -> Result<SampledSurface> {
    let topo = chart.topology();
    if resolution.periodic < 8 || (topo != Topology::Circle && resolution.second < 8) {
        return Err(Error::InvalidParameter(format!(
            "resolution {resolution:?} below the minimum of 8 per axis"
        )));
    }
    let m = chart.tangent_dimension();
    let (theta, h_theta) = periodic_trapezoid(resolution.periodic);
    let (second, second_w): (Vec<f64>, Vec<f64>) = match topo {
        Topology::Circle => (alloc::vec![0.0], alloc::vec![1.0]),
        Topology::Sphere => gauss_legendre(resolution.second),
        Topology::Torus => {
            let (phi, h) = periodic_trapezoid(resolution.second);
            let w = alloc::vec![h; phi.len()];
            (phi, w)
        }
    };
    let resolution = if topo == Topology::Circle {
        Resolution::new(resolution.periodic, 1)
    } else {
        resolution
    };
    let count = theta.len() * second.len();
    let mut surf = SampledSurface {
        chart: chart.clone(),
        resolution,
        params: Vec::with_capacity(count),
        param_weights: Vec::with_capacity(count),
        position_jets: Vec::with_capacity(count),
        positions: Vec::with_capacity(count),
        first_partials: Vec::with_capacity(count),
        second_partials: Vec::with_capacity(count),
        area_density: Vec::with_capacity(count),
        scale: 0.0,
    };
    for (j, &sj) in second.iter().enumerate() {
        for &ti in &theta {
            let p = match topo {
                Topology::Circle => [Jet::variable(ti, 0), Jet::constant(0.0)],
                _ => [Jet::variable(ti, 0), Jet::variable(sj, 1)],
            };
            let x = chart.position(&p);
            let pos = vec3::values(&x);
            let mut first = [[0.0; 3]; 2];
            let mut sec = [[[0.0; 3]; 2]; 2];
            for a in 0..m {
                for c in 0..3 {
                    first[a][c] = x[c].d1(a);
                }
                for b in 0..m {
                    let (ea, eb) = exponent_pair(a, b);
                    for c in 0..3 {
                        sec[a][b][c] = x[c].partial(ea, eb);
                    }
                }
            }
            surf.params.push([ti, sj]);
            surf.param_weights.push(h_theta * second_w[j]);
            surf.position_jets.push(x);
            surf.positions.push(pos);
            surf.first_partials.push(first);
            surf.second_partials.push(sec);
        }
    }
    surf.scale = surf
        .positions
        .iter()
        .map(vec3::norm_f64)
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    for k in 0..count {
        let g = gram(m, &surf.first_partials[k]);
        let (det, min_eig) = if m == 1 {
            (g[0][0], g[0][0])
        } else {
            let ev = crate::body::small_symmetric_eigenvalues(2, &g);
            (g[0][0] * g[1][1] - g[0][1] * g[1][0], ev[0])
        };
        let sigma_min = libm::sqrt(min_eig.max(0.0));
        if !(sigma_min > 1e-8 * surf.scale) {
            return Err(Error::DegenerateChart {
                node: k,
                min_singular_value: sigma_min,
            });
        }
        surf.area_density.push(libm::sqrt(det));
    }
    Ok(surf)
}

fn exponent_pair(a: usize, b: usize) -> (usize, usize) {
    let mut e = [0usize; 2];
    e[a] += 1;
    e[b] += 1;
    (e[0], e[1])
}

/// Gram matrix of the first `m` partials.
pub fn gram(m: usize, partials: &[[f64; 3]; 2]) -> [[f64; 2]; 2] {
    let mut g = [[0.0; 2]; 2];
    for a in 0..m {
        for b in 0..m {
            g[a][b] = vec3::dot(&partials[a], &partials[b]);
        }
    }
    g
}

impl SampledSurface {
    pub fn chart(&self) -> &SurfaceChart {
        &self.chart
    }

    pub fn resolution(&self) -> Resolution {
        self.resolution
    }

    pub fn dimension(&self) -> usize {
        self.chart.dim
    }

    pub fn tangent_dimension(&self) -> usize {
        self.chart.dim - 1
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// `max |x|` over nodes; the length scale used for steps and tolerances.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Quadrature weight of `dS` at node `k`.
    pub fn area_weight(&self, k: usize) -> f64 {
        self.param_weights[k] * self.area_density[k]
    }

    /// `∫ values dS`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        let terms: Vec<f64> = values
            .iter()
            .enumerate()
            .map(|(k, v)| v * self.area_weight(k))
            .collect();
        pairwise_sum(&terms)
    }

    pub fn euclidean_area(&self) -> f64 {
        let terms: Vec<f64> = (0..self.len()).map(|k| self.area_weight(k)).collect();
        pairwise_sum(&terms)
    }
}
