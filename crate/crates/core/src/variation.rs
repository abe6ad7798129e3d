//! Variations of a surface and the first and second variation of `A_m`.
//!
//! The analytic formulas here are evaluated on frame data at `t = 0`. The
//! finite-difference oracle instead re-evaluates `A_m` and `V` on the
//! perturbed immersion `x + tW` from first-order chart data only, so the two
//! paths share nothing beyond the quadrature rule.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::body::ConvexBody;
use crate::error::{Error, Result};
use crate::field::{inverse_metric, ScalarField, VectorField};
use crate::frames::Frames;
use crate::jet::Jet;
use crate::linalg::{cholesky, generalized_symmetric_eigen, symmetric_eigen};
use crate::quadrature::pairwise_sum;
use crate::real::vec3::{self, V3};
use crate::real::Real;
use crate::surface::{SampledSurface, Topology};

/// Base FD step as a fraction of the surface scale.
pub const DEFAULT_STEP_FRACTION: f64 = 1e-3;
/// Number of step halvings in the Richardson table.
pub const RICHARDSON_LEVELS: usize = 3;
/// Spread of `H_m` below which a surface counts as CMC.
pub const CMC_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug)]
pub enum VariationKind {
    /// `F = x + t f η`.
    BirkhoffNormal(ScalarField),
    /// `F = (1 + t) x`.
    Scaling,
    /// `F = x + t v`.
    Translation([f64; 3]),
    /// `F = x + t W`.
    General(VectorField),
}

#[derive(Clone, Debug)]
pub struct VariationSpec {
    pub kind: VariationKind,
    /// Largest stencil step; `None` means `1e−3 × surface scale`.
    pub base_step: Option<f64>,
    pub levels: usize,
}

impl VariationSpec {
    pub fn new(kind: VariationKind) -> Self {
        VariationSpec {
            kind,
            base_step: None,
            levels: RICHARDSON_LEVELS,
        }
    }

    pub fn with_base_step(mut self, step: f64) -> Self {
        self.base_step = Some(step);
        self
    }

    /// Velocity field `∂F/∂t` at `t = 0`.
    pub fn velocity(&self, frames: &Frames, surf: &SampledSurface) -> VectorField {
        match &self.kind {
            VariationKind::BirkhoffNormal(f) => VectorField::along_eta(f, frames),
            VariationKind::Scaling => VectorField::position(surf),
            VariationKind::Translation(v) => VectorField::constant(surf, v),
            VariationKind::General(w) => w.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Functional {
    AreaMinkowski,
    Volume,
    /// `A_m − (n−1) H_ref V`.
    Jm { h_m_ref: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FdEstimate {
    pub value: f64,
    /// Difference between the last two diagonal Richardson entries.
    pub error_estimate: f64,
    pub steps: Vec<f64>,
    /// Raw central differences, one per step.
    pub raw: Vec<f64>,
}

/// `(A_m, V)` of `x + tW`. Normals and area elements come from the
/// perturbed chart partials `∂_a x + t ∂_a W`.
pub fn perturbed_functionals(
    body: &ConvexBody,
    surf: &SampledSurface,
    w: &VectorField,
    t: f64,
) -> Result<(f64, f64)> {
    let m = surf.tangent_dimension();
    let n = surf.dimension() as f64;
    let mut area = Vec::with_capacity(surf.len());
    let mut vol = Vec::with_capacity(surf.len());
    let wv = w.values();
    for k in 0..surf.len() {
        let wp = w.partials(k);
        let p = surf.first_partials[k];
        let f0 = vec3::add(&p[0], &vec3::scale(&wp[0], t));
        let normal = if m == 1 {
            [f0[1], -f0[0], 0.0]
        } else {
            let f1 = vec3::add(&p[1], &vec3::scale(&wp[1], t));
            vec3::cross(&f0, &f1)
        };
        let density = vec3::norm_f64(&normal);
        if !(density > 1e-8 * surf.area_density[k]) {
            return Err(Error::StencilImmersion { step: t });
        }
        let pos = vec3::add(&surf.positions[k], &vec3::scale(&wv[k], t));
        let wt = surf.param_weights[k];
        area.push(body.support_extended(&normal) * wt);
        vol.push(vec3::dot(&pos, &normal) * wt);
    }
    Ok((pairwise_sum(&area), pairwise_sum(&vol) / n))
}

fn functional_at(body: &ConvexBody, surf: &SampledSurface, w: &VectorField, which: Functional, t: f64) -> Result<f64> {
    let (a, v) = perturbed_functionals(body, surf, w, t)?;
    let n = surf.dimension() as f64;
    Ok(match which {
        Functional::AreaMinkowski => a,
        Functional::Volume => v,
        Functional::Jm { h_m_ref } => a - (n - 1.0) * h_m_ref * v,
    })
}

fn richardson(raw: &[f64], leading_power: i32) -> (f64, f64) {
    let levels = raw.len();
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(levels);
    for i in 0..levels {
        let mut row = vec![raw[i]];
        for j in 1..=i {
            let r = libm::pow(2.0, (leading_power + 2 * (j as i32 - 1)) as f64);
            let prev = table[i - 1][j - 1];
            let cur = row[j - 1];
            row.push(cur + (cur - prev) / (r - 1.0));
        }
        table.push(row);
    }
    let last = table[levels - 1][levels - 1];
    let err = if levels > 1 {
        (last - table[levels - 2][levels - 2]).abs()
    } else {
        f64::INFINITY
    };
    (last, err)
}

/// Central finite-difference derivative of `which` along `spec` at `t = 0`,
/// Richardson-extrapolated over steps `h, h/2, h/4, ...`.
///
/// Order 1 uses the 3-point stencil, order 2 the 5-point stencil. If a
/// stencil point is not an immersion the base step is halved once.
pub fn fd_functional_derivative(
    body: &ConvexBody,
    surf: &SampledSurface,
    frames: &Frames,
    spec: &VariationSpec,
    which: Functional,
    order: u32,
) -> Result<FdEstimate> {
    if order != 1 && order != 2 {
        return Err(Error::InvalidParameter(format!("derivative order {order} not in {{1, 2}}")));
    }
    if spec.levels == 0 {
        return Err(Error::InvalidParameter("at least one Richardson level is required".into()));
    }
    let w = spec.velocity(frames, surf);
    let base = spec.base_step.unwrap_or(DEFAULT_STEP_FRACTION * surf.scale());
    match fd_with_base(body, surf, &w, which, order, base, spec.levels) {
        Err(Error::StencilImmersion { .. }) => fd_with_base(body, surf, &w, which, order, 0.5 * base, spec.levels),
        other => other,
    }
}

fn fd_with_base(
    body: &ConvexBody,
    surf: &SampledSurface,
    w: &VectorField,
    which: Functional,
    order: u32,
    base: f64,
    levels: usize,
) -> Result<FdEstimate> {
    let eval = |t: f64| functional_at(body, surf, w, which, t);
    let center = if order == 2 { eval(0.0)? } else { 0.0 };
    let mut steps = Vec::with_capacity(levels);
    let mut raw = Vec::with_capacity(levels);
    for i in 0..levels {
        let h = base / libm::pow(2.0, i as f64);
        let d = if order == 1 {
            (eval(h)? - eval(-h)?) / (2.0 * h)
        } else {
            (-eval(2.0 * h)? + 16.0 * eval(h)? - 30.0 * center + 16.0 * eval(-h)? - eval(-2.0 * h)?) / (12.0 * h * h)
        };
        steps.push(h);
        raw.push(d);
    }
    let (value, error_estimate) = richardson(&raw, if order == 1 { 2 } else { 4 });
    Ok(FdEstimate {
        value,
        error_estimate,
        steps,
        raw,
    })
}

fn integrate_domega(frames: &Frames, surf: &SampledSurface, values: &[f64]) -> f64 {
    frames.integrate_domega(surf, values)
}

/// `(n−1) ∫ H_m f dω`, the first variation along `F = x + t f η`.
pub fn first_variation_formula(frames: &Frames, surf: &SampledSurface, f: &ScalarField) -> f64 {
    let m = frames.tangent_dimension() as f64;
    let vals: Vec<f64> = f.values().iter().zip(&frames.nodes).map(|(v, p)| m * p.h_m * v).collect();
    integrate_domega(frames, surf, &vals)
}

/// `(n−1) ∫ H_m N_η(W) dω` with `N_η(W) = ⟨W, ξ⟩ / ⟨η, ξ⟩`.
pub fn first_variation_general(frames: &Frames, surf: &SampledSurface, w: &VectorField) -> f64 {
    let m = frames.tangent_dimension() as f64;
    let vals: Vec<f64> = w
        .birkhoff_component(frames)
        .iter()
        .zip(&frames.nodes)
        .map(|(v, p)| m * p.h_m * v)
        .collect();
    integrate_domega(frames, surf, &vals)
}

/// `Δ_m f = ⟨η, ξ⟩⁻¹ div(⟨η, ξ⟩² du(∇f))`.
///
/// The divergence is the coordinate one, `(1/√g) ∂_a(√g X^a)`, applied to the
/// jet of `X`. The returned field carries values only.
pub fn minkowski_laplacian(frames: &Frames, surf: &SampledSurface, f: &ScalarField) -> ScalarField {
    let m = frames.tangent_dimension();
    let _ = surf;
    let vals: Vec<f64> = frames
        .jets
        .iter()
        .zip(f.jets())
        .map(|(j, fj)| {
            let (ginv, sqrtg) = inverse_metric(m, &j.partials);
            let df = [fj.derivative(0), fj.derivative(1)];
            let mut grad: V3<Jet> = vec3::zero();
            for a in 0..m {
                let mut up = Jet::zero();
                for b in 0..m {
                    up += ginv[a][b] * df[b];
                }
                grad = vec3::add(&grad, &vec3::scale(&j.partials[a], up));
            }
            let x = vec3::scale(&vec3::mat_vec(&j.du, &grad), j.support * j.support);
            let mut div = 0.0;
            for a in 0..m {
                let mut xa = Jet::zero();
                for b in 0..m {
                    xa += ginv[a][b] * vec3::dot(&x, &j.partials[b]);
                }
                div += (sqrtg * xa).d1(a);
            }
            div / (sqrtg.value() * j.support.value())
        })
        .collect();
    ScalarField::from_values_constant_in_parameters(&vals)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SecondVariation {
    pub value: f64,
    /// `dω`-mean subtracted from the input field.
    pub mean_removed: f64,
}

/// Gradient-form integrand data: `B_m²`, `⟨η, ξ⟩ ∇f` and `du ∇f` per node.
struct GradientData {
    values: Vec<f64>,
    grad: Vec<[f64; 3]>,
    du_grad: Vec<[f64; 3]>,
}

fn gradient_data(frames: &Frames, surf: &SampledSurface, f: &ScalarField) -> GradientData {
    GradientData {
        values: f.values(),
        grad: f.gradient(surf),
        du_grad: f.dupin_gradient(frames, surf),
    }
}

/// `∫ (−B_m² f g + ⟨η, ξ⟩ ⟨∇f, du ∇g⟩) dω`.
fn gradient_bilinear(frames: &Frames, surf: &SampledSurface, f: &GradientData, g: &GradientData) -> f64 {
    let vals: Vec<f64> = frames
        .nodes
        .iter()
        .enumerate()
        .map(|(k, p)| {
            -p.b_m_sq * f.values[k] * g.values[k] + p.support_at_normal * vec3::dot(&f.grad[k], &g.du_grad[k])
        })
        .collect();
    integrate_domega(frames, surf, &vals)
}

/// `∫ (−B_m² f² + ⟨η, ξ⟩ (∇^b f, ∇^b f)_b) dω` after projecting `f` to `dω`-mean zero.
///
/// Uses `(du ∇f, du ∇f)_b = ⟨∇f, du ∇f⟩`.
pub fn second_variation_gradient_form(frames: &Frames, surf: &SampledSurface, f: &ScalarField) -> SecondVariation {
    let (f0, mean) = f.mean_zero(frames, surf);
    let d = gradient_data(frames, surf, &f0);
    SecondVariation {
        value: gradient_bilinear(frames, surf, &d, &d),
        mean_removed: mean,
    }
}

/// `−∫ f (B_m² f + Δ_m f) dω` after projecting `f` to `dω`-mean zero.
pub fn second_variation_divergence_form(frames: &Frames, surf: &SampledSurface, f: &ScalarField) -> SecondVariation {
    let (f0, mean) = f.mean_zero(frames, surf);
    let lap = minkowski_laplacian(frames, surf, &f0).values();
    let vals: Vec<f64> = f0
        .values()
        .iter()
        .zip(&lap)
        .zip(&frames.nodes)
        .map(|((v, l), p)| -v * (p.b_m_sq * v + l))
        .collect();
    SecondVariation {
        value: integrate_domega(frames, surf, &vals),
        mean_removed: mean,
    }
}

/// `|∫ (1 − ρ H_m) dω| / ∫ dω`.
pub fn minkowski_identity_residual(frames: &Frames, surf: &SampledSurface) -> f64 {
    let vals: Vec<f64> = frames.nodes.iter().map(|p| 1.0 - p.rho * p.h_m).collect();
    integrate_domega(frames, surf, &vals).abs() / frames.minkowski_area(surf)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityCertificate {
    /// `∫ (B_m² − (n−1) H_m²) dω`, nonnegative pointwise.
    pub deficit: f64,
    /// `max H_m − min H_m`.
    pub h_m_spread: f64,
    /// `−∫ B_m² (1 − ρ H_m) dω`, the second variation along `f = 1 − ρ H_m`
    /// when `H_m` is constant.
    pub reduced_second_variation: f64,
}

pub fn cmc_stability_certificate(frames: &Frames, surf: &SampledSurface) -> StabilityCertificate {
    let m = frames.tangent_dimension() as f64;
    let deficit: Vec<f64> = frames.nodes.iter().map(|p| p.b_m_sq - m * p.h_m * p.h_m).collect();
    let reduced: Vec<f64> = frames.nodes.iter().map(|p| -p.b_m_sq * (1.0 - p.rho * p.h_m)).collect();
    StabilityCertificate {
        deficit: integrate_domega(frames, surf, &deficit),
        h_m_spread: frames.mean_curvature_spread(),
        reduced_second_variation: integrate_domega(frames, surf, &reduced),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LaplacianRhoCheck {
    /// `max |Δ_m ρ − ((n−1) H_m − ρ B_m²)|` over nodes.
    Residual { max_residual: f64, h_m_spread: f64 },
    /// The identity is only claimed for constant `H_m`.
    NotApplicable { h_m_spread: f64 },
}

impl LaplacianRhoCheck {
    pub fn residual(&self) -> Option<f64> {
        match self {
            LaplacianRhoCheck::Residual { max_residual, .. } => Some(*max_residual),
            LaplacianRhoCheck::NotApplicable { .. } => None,
        }
    }
}

pub fn laplacian_rho_check(frames: &Frames, surf: &SampledSurface) -> LaplacianRhoCheck {
    let spread = frames.mean_curvature_spread();
    if !(spread <= CMC_TOLERANCE) {
        return LaplacianRhoCheck::NotApplicable { h_m_spread: spread };
    }
    let m = frames.tangent_dimension() as f64;
    let rho = ScalarField::rho(frames);
    let lap = minkowski_laplacian(frames, surf, &rho).values();
    let max_residual = frames
        .nodes
        .iter()
        .zip(&lap)
        .map(|(p, l)| (l - (m * p.h_m - p.rho * p.b_m_sq)).abs())
        .fold(0.0, f64::max);
    LaplacianRhoCheck::Residual {
        max_residual,
        h_m_spread: spread,
    }
}

/// Condition number of the mass matrix above which the basis is rejected.
pub const MAX_MASS_CONDITION: f64 = 1e12;

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReport {
    /// Ascending generalized eigenvalues of `Q v = μ M v`.
    pub eigenvalues: Vec<f64>,
    /// `M`-orthonormal coefficient vectors, `eigenvectors[k]` for `eigenvalues[k]`.
    pub eigenvectors: Vec<Vec<f64>>,
    /// Labels of the basis functions before projection.
    pub basis: Vec<String>,
    pub mass_condition: f64,
    /// `max_k ‖Q v_k − μ_k M v_k‖`.
    pub residual: f64,
    /// `max |μ|`, the spectral norm of `Q` relative to `M`.
    pub q_norm: f64,
    /// Node values of each eigenfunction.
    pub eigenfunctions: Vec<Vec<f64>>,
}

impl SpectrumReport {
    /// Eigenvalues with `|μ| <= tol · ‖Q‖`.
    pub fn near_zero(&self, tol: f64) -> Vec<usize> {
        (0..self.eigenvalues.len())
            .filter(|&k| self.eigenvalues[k].abs() <= tol * self.q_norm)
            .collect()
    }
}

/// Real spherical harmonic `Y_l^m` (unit `L²` norm on `S²`) at the chart
/// direction with polar variable `s` and azimuth `θ`. Negative `m` selects
/// `sin(|m| θ)`.
pub fn spherical_harmonic<T: Real>(l: u32, m: i32, theta: T, s: T) -> T {
    let am = m.unsigned_abs();
    let sigma = (T::one() - s * s).sqrt();
    // P_am^am without the Condon-Shortley sign
    let mut pmm = T::one();
    for i in 0..am {
        pmm = pmm * sigma.scale((2 * i + 1) as f64);
    }
    let p = if l == am {
        pmm
    } else {
        let mut prev = pmm;
        let mut cur = (s * pmm).scale((2 * am + 1) as f64);
        for ll in (am + 2)..=l {
            let next = ((s * cur).scale((2 * ll - 1) as f64) - prev.scale((ll + am - 1) as f64)).scale(1.0 / (ll - am) as f64);
            prev = cur;
            cur = next;
        }
        cur
    };
    let mut ratio = 1.0;
    for i in (l - am + 1)..=(l + am) {
        ratio /= i as f64;
    }
    let mut norm = libm::sqrt((2 * l + 1) as f64 / (4.0 * core::f64::consts::PI) * ratio);
    if am > 0 {
        norm *= core::f64::consts::SQRT_2;
    }
    let angular = if m > 0 {
        theta.scale(am as f64).cos()
    } else if m < 0 {
        theta.scale(am as f64).sin()
    } else {
        T::one()
    };
    (p * angular).scale(norm)
}

/// The first `size` raw basis functions for the chart topology, degree-graded.
///
/// Sphere charts: `Y_l^m` for `l >= 1`. Tori: `cos` and `sin` of
/// `kθ + lφ` graded by `k + |l|`. Circles: `cos kθ`, `sin kθ`, `k >= 1`.
pub fn raw_basis(surf: &SampledSurface, size: usize) -> Vec<(String, ScalarField)> {
    let mut out = Vec::with_capacity(size);
    match surf.chart().topology() {
        Topology::Sphere => {
            let mut l = 1u32;
            while out.len() < size {
                for m in 0..=(l as i32) {
                    let orders = [m, -m];
                    for &mm in &orders[..if m == 0 { 1 } else { 2 }] {
                        if out.len() == size {
                            break;
                        }
                        let f = ScalarField::from_parameters(surf, |p| spherical_harmonic(l, mm, p[0], p[1]));
                        out.push((format!("Y({l},{mm})"), f));
                    }
                }
                l += 1;
            }
        }
        Topology::Torus => {
            let mut d = 1i32;
            while out.len() < size {
                for k in 0..=d {
                    let rest = d - k;
                    let ls: Vec<i32> = if rest == 0 {
                        vec![0]
                    } else if k == 0 {
                        vec![rest]
                    } else {
                        vec![-rest, rest]
                    };
                    for l in ls {
                        for trig in 0..2 {
                            if out.len() == size {
                                break;
                            }
                            let f = ScalarField::from_parameters(surf, |p| {
                                let arg = p[0].scale(k as f64) + p[1].scale(l as f64);
                                if trig == 0 {
                                    arg.cos()
                                } else {
                                    arg.sin()
                                }
                            });
                            let name = if trig == 0 { "cos" } else { "sin" };
                            out.push((format!("{name}({k}t{l:+}p)"), f));
                        }
                    }
                }
                d += 1;
            }
        }
        Topology::Circle => {
            let mut k = 1u32;
            while out.len() < size {
                for trig in 0..2 {
                    if out.len() == size {
                        break;
                    }
                    let f = ScalarField::from_parameters(surf, |p| {
                        let arg = p[0].scale(k as f64);
                        if trig == 0 {
                            arg.cos()
                        } else {
                            arg.sin()
                        }
                    });
                    out.push((format!("{}({k}t)", if trig == 0 { "cos" } else { "sin" }), f));
                }
                k += 1;
            }
        }
    }
    out
}

/// Lowest eigenvalues of the second-variation form on `dω`-mean-zero fields.
///
/// Each raw basis function is divided by `⟨η, ξ⟩` (so that the translation
/// speeds `⟨v, ξ⟩ / ⟨η, ξ⟩` of Minkowski spheres are representable) and then
/// projected to mean zero.
pub fn stability_spectrum(frames: &Frames, surf: &SampledSurface, basis_size: usize) -> Result<SpectrumReport> {
    let n = surf.dimension();
    if basis_size < n + 2 {
        return Err(Error::InvalidParameter(format!(
            "basis size {basis_size} is below the minimum {} for dimension {n}",
            n + 2
        )));
    }
    let raw = raw_basis(surf, basis_size);
    let mut labels = Vec::with_capacity(basis_size);
    let mut data = Vec::with_capacity(basis_size);
    for (label, f) in raw {
        let (g, _) = f.over_support(frames).mean_zero(frames, surf);
        labels.push(label);
        data.push(gradient_data(frames, surf, &g));
    }
    let nb = data.len();
    let mut q = vec![0.0; nb * nb];
    let mut mass = vec![0.0; nb * nb];
    for i in 0..nb {
        for j in i..nb {
            // du is symmetric only up to roundoff
            let qij = 0.5
                * (gradient_bilinear(frames, surf, &data[i], &data[j])
                    + gradient_bilinear(frames, surf, &data[j], &data[i]));
            let prod: Vec<f64> = data[i].values.iter().zip(&data[j].values).map(|(a, b)| a * b).collect();
            let mij = integrate_domega(frames, surf, &prod);
            q[i * nb + j] = qij;
            q[j * nb + i] = qij;
            mass[i * nb + j] = mij;
            mass[j * nb + i] = mij;
        }
    }
    let mass_eig = symmetric_eigen(&mass, nb);
    let lo = mass_eig.values[0];
    let hi = mass_eig.values[nb - 1];
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(condition <= MAX_MASS_CONDITION) || cholesky(&mass, nb).is_none() {
        return Err(Error::BasisDegeneracy {
            basis_size: nb,
            condition,
        });
    }
    let eig = generalized_symmetric_eigen(&q, &mass, nb).map_err(|_| Error::BasisDegeneracy {
        basis_size: nb,
        condition,
    })?;
    let mut residual: f64 = 0.0;
    let mut eigenvectors = Vec::with_capacity(nb);
    let mut eigenfunctions = Vec::with_capacity(nb);
    for k in 0..nb {
        let v = eig.vector(k);
        let mu = eig.values[k];
        let qv = crate::linalg::mat_vec(&q, nb, &v);
        let mv = crate::linalg::mat_vec(&mass, nb, &v);
        let r: f64 = qv.iter().zip(&mv).map(|(a, b)| (a - mu * b) * (a - mu * b)).sum();
        residual = residual.max(libm::sqrt(r));
        let mut values = vec![0.0; surf.len()];
        for (i, d) in data.iter().enumerate() {
            for (node, val) in values.iter_mut().enumerate() {
                *val += v[i] * d.values[node];
            }
        }
        eigenvectors.push(v);
        eigenfunctions.push(values);
    }
    let q_norm = eig.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    Ok(SpectrumReport {
        eigenvalues: eig.values,
        eigenvectors,
        basis: labels,
        mass_condition: condition,
        residual,
        q_norm,
        eigenfunctions,
    })
}

/// Largest principal angle (radians) between the spans of two families of
/// node-value vectors in the `∫ f g dω` inner product.
pub fn subspace_angle(frames: &Frames, surf: &SampledSurface, a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let inner = |x: &[f64], y: &[f64]| {
        let prod: Vec<f64> = x.iter().zip(y).map(|(p, q)| p * q).collect();
        integrate_domega(frames, surf, &prod)
    };
    let qa = orthonormalize(a, &inner);
    let qb = orthonormalize(b, &inner);
    if qa.len() < qb.len() {
        return core::f64::consts::FRAC_PI_2;
    }
    // residuals of qb after projection onto span(qa)
    let residuals: Vec<Vec<f64>> = qb
        .iter()
        .map(|y| {
            let mut r = y.clone();
            for x in &qa {
                let c = inner(x, y);
                for (ri, xi) in r.iter_mut().zip(x) {
                    *ri -= c * xi;
                }
            }
            r
        })
        .collect();
    let k = residuals.len();
    let mut s = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            s[i * k + j] = inner(&residuals[i], &residuals[j]);
        }
    }
    let top = symmetric_eigen(&s, k).values[k - 1].clamp(0.0, 1.0);
    libm::asin(libm::sqrt(top))
}

fn orthonormalize(vs: &[Vec<f64>], inner: &dyn Fn(&[f64], &[f64]) -> f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        // two passes of Gram-Schmidt
        for _ in 0..2 {
            for q in &out {
                let c = inner(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let nrm = libm::sqrt(inner(&w, &w));
        if nrm > 1e-12 {
            out.push(w.iter().map(|x| x / nrm).collect());
        }
    }
    out
}

/// Node values of `⟨e_j, ξ⟩ / ⟨η, ξ⟩` for the coordinate axes `e_j`.
pub fn translation_modes(frames: &Frames) -> Vec<Vec<f64>> {
    let n = frames.dimension();
    (0..n)
        .map(|j| {
            let mut v = [0.0; 3];
            v[j] = 1.0;
            ScalarField::translation_component(frames, &v).values()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::compute_frames;
    use crate::quadrature::gauss_legendre;
    use crate::surface::{make_minkowski_sphere, make_round_sphere, make_torus, sample, Resolution};

    fn unit_sphere() -> (SampledSurface, Frames) {
        let body = ConvexBody::ball(3, 1.0).unwrap();
        let surf = sample(&make_round_sphere(3, 1.0, [0.0; 3]).unwrap(), Resolution::new(32, 16)).unwrap();
        let frames = compute_frames(&body, &surf).unwrap();
        (surf, frames)
    }

    #[test]
    fn spherical_harmonics_are_orthonormal() {
        let (theta, ht) = crate::quadrature::periodic_trapezoid(24);
        let (s, ws) = gauss_legendre(12);
        let modes = [(1, 0), (1, 1), (1, -1), (2, 0), (2, 2), (3, -2), (4, 3)];
        for &(l1, m1) in &modes {
            for &(l2, m2) in &modes {
                let mut acc = 0.0;
                for (j, sj) in s.iter().enumerate() {
                    for t in &theta {
                        acc += ht * ws[j] * spherical_harmonic(l1, m1, *t, *sj) * spherical_harmonic(l2, m2, *t, *sj);
                    }
                }
                let expected = if (l1, m1) == (l2, m2) { 1.0 } else { 0.0 };
                assert!((acc - expected).abs() < 1e-12, "{l1} {m1} {l2} {m2}: {acc}");
            }
        }
    }

    #[test]
    fn laplacian_of_coordinate_on_unit_sphere() {
        let (surf, frames) = unit_sphere();
        let z = ScalarField::from_jets(surf.position_jets.iter().map(|x| x[2]).collect());
        let lap = minkowski_laplacian(&frames, &surf, &z).values();
        for (k, l) in lap.iter().enumerate() {
            assert!((l + 2.0 * surf.positions[k][2]).abs() < 1e-11);
        }
    }

    #[test]
    fn richardson_removes_leading_terms() {
        // D(h) = 1 + h² + h⁴
        let raw: Vec<f64> = (0..3).map(|i| {
            let h = 0.1 / libm::pow(2.0, i as f64);
            1.0 + h * h + h * h * h * h
        }).collect();
        let (v, _) = richardson(&raw, 2);
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn scaling_variation_of_area() {
        let body = ConvexBody::ellipsoid(3, &[vec![3.0, 0.2, 0.0], vec![0.2, 1.0, 0.0], vec![0.0, 0.0, 1.5]]).unwrap();
        let surf = sample(&make_torus(2.0, 0.5).unwrap(), Resolution::new(32, 32)).unwrap();
        let frames = compute_frames(&body, &surf).unwrap();
        let spec = VariationSpec::new(VariationKind::Scaling);
        let fd = fd_functional_derivative(&body, &surf, &frames, &spec, Functional::AreaMinkowski, 1).unwrap();
        let a = frames.minkowski_area(&surf);
        assert!((fd.value - 2.0 * a).abs() < 1e-10 * a);
        let fd2 = fd_functional_derivative(&body, &surf, &frames, &spec, Functional::AreaMinkowski, 2).unwrap();
        assert!((fd2.value - 2.0 * a).abs() < 1e-7 * a);
    }

    #[test]
    fn jacobi_spectrum_on_unit_sphere() {
        let (surf, frames) = unit_sphere();
        let report = stability_spectrum(&frames, &surf, 15).unwrap();
        let expected = [0.0, 0.0, 0.0, 4.0, 4.0, 4.0, 4.0, 4.0, 10.0];
        for (mu, e) in report.eigenvalues.iter().zip(expected) {
            assert!((mu - e).abs() < 1e-9, "{mu} vs {e}");
        }
        assert!(report.residual < 1e-10);
    }

    #[test]
    fn translation_kernel_on_minkowski_sphere() {
        let body = ConvexBody::ellipsoid(3, &[vec![4.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 2.0]]).unwrap();
        let surf = sample(&make_minkowski_sphere(&body, 1.0, [0.0; 3]).unwrap(), Resolution::new(32, 16)).unwrap();
        let frames = compute_frames(&body, &surf).unwrap();
        let report = stability_spectrum(&frames, &surf, 12).unwrap();
        let zero = report.near_zero(1e-5);
        assert_eq!(zero.len(), 3, "{:?}", report.eigenvalues);
        let kernel: Vec<Vec<f64>> = zero.iter().map(|&k| report.eigenfunctions[k].clone()).collect();
        assert!(subspace_angle(&frames, &surf, &kernel, &translation_modes(&frames)) < 1e-6);
    }

    #[test]
    fn laplacian_rho_refuses_torus() {
        let body = ConvexBody::ball(3, 1.0).unwrap();
        let surf = sample(&make_torus(2.0, 0.5).unwrap(), Resolution::new(16, 16)).unwrap();
        let frames = compute_frames(&body, &surf).unwrap();
        assert!(matches!(laplacian_rho_check(&frames, &surf), LaplacianRhoCheck::NotApplicable { .. }));
    }
}
