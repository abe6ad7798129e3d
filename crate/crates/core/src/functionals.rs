//! Global integrals: areas, volumes, mixed volume and the isoperimetric ratio.

use alloc::string::String;
use alloc::vec::Vec;

use crate::body::ConvexBody;
use crate::error::{Error, Result};
use crate::frames::{compute_frames, Frames};
use crate::real::vec3;
use crate::surface::{make_minkowski_sphere, sample, Resolution, SampledSurface, SurfaceChart};

/// Tolerance on `ratio − 1` in the isoperimetric check.
pub const ISOPERIMETRIC_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalReport {
    pub area_euclidean: f64,
    pub area_minkowski: f64,
    pub volume: f64,
    pub body_volume: f64,
    pub mixed_volume: f64,
    pub isoperimetric_ratio: f64,
    /// `A_m − (n−1) H_ref V`, present when a reference curvature was supplied.
    pub j_m: Option<f64>,
    pub h_m_ref: Option<f64>,
}

/// `vol(B)` computed on `∂B`, memoized per resolution.
///
/// A cache belongs to one body; reuse it only with that body.
#[derive(Clone, Debug, Default)]
pub struct BodyVolume {
    cached: Option<(Resolution, f64)>,
}

impl BodyVolume {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&mut self, body: &ConvexBody, resolution: Resolution) -> Result<f64> {
        if let Some((r, v)) = self.cached {
            if r == resolution {
                return Ok(v);
            }
        }
        let v = body_volume(body, resolution)?;
        self.cached = Some((resolution, v));
        Ok(v)
    }
}

/// Volume of `B` by the divergence theorem on the chart `ν ↦ u(ν)`.
pub fn body_volume(body: &ConvexBody, resolution: Resolution) -> Result<f64> {
    let chart = make_minkowski_sphere(body, 1.0, [0.0; 3])?;
    let surf = sample(&chart, resolution)?;
    Ok(enclosed_volume(&surf))
}

/// `V = (1/n) ∫ ⟨x, ξ⟩ dS`, with `ξ` from the chart partials.
pub fn enclosed_volume(surf: &SampledSurface) -> f64 {
    let m = surf.tangent_dimension();
    let terms: Vec<f64> = (0..surf.len())
        .map(|k| {
            let xi = crate::frames::unit_normal(m, &surf.first_partials[k]);
            vec3::dot(&surf.positions[k], &xi) * surf.area_weight(k)
        })
        .collect();
    crate::quadrature::pairwise_sum(&terms) / surf.dimension() as f64
}

/// `∫ dω`.
pub fn minkowski_area(frames: &Frames, surf: &SampledSurface) -> f64 {
    frames.minkowski_area(surf)
}

/// Volume using the frame normals.
pub fn volume(frames: &Frames, surf: &SampledSurface) -> f64 {
    let terms: Vec<f64> = frames
        .nodes
        .iter()
        .enumerate()
        .map(|(k, f)| vec3::dot(&f.position, &f.xi) * surf.area_weight(k))
        .collect();
    crate::quadrature::pairwise_sum(&terms) / surf.dimension() as f64
}

/// `A_m − (n−1) H_ref V`.
pub fn j_m(frames: &Frames, surf: &SampledSurface, h_m_ref: f64) -> f64 {
    let n = surf.dimension() as f64;
    minkowski_area(frames, surf) - (n - 1.0) * h_m_ref * volume(frames, surf)
}

pub fn isoperimetric_ratio(n: usize, area_minkowski: f64, volume: f64, body_volume: f64) -> f64 {
    let n = n as f64;
    let mixed = area_minkowski / n;
    mixed / (libm::pow(volume, (n - 1.0) / n) * libm::pow(body_volume, 1.0 / n))
}

pub fn functional_report(
    body: &ConvexBody,
    surf: &SampledSurface,
    frames: &Frames,
    h_m_ref: Option<f64>,
    cache: &mut BodyVolume,
) -> Result<FunctionalReport> {
    let n = surf.dimension();
    // A_m is stored as n times the mixed volume so the two agree bit for bit
    let mixed_volume = minkowski_area(frames, surf) / n as f64;
    let area_minkowski = n as f64 * mixed_volume;
    let vol = volume(frames, surf);
    let body_volume = cache.get(body, surf.resolution())?;
    Ok(FunctionalReport {
        area_euclidean: surf.euclidean_area(),
        area_minkowski,
        volume: vol,
        body_volume,
        mixed_volume,
        isoperimetric_ratio: isoperimetric_ratio(n, area_minkowski, vol, body_volume),
        j_m: h_m_ref.map(|h| area_minkowski - (n as f64 - 1.0) * h * vol),
        h_m_ref,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct IsoperimetricRow {
    pub label: String,
    pub ratio: f64,
    /// `ratio >= 1 − tol`.
    pub passed: bool,
    /// `|ratio − 1| <= tol`.
    pub equality: bool,
    /// Whether the chart is a homothet of the body.
    pub is_minkowski_sphere: bool,
    /// An equality flag on a surface that is not a Minkowski sphere.
    pub equality_mismatch: bool,
}

/// Ratios for a list of embedded charts sampled at `resolution` (or each
/// chart's default).
pub fn isoperimetric_check(
    body: &ConvexBody,
    charts: &[(String, SurfaceChart)],
    resolution: Option<Resolution>,
    tol: f64,
) -> Result<Vec<IsoperimetricRow>> {
    let mut rows = Vec::with_capacity(charts.len());
    let mut cache = BodyVolume::new();
    for (label, chart) in charts {
        if !chart.is_embedded() {
            return Err(Error::InvalidParameter(alloc::format!(
                "surface '{label}' is not embedded; the isoperimetric check needs a domain"
            )));
        }
        let surf = sample(chart, resolution.unwrap_or_else(|| chart.default_resolution()))?;
        let frames = compute_frames(body, &surf)?;
        let report = functional_report(body, &surf, &frames, None, &mut cache)?;
        let ratio = report.isoperimetric_ratio;
        let equality = (ratio - 1.0).abs() <= tol;
        let is_minkowski_sphere = chart.as_minkowski_sphere_of(body).is_some();
        rows.push(IsoperimetricRow {
            label: label.clone(),
            ratio,
            passed: ratio >= 1.0 - tol,
            equality,
            is_minkowski_sphere,
            equality_mismatch: equality && !is_minkowski_sphere,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{make_round_sphere, make_torus};
    use alloc::vec;
    use core::f64::consts::PI;

    #[test]
    fn euclidean_sphere_functionals() {
        let body = ConvexBody::ball(3, 1.0).unwrap();
        let surf = sample(&make_round_sphere(3, 1.5, [0.0; 3]).unwrap(), Resolution::new(32, 16)).unwrap();
        let frames = compute_frames(&body, &surf).unwrap();
        let r = functional_report(&body, &surf, &frames, Some(1.0 / 1.5), &mut BodyVolume::new()).unwrap();
        assert!((r.area_minkowski - 4.0 * PI * 2.25).abs() < 1e-11);
        assert!((r.volume - 4.0 * PI * 1.5f64.powi(3) / 3.0).abs() < 1e-11);
        assert!((r.isoperimetric_ratio - 1.0).abs() < 1e-12);
        assert_eq!(r.mixed_volume * 3.0, r.area_minkowski);
    }

    #[test]
    fn torus_volume_closed_form() {
        let (big, small) = (2.0, 0.5);
        let surf = sample(&make_torus(big, small).unwrap(), Resolution::new(64, 32)).unwrap();
        let v = enclosed_volume(&surf);
        assert!((v - 2.0 * PI * PI * big * small * small).abs() < 1e-12, "{v}");
    }

    #[test]
    fn ellipsoid_body_volume() {
        let body = ConvexBody::ellipsoid(3, &[vec![4.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 2.25]]).unwrap();
        let v = body_volume(&body, Resolution::new(64, 32)).unwrap();
        let exact = body.closed_form_volume().unwrap();
        assert!((v - exact).abs() < 1e-10 * exact);
    }
}
