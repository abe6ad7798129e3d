//! JSON specification files for bodies, surfaces and variation experiments.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use wulff_core::{
    make_minkowski_sphere, make_radial_graph, make_round_sphere, make_torus, ConvexBody, RadialField, Resolution,
    SurfaceChart,
};

use crate::CliError;

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::input(format!(
            "{}:{}:{}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BodySpec {
    #[serde(default = "default_dimension")]
    pub dimension: usize,
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(rename = "Q", default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
    /// Fault injection for testing the frame-consistency guard.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub debug_corrupt_gradient: Option<f64>,
}

fn default_dimension() -> usize {
    3
}

fn required<T: Clone>(value: &Option<T>, key: &str, family: &str) -> Result<T, CliError> {
    value
        .clone()
        .ok_or_else(|| CliError::input(format!("family '{family}' requires key '{key}'")))
}

impl BodySpec {
    pub fn build(&self) -> Result<ConvexBody, CliError> {
        let d = self.dimension;
        let fam = self.family.as_str();
        let body = match fam {
            "ball" | "euclidean_ball" => ConvexBody::ball(d, required(&self.radius, "radius", fam)?),
            "ellipsoid" => ConvexBody::ellipsoid(d, &required(&self.q, "Q", fam)?),
            "perturbed_ball" => ConvexBody::perturbed_ball(
                d,
                required(&self.radius, "radius", fam)?,
                required(&self.epsilon, "epsilon", fam)?,
                required(&self.coeffs, "coeffs", fam)?,
            ),
            other => {
                return Err(CliError::input(format!(
                    "unknown body family '{other}' (expected ball, ellipsoid or perturbed_ball)"
                )))
            }
        }
        .map_err(|e| CliError::input(e.to_string()))?;
        Ok(match self.debug_corrupt_gradient {
            Some(a) => body.with_gradient_fault(a),
            None => body,
        })
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// Constant term of a radial graph; defaults to 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub major: Option<f64>,
    #[serde(rename = "r", default, skip_serializing_if = "Option::is_none")]
    pub minor: Option<f64>,
}

fn center3(c: &Option<Vec<f64>>, dim: usize) -> Result<[f64; 3], CliError> {
    let mut out = [0.0; 3];
    if let Some(v) = c {
        if v.len() != dim {
            return Err(CliError::input(format!("center has {} entries, expected {dim}", v.len())));
        }
        out[..dim].copy_from_slice(v);
    }
    Ok(out)
}

impl SurfaceSpec {
    pub fn build(&self, body: &ConvexBody) -> Result<SurfaceChart, CliError> {
        let dim = body.dimension();
        let kind = self.kind.as_str();
        let chart = match kind {
            "minkowski_sphere" => make_minkowski_sphere(
                body,
                self.lambda.unwrap_or(1.0),
                center3(&self.center, dim)?,
            ),
            "round_sphere" => make_round_sphere(dim, required(&self.radius, "radius", kind)?, center3(&self.center, dim)?),
            "radial_graph" => make_radial_graph(
                RadialField::new(self.base.unwrap_or(1.0), required(&self.coeffs, "coeffs", kind)?),
                dim,
            ),
            "torus" => {
                if dim != 3 {
                    return Err(CliError::input("tori need a three-dimensional body"));
                }
                make_torus(required(&self.major, "R", kind)?, required(&self.minor, "r", kind)?)
            }
            other => {
                return Err(CliError::input(format!(
                    "unknown surface kind '{other}' (expected minkowski_sphere, round_sphere, radial_graph or torus)"
                )))
            }
        };
        chart.map_err(|e| CliError::input(e.to_string()))
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Random { seed: u64, degree: u32 },
    TranslationComponent { v: Vec<f64> },
    Constant { c: f64 },
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct VariationFile {
    pub variation: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldSpec>,
    /// Translation vector for `"translation"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<f64>>,
    #[serde(default = "default_orders")]
    pub orders: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_step: Option<f64>,
}

fn default_orders() -> Vec<u32> {
    vec![1, 2]
}

impl VariationFile {
    pub fn validate(&self) -> Result<(), CliError> {
        match self.variation.as_str() {
            "birkhoff_normal" => {
                if self.field.is_none() {
                    return Err(CliError::input("birkhoff_normal variations need a 'field'"));
                }
            }
            "translation" => {
                if self.v.is_none() {
                    return Err(CliError::input("translation variations need 'v'"));
                }
            }
            "scaling" => {}
            other => {
                return Err(CliError::input(format!(
                    "unknown variation '{other}' (expected birkhoff_normal, scaling or translation)"
                )))
            }
        }
        if self.orders.is_empty() || self.orders.iter().any(|o| *o != 1 && *o != 2) {
            return Err(CliError::input("orders must be a nonempty subset of [1, 2]"));
        }
        Ok(())
    }
}

pub fn vec3(v: &[f64], dim: usize, what: &str) -> Result<[f64; 3], CliError> {
    if v.len() != dim {
        return Err(CliError::input(format!("{what} has {} entries, expected {dim}", v.len())));
    }
    let mut out = [0.0; 3];
    out[..dim].copy_from_slice(v);
    Ok(out)
}

/// Parses `N` or `N,M`. A single value on a two-parameter chart uses `M = N/2`.
pub fn parse_resolution(text: &str) -> Result<(usize, Option<usize>), String> {
    let parse = |s: &str| -> Result<usize, String> {
        let v: usize = s.trim().parse().map_err(|_| format!("'{s}' is not a positive integer"))?;
        if !(8..=1024).contains(&v) {
            return Err(format!("resolution {v} outside [8, 1024]"));
        }
        Ok(v)
    };
    match text.split_once(',') {
        Some((a, b)) => Ok((parse(a)?, Some(parse(b)?))),
        None => Ok((parse(text)?, None)),
    }
}

pub fn resolve_resolution(chart: &SurfaceChart, res: Option<(usize, Option<usize>)>) -> Resolution {
    let default = chart.default_resolution();
    match res {
        None => default,
        Some((n, m)) => {
            let second = m.unwrap_or_else(|| (n / 2).max(8));
            Resolution::new(n, second)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolution_parsing() {
        assert_eq!(parse_resolution("64,32"), Ok((64, Some(32))));
        assert_eq!(parse_resolution("128"), Ok((128, None)));
        assert!(parse_resolution("4").is_err());
        assert!(parse_resolution("2048").is_err());
        assert!(parse_resolution("x").is_err());
    }

    #[test]
    fn body_spec_families() {
        let spec: BodySpec =
            serde_json::from_str(r#"{"dimension": 3, "family": "ellipsoid", "Q": [[4,0,0],[0,1,0],[0,0,1]]}"#).unwrap();
        assert!(spec.build().is_ok());
        let spec: BodySpec = serde_json::from_str(r#"{"family": "ball"}"#).unwrap();
        assert!(spec.build().is_err());
        assert!(serde_json::from_str::<BodySpec>(r#"{"family": "ball", "radius": 1, "colour": 2}"#).is_err());
    }

    #[test]
    fn variation_file_shapes() {
        let v: VariationFile = serde_json::from_str(
            r#"{"variation": "birkhoff_normal", "field": {"kind": "random", "seed": 7, "degree": 3}, "orders": [1, 2]}"#,
        )
        .unwrap();
        assert!(v.validate().is_ok());
        let v: VariationFile =
            serde_json::from_str(r#"{"variation": "birkhoff_normal", "field": {"kind": "translation_component", "v": [1,0,0]}}"#)
                .unwrap();
        assert_eq!(v.orders, vec![1, 2]);
        let v: VariationFile = serde_json::from_str(r#"{"variation": "scaling", "orders": [3]}"#).unwrap();
        assert!(v.validate().is_err());
    }
}
