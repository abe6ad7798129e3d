use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use wulff_core::{Frames, SampledSurface};

use crate::CliError;

/// Default tolerances, all multiplied by `--tol-scale`.
#[derive(Clone, Debug, Serialize)]
pub struct Tolerances {
    pub scale: f64,
    pub first_variation: f64,
    pub translation_first_variation: f64,
    pub scaling_first_variation: f64,
    pub second_variation_fd: f64,
    pub second_variation_forms: f64,
    pub minkowski_identity: f64,
    pub drho_identity: f64,
    pub laplacian_rho: f64,
    pub cmc_spread: f64,
    pub isoperimetric: f64,
    pub umbilic: f64,
    pub normal_orthogonality: f64,
    pub dupin_symmetry: f64,
    pub self_adjointness: f64,
    pub curvature_reconstruction: f64,
    pub lemma_b_h: f64,
    pub laplacian_symmetry: f64,
    pub divergence_theorem: f64,
    pub certificate_deficit: f64,
    pub kernel: f64,
    pub spectrum_nonnegativity: f64,
    pub eigen_residual: f64,
    pub subspace_angle: f64,
}

impl Tolerances {
    pub fn scaled(s: f64) -> Self {
        Tolerances {
            scale: s,
            first_variation: 1e-6 * s,
            translation_first_variation: 1e-8 * s,
            scaling_first_variation: 1e-8 * s,
            second_variation_fd: 1e-5 * s,
            second_variation_forms: 1e-6 * s,
            minkowski_identity: 1e-8 * s,
            drho_identity: 1e-6 * s,
            laplacian_rho: 1e-6 * s,
            cmc_spread: 1e-6 * s,
            isoperimetric: 1e-8 * s,
            umbilic: 1e-8 * s,
            normal_orthogonality: 1e-10 * s,
            dupin_symmetry: 1e-9 * s,
            self_adjointness: 1e-8 * s,
            curvature_reconstruction: 1e-8 * s,
            lemma_b_h: 1e-10 * s,
            laplacian_symmetry: 1e-7 * s,
            divergence_theorem: 1e-8 * s,
            certificate_deficit: 1e-9 * s,
            kernel: 1e-5 * s,
            spectrum_nonnegativity: 1e-6 * s,
            eigen_residual: 1e-8 * s,
            subspace_angle: 1e-2 * s,
        }
    }
}

pub struct OutDir(PathBuf);

impl OutDir {
    pub fn create(path: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(path).map_err(|e| CliError::input(format!("cannot create {}: {e}", path.display())))?;
        Ok(OutDir(path.to_path_buf()))
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::runtime(e.to_string()))?;
        text.push('\n');
        let p = self.path(name);
        fs::write(&p, text).map_err(|e| CliError::input(format!("cannot write {}: {e}", p.display())))
    }

    pub fn write_csv(&self, name: &str, header: &[String], rows: &[Vec<f64>]) -> Result<(), CliError> {
        let p = self.path(name);
        let io_err = |e: csv::Error| CliError::input(format!("cannot write {}: {e}", p.display()));
        let mut w = csv::Writer::from_path(&p).map_err(io_err)?;
        w.write_record(header).map_err(io_err)?;
        for row in rows {
            w.write_record(row.iter().map(|v| v.to_string())).map_err(io_err)?;
        }
        w.flush().map_err(|e| CliError::input(format!("cannot write {}: {e}", p.display())))
    }
}

pub fn frames_table(surf: &SampledSurface, frames: &Frames) -> (Vec<String>, Vec<Vec<f64>>) {
    let m = frames.tangent_dimension();
    let mut header: Vec<String> = [
        "node", "p0", "p1", "x", "y", "z", "xi_x", "xi_y", "xi_z", "eta_x", "eta_y", "eta_z",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for i in 1..=m {
        header.push(format!("lambda_{i}"));
    }
    header.extend(["H_m", "K_m", "B_m_sq", "rho"].iter().map(|s| s.to_string()));
    let rows = frames
        .nodes
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let mut row = vec![k as f64, surf.params[k][0], surf.params[k][1]];
            row.extend(p.position);
            row.extend(p.xi);
            row.extend(p.eta);
            row.extend(&p.lambdas[..m]);
            row.extend([p.h_m, p.k_m, p.b_m_sq, p.rho]);
            row
        })
        .collect();
    (header, rows)
}
