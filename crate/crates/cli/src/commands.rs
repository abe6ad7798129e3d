use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use wulff_core::body::direction_grid;
use wulff_core::frames::{check_drho_identity, FRAME_CONSISTENCY_TOLERANCE};
use wulff_core::functionals::{functional_report, BodyVolume};
use wulff_core::variation::{
    cmc_stability_certificate, fd_functional_derivative, first_variation_formula, first_variation_general,
    laplacian_rho_check, minkowski_identity_residual, minkowski_laplacian, second_variation_divergence_form,
    second_variation_gradient_form, stability_spectrum, subspace_angle, translation_modes, CMC_TOLERANCE,
};
use wulff_core::{
    compute_frames, sample, ConvexBody, Error, Frames, FunctionalReport, Functional, LaplacianRhoCheck,
    Resolution, SampledSurface, ScalarField, SurfaceChart, VariationKind, VariationSpec, VectorField,
};

use crate::input::{load_json, resolve_resolution, vec3, BodySpec, FieldSpec, SurfaceSpec, VariationFile};
use crate::output::{frames_table, OutDir, Tolerances};
use crate::{CliError, Common, WithSurface};

/// Number of seeded fields used by the identity suite.
const SUITE_FIELDS: u64 = 5;
const FIELD_DEGREE: u32 = 3;
const BODY_GRID: usize = 32;

fn core_err(e: Error) -> CliError {
    match e {
        Error::InvalidParameter(_) | Error::InvalidDirection { .. } | Error::Unsupported(_) => {
            CliError::input(e.to_string())
        }
        _ => CliError::check(e.to_string()),
    }
}

/// `|a − b| / max(|a|, |b|, floor)`.
fn rel(a: f64, b: f64, floor: f64) -> f64 {
    let d = a.abs().max(b.abs()).max(floor);
    if d == 0.0 {
        0.0
    } else {
        (a - b).abs() / d
    }
}

struct Loaded {
    body_spec: BodySpec,
    body: ConvexBody,
    tol: Tolerances,
}

fn load_body(c: &Common) -> Result<Loaded, CliError> {
    if !(c.tol_scale > 0.0 && c.tol_scale.is_finite()) {
        return Err(CliError::input(format!("--tol-scale must be positive, got {}", c.tol_scale)));
    }
    let body_spec: BodySpec = load_json(&c.body)?;
    let body = body_spec.build()?;
    Ok(Loaded {
        body_spec,
        body,
        tol: Tolerances::scaled(c.tol_scale),
    })
}

struct Pair {
    loaded: Loaded,
    surface_spec: SurfaceSpec,
    chart: SurfaceChart,
    surf: SampledSurface,
}

fn load_pair(a: &WithSurface) -> Result<Pair, CliError> {
    let loaded = load_body(&a.common)?;
    let surface_spec: SurfaceSpec = load_json(&a.surface)?;
    let chart = surface_spec.build(&loaded.body)?;
    let res = resolve_resolution(&chart, a.common.res.map(|r| (r.0, r.1)));
    let surf = sample(&chart, res).map_err(core_err)?;
    Ok(Pair {
        loaded,
        surface_spec,
        chart,
        surf,
    })
}

fn inputs(p: &Pair, seed: u64) -> Value {
    let r = p.surf.resolution();
    json!({
        "body": p.loaded.body_spec,
        "surface": p.surface_spec,
        "resolution": [r.periodic, r.second],
        "seed": seed,
    })
}

fn functional_json(r: &FunctionalReport) -> Value {
    json!({
        "area_euclidean": r.area_euclidean,
        "area_minkowski": r.area_minkowski,
        "volume": r.volume,
        "body_volume": r.body_volume,
        "mixed_volume": r.mixed_volume,
        "isoperimetric_ratio": r.isoperimetric_ratio,
        "j_m": r.j_m,
        "h_m_ref": r.h_m_ref,
    })
}

fn mean_h(frames: &Frames, surf: &SampledSurface) -> f64 {
    let h: Vec<f64> = frames.nodes.iter().map(|p| p.h_m).collect();
    frames.integrate_domega(surf, &h) / frames.minkowski_area(surf)
}

/// `∫ B_m² f² dω`, the size of the potential term; floors second-variation
/// comparisons when the exact value is zero.
fn second_variation_scale(frames: &Frames, surf: &SampledSurface, f: &ScalarField) -> f64 {
    let v: Vec<f64> = f.values().iter().zip(&frames.nodes).map(|(x, p)| p.b_m_sq * x * x).collect();
    frames.integrate_domega(surf, &v)
}

fn max_of(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(0.0, |a: f64, b| if b.is_nan() || b > a { b } else { a })
}

pub fn body_info(c: &Common) -> Result<bool, CliError> {
    let l = load_body(c)?;
    let grid = c.res.map(|r| r.0).unwrap_or(BODY_GRID);
    let report = l.body.validation_report(grid).map_err(core_err)?;
    let dim = l.body.dimension();
    let out = OutDir::create(&c.out)?;

    let mut header: Vec<String> = vec!["node".into()];
    let axes = ["x", "y", "z"];
    header.extend(axes[..dim].iter().map(|a| format!("nu_{a}")));
    header.extend(axes[..dim].iter().map(|a| format!("u_{a}")));
    header.push("h".into());
    let mut rows = Vec::new();
    for (k, nu) in direction_grid(dim, grid).iter().enumerate() {
        let u = l.body.inverse_gauss(nu).map_err(core_err)?;
        let h = l.body.support_value(nu).map_err(core_err)?;
        let mut row = vec![k as f64];
        row.extend(&nu[..dim]);
        row.extend(&u[..dim]);
        row.push(h);
        rows.push(row);
    }
    out.write_csv("wulff.csv", &header, &rows)?;

    let failure = report.failure.as_ref().map(|f| {
        json!({"node": f.node, "direction": &f.direction[..dim], "reason": f.reason})
    });
    out.write_json(
        "report.json",
        &json!({
            "inputs": {"body": l.body_spec, "grid": grid},
            "passed": report.passed(),
            "dimension": report.dimension,
            "nodes": report.nodes,
            "min_support": report.min_support,
            "min_hessian_eigenvalue": report.min_hessian_eigenvalue,
            "min_eigenvalue_node": report.min_eigenvalue_node,
            "max_euler_residual": report.max_euler_residual,
            "max_symmetry_residual": report.max_symmetry_residual,
            "max_gauge_residual": report.max_gauge_residual,
            "failure": failure,
            "closed_form_volume": l.body.closed_form_volume(),
            "tolerances": l.tol,
        }),
    )?;

    println!("body: {} (n = {dim}), {} directions", l.body_spec.family, report.nodes);
    println!("  min support            {:.12e}", report.min_support);
    println!("  min Hessian eigenvalue {:.12e} at node {}", report.min_hessian_eigenvalue, report.min_eigenvalue_node);
    println!("  max Euler residual     {:.3e}", report.max_euler_residual);
    println!("  max symmetry residual  {:.3e}", report.max_symmetry_residual);
    println!("  max gauge residual     {:.3e}", report.max_gauge_residual);
    match &report.failure {
        None => println!("  validation PASS"),
        Some(f) => {
            println!("  validation FAIL at node {} {:?}: {}", f.node, &f.direction[..dim], f.reason);
            eprintln!("body validation failed at node {}: {}", f.node, f.reason);
        }
    }
    Ok(report.passed())
}

pub fn surface_report(a: &WithSurface) -> Result<bool, CliError> {
    let p = load_pair(a)?;
    let frames = compute_frames(&p.loaded.body, &p.surf).map_err(core_err)?;
    let m = frames.tangent_dimension();
    let mut lambda_min = vec![f64::INFINITY; m];
    let mut lambda_max = vec![f64::NEG_INFINITY; m];
    for node in &frames.nodes {
        for i in 0..m {
            lambda_min[i] = lambda_min[i].min(node.lambdas[i]);
            lambda_max[i] = lambda_max[i].max(node.lambdas[i]);
        }
    }
    let (h_min, h_max) = frames
        .nodes
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), f| (lo.min(f.h_m), hi.max(f.h_m)));
    let umb = frames.umbilicity_report(p.loaded.tol.umbilic);
    let h_ref = mean_h(&frames, &p.surf);
    let mut cache = BodyVolume::new();
    let fr = functional_report(&p.loaded.body, &p.surf, &frames, Some(h_ref), &mut cache).map_err(core_err)?;

    // quadrature error estimate from a half-resolution rerun
    let res = p.surf.resolution();
    let coarse_res = Resolution::new((res.periodic / 2).max(8), (res.second / 2).max(8));
    let coarse = sample(&p.chart, coarse_res).map_err(core_err)?;
    let coarse_frames = compute_frames(&p.loaded.body, &coarse).map_err(core_err)?;
    let cr = functional_report(&p.loaded.body, &coarse, &coarse_frames, None, &mut BodyVolume::new())
        .map_err(core_err)?;
    let quad = json!({
        "coarse_resolution": [coarse_res.periodic, coarse_res.second],
        "area_minkowski": (fr.area_minkowski - cr.area_minkowski).abs(),
        "volume": (fr.volume - cr.volume).abs(),
        "area_euclidean": (fr.area_euclidean - cr.area_euclidean).abs(),
    });

    let out = OutDir::create(&a.common.out)?;
    let (header, rows) = frames_table(&p.surf, &frames);
    out.write_csv("frames.csv", &header, &rows)?;
    out.write_json(
        "report.json",
        &json!({
            "inputs": inputs(&p, a.common.seed),
            "nodes": frames.len(),
            "lambda_min": lambda_min,
            "lambda_max": lambda_max,
            "h_m_min": h_min,
            "h_m_max": h_max,
            "h_m_spread": h_max - h_min,
            "h_m_mean": h_ref,
            "umbilic_fraction": umb.umbilic_fraction,
            "umbilic_nodes": umb.umbilic_nodes,
            "max_curvature_spread": umb.max_spread,
            "max_normal_residual": max_of(frames.nodes.iter().map(|f| f.normal_residual)),
            "max_self_adjoint_residual": max_of(frames.nodes.iter().map(|f| f.self_adjoint_residual)),
            "functionals": functional_json(&fr),
            "quadrature_error_estimate": quad,
            "tolerances": p.loaded.tol,
        }),
    )?;

    println!("surface: {} at {}x{}, {} nodes", p.surface_spec.kind, res.periodic, res.second, frames.len());
    for i in 0..m {
        println!("  lambda_{}  [{:.10e}, {:.10e}]", i + 1, lambda_min[i], lambda_max[i]);
    }
    println!("  H_m       [{h_min:.10e}, {h_max:.10e}] spread {:.3e}", h_max - h_min);
    println!("  umbilic fraction {:.4}", umb.umbilic_fraction);
    println!("  A_m {:.12e}  V {:.12e}  ratio {:.12e}", fr.area_minkowski, fr.volume, fr.isoperimetric_ratio);
    Ok(true)
}

/// Isoperimetric verdict: `(applicable, passed, detail)`.
fn isoperimetric_verdict(p: &Pair, fr: &FunctionalReport, tol: f64) -> (bool, bool, Value) {
    if !p.chart.is_embedded() {
        return (false, true, json!({"applicable": false, "reason": "surface is not embedded"}));
    }
    let ratio = fr.isoperimetric_ratio;
    let minkowski = p.chart.as_minkowski_sphere_of(&p.loaded.body).is_some();
    let equality = (ratio - 1.0).abs() <= tol;
    let inequality = ratio >= 1.0 - tol;
    let passed = inequality && (!minkowski || equality);
    (
        true,
        passed,
        json!({
            "applicable": true,
            "ratio": ratio,
            "inequality_holds": inequality,
            "equality": equality,
            "is_minkowski_sphere": minkowski,
            "passed": passed,
        }),
    )
}

pub fn functionals(a: &WithSurface) -> Result<bool, CliError> {
    let p = load_pair(a)?;
    let frames = compute_frames(&p.loaded.body, &p.surf).map_err(core_err)?;
    let h_ref = mean_h(&frames, &p.surf);
    let fr = functional_report(&p.loaded.body, &p.surf, &frames, Some(h_ref), &mut BodyVolume::new())
        .map_err(core_err)?;
    let (_, passed, iso) = isoperimetric_verdict(&p, &fr, p.loaded.tol.isoperimetric);
    let out = OutDir::create(&a.common.out)?;
    out.write_json(
        "report.json",
        &json!({
            "inputs": inputs(&p, a.common.seed),
            "functionals": functional_json(&fr),
            "isoperimetric": iso,
            "tolerances": p.loaded.tol,
        }),
    )?;
    println!("area (Euclidean)  {:.12e}", fr.area_euclidean);
    println!("area (Minkowski)  {:.12e}", fr.area_minkowski);
    println!("volume            {:.12e}", fr.volume);
    println!("vol(B)            {:.12e}", fr.body_volume);
    println!("mixed volume      {:.12e}", fr.mixed_volume);
    println!("isoperimetric     {:.12e} {}", fr.isoperimetric_ratio, if passed { "PASS" } else { "FAIL" });
    println!("J_m (H_ref {:.6e})  {:.12e}", h_ref, fr.j_m.unwrap_or(f64::NAN));
    Ok(passed)
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
enum Status {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Clone, Debug, Serialize)]
struct Row {
    check: String,
    status: Status,
    value: Option<f64>,
    tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

#[derive(Default)]
struct Table(Vec<Row>);

impl Table {
    fn at_most(&mut self, check: &str, value: f64, tol: f64) {
        let status = if value <= tol { Status::Pass } else { Status::Fail };
        self.push(check, status, Some(value), Some(tol), None);
    }

    fn at_least(&mut self, check: &str, value: f64, bound: f64, note: &str) {
        let status = if value >= bound { Status::Pass } else { Status::Fail };
        self.push(check, status, Some(value), Some(bound), Some(note.to_string()));
    }

    fn not_applicable(&mut self, check: &str, value: Option<f64>, reason: &str) {
        self.push(check, Status::NotApplicable, value, None, Some(reason.to_string()));
    }

    fn push(&mut self, check: &str, status: Status, value: Option<f64>, tolerance: Option<f64>, note: Option<String>) {
        self.0.push(Row {
            check: check.to_string(),
            status,
            value,
            tolerance,
            note,
        });
    }

    fn passed(&self) -> bool {
        !self.0.iter().any(|r| matches!(r.status, Status::Fail))
    }

    fn print(&self) {
        println!("{:<34} {:<15} {:>12} {:>10}", "check", "status", "value", "tolerance");
        for r in &self.0 {
            let status = match r.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::NotApplicable => "not applicable",
            };
            let v = r.value.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "-".into());
            let t = r.tolerance.map(|v| format!("{v:.1e}")).unwrap_or_else(|| "-".into());
            println!("{:<34} {:<15} {:>12} {:>10}", r.check, status, v, t);
        }
    }
}

fn seeded_fields(surf: &SampledSurface, seed: u64) -> Vec<ScalarField> {
    (0..SUITE_FIELDS)
        .map(|i| ScalarField::random(surf, seed.wrapping_add(i), FIELD_DEGREE))
        .collect()
}

fn write_suite(out: &OutDir, p: &Pair, seed: u64, table: &Table, frames: Option<&Frames>) -> Result<(), CliError> {
    if let Some(frames) = frames {
        let (header, rows) = frames_table(&p.surf, frames);
        out.write_csv("frames.csv", &header, &rows)?;
    }
    out.write_json(
        "report.json",
        &json!({
            "inputs": inputs(p, seed),
            "passed": table.passed(),
            "checks": table.0,
            "tolerances": p.loaded.tol,
        }),
    )
}

pub fn identity_suite(a: &WithSurface) -> Result<bool, CliError> {
    let p = load_pair(a)?;
    let tol = &p.loaded.tol;
    let seed = a.common.seed;
    let (body, surf) = (&p.loaded.body, &p.surf);
    let out = OutDir::create(&a.common.out)?;
    let mut t = Table::default();

    let br = body.validation_report(BODY_GRID).map_err(core_err)?;
    match &br.failure {
        None => t.at_least("body_validation", br.min_hessian_eigenvalue, 0.0, "min Hessian eigenvalue"),
        Some(f) => t.push("body_validation", Status::Fail, Some(br.min_hessian_eigenvalue), None, Some(f.reason.clone())),
    }

    let frames = match compute_frames(body, surf) {
        Ok(f) => f,
        Err(e @ Error::FrameConsistency { .. }) => {
            let value = match e {
                Error::FrameConsistency { relative_residual, .. } => Some(relative_residual),
                _ => None,
            };
            t.push(
                "frame_consistency",
                Status::Fail,
                value,
                Some(FRAME_CONSISTENCY_TOLERANCE),
                Some(format!("{e}; remaining checks skipped")),
            );
            write_suite(&out, &p, seed, &t, None)?;
            t.print();
            eprintln!("frame consistency failure: {e}");
            return Ok(false);
        }
        Err(e) => return Err(core_err(e)),
    };
    let m = frames.tangent_dimension();
    let n = m + 1;

    t.at_most(
        "frame_consistency",
        max_of(frames.nodes.iter().map(|f| f.normal_residual)),
        FRAME_CONSISTENCY_TOLERANCE,
    );
    let orth = max_of(frames.nodes.iter().enumerate().flat_map(|(k, f)| {
        let xi = f.xi;
        surf.first_partials[k][..m].iter().map(move |v| {
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            (v[0] * xi[0] + v[1] * xi[1] + v[2] * xi[2]).abs() / norm
        }).collect::<Vec<_>>()
    }));
    t.at_most("normal_orthogonality", orth, tol.normal_orthogonality);
    let dupin_min = frames
        .nodes
        .iter()
        .map(|f| min_sym_eigenvalue(m, &f.dupin_gram))
        .fold(f64::INFINITY, f64::min);
    t.at_least("dupin_positive_definite", dupin_min, 0.0, "min eigenvalue of the Dupin metric");
    t.at_most(
        "shape_operator_self_adjoint",
        max_of(frames.nodes.iter().map(|f| f.self_adjoint_residual)),
        tol.self_adjointness,
    );
    t.at_most(
        "curvature_reconstruction",
        max_of(frames.nodes.iter().map(|f| f.reconstruction_residual(m))),
        tol.curvature_reconstruction,
    );
    let b_scale = max_of(frames.nodes.iter().map(|f| f.b_m_sq)).max(f64::MIN_POSITIVE);
    t.at_most("b_m_sq_bound", frames.lemma_b_h_violation().max(0.0) / b_scale, tol.lemma_b_h);

    let area = frames.minkowski_area(surf);
    let fields = seeded_fields(surf, seed);
    let mut worst: f64 = 0.0;
    for f in &fields {
        let analytic = first_variation_formula(&frames, surf, f);
        let spec = VariationSpec::new(VariationKind::BirkhoffNormal(f.clone()));
        let fd = fd_functional_derivative(body, surf, &frames, &spec, Functional::AreaMinkowski, 1).map_err(core_err)?;
        worst = worst.max(rel(analytic, fd.value, 1e-8 * area));
    }
    t.at_most("first_variation_fd", worst, tol.first_variation);

    let mut worst: f64 = 0.0;
    for j in 0..n {
        let mut v = [0.0; 3];
        v[j] = 1.0;
        let d = first_variation_general(&frames, surf, &VectorField::constant(surf, &v));
        worst = worst.max(d.abs() / area);
    }
    t.at_most("first_variation_translation", worst, tol.translation_first_variation);
    let d = first_variation_general(&frames, surf, &VectorField::position(surf));
    t.at_most(
        "first_variation_position",
        rel(d, (n as f64 - 1.0) * area, 0.0),
        tol.scaling_first_variation,
    );

    let mut worst: f64 = 0.0;
    for f in &fields {
        let g = second_variation_gradient_form(&frames, surf, f).value;
        let dv = second_variation_divergence_form(&frames, surf, f).value;
        worst = worst.max(rel(g, dv, second_variation_scale(&frames, surf, f)));
    }
    t.at_most("second_variation_forms", worst, tol.second_variation_forms);

    let spread = frames.mean_curvature_spread();
    let cmc = spread <= CMC_TOLERANCE;
    if cmc {
        let h_ref = mean_h(&frames, surf);
        let mut worst: f64 = 0.0;
        for f in &fields {
            let (f0, _) = f.mean_zero(&frames, surf);
            let g = second_variation_gradient_form(&frames, surf, &f0).value;
            let dv = second_variation_divergence_form(&frames, surf, &f0).value;
            let floor = second_variation_scale(&frames, surf, &f0);
            let spec = VariationSpec::new(VariationKind::BirkhoffNormal(f0));
            let fd = fd_functional_derivative(body, surf, &frames, &spec, Functional::Jm { h_m_ref: h_ref }, 2)
                .map_err(core_err)?
                .value;
            worst = worst.max(rel(g, fd, floor)).max(rel(dv, fd, floor));
        }
        t.at_most("second_variation_fd", worst, tol.second_variation_fd);
    } else {
        t.not_applicable("second_variation_fd", Some(spread), "H_m is not constant");
    }

    t.at_most("minkowski_identity", minkowski_identity_residual(&frames, surf), tol.minkowski_identity);
    t.at_most("drho_identity", check_drho_identity(&frames, surf), tol.drho_identity);
    match laplacian_rho_check(&frames, surf) {
        LaplacianRhoCheck::Residual { max_residual, .. } => {
            t.at_most("laplacian_rho", max_residual, tol.laplacian_rho)
        }
        LaplacianRhoCheck::NotApplicable { h_m_spread } => {
            t.not_applicable("laplacian_rho", Some(h_m_spread), "H_m is not constant")
        }
    }

    let (f, g) = (&fields[0], &fields[1]);
    let lf = minkowski_laplacian(&frames, surf, f).values();
    let lg = minkowski_laplacian(&frames, surf, g).values();
    let (fv, gv) = (f.values(), g.values());
    let prod = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x * y).collect() };
    let gl = frames.integrate_domega(surf, &prod(&gv, &lf));
    let fl = frames.integrate_domega(surf, &prod(&fv, &lg));
    t.at_most("laplacian_symmetry", rel(gl, fl, 1e-12 * area), tol.laplacian_symmetry);
    let abs: Vec<f64> = lf.iter().map(|v| v.abs()).collect();
    let total = frames.integrate_domega(surf, &lf);
    let norm = frames.integrate_domega(surf, &abs).max(f64::MIN_POSITIVE);
    t.at_most("divergence_theorem", total.abs() / norm, tol.divergence_theorem);

    let fr = functional_report(body, surf, &frames, None, &mut BodyVolume::new()).map_err(core_err)?;
    let (applicable, passed, _) = isoperimetric_verdict(&p, &fr, tol.isoperimetric);
    if !applicable {
        t.not_applicable("isoperimetric", None, "surface is not embedded");
    } else {
        let status = if passed { Status::Pass } else { Status::Fail };
        let note = if p.chart.as_minkowski_sphere_of(body).is_some() {
            "ratio - 1, equality expected"
        } else {
            "ratio - 1"
        };
        t.push(
            "isoperimetric",
            status,
            Some(fr.isoperimetric_ratio - 1.0),
            Some(tol.isoperimetric),
            Some(note.to_string()),
        );
    }

    let cert = cmc_stability_certificate(&frames, surf);
    if cmc {
        let status = if cert.deficit.abs() <= tol.certificate_deficit {
            Status::Pass
        } else {
            Status::Fail
        };
        t.push(
            "cmc_certificate",
            status,
            Some(cert.deficit),
            Some(tol.certificate_deficit),
            Some("deficit vanishes on a CMC surface".to_string()),
        );
    } else {
        t.at_least("cmc_certificate", cert.deficit, -tol.certificate_deficit, "deficit nonnegative");
    }

    write_suite(&out, &p, seed, &t, Some(&frames))?;
    t.print();
    Ok(t.passed())
}

fn min_sym_eigenvalue(m: usize, a: &[[f64; 2]; 2]) -> f64 {
    if m == 1 {
        return a[0][0];
    }
    let tr = 0.5 * (a[0][0] + a[1][1]);
    let off = 0.5 * (a[0][1] + a[1][0]);
    let d = (0.25 * (a[0][0] - a[1][1]).powi(2) + off * off).sqrt();
    tr - d
}

fn field_from_spec(spec: &FieldSpec, frames: &Frames, surf: &SampledSurface) -> Result<ScalarField, CliError> {
    Ok(match spec {
        FieldSpec::Random { seed, degree } => ScalarField::random(surf, *seed, *degree),
        FieldSpec::TranslationComponent { v } => {
            ScalarField::translation_component(frames, &vec3(v, surf.dimension(), "field.v")?)
        }
        FieldSpec::Constant { c } => ScalarField::constant(surf, *c),
    })
}

pub fn variation_check(a: &WithSurface, path: &Path) -> Result<bool, CliError> {
    let p = load_pair(a)?;
    let var: VariationFile = load_json(path)?;
    var.validate()?;
    let tol = &p.loaded.tol;
    let (body, surf) = (&p.loaded.body, &p.surf);
    let frames = compute_frames(body, surf).map_err(core_err)?;
    let n = surf.dimension() as f64;
    let area = frames.minkowski_area(surf);
    let volume = wulff_core::functionals::volume(&frames, surf);
    let mut t = Table::default();
    let mut extra = serde_json::Map::new();

    let field = match &var.field {
        Some(fs) => Some(field_from_spec(fs, &frames, surf)?),
        None => None,
    };
    let kind = match var.variation.as_str() {
        "birkhoff_normal" => VariationKind::BirkhoffNormal(field.clone().expect("validated")),
        "scaling" => VariationKind::Scaling,
        _ => VariationKind::Translation(vec3(var.v.as_ref().expect("validated"), surf.dimension(), "v")?),
    };
    let make_spec = |k: VariationKind| {
        let s = VariationSpec::new(k);
        match var.base_step {
            Some(h) => s.with_base_step(h),
            None => s,
        }
    };
    let fd = |k: VariationKind, which: Functional, order: u32| {
        fd_functional_derivative(body, surf, &frames, &make_spec(k), which, order).map_err(core_err)
    };

    if var.orders.contains(&1) {
        let spec = make_spec(kind.clone());
        let w = spec.velocity(&frames, surf);
        let (a_analytic, v_analytic) = match &kind {
            VariationKind::BirkhoffNormal(f) => {
                let v = frames.integrate_domega(surf, &f.values());
                (first_variation_formula(&frames, surf, f), v)
            }
            _ => {
                let wv = w.values();
                let vals: Vec<f64> = frames
                    .nodes
                    .iter()
                    .zip(&wv)
                    .map(|(f, w)| f.xi[0] * w[0] + f.xi[1] * w[1] + f.xi[2] * w[2])
                    .collect();
                (first_variation_general(&frames, surf, &w), surf.integrate(&vals))
            }
        };
        // floors: integrals of the absolute integrands, so vanishing
        // derivatives are compared on their natural scale
        let normal: Vec<f64> = frames
            .nodes
            .iter()
            .zip(w.values())
            .map(|(f, w)| (f.xi[0] * w[0] + f.xi[1] * w[1] + f.xi[2] * w[2]).abs())
            .collect();
        let v_floor = surf.integrate(&normal);
        let weighted: Vec<f64> = normal.iter().zip(&frames.nodes).map(|(x, f)| (n - 1.0) * (f.h_m * x).abs()).collect();
        let a_floor = surf.integrate(&weighted);
        let fa = fd(kind.clone(), Functional::AreaMinkowski, 1)?;
        let fv = fd(kind.clone(), Functional::Volume, 1)?;
        t.at_most("area_first_fd", rel(a_analytic, fa.value, a_floor), tol.first_variation);
        t.at_most("volume_first_fd", rel(v_analytic, fv.value, v_floor), tol.first_variation);
        match &kind {
            VariationKind::Scaling => {
                t.at_most("area_first_exact", rel(a_analytic, (n - 1.0) * area, 0.0), tol.scaling_first_variation);
                t.at_most("volume_first_exact", rel(v_analytic, n * volume, 0.0), tol.scaling_first_variation);
            }
            VariationKind::Translation(_) => {
                t.at_most("area_first_exact", a_analytic.abs() / area, tol.translation_first_variation);
                t.at_most("volume_first_exact", v_analytic.abs() / area, tol.translation_first_variation);
            }
            _ => {}
        }
        extra.insert(
            "first_order".into(),
            json!({
                "area_analytic": a_analytic,
                "area_fd": fa.value,
                "area_fd_error_estimate": fa.error_estimate,
                "volume_analytic": v_analytic,
                "volume_fd": fv.value,
                "volume_fd_error_estimate": fv.error_estimate,
            }),
        );
    }

    if var.orders.contains(&2) {
        match &kind {
            VariationKind::BirkhoffNormal(f) => {
                let (f0, mean) = f.mean_zero(&frames, surf);
                let g = second_variation_gradient_form(&frames, surf, &f0).value;
                let dv = second_variation_divergence_form(&frames, surf, &f0).value;
                let h_ref = mean_h(&frames, surf);
                let spread = frames.mean_curvature_spread();
                let floor = second_variation_scale(&frames, surf, &f0);
                let j = fd(VariationKind::BirkhoffNormal(f0), Functional::Jm { h_m_ref: h_ref }, 2)?;
                // a field that is constant up to round-off has no mean-zero part
                let degenerate = floor <= 1e-20 * second_variation_scale(&frames, surf, f).max(f64::MIN_POSITIVE);
                if degenerate {
                    for check in ["second_forms", "second_gradient_fd", "second_divergence_fd"] {
                        t.not_applicable(check, Some(floor), "mean-zero part of the field vanishes");
                    }
                } else if spread <= CMC_TOLERANCE {
                    t.at_most("second_forms", rel(g, dv, floor), tol.second_variation_forms);
                    t.at_most("second_gradient_fd", rel(g, j.value, floor), tol.second_variation_fd);
                    t.at_most("second_divergence_fd", rel(dv, j.value, floor), tol.second_variation_fd);
                } else {
                    t.at_most("second_forms", rel(g, dv, floor), tol.second_variation_forms);
                    t.not_applicable("second_gradient_fd", Some(spread), "H_m is not constant");
                    t.not_applicable("second_divergence_fd", Some(spread), "H_m is not constant");
                }
                extra.insert(
                    "second_order".into(),
                    json!({
                        "mean_removed": mean,
                        "h_m_ref": h_ref,
                        "gradient_form": g,
                        "divergence_form": dv,
                        "j_m_fd": j.value,
                        "j_m_fd_error_estimate": j.error_estimate,
                    }),
                );
            }
            _ => {
                let fa = fd(kind.clone(), Functional::AreaMinkowski, 2)?;
                let fv = fd(kind.clone(), Functional::Volume, 2)?;
                let (ea, ev) = match &kind {
                    VariationKind::Scaling => ((n - 1.0) * (n - 2.0) * area, n * (n - 1.0) * volume),
                    _ => (0.0, 0.0),
                };
                t.at_most("area_second_fd", rel(fa.value, ea, area), tol.second_variation_fd);
                t.at_most("volume_second_fd", rel(fv.value, ev, volume.abs()), tol.second_variation_fd);
                extra.insert(
                    "second_order".into(),
                    json!({
                        "area_fd": fa.value,
                        "area_exact": ea,
                        "volume_fd": fv.value,
                        "volume_exact": ev,
                    }),
                );
            }
        }
    }

    let out = OutDir::create(&a.common.out)?;
    out.write_json(
        "report.json",
        &json!({
            "inputs": inputs(&p, a.common.seed),
            "variation": var,
            "passed": t.passed(),
            "checks": t.0,
            "values": extra,
            "tolerances": tol,
        }),
    )?;
    t.print();
    Ok(t.passed())
}

pub fn stability(a: &WithSurface, basis: usize) -> Result<bool, CliError> {
    let p = load_pair(a)?;
    let (body, surf) = (&p.loaded.body, &p.surf);
    let n = surf.dimension();
    if basis < n + 2 {
        return Err(CliError::check(format!(
            "basis of size {basis} is under-resolved for n = {n}; use --basis {} or more",
            n + 2
        )));
    }
    let frames = compute_frames(body, surf).map_err(core_err)?;
    let spec = match stability_spectrum(&frames, surf, basis) {
        Ok(s) => s,
        Err(e @ Error::BasisDegeneracy { .. }) => {
            return Err(CliError::check(format!("{e}; try a smaller --basis or a finer --res")))
        }
        Err(e) => return Err(core_err(e)),
    };
    let tol = &p.loaded.tol;
    let zero = spec.near_zero(tol.kernel);
    let min_ratio = spec.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min) / spec.q_norm;
    let minkowski = p.chart.as_minkowski_sphere_of(body).is_some();
    let nonneg = min_ratio >= -tol.spectrum_nonnegativity;
    let mut passed = true;
    let mut checks = serde_json::Map::new();
    checks.insert("nonnegative".into(), json!(nonneg));
    if minkowski {
        let kernel: Vec<Vec<f64>> = zero.iter().map(|&k| spec.eigenfunctions[k].clone()).collect();
        let angle = subspace_angle(&frames, surf, &kernel, &translation_modes(&frames));
        let kernel_ok = zero.len() == n;
        let angle_ok = angle <= tol.subspace_angle;
        checks.insert("kernel_dimension_ok".into(), json!(kernel_ok));
        checks.insert("subspace_angle".into(), json!(angle));
        checks.insert("subspace_angle_ok".into(), json!(angle_ok));
        passed = nonneg && kernel_ok && angle_ok;
    }
    checks.insert("passed".into(), json!(passed));

    let out = OutDir::create(&a.common.out)?;
    out.write_json(
        "spectrum.json",
        &json!({
            "inputs": inputs(&p, a.common.seed),
            "basis_size": basis,
            "basis": spec.basis,
            "eigenvalues": spec.eigenvalues,
            "mass_condition": spec.mass_condition,
            "eigen_residual": spec.residual,
            "q_norm": spec.q_norm,
            "near_zero": zero,
            "min_eigenvalue_over_q_norm": min_ratio,
            "is_minkowski_sphere": minkowski,
            "checks": checks,
            "tolerances": tol,
        }),
    )?;
    let mut header: Vec<String> = ["node", "p0", "p1", "x", "y", "z"].iter().map(|s| s.to_string()).collect();
    header.extend((0..spec.eigenfunctions.len()).map(|k| format!("mode_{k}")));
    let rows: Vec<Vec<f64>> = (0..surf.len())
        .map(|k| {
            let mut row = vec![k as f64, surf.params[k][0], surf.params[k][1]];
            row.extend(surf.positions[k]);
            row.extend(spec.eigenfunctions.iter().map(|e| e[k]));
            row
        })
        .collect();
    out.write_csv("eigenfunctions.csv", &header, &rows)?;

    println!("spectrum ({} functions, mass condition {:.3e}):", basis, spec.mass_condition);
    for (k, mu) in spec.eigenvalues.iter().enumerate() {
        let mark = if zero.contains(&k) { " *" } else { "" };
        println!("  {k:>3} {mu:>16.9e}{mark}");
    }
    println!("near-zero: {} (n = {n}), min mu/|Q| {:.3e}", zero.len(), min_ratio);
    if !passed {
        eprintln!("stability checks failed on a Minkowski sphere");
    }
    Ok(passed)
}
