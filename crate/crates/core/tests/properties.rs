use proptest::prelude::*;
use wulff_core::functionals::{functional_report, BodyVolume};
use wulff_core::variation::minkowski_laplacian;
use wulff_core::{
    compute_frames, make_radial_graph, sample, ConvexBody, RadialField, Resolution, SampledSurface, ScalarField,
    SurfaceChart,
};

const RES: Resolution = Resolution::new(24, 12);

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 24,
        ..ProptestConfig::default()
    }
}

fn rel(a: f64, b: f64) -> f64 {
    let d = a.abs().max(b.abs());
    if d == 0.0 {
        0.0
    } else {
        (a - b).abs() / d
    }
}

/// Symmetric positive definite `L Lᵀ + ½ I`.
fn ellipsoid_strategy() -> impl Strategy<Value = ConvexBody> {
    prop::array::uniform9(-1.0f64..1.0).prop_map(|l| {
        let mut q = vec![vec![0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                q[i][j] = (0..3).map(|k| l[3 * i + k] * l[3 * j + k]).sum::<f64>() + if i == j { 0.5 } else { 0.0 };
            }
        }
        ConvexBody::ellipsoid(3, &q).unwrap()
    })
}

fn perturbed_strategy() -> impl Strategy<Value = ConvexBody> {
    (0.5f64..2.0, 0.0f64..0.05, prop::collection::vec(-1.0f64..1.0, 15))
        .prop_filter_map("not positively curved", |(r, eps, c)| ConvexBody::perturbed_ball(3, r, eps, c).ok())
}

fn body_strategy() -> impl Strategy<Value = ConvexBody> {
    prop_oneof![ellipsoid_strategy(), perturbed_strategy()]
}

fn direction_strategy() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-1.0f64..1.0)
        .prop_filter("near zero", |v| v.iter().map(|x| x * x).sum::<f64>() > 0.01)
        .prop_map(|v| {
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            [v[0] / n, v[1] / n, v[2] / n]
        })
}

fn surface_strategy() -> impl Strategy<Value = SurfaceChart> {
    prop::collection::vec(-0.04f64..0.04, 15)
        .prop_map(|c| make_radial_graph(RadialField::new(1.0, c), 3).unwrap())
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn matvec(m: &[[f64; 3]; 3], v: &[f64; 3]) -> [f64; 3] {
    [dot(&m[0], v), dot(&m[1], v), dot(&m[2], v)]
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn support_is_positively_homogeneous(body in body_strategy(), nu in direction_strategy(), c in 0.1f64..10.0) {
        let (h, g, _) = body.derivatives(&nu).unwrap();
        let scaled = [c * nu[0], c * nu[1], c * nu[2]];
        let (hc, gc, _) = body.derivatives(&scaled).unwrap();
        prop_assert!(rel(hc, c * h) < 1e-13);
        for i in 0..3 {
            prop_assert!((gc[i] - g[i]).abs() < 1e-12 * (1.0 + g[i].abs()));
        }
        prop_assert!(rel(body.support_extended(&scaled), c * h) < 1e-13);
    }

    #[test]
    fn euler_relations(body in body_strategy(), nu in direction_strategy()) {
        let (h, g, hess) = body.derivatives(&nu).unwrap();
        prop_assert!((dot(&g, &nu) - h).abs() < 1e-12 * h);
        let hv = matvec(&hess, &nu);
        prop_assert!(hv.iter().all(|x| x.abs() < 1e-11));
        let u = body.inverse_gauss(&nu).unwrap();
        prop_assert!((dot(&u, &nu) - h).abs() < 1e-12 * h);
    }

    #[test]
    fn hessian_is_symmetric_and_matches_gradient_differences(
        body in body_strategy(),
        nu in direction_strategy(),
        w in direction_strategy(),
    ) {
        let (_, _, hess) = body.derivatives(&nu).unwrap();
        let scale = hess.iter().flatten().fold(0.0f64, |a, b| a.max(b.abs()));
        for i in 0..3 {
            for j in 0..3 {
                prop_assert!((hess[i][j] - hess[j][i]).abs() <= 1e-13 * scale.max(1.0));
            }
        }
        let e = 1e-4;
        let plus = [nu[0] + e * w[0], nu[1] + e * w[1], nu[2] + e * w[2]];
        let minus = [nu[0] - e * w[0], nu[1] - e * w[1], nu[2] - e * w[2]];
        let (_, gp, _) = body.derivatives(&plus).unwrap();
        let (_, gm, _) = body.derivatives(&minus).unwrap();
        let hw = matvec(&hess, &w);
        for i in 0..3 {
            let fd = (gp[i] - gm[i]) / (2.0 * e);
            prop_assert!((fd - hw[i]).abs() < 1e-6 * scale.max(1.0), "{fd} vs {}", hw[i]);
        }
    }

    #[test]
    fn frames_are_covariant_under_homothety(
        body in ellipsoid_strategy(),
        chart in surface_strategy(),
        c in 0.3f64..3.0,
        offset in prop::array::uniform3(-1.0f64..1.0),
    ) {
        let base = sample(&chart, RES).unwrap();
        let moved = sample(&chart.similarity(c, offset).unwrap(), RES).unwrap();
        let scaled = sample(&chart.similarity(c, [0.0; 3]).unwrap(), RES).unwrap();
        let f0 = compute_frames(&body, &base).unwrap();
        let f1 = compute_frames(&body, &moved).unwrap();
        let f2 = compute_frames(&body, &scaled).unwrap();
        for k in 0..f0.len() {
            let (a, b, s) = (&f0.nodes[k], &f1.nodes[k], &f2.nodes[k]);
            for i in 0..2 {
                prop_assert!((b.lambdas[i] * c - a.lambdas[i]).abs() < 1e-9 * (1.0 + a.lambdas[i].abs()));
                prop_assert!((b.xi[i] - a.xi[i]).abs() < 1e-12);
                prop_assert!((b.eta[i] - a.eta[i]).abs() < 1e-12);
            }
            prop_assert!(rel(b.h_m * c, a.h_m) < 1e-9);
            prop_assert!(rel(b.k_m * c * c, a.k_m) < 1e-9 || (b.k_m * c * c - a.k_m).abs() < 1e-12);
            // ρ depends on the origin, so only the centred homothety scales it
            prop_assert!(rel(s.rho, c * a.rho) < 1e-9);
        }
    }

    #[test]
    fn functionals_scale_and_translate(
        body in body_strategy(),
        chart in surface_strategy(),
        c in 0.3f64..3.0,
        offset in prop::array::uniform3(-1.0f64..1.0),
    ) {
        let report = |chart: &SurfaceChart| {
            let surf = sample(chart, RES).unwrap();
            let frames = compute_frames(&body, &surf).unwrap();
            functional_report(&body, &surf, &frames, None, &mut BodyVolume::new()).unwrap()
        };
        let r0 = report(&chart);
        let r1 = report(&chart.similarity(c, offset).unwrap());
        prop_assert!(rel(r1.area_euclidean, c * c * r0.area_euclidean) < 1e-9);
        prop_assert!(rel(r1.area_minkowski, c * c * r0.area_minkowski) < 1e-9);
        prop_assert!(rel(r1.volume, c * c * c * r0.volume) < 1e-9);
        prop_assert!(rel(r1.isoperimetric_ratio, r0.isoperimetric_ratio) < 1e-9);
        prop_assert!(r0.isoperimetric_ratio >= 1.0 - 1e-8);
    }

    #[test]
    fn laplacian_is_self_adjoint_and_integrates_to_zero(
        body in body_strategy(),
        chart in surface_strategy(),
        seeds in (0u64..1000, 1000u64..2000),
    ) {
        let surf: SampledSurface = sample(&chart, chart.default_resolution()).unwrap();
        let frames = compute_frames(&body, &surf).unwrap();
        let f = ScalarField::random(&surf, seeds.0, 3);
        let g = ScalarField::random(&surf, seeds.1, 3);
        let lf = minkowski_laplacian(&frames, &surf, &f).values();
        let lg = minkowski_laplacian(&frames, &surf, &g).values();
        let pair = |a: &[f64], b: &[f64]| {
            let v: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
            frames.integrate_domega(&surf, &v)
        };
        let (gl, fl) = (pair(&g.values(), &lf), pair(&f.values(), &lg));
        prop_assert!(rel(gl, fl) < 1e-7, "{gl} vs {fl}");
        let abs: Vec<f64> = lf.iter().map(|x| x.abs()).collect();
        let total = frames.integrate_domega(&surf, &lf);
        prop_assert!(total.abs() <= 1e-8 * frames.integrate_domega(&surf, &abs));
    }
}

#[test]
fn quadrature_converges_with_resolution() {
    let mut c = vec![0.0; 15];
    c[2] = 0.2;
    c[9] = 0.1;
    let chart = make_radial_graph(RadialField::new(1.0, c), 3).unwrap();
    let area = |n: usize| sample(&chart, Resolution::new(n, n / 2)).unwrap().euclidean_area();
    let reference = area(128);
    let errors: Vec<f64> = [16, 32, 64].iter().map(|&n| (area(n) - reference).abs()).collect();
    assert!(errors[1] < 0.1 * errors[0], "{errors:?}");
    assert!(errors[2] < 1e-10 * reference, "{errors:?}");
}
