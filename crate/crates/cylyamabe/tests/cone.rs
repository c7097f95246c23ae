use cylyamabe::cone::cnc::verify_cnc_along;
use cylyamabe::cone::football::Pole;
use cylyamabe::cone::link::{flow_with_jacobian, iota_h, sample_points, tangent_basis};
use cylyamabe::cone::regularity::regularity_probe_fn;
use cylyamabe::cone::*;
use cylyamabe::constants::{norm, Point};
use proptest::prelude::*;
use std::f64::consts::PI;

fn test_metric() -> ChartMetricField {
    ChartMetricField::Polynomial(Box::new(PolynomialMetric::test_metric()))
}

fn sample_n() -> Mat4 {
    [
        [0.3, 0.1, 0.0, 0.0],
        [0.1, -0.2, 0.0, 0.05],
        [0.0, 0.0, 0.1, 0.0],
        [0.0, 0.05, 0.0, 0.2],
    ]
}

fn quad_f() -> LinkFunction {
    LinkFunction::Quadratic([
        [0.2, 0.05, 0.0, 0.0],
        [0.05, -0.1, 0.0, 0.0],
        [0.0, 0.0, 0.1, 0.03],
        [0.0, 0.0, 0.03, 0.0],
    ])
}

fn max_diff(a: &Mat4, b: &Mat4) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

const P: Point = [0.1, -0.05, 0.07, 0.02];

#[test]
fn pullback_examples() {
    let round = ConeMetric::new(Link::Sphere, LinkFamily::Round, 1.0).unwrap();
    let f = pullback_via_phi(&round, 0.9).unwrap();
    for x in [[0.3, 0.1, -0.2, 0.4], [0.0; 4], [0.01, 0.0, 0.0, 0.0]] {
        assert!(max_diff(&f.metric(&x).unwrap(), &[[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]]) < 1e-15);
    }
    // (1 + s²)h₀ against the generic projector form and the stated formula
    let ops = ChartMetricField::Cone(LinkFamily::OnePlusSquare);
    let generic = ChartMetricField::Cone(LinkFamily::Perturbed {
        power: 2,
        n: [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]],
    });
    let x = [0.3, 0.1, -0.2, 0.4];
    let u: f64 = x.iter().map(|v| v * v).sum();
    let mut expect = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let d = if i == j { 1.0 } else { 0.0 };
            expect[i][j] = d + u * (d - x[i] * x[j] / u);
        }
    }
    assert!(max_diff(&ops.metric(&x).unwrap(), &expect) < 1e-14);
    assert!(max_diff(&generic.metric(&x).unwrap(), &expect) < 1e-14);
    // football lift agrees with δ - ⅓(δ|x|² - x xᵀ) up to O(|x|⁴)
    let foot = ChartMetricField::Cone(LinkFamily::Football);
    for r in [0.2, 0.1, 0.05] {
        let x = [0.5, -0.5, 0.5, 0.5].map(|v| v * r);
        let g = foot.metric(&x).unwrap();
        let mut second = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                let d = if i == j { 1.0 } else { 0.0 };
                second[i][j] = d - (d * r * r - x[i] * x[j]) / 3.0;
            }
        }
        let ratio = max_diff(&g, &second) / r.powi(4);
        assert!(ratio < 0.1, "ratio {ratio}");
    }
}

#[test]
fn pullback_rejects_bad_radius_and_indefinite_metrics() {
    let cone = ConeMetric::new(Link::Sphere, LinkFamily::Round, 1.0).unwrap();
    assert!(pullback_via_phi(&cone, 1.5).is_err());
    let bad = ConeMetric::new(
        Link::Sphere,
        LinkFamily::Perturbed {
            power: 2,
            n: [[-50.0, 0.0, 0.0, 0.0], [0.0, -50.0, 0.0, 0.0], [0.0, 0.0, -50.0, 0.0], [0.0, 0.0, 0.0, -50.0]],
        },
        1.0,
    )
    .unwrap();
    assert!(pullback_via_phi(&bad, 1.0).is_err());
    let odd = LinkFamily::Gauge(LinkFunction::Linear([1.0, 0.0, 0.0, 0.0]));
    assert!(ConeMetric::new(Link::ProjectiveSpace, odd, 1.0).is_err());
}

#[test]
fn radial_distance_matches_cone_chart() {
    // the radial segment from 0 to x has length |x| in the cone chart
    let fam = LinkFamily::Perturbed { power: 3, n: sample_n() };
    let field = ChartMetricField::Cone(fam);
    let dir = [0.5, 0.5, -0.5, 0.5];
    let r = 0.4;
    let gl = cylyamabe::quadrature::gauss_legendre(12);
    let mut len = 0.0;
    for (s, w) in gl {
        let tau = 0.5 * r * (s + 1.0);
        let g = field.metric(&dir.map(|v| v * tau)).unwrap();
        let mut sp = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                sp += g[i][j] * dir[i] * dir[j];
            }
        }
        len += 0.5 * r * w * sp.sqrt();
    }
    assert!((len - r).abs() < 1e-13);
}

#[test]
fn flat_curvature_vanishes() {
    for field in [ChartMetricField::Flat, ChartMetricField::Cone(LinkFamily::Round)] {
        let s = curvature_at(&field, &[0.2, 0.1, 0.0, -0.1], 1e-3).unwrap();
        assert!(s.r.abs() < 1e-12);
        assert!(s.riemann.iter().flatten().flatten().flatten().all(|v| v.abs() < 1e-10));
    }
}

#[test]
fn round_chart_is_einstein_with_r_12() {
    for x in [[0.0; 4], P, [0.4, 0.3, -0.2, 0.5]] {
        let a = curvature_at_analytic(&ChartMetricField::RoundNormal, &x).unwrap();
        assert!((a.r - 12.0).abs() < 1e-11, "R = {}", a.r);
        for i in 0..4 {
            for j in 0..4 {
                assert!((a.ric[i][j] - 3.0 * a.g[i][j]).abs() < 1e-11);
            }
        }
        assert!(a.weyl.iter().flatten().flatten().flatten().all(|v| v.abs() < 1e-10));
        let fd = curvature_at(&ChartMetricField::RoundNormal, &x, 1e-3).unwrap();
        assert!((fd.r - 12.0).abs() < 1e-4);
    }
}

#[test]
fn curvature_convergence_is_second_order() {
    let field = test_metric();
    let exact = curvature_at_analytic(&field, &P).unwrap();
    let e1 = (curvature_at(&field, &P, 2e-2).unwrap().r - exact.r).abs();
    let e2 = (curvature_at(&field, &P, 1e-2).unwrap().r - exact.r).abs();
    let order = (e1 / e2).log2();
    assert!((order - 2.0).abs() < 0.3, "order {order}");
}

#[test]
fn snapshot_identities_on_test_metric() {
    let s = curvature_at_analytic(&test_metric(), &P).unwrap();
    assert!(s.weyl_trace_defect() < 1e-12);
    assert!(s.bianchi_defect() < 1e-12);
    assert!(s.ricci_asymmetry() < 1e-14);
    // genuinely curved and not Einstein
    let trace_free: f64 = (0..4)
        .flat_map(|i| (0..4).map(move |j| (i, j)))
        .map(|(i, j)| (s.ric[i][j] - s.r / 4.0 * s.g[i][j]).abs())
        .fold(0.0, f64::max);
    assert!(trace_free > 1e-2);
}

#[test]
fn cnc_polynomial_examples() {
    let flat = curvature_at_analytic(&ChartMetricField::Flat, &[0.0; 4]).unwrap();
    let f = cnc_polynomial(&flat, 1.0).unwrap();
    assert!(f.quadratic.iter().flatten().all(|v| *v == 0.0));
    assert!(f.cubic.iter().flatten().flatten().all(|v| *v == 0.0));

    let round = curvature_at_analytic(&ChartMetricField::RoundNormal, &[0.0; 4]).unwrap();
    let f = cnc_polynomial(&round, f64::INFINITY).unwrap();
    for z in [[0.1, 0.2, -0.3, 0.05], [0.01, 0.0, 0.0, 0.0]] {
        let half_sq = 0.5 * z.iter().map(|v| v * v).sum::<f64>();
        assert!((f.value(&z) - half_sq).abs() < 1e-14);
    }
    assert!(cnc_polynomial(&round, 0.0).is_err());
}

#[test]
fn cutoff_profile() {
    let c = Cutoff { t: 0.4 };
    assert_eq!(c.value(0.0), 1.0);
    assert_eq!(c.value(0.1), 1.0);
    assert_eq!(c.value(0.2), 0.0);
    assert!((c.value(0.15) - 0.5).abs() < 1e-15);
    assert_eq!(Cutoff::none().value(1e6), 1.0);
}

#[test]
fn cnc_round_chart_second_order() {
    let hs = [1e-2, 5e-3, 2.5e-3];
    let rs: Vec<f64> = hs
        .iter()
        .map(|&h| verify_cnc(&ChartMetricField::RoundNormal, &P, h).unwrap().max().max(0.0))
        .collect();
    for w in rs.windows(2) {
        assert!((w[0] / w[1] - 4.0).abs() < 0.1, "{rs:?}");
    }
    let fine = verify_cnc(&ChartMetricField::RoundNormal, &P, 1e-3).unwrap();
    assert!(fine.max() < 1e-4 && fine.ric < 1e-4);
}

#[test]
fn cnc_test_metric_second_order() {
    let field = test_metric();
    let a = verify_cnc(&field, &P, 1e-2).unwrap();
    let b = verify_cnc(&field, &P, 5e-3).unwrap();
    for (x, y) in [(a.r.abs(), b.r.abs()), (a.dr, b.dr), (a.sym_dric, b.sym_dric), (a.ric, b.ric)] {
        assert!((x / y - 4.0).abs() < 0.4, "{x} {y}");
    }
    // the exact normal-coordinate Ricci is far from zero
    assert!(a.factor.quadratic.iter().flatten().any(|v| v.abs() > 1e-2));
}

#[test]
fn cnc_on_cone_charts_away_from_tip() {
    let foot = verify_cnc(&ChartMetricField::Cone(LinkFamily::Football), &[0.3, 0.0, 0.0, 0.0], 1e-3).unwrap();
    assert!(foot.max() < 1e-4);
    let pert = ChartMetricField::Cone(LinkFamily::Perturbed { power: 3, n: sample_n() });
    let a = verify_cnc(&pert, &[0.3, 0.0, 0.0, 0.0], 1e-2).unwrap();
    let b = verify_cnc(&pert, &[0.3, 0.0, 0.0, 0.0], 5e-3).unwrap();
    assert!((a.sym_dric / b.sym_dric - 4.0).abs() < 0.4);
    assert!(b.max() < 1e-4);
    assert_eq!(a.factor.cutoff.t, 0.3);
    assert!(verify_cnc(&pert, &[0.001, 0.0, 0.0, 0.0], 1e-3).is_err());
    let other = verify_cnc_along(&pert, &[0.0, 0.3, 0.0, 0.0], Some([0.0, 0.0, 1.0, 0.0]), 2e-3).unwrap();
    assert!(other.max() < 1e-4, "{other:?}");
}

#[test]
fn normal_coordinates_flat_is_affine() {
    let nc = normal_coordinates(&ChartMetricField::Flat, &P, 0.5, Some([0.0, 1.0, 1.0, 0.0])).unwrap();
    let y = [0.1, 0.2, -0.1, 0.05];
    let x = nc.forward(&y).unwrap();
    for a in 0..4 {
        let lin: f64 = (0..4).map(|i| nc.frame[a][i] * y[i]).sum();
        assert!((x[a] - P[a] - lin).abs() < 1e-14);
    }
    let s = 1.0 / 2f64.sqrt();
    assert!((nc.frame[1][0] - s).abs() < 1e-15 && (nc.frame[2][0] - s).abs() < 1e-15);
}

#[test]
fn normal_coordinates_on_round_chart() {
    let nc = normal_coordinates(&ChartMetricField::RoundNormal, &P, 0.5, None).unwrap();
    let y = [0.1, 0.2, -0.1, 0.05];
    let len = nc.radial_length(&y).unwrap();
    assert!((len - norm(&y)).abs() < 1e-12);
    // geodesic distance on the sphere between the lifted points
    let foot = football_metric(0.5).unwrap();
    let d = Football::lifted_distance(&foot.embed(Pole::North, &P), &foot.embed(Pole::North, &nc.forward(&y).unwrap()));
    assert!((d - norm(&y)).abs() < 1e-12);
    let cert = nc.certify(1e-3).unwrap();
    assert!(cert.metric_defect < 1e-12 && cert.first_derivative < 1e-7);
}

#[test]
fn normal_coordinates_on_test_metric() {
    let nc = normal_coordinates(&test_metric(), &P, 0.2, None).unwrap();
    let cert = nc.certify(1e-3).unwrap();
    assert!(cert.metric_defect < 1e-12 && cert.first_derivative < 1e-6);
    let y = [0.05, 0.02, -0.03, 0.01];
    let back = nc.inverse(&nc.forward(&y).unwrap()).unwrap();
    assert!(norm(&[0, 1, 2, 3].map(|i| back[i] - y[i])) < 1e-12);
    // volume element: even part 1 + O(|y|²), odd part O(|y|³)
    let det = |y: &Point| {
        let g = nc.metric(y).unwrap();
        nalgebra::Matrix4::from_fn(|i, j| g[i][j]).determinant()
    };
    let mut odd = Vec::new();
    for r in [0.08, 0.04] {
        let yy = [0.6, -0.2, 0.7, 0.3].map(|v| v * r);
        let ym = yy.map(|v| -v);
        odd.push(0.5 * (det(&yy) - det(&ym)));
        assert!((0.5 * (det(&yy) + det(&ym)) - 1.0).abs() < 5.0 * r * r);
    }
    assert!((odd[0] / odd[1]).log2() > 2.7, "{odd:?}");
    assert!(normal_coordinates(&test_metric(), &P, 0.2, None).unwrap().forward(&[1.0, 0.0, 0.0, 0.0]).is_err());
}

#[test]
fn normal_coordinates_refuse_to_reach_the_tip() {
    let pert = ChartMetricField::Cone(LinkFamily::Perturbed { power: 2, n: sample_n() });
    assert!(normal_coordinates(&pert, &[0.1, 0.0, 0.0, 0.0], 0.2, None).is_err());
    assert!(normal_coordinates(&pert, &[0.3, 0.0, 0.0, 0.0], 0.2, None).is_ok());
}

#[test]
fn link_flow_examples() {
    let pts = sample_points(6, 1);
    let same = link_flow(&LinkFunction::Constant(3.0), 0.1, &pts).unwrap();
    for (a, b) in pts.iter().zip(&same) {
        assert!(norm(&[0, 1, 2, 3].map(|i| a[i] - b[i])) < 1e-15);
    }
    let f = LinkFunction::Linear([1.0, 0.0, 0.0, 0.0]);
    for z in &pts {
        let a = link_flow(&f, 0.4, &[*z]).unwrap()[0];
        let b = link_flow(&f, 0.25, &link_flow(&f, 0.15, &[*z]).unwrap()).unwrap()[0];
        assert!(norm(&[0, 1, 2, 3].map(|i| a[i] - b[i])) < 1e-11);
        assert!((norm(&a) - 1.0).abs() < 1e-11);
        let mut last = z[0];
        for k in 1..=4 {
            let w = link_flow(&f, 0.1 * k as f64, &[*z]).unwrap()[0];
            assert!(w[0] >= last - 1e-14);
            last = w[0];
        }
    }
    assert!(link_flow(&f, 0.6, &pts).is_err());
}

#[test]
fn flow_jacobian_matches_differences() {
    let f = quad_f();
    let z = sample_points(1, 3)[0];
    let (_, j) = flow_with_jacobian(&f, 0.3, &z).unwrap();
    let v = tangent_basis(&z)[1];
    let h = 1e-6;
    let shift = |sgn: f64| {
        let w = [0, 1, 2, 3].map(|i| z[i] + sgn * h * v[i]);
        let n = norm(&w);
        link_flow(&f, 0.3, &[w.map(|c| c / n)]).unwrap()[0]
    };
    let (p, m) = (shift(1.0), shift(-1.0));
    for a in 0..4 {
        let fd = (p[a] - m[a]) / (2.0 * h);
        let an: f64 = (0..4).map(|b| j[a][b] * v[b]).sum();
        assert!((fd - an).abs() < 1e-7);
    }
}

#[test]
fn alpha_pullback_examples() {
    let z = sample_points(1, 9)[0];
    let zero = LinkFunction::Constant(0.0);
    let s = 0.2;
    let a = alpha_pullback(&zero, &LinkFamily::OnePlusSquare, s, &z).unwrap();
    assert!((a.g_ss - 1.0).abs() < 1e-15);
    assert!(a.g_sv.iter().all(|v| v.abs() < 1e-15));
    for i in 0..3 {
        for j in 0..3 {
            let d = if i == j { 1.0 } else { 0.0 };
            assert!((a.g_vv[i][j] - s * s * (1.0 + s * s) * d).abs() < 1e-14);
        }
    }
    let k = 0.7;
    let c = alpha_pullback(&LinkFunction::Constant(k), &LinkFamily::Football, s, &z).unwrap();
    assert!((c.g_ss - (1.0 + 2.0 * s * k) * (1.0 - s * k).powi(2)).abs() < 1e-14);
    let f = quad_f();
    let ratios: Vec<f64> = [0.02, 0.01]
        .iter()
        .map(|&s| {
            let a = alpha_pullback(&f, &LinkFamily::OnePlusSquare, s, &z).unwrap();
            a.g_sv.iter().fold(0.0f64, |m, v| m.max(v.abs())) / (s * s)
        })
        .collect();
    assert!(ratios[1] < 0.6 * ratios[0], "{ratios:?}");
    // tangential block is s² ι_s*H
    let a = alpha_pullback(&f, &LinkFamily::OnePlusSquare, 0.1, &z).unwrap();
    let ih = iota_h(&f, &LinkFamily::OnePlusSquare, 0.1, &z, &a.basis).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert!((a.g_vv[i][j] - 0.01 * ih[i][j]).abs() < 1e-14);
        }
    }
}

#[test]
fn first_order_identity_examples() {
    let k = LinkFunction::Constant(0.4);
    let c = verify_first_order_identity(&k, &LinkFamily::OnePlusSquare, 1e-3).unwrap();
    assert!(c.residual < 1e-5);
    let z = verify_first_order_identity(&LinkFunction::Constant(0.0), &LinkFamily::Football, 1e-3).unwrap();
    assert!(z.residual < 1e-9);
    let f = quad_f();
    let hs = [1e-2, 5e-3, 2.5e-3];
    let res: Vec<f64> = hs
        .iter()
        .map(|&h| verify_first_order_identity(&f, &LinkFamily::OnePlusSquare, h).unwrap().residual)
        .collect();
    for w in res.windows(2) {
        assert!((w[0] / w[1] - 4.0).abs() < 0.3, "{res:?}");
    }
    let gauged = verify_first_order_identity(&f, &LinkFamily::Gauge(f.clone()), 1e-2).unwrap();
    assert!(gauged.derivative_norm < 1e-3);
}

#[test]
fn regularity_examples() {
    let radii = [0.1, 0.05, 0.025, 0.0125];
    let a = |y: &Point| 1.0 + 0.5 * y[0] - 0.3 * y[1] * y[2];
    let lip = |x: &Point| {
        let r = norm(x);
        r * a(&x.map(|v| v / r))
    };
    assert!(regularity_probe_fn(&lip, 1, &radii).unwrap().bounded);
    let second = regularity_probe_fn(&lip, 2, &radii).unwrap();
    assert!(!second.bounded && (second.exponent + 1.0).abs() < 0.05);
    let quad = |x: &Point| {
        let r = norm(x);
        r * r * a(&x.map(|v| v / r))
    };
    assert!(regularity_probe_fn(&quad, 2, &radii).unwrap().bounded);
    for k in 1..=3 {
        let rep = regularity_probe(&ChartMetricField::Flat, k, &radii).unwrap();
        assert!(rep.bounded && rep.sup.iter().all(|v| *v == 0.0));
    }
    let gauge = ChartMetricField::Cone(LinkFamily::Gauge(quad_f()));
    assert!(regularity_probe(&gauge, 1, &radii).unwrap().bounded);
    assert!(!regularity_probe(&gauge, 2, &radii).unwrap().bounded);
    assert!(regularity_probe(&gauge, 0, &radii).is_err());
}

#[test]
fn football_model() {
    assert!(football_metric(0.0).is_err());
    assert!(football_metric(PI / 4.0).is_err());
    let f = football_metric(0.5).unwrap();
    assert!((f.volume().unwrap() - 4.0 * PI * PI / 3.0).abs() < 1e-10);
    let h0 = LinkFamily::Football.tensor(0.0, &[1.0, 0.0, 0.0, 0.0]);
    assert_eq!(h0[1][1], 1.0);
    assert!(LinkFamily::Football.derivative_at_zero(&[1.0, 0.0, 0.0, 0.0])[1][1].abs() < 1e-15);
    let x = [0.1, -0.2, 0.05, 0.0];
    let (s, y) = f.sigma_p(Pole::North, &x);
    let (s2, y2) = f.sigma_p(Pole::North, &x.map(|v| -v));
    assert_eq!(s, s2);
    assert_eq!(y, y2);
    let (ss, _) = f.sigma_p(Pole::South, &x);
    assert!((ss - (PI - norm(&x))).abs() < 1e-15);
    let snap = curvature_at(&f.lifted, &[0.2, 0.1, 0.3, -0.1], 1e-3).unwrap();
    assert!((snap.r - f.scalar_curvature()).abs() < 1e-4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cnc_factor_has_no_affine_part(x in proptest::array::uniform4(-0.2f64..0.2)) {
        let snap = curvature_at_analytic(&test_metric(), &x).unwrap();
        let f = cnc_polynomial(&snap, 1.0).unwrap();
        let jet = f.eval(&cylyamabe::real::Jet3::point(&x));
        prop_assert!(cylyamabe::real::Real::value(&jet).abs() < 1e-15);
        for i in 0..4 {
            prop_assert!(jet.d1(i).abs() < 1e-15);
        }
    }

    #[test]
    fn cutoff_monotone_in_unit_interval(a in 0.0f64..1.0, b in 0.0f64..1.0, t in 0.1f64..2.0) {
        let c = Cutoff { t };
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(c.value(lo) >= c.value(hi));
        prop_assert!((0.0..=1.0).contains(&c.value(a)));
    }

    #[test]
    fn snapshot_symmetries(x in proptest::array::uniform4(-0.3f64..0.3)) {
        let s = curvature_at_analytic(&test_metric(), &x).unwrap();
        prop_assert!(s.ricci_asymmetry() < 1e-13);
        prop_assert!(s.weyl_trace_defect() < 1e-12);
        prop_assert!(s.bianchi_defect() < 1e-11);
    }

    #[test]
    fn gauge_family_pullback_positive(x in proptest::array::uniform4(-0.3f64..0.3)) {
        let field = ChartMetricField::Cone(LinkFamily::Gauge(quad_f()));
        prop_assert!(field.metric(&x).is_ok());
    }
}
