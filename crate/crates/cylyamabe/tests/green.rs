use cylyamabe::cone::{ChartMetricField, PolynomialMetric};
use cylyamabe::constants::{dist2, norm, Point};
use cylyamabe::green::mass::{richardson, CncRadial};
use cylyamabe::green::*;
use cylyamabe::quadrature::{integrate_biradial, BiradialDomain, QuadratureSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn e1(t: f64) -> Point {
    [t, 0.0, 0.0, 0.0]
}

fn flat_dirichlet(x: &Point, y: &Point, delta: f64) -> f64 {
    let t2: f64 = x.iter().map(|v| v * v).sum();
    if t2 == 0.0 {
        return 1.0 / dist2(x, y) - 1.0 / (delta * delta);
    }
    let xs = x.map(|v| v * delta * delta / t2);
    1.0 / dist2(x, y) - delta * delta / t2 / dist2(&xs, y)
}

/// Dirichlet Green's function of the round ball via stereographic projection
/// from the antipode of the chart origin.
fn round_dirichlet(x: &Point, y: &Point, delta: f64) -> f64 {
    let stereo = |p: &Point| {
        let r = norm(p);
        if r == 0.0 {
            return *p;
        }
        let k = (0.5 * r).tan() / r;
        p.map(|v| v * k)
    };
    let (wx, wy) = (stereo(x), stereo(y));
    let v = |w: &Point| 2.0 / (1.0 + w.iter().map(|c| c * c).sum::<f64>());
    flat_dirichlet(&wx, &wy, (0.5 * delta).tan()) / (v(&wx) * v(&wy))
}

fn sample_ball(n: usize, delta: f64, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < n {
        let p: Point = [0; 4].map(|_| rng.random_range(-delta..delta));
        if norm(&p) < 0.95 * delta {
            out.push(p);
        }
    }
    out
}

#[test]
fn centered_flat_mass_is_minus_inverse_square_radius() {
    for delta in [1.0, 0.5] {
        let p = GreenProblem::new(ChartMetricField::Flat, [0.0; 4], delta);
        let g = solve_dirichlet_green(&p).unwrap();
        let opts = MassOptions {
            eps0: Some(0.05 * delta),
            ..Default::default()
        };
        let m = extract_mass(&g, &opts).unwrap();
        let exact = -1.0 / (delta * delta);
        assert!((m.a_q - exact).abs() < 1e-6 * exact.abs(), "δ={delta}: {}", m.a_q);
        assert!(m.a_q_error < 1e-6 * exact.abs());
        for y in sample_ball(10, delta, 3) {
            let v = g.value(&y);
            let e = flat_dirichlet(&[0.0; 4], &y, delta);
            assert!((v - e).abs() < 1e-8 * e.abs().max(1.0), "{v} vs {e}");
        }
    }
}

#[test]
fn flat_off_center_matches_kelvin_image() {
    let delta = 1.0;
    let x = e1(0.1);
    let g = solve_dirichlet_green(&GreenProblem::new(ChartMetricField::Flat, x, delta)).unwrap();
    assert!(g.projection_defect < PROJECTION_TOLERANCE);
    for y in sample_ball(40, delta, 7) {
        if dist2(&x, &y) < 1e-4 {
            continue;
        }
        let e = flat_dirichlet(&x, &y, delta);
        assert!((g.value(&y) - e).abs() < 1e-8 * e.abs().max(1.0), "at {y:?}");
    }
    // boundary trace
    for d in cylyamabe::cone::link::sample_points(16, 11) {
        let y = d.map(|v| v * delta);
        assert!(g.value(&y).abs() < 1e-9);
    }
    // the regular part at the pole is the image term
    let exact = -(delta * delta) / (delta * delta - 0.01f64).powi(2);
    assert!((g.regular_at_pole() - exact).abs() < 1e-9);
}

#[test]
fn round_ball_matches_stereographic_oracle() {
    let delta = 0.5;
    let x = e1(0.08);
    let g = solve_dirichlet_green(&GreenProblem::new(ChartMetricField::RoundNormal, x, delta)).unwrap();
    for y in sample_ball(40, delta, 5) {
        if dist2(&x, &y) < 1e-4 {
            continue;
        }
        let e = round_dirichlet(&x, &y, delta);
        assert!((g.value(&y) - e).abs() < 1e-8 * e.abs().max(1.0), "at {y:?}: {} vs {e}", g.value(&y));
    }
}

#[test]
fn reflected_pole_solves_to_the_mirror_image() {
    let delta = 0.5;
    let p = GreenProblem::new(ChartMetricField::RoundNormal, e1(0.05), delta);
    let plus = solve_dirichlet_green(&p).unwrap();
    let q = GreenProblem::new(ChartMetricField::RoundNormal, e1(-0.05), delta);
    let minus = solve_dirichlet_green(&q).unwrap();
    for y in sample_ball(24, delta, 9) {
        let a = plus.value(&y);
        let b = minus.value(&y.map(|v| -v));
        assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));
    }
    let mirrored = plus.mirrored();
    for y in sample_ball(8, delta, 10) {
        assert!((mirrored.value(&y) - minus.value(&y)).abs() < 1e-10 * minus.value(&y).abs().max(1.0));
    }
}

#[test]
fn flat_z2_mass_matches_image_formula() {
    let delta = 1.0;
    for t in [0.1, 0.05, 0.02] {
        let p = GreenProblem::new(ChartMetricField::Flat, e1(t), delta);
        let g = solve_equivariant(&p, BoundaryDatum::Zero).unwrap();
        let m = extract_mass(&g, &MassOptions::default()).unwrap();
        let d2 = delta * delta;
        let exact = 1.0 / (4.0 * t * t) - d2 / (d2 - t * t).powi(2) - d2 / (d2 + t * t).powi(2);
        assert!((m.a_q - exact).abs() < 1e-9 * exact, "t={t}: {} vs {exact}", m.a_q);
        assert!((m.a_q - exact).abs() <= m.a_q_error.max(1e-12));
        // β has zero spherical mean in the limit
        let (beta0, _) = richardson(&m.means.iter().map(|v| v - m.a_q).collect::<Vec<_>>());
        assert!(beta0.abs() < 1e-12 * exact);
    }
}

#[test]
fn round_global_datum_gives_the_football_green_function() {
    let delta = 0.5;
    for t in [0.05, 0.02] {
        let p = GreenProblem::new(ChartMetricField::RoundNormal, e1(t), delta);
        let g = solve_equivariant(&p, BoundaryDatum::Global).unwrap();
        let m = extract_mass(&g, &MassOptions::default()).unwrap();
        let exact = 0.25 / t.sin().powi(2);
        assert!((m.a_q / exact - 1.0).abs() < 1e-9, "t={t}: {}", m.a_q);
        let model = RadialModel::Round;
        for y in sample_ball(16, delta, 12) {
            if dist2(&y, &e1(t)) < 1e-4 || dist2(&y, &e1(-t)) < 1e-4 {
                continue;
            }
            let e = model.global_green(&e1(t), &y) + model.global_green(&e1(-t), &y);
            assert!((g.value(&y) - e).abs() < 1e-8 * e);
            // H_x is even
            assert!((g.harmonic_value(&y) - g.harmonic_value(&y.map(|v| -v))).abs() < 1e-10);
        }
    }
}

#[test]
fn zero_datum_assembly_is_antipodally_symmetric() {
    let p = GreenProblem::new(ChartMetricField::RoundNormal, e1(0.04), 0.5);
    let g = solve_equivariant(&p, BoundaryDatum::Zero).unwrap();
    assert!(g.harmonic.is_none());
    assert!(g.symmetry_defect(32, 4) < 1e-12);
}

#[test]
fn assembly_rejects_mismatched_poles() {
    let a = solve_dirichlet_green(&GreenProblem::new(ChartMetricField::Flat, e1(0.1), 1.0)).unwrap();
    let b = solve_dirichlet_green(&GreenProblem::new(ChartMetricField::Flat, e1(0.05), 1.0)).unwrap();
    assert!(assemble_equivariant(a, b, BoundaryDatum::Zero).is_err());
}

#[test]
fn invalid_problems_are_rejected() {
    assert!(solve_dirichlet_green(&GreenProblem::new(ChartMetricField::Flat, e1(0.3), 1.0)).is_err());
    assert!(solve_dirichlet_green(&GreenProblem::new(ChartMetricField::RoundNormal, e1(0.1), 2.0)).is_err());
    let poly = ChartMetricField::Polynomial(Box::new(PolynomialMetric::test_metric()));
    assert!(solve_dirichlet_green(&GreenProblem::new(poly, e1(0.05), 1.0)).is_err());
}

#[test]
fn green_functions_are_positive() {
    for (field, delta) in [(ChartMetricField::Flat, 1.0), (ChartMetricField::RoundNormal, 0.5)] {
        let g = solve_dirichlet_green(&GreenProblem::new(field, e1(0.06), delta)).unwrap();
        for y in sample_ball(200, delta, 21) {
            assert!(g.value(&y) > 0.0, "G ≤ 0 at {y:?}");
        }
    }
}

/// `b(d(c, ·)/σ)` with the standard bump `b(s) = exp(-1/(1-s²))`.
fn bump(s: f64) -> (f64, f64, f64) {
    if s >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let q = 1.0 - s * s;
    let b = (-1.0 / q).exp();
    let db = b * (-2.0 * s / (q * q));
    // d/ds of -2s/q² is -2/q² - 8s²/q³
    let d2b = db * (-2.0 * s / (q * q)) + b * (-2.0 / (q * q) - 8.0 * s * s / (q * q * q));
    (b, db, d2b)
}

#[test]
fn weak_form_reproduces_the_normalized_delta() {
    let delta = 1.0;
    let x = e1(0.05);
    let model = RadialModel::Flat;
    let g = solve_dirichlet_green(&GreenProblem::new(ChartMetricField::Flat, x, delta)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    let spec = QuadratureSpec::with_tol(1e-9, 1e-12);
    for _ in 0..30 {
        let sigma = rng.random_range(0.1..0.4);
        let c0 = rng.random_range(-(0.9 - sigma)..(0.9 - sigma));
        let c = e1(c0);
        let psi = |y: &Point| bump(model.distance(&c, y) / sigma).0;
        let l_psi = |y: &Point| {
            let d = model.distance(&c, y);
            let (_, db, d2b) = bump(d / sigma);
            let lap = d2b / (sigma * sigma) + if d > 0.0 { 3.0 * db / (sigma * d) } else { 4.0 * d2b / (sigma * sigma) - d2b / (sigma * sigma) };
            -6.0 * lap
        };
        let domain = BiradialDomain {
            zeta: (c0 - sigma, c0 + sigma),
            rho_max: sigma,
            centers: vec![(x[0], 0.02)],
        };
        let lhs = integrate_biradial(
            |z, r| {
                let y = [z, r, 0.0, 0.0];
                let lp = l_psi(&y);
                if lp == 0.0 {
                    0.0
                } else {
                    g.value(&y) * lp
                }
            },
            &domain,
            &spec,
        );
        let rhs = NORMALIZATION * psi(&x);
        assert!(
            (lhs.value - rhs).abs() < 1e-6 * NORMALIZATION.max(rhs.abs()),
            "c={c0}, σ={sigma}: {} vs {rhs}",
            lhs.value
        );
    }
}

#[test]
fn doubling_the_harmonic_cutoff_moves_the_mass_less_than_its_error_bar() {
    let field = ChartMetricField::RoundNormal;
    let p = GreenProblem::new(field.clone(), e1(0.05), 0.5);
    let a = extract_mass(&solve_equivariant(&p, BoundaryDatum::Zero).unwrap(), &MassOptions::default()).unwrap();
    let base = solve_dirichlet_green(&p).unwrap().regular_part.modes.len() - 1;
    let q = p.clone().with_resolution(2 * base, 24);
    let b = extract_mass(&solve_equivariant(&q, BoundaryDatum::Zero).unwrap(), &MassOptions::default()).unwrap();
    assert!((a.a_q - b.a_q).abs() <= a.a_q_error, "{} vs {} ± {}", a.a_q, b.a_q, a.a_q_error);
}

#[test]
fn mass_product_tends_to_one() {
    let grid = [0.1, 0.05, 0.025, 0.0125];
    for (field, delta) in [(ChartMetricField::Flat, 1.0), (ChartMetricField::RoundNormal, 0.5)] {
        let rows = mass_divergence_sweep(&field, &grid, delta, BoundaryDatum::Zero, 96).unwrap();
        for w in rows.windows(2) {
            assert!((w[1].product - 1.0).abs() < (w[0].product - 1.0).abs());
        }
        let last = rows.last().unwrap();
        assert!(last.t <= 0.05 * delta);
        assert!((last.product - 1.0).abs() < 0.05, "{last:?}");
    }
}

#[test]
fn two_radii_differ_by_a_bounded_amount() {
    let grid = [0.04, 0.02, 0.01];
    let a = mass_divergence_sweep(&ChartMetricField::Flat, &grid, 1.0, BoundaryDatum::Zero, 96).unwrap();
    let b = mass_divergence_sweep(&ChartMetricField::Flat, &grid, 0.5, BoundaryDatum::Zero, 96).unwrap();
    let diffs: Vec<f64> = a.iter().zip(&b).map(|(p, q)| p.a_q - q.a_q).collect();
    // -2/δ² at leading order for each radius
    for d in &diffs {
        assert!((d - 6.0).abs() < 0.1, "{diffs:?}");
    }
}

#[test]
fn parametrix_residual_examples() {
    let radii = [0.002, 0.005, 0.01, 0.02, 0.04];
    let flat = parametrix_residual(&ChartMetricField::Flat, &e1(0.1), 0.1, &radii, true).unwrap();
    // zero up to rounding of the r⁻⁴-sized second derivatives
    for (r, v) in &flat.samples {
        assert!(*v < 1e-12 / r.powi(4), "r={r}: {v}");
    }
    // round normal coordinates: 36(cot r - 1/r)/r³ + 12/r² → -4/5
    let round = parametrix_residual(&ChartMetricField::RoundNormal, &e1(0.1), 0.1, &radii, false).unwrap();
    for (r, v) in &round.samples {
        let exact = RadialModel::Round.inverse_square_residual(*r);
        assert!((v - exact.abs()).abs() < 1e-6 + 1e-11 / r.powi(4), "r={r}: {v} vs {exact}");
    }
    // a metric with R(x) ≠ 0 gives R(x)/r² without the conformal change
    let poly = ChartMetricField::Polynomial(Box::new(PolynomialMetric::test_metric()));
    let raw = parametrix_residual(&poly, &e1(0.1), 0.1, &radii, false).unwrap();
    let ratio = raw.samples[0].1 / raw.samples[2].1;
    assert!(ratio > 10.0, "{:?}", raw.samples);
    let fixed = parametrix_residual(&poly, &e1(0.1), 0.1, &radii, true).unwrap();
    assert!(fixed.samples[0].1 < 1.0, "{:?}", fixed.samples);
}

#[test]
fn parametrix_sup_scales_like_inverse_square() {
    let ts = [0.02, 0.05, 0.1, 0.2];
    for field in [
        ChartMetricField::RoundNormal,
        ChartMetricField::Polynomial(Box::new(PolynomialMetric::test_metric())),
    ] {
        let s = parametrix_scaling(&field, &[1.0, 0.0, 0.0, 0.0], &ts, 20).unwrap();
        assert!((-2.3..=-1.7).contains(&s.exponent), "{}", s.exponent);
        for r in &s.reports {
            assert!(r.sup <= s.constant / (r.t * r.t) * (1.0 + 1e-12));
        }
    }
}

#[test]
fn exp_at_moves_by_the_geodesic_length() {
    for model in [RadialModel::Flat, RadialModel::Round] {
        let x = [0.03, -0.04, 0.0, 0.0];
        let frame = pole_frame(&x);
        for z in sample_ball(10, 0.2, 2) {
            let y = model.exp_at(&x, &frame, &z);
            assert!((model.distance(&x, &y) - norm(&z)).abs() < 1e-13);
        }
        // the first frame vector points at the tip
        let y = model.exp_at(&x, &frame, &[0.05, 0.0, 0.0, 0.0]);
        assert!((norm(&y) - 0.0).abs() < 1e-13);
    }
}

#[test]
fn radius_map_inverts() {
    let c = CncRadial { c: 0.5 };
    for r in [1e-4, 1e-2, 0.3] {
        assert!((c.r_of(c.rbar(r)) - r).abs() < 1e-15);
    }
    let exact = 0.3 + 0.25 * 0.3f64.powi(3) / 3.0 + 0.0625 * 0.3f64.powi(5) / 10.0;
    assert!((c.rbar(0.3) - exact).abs() < 1e-6);
}

proptest! {
    #[test]
    fn chebyshev_recurrence_is_sin_ratio(th in 0.01f64..3.1, l in 0usize..40) {
        let u = chebyshev_u(th.cos(), l);
        let exact = ((l + 1) as f64 * th).sin() / th.sin();
        prop_assert!((u[l] - exact).abs() < 1e-9 * (l as f64 + 1.0));
    }

    #[test]
    fn richardson_is_exact_on_cubics(a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0, d in -5.0f64..5.0) {
        let means: Vec<f64> = (0..4).map(|k| {
            let e = 0.1 * 0.5f64.powi(k);
            a + b * e + c * e * e + d * e * e * e
        }).collect();
        let (v, _) = richardson(&means);
        prop_assert!((v - a).abs() < 1e-11);
    }

    #[test]
    fn cutoff_is_monotone_and_bounded(u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let par = Parametrix { model: RadialModel::Flat, support: 1.0 };
        let (a, b) = (par.cutoff(u.min(v)).0, par.cutoff(u.max(v)).0);
        prop_assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b));
        prop_assert!(a >= b);
    }

    #[test]
    fn round_source_series_matches_closed_form(rho in 0.3f64..0.7) {
        let m = RadialModel::Round;
        let direct = 36.0 * (1.0 / rho.tan() - 1.0 / rho) / rho.powi(3) + 12.0 / (rho * rho);
        prop_assert!((m.inverse_square_residual(rho) - direct).abs() < 1e-9);
    }
}

#[test]
fn round_distance_and_green_are_consistent() {
    let m = RadialModel::Round;
    let a = [0.1, 0.0, 0.0, 0.0];
    let b = [0.0, 0.2, 0.0, 0.0];
    let cos = 0.1f64.cos() * 0.2f64.cos();
    assert!((m.distance(&a, &b) - cos.acos()).abs() < 1e-14);
    let d = m.distance(&a, &b);
    assert!((m.global_green(&a, &b) - 1.0 / (2.0 - 2.0 * d.cos())).abs() < 1e-10);
    assert!((NORMALIZATION - 24.0 * PI * PI).abs() == 0.0);
}
