use cylyamabe::cone::football::Pole;
use cylyamabe::error::Error;
use cylyamabe::interaction::{curve_point, default_spec};
use cylyamabe::path::*;
use cylyamabe::quadrature::QuadratureSpec;
use proptest::prelude::*;
use std::f64::consts::PI;

const DELTA: f64 = 0.03;

fn y4() -> f64 {
    48.0 * PI / 6f64.sqrt()
}

fn big_a() -> f64 {
    // 6π²c₄² with c₄² = √6/π
    6.0 * PI * 6f64.sqrt()
}

fn c4() -> f64 {
    (6.0 / (PI * PI)).powf(0.25)
}

fn loose() -> QuadratureSpec {
    QuadratureSpec::with_tol(1e-10, 0.0)
}

#[test]
fn nu_matching_without_mass() {
    for (eps, tau) in [(1e-3, 1e-1), (1e-4, 3e-2), (0.05, 0.2)] {
        let m = nu_matching(eps, tau, 0.0).unwrap();
        let nu = (1.0 + tau * tau / (eps * eps)) / (c4() / eps * tau * tau);
        assert!((m.nu / nu - 1.0).abs() < 1e-13, "{eps} {tau}");
        assert!((m.inverse - 1.0 / nu).abs() < 1e-13 * m.inverse);
    }
    // leading order 1/ν ≈ c₄ε(1 - ε²/τ²)
    let m = nu_matching(1e-5, 1e-2, 0.0).unwrap();
    assert!((m.inverse / (c4() * 1e-5 * (1.0 - 1e-6)) - 1.0).abs() < 2e-12);
}

#[test]
fn nu_matching_expansion_gap() {
    // τ²A_q small: the gap is second order in τ²A_q and ε²/τ²
    let m = nu_matching(1e-3, 1e-2, 25.0).unwrap();
    assert!(m.relative_gap < 1e-2);
    assert!(m.relative_gap < 2.0 * (0.0025f64 + 0.01).powi(2));
    // τ²A_q = 1/4 is outside the expansion's range
    let m = nu_matching(1e-3, 1e-1, 25.0).unwrap();
    let exact: f64 = (1.0 - 0.25 - 1e-4 + 25e-6) * (1.0 + 1e-4) * 1.25;
    assert!((m.relative_gap - (1.0 - exact).abs()).abs() < 1e-12);
    assert!((m.relative_gap - 0.062_500_009_375).abs() < 1e-9);
}

#[test]
fn nu_matching_reciprocal_first_order() {
    let (tau, a_q) = (1e-2, 30.0);
    for eps in [1e-6, 1e-7] {
        let m = nu_matching(eps, tau, a_q).unwrap();
        let lhs = 1.0 / (m.nu * c4() * eps);
        assert!((lhs - (1.0 - tau * tau * a_q)).abs() < 2.0 * (tau * tau * a_q).powi(2));
    }
    assert!(nu_matching(1e-2, 1e-3, 1.0).is_err());
}

#[test]
fn boundary_flux_closed_form_and_sign() {
    for (eps, tau) in [(1e-3, 1e-1), (1e-2, 1e-2), (0.3, 0.05), (1.0, 2.0)] {
        let b = boundary_flux(eps, tau).unwrap();
        assert!(b.closed_form < 0.0);
        assert!(((b.quadrature - b.closed_form) / b.closed_form).abs() < 1e-8, "{b:?}");
    }
    assert!(boundary_flux(1e-3, 0.0).is_err());
}

#[test]
fn boundary_flux_leading_order() {
    let tau = 0.1;
    let mut prev = f64::INFINITY;
    for eps in [1e-2, 1e-3, 1e-4] {
        let b = boundary_flux(eps, tau).unwrap();
        let lead = -4.0 * PI * PI * c4().powi(2) * eps * eps / (tau * tau);
        let gap = (b.closed_form / lead - 1.0).abs();
        // next term is -3ε²/τ² relative
        assert!((gap - 3.0 * eps * eps / (tau * tau)).abs() < 10.0 * (eps / tau).powi(4));
        assert!(gap < prev);
        prev = gap;
    }
}

#[test]
fn exponent_constraints() {
    assert!(Exponents::new(0.6, 0.7).is_ok());
    assert!(Exponents::new(0.6, 0.9).is_err());
    assert!(Exponents::new(0.7, 0.6).is_err());
    assert!(Exponents::new(0.45, 0.55).is_err());
    assert!(Exponents::new(0.9, 1.0).is_err());
    let e = Exponents::default();
    assert!((e.deficit_power() - 0.8).abs() < 1e-15);
}

#[test]
fn descriptor_validation() {
    assert!(TestFunctionDescriptor::single(0.0, DELTA, Pole::North).is_err());
    assert!(TestFunctionDescriptor::single(1e-3, 1.0, Pole::North).is_err());
    assert!(TestFunctionDescriptor::double(1e-4, DELTA, DELTA, Pole::North).is_err());
    assert!(TestFunctionDescriptor::glued(1e-4, 0.5, 1e-5, DELTA, Pole::North).is_err());
    assert!(TestFunctionDescriptor::glued(1e-4, 2.0, 1e-2, DELTA, Pole::North).is_err());
    // gluing ball larger than the distance to the tip
    assert!(TestFunctionDescriptor::glued(1e-4, 0.01, 0.01, DELTA, Pole::North).is_err());
    assert!(TestFunctionDescriptor::interp(1e-4, 1.5, DELTA, Pole::North, Exponents::default()).is_err());
    assert!(TestFunctionDescriptor::interp(1e-2, 0.5, DELTA, Pole::North, Exponents::default()).is_err());
    let g = TestFunctionDescriptor::glued(1e-4, 0.5, 1e-2, DELTA, Pole::South).unwrap();
    assert!((g.a_q.unwrap() - 0.25 / 0.5f64.sin().powi(2)).abs() < 1e-15);
    assert!(g.nu_match.unwrap() > 0.0);
}

#[test]
fn single_band_near_local_constant() {
    let ys = y4() / 2f64.sqrt();
    let d = TestFunctionDescriptor::single(1e-2, 0.5, Pole::North).unwrap();
    let q = evaluate_quotient(&d, &path_spec()).unwrap();
    assert!(q.q > ys && q.q < ys + 0.5, "{q:?}");
    // approaches from above, deficit shrinking like ε²
    let mut prev = q.q - ys;
    for eps in [1e-3, 1e-4] {
        let d = TestFunctionDescriptor::single(eps, 0.5, Pole::North).unwrap();
        let q = evaluate_quotient(&d, &path_spec()).unwrap();
        let gap = q.q - ys;
        assert!(gap > 0.0 && gap < prev);
        prev = gap;
    }
    assert!(prev < 1e-3);
}

#[test]
fn single_is_double_at_zero_separation() {
    let spec = path_spec();
    let s = TestFunctionDescriptor::single(1e-3, DELTA, Pole::North).unwrap();
    let d = TestFunctionDescriptor::double(1e-3, 0.0, DELTA, Pole::North).unwrap();
    let (qs, qd) = (evaluate_quotient(&s, &spec).unwrap(), evaluate_quotient(&d, &spec).unwrap());
    assert!((qs.q - qd.q).abs() < 1e-9);
    // u_{ε,0} = 2φ: the L⁴ norm doubles
    assert!((qd.denominator / qs.denominator - 16.0).abs() < 1e-8);
    assert!(l4_distance(&s.clone().with_amplitude(2.0).unwrap(), &d, &spec).unwrap() < 1e-6);
}

#[test]
fn lift_factor_is_exact() {
    let spec = path_spec();
    for d in [
        TestFunctionDescriptor::single(1e-3, DELTA, Pole::North).unwrap(),
        TestFunctionDescriptor::double(1e-4, 3e-4, DELTA, Pole::South).unwrap(),
        TestFunctionDescriptor::double(2e-3, 1e-2, DELTA, Pole::North).unwrap(),
    ] {
        let c = lift_factor_check(&d, &spec).unwrap();
        assert!(c.relative_defect < 1e-9, "{c:?}");
        assert!((c.on_quotient.lifted - c.on_lift.q).abs() < 1e-8 * c.on_lift.q);
    }
    let g = TestFunctionDescriptor::glued(1e-4, 0.5, 1e-2, DELTA, Pole::North).unwrap();
    assert!(lift_factor_check(&g, &spec).is_err());
}

#[test]
fn double_matches_flat_interaction_curve() {
    // the curvature and cutoff corrections are O(ε²), so the gap falls 100x per decade
    let spec = path_spec();
    for k in [0.5, 3.0, 10.0] {
        let f = curve_point(1.0, k, &default_spec()).unwrap();
        let target = f.f / 2f64.sqrt();
        let mut gaps = Vec::new();
        for eps in [1e-3, 1e-4] {
            let d = TestFunctionDescriptor::double(eps, k * eps, DELTA, Pole::North).unwrap();
            let q = evaluate_quotient(&d, &spec).unwrap();
            gaps.push(q.q / target - 1.0);
        }
        assert!(gaps[1].abs() < 5e-5, "{gaps:?}");
        let ratio = gaps[0] / gaps[1];
        assert!((ratio - 100.0).abs() < 5.0, "{ratio}");
    }
}

#[test]
fn glued_below_critical_level() {
    // deficit ≈ 4A·A_q·ε² with A_q = 1/(4 sin²t)
    let spec = path_spec();
    let e = Exponents::default();
    for t in [0.05, 0.5, PI / 2.0] {
        let eps = 3e-5;
        let d = TestFunctionDescriptor::glued(eps, t, e.tau_of(t.min(DELTA / 2.0)), DELTA, Pole::North).unwrap();
        let q = evaluate_quotient(&d, &spec).unwrap();
        let deficit = y4() - q.q;
        assert!(deficit > 3.0 * q.error);
        let model = big_a() / t.sin().powi(2) * eps * eps;
        assert!((deficit / model - 1.0).abs() < 1e-2, "{t}: {deficit} vs {model}");
    }
}

#[test]
fn glued_chart_switch_is_isometric() {
    let spec = path_spec();
    let (n, s) = (
        TestFunctionDescriptor::glued(1e-4, PI / 2.0, 5e-3, DELTA, Pole::North).unwrap(),
        TestFunctionDescriptor::glued(1e-4, PI / 2.0, 5e-3, DELTA, Pole::South).unwrap(),
    );
    let (qn, qs) = (evaluate_quotient(&n, &spec).unwrap(), evaluate_quotient(&s, &spec).unwrap());
    assert!((qn.q - qs.q).abs() < 1e-12 * qn.q);
    assert!(l4_distance(&n, &s, &spec).unwrap() < 1e-8);
}

#[test]
fn legs_join_continuously() {
    let spec = path_spec();
    let e = Exponents::default();
    let eps: f64 = 1e-4;
    let t = eps.powf(e.alpha);
    let pairs = [
        (
            TestFunctionDescriptor::double(eps, t, DELTA, Pole::North).unwrap(),
            TestFunctionDescriptor::interp(eps, 0.0, DELTA, Pole::North, e).unwrap(),
        ),
        (
            TestFunctionDescriptor::interp(eps, 1.0, DELTA, Pole::North, e).unwrap(),
            TestFunctionDescriptor::glued(eps, t, e.tau_of(t), DELTA, Pole::North).unwrap(),
        ),
    ];
    for (a, b) in &pairs {
        assert!(l4_distance(a, b, &spec).unwrap() < 1e-10);
    }
}

#[test]
fn neighbour_distance_shrinks_with_step() {
    let spec = path_spec();
    let eps = 1e-4;
    let e = Exponents::default();
    let at = |mu: f64| descriptor_at(mu, eps, &e, DELTA).unwrap().1;
    for mu in [0.5, 1.5, 2.3] {
        let mut prev = f64::INFINITY;
        for h in [1e-2, 2.5e-3, 6.25e-4] {
            // on the middle leg the bubble moves by ~πh, so probe below ε
            let h = if mu > 2.0 { h * 1e-3 } else { h };
            let d = l4_distance(&at(mu), &at(mu + h), &spec).unwrap();
            assert!(d < 0.5 * prev, "{mu} {h}: {d} vs {prev}");
            prev = d;
        }
    }
}

#[test]
fn path_descriptor_legs() {
    let e = Exponents::default();
    let eps: f64 = 1e-5;
    let te = eps.powf(0.6);
    let expect = [
        (0.0, 1, Variant::Double, Pole::North, 0.0),
        (0.5, 1, Variant::Double, Pole::North, 0.5 * te),
        (1.5, 2, Variant::Interp, Pole::North, te),
        (2.25, 3, Variant::Glued, Pole::North, te + 0.25 * (PI - 2.0 * te)),
        (2.75, 3, Variant::Glued, Pole::South, te + 0.25 * (PI - 2.0 * te)),
        (3.5, 4, Variant::Interp, Pole::South, te),
        (4.75, 5, Variant::Double, Pole::South, 0.25 * te),
    ];
    for (mu, leg, variant, pole, t) in expect {
        let (l, d) = descriptor_at(mu, eps, &e, DELTA).unwrap();
        assert_eq!((l, d.variant, d.pole), (leg, variant, pole), "{mu}");
        assert!((d.t - t).abs() < 1e-12, "{mu}: {} vs {t}", d.t);
    }
    let (_, d) = descriptor_at(3.5, eps, &e, DELTA).unwrap();
    assert!((d.lambda.unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn build_path_rejects_large_epsilon() {
    let r = build_path(1e-2, &Exponents::default(), DELTA, &PathOptions::default());
    assert!(matches!(r, Err(Error::InvalidParameter(_))));
}

#[test]
fn path_leg_failure_names_mu() {
    let options = PathOptions {
        grid: 6,
        spec: QuadratureSpec {
            rel_tol: 1e-14,
            abs_tol: 0.0,
            max_subdivisions: 4,
            grading: None,
        },
        continuity: false,
    };
    match build_path(1e-5, &Exponents::default(), DELTA, &options) {
        Err(Error::PathLeg { mu, .. }) => assert!((0.0..=5.0).contains(&mu)),
        other => panic!("expected a leg failure, got {other:?}"),
    }
}

#[test]
fn short_path_is_subcritical() {
    let options = PathOptions {
        grid: 11,
        ..Default::default()
    };
    let p = build_path(3e-5, &Exponents::default(), DELTA, &options).unwrap();
    assert!(p.subcritical(3.0));
    assert!(p.margin > 0.0);
    assert_eq!(p.samples.len(), 11);
    assert!((p.endpoints.0.q - p.endpoints.1.q).abs() < 1e-9);
    assert!((p.argmax_mu - 2.5).abs() < 1e-12);
    for (mu, gap) in &p.transitions {
        assert!(*gap < 1e-8, "{mu}: {gap}");
    }
}

#[test]
fn double_expansion_constant() {
    let e = Exponents::default();
    let fit = fit_expansion_a(FitLeg::Double, &e, DELTA, &[4e-5, 2e-5, 1e-5, 5e-6], &path_spec()).unwrap();
    assert!((fit.a_hat / big_a() - 1.0).abs() < 0.05, "{fit:?}");
    assert!((fit.exponent / 0.8 - 1.0).abs() < 0.05, "{fit:?}");
}

#[test]
fn lambda_continuity_is_lipschitz() {
    let c = lambda_continuity(3e-5, &Exponents::default(), DELTA, 8, &path_spec()).unwrap();
    assert_eq!(c.values.len(), 9);
    // Q varies by O(ε^{0.8}) along the interpolation
    assert!(c.lipschitz < 10.0 * big_a() * 3e-5f64.powf(0.8), "{c:?}");
    assert!(c.max_step <= c.lipschitz / 8.0 + 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn quotient_is_scale_invariant(amp in 1e-3f64..1e3, k in 0.0f64..5.0, leg in 0usize..3) {
        let eps = 1e-3;
        let d = match leg {
            0 => TestFunctionDescriptor::single(eps, DELTA, Pole::North).unwrap(),
            1 => TestFunctionDescriptor::double(eps, k * eps, DELTA, Pole::North).unwrap(),
            _ => TestFunctionDescriptor::glued(1e-4, 0.2 + 0.2 * k, 5e-3, DELTA, Pole::North).unwrap(),
        };
        let base = evaluate_quotient(&d, &loose()).unwrap();
        let scaled = evaluate_quotient(&d.clone().with_amplitude(amp).unwrap(), &loose()).unwrap();
        prop_assert!((base.q - scaled.q).abs() < 1e-11 * base.q);
    }

    #[test]
    fn double_quotient_below_two_bubbles(k in 0.0f64..20.0) {
        let d = TestFunctionDescriptor::double(1e-4, k * 1e-4, DELTA, Pole::North).unwrap();
        let q = evaluate_quotient(&d, &loose()).unwrap();
        prop_assert!(q.q > y4() / 2f64.sqrt());
        prop_assert!(q.q < y4());
    }
}
