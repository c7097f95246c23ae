use cylyamabe::constants::sobolev_constants;
use cylyamabe::interaction::*;
use proptest::prelude::*;

#[test]
fn small_separation_approaches_coincident_limit() {
    let spec = default_spec();
    let lim = coincident_limit();
    let p = curve_point(1.0, 1e-3, &spec).unwrap();
    assert!((p.a / lim.a - 1.0).abs() < 1e-4, "{} {}", p.a, lim.a);
    assert!((p.b / lim.b - 1.0).abs() < 1e-4, "{} {}", p.b, lim.b);
    assert!((p.c - 1.0).abs() < 1e-4, "{}", p.c);
    assert!((p.f / lim.f - 1.0).abs() < 1e-5);
}

#[test]
fn large_separation_decouples() {
    let k = sobolev_constants();
    let p = curve_point(1.0, 1e3, &default_spec()).unwrap();
    let far = 6.0 * 2f64.sqrt() * k.s4;
    assert!(p.f < far);
    assert!((p.f / far - 1.0).abs() < 1e-5, "{}", p.f);
}

#[test]
fn f_increases_between_the_limits() {
    let spec = default_spec();
    let ts = [0.1, 0.5, 2.0, 10.0, 50.0];
    let fs: Vec<f64> = ts.iter().map(|&t| curve_point(1.0, t, &spec).unwrap().f).collect();
    for w in fs.windows(2) {
        assert!(w[1] > w[0], "{:?}", fs);
    }
}

#[test]
fn u3v_far_field() {
    // ∫U³V ≈ (B/S4)(ε/t)² for t ≫ ε
    let t = 200.0;
    let r = interaction_integral(InteractionKind::U3V, 1.0, t, &default_spec()).unwrap();
    let pred = 0.75 / (t * t);
    assert!((r.value / pred - 1.0).abs() < 1e-3, "{} {}", r.value, pred);
}

#[test]
fn rejects_bad_separation() {
    let spec = default_spec();
    assert!(interaction_integral(InteractionKind::Grad, 1.0, 0.0, &spec).is_err());
    assert!(interaction_integral(InteractionKind::Grad, 0.0, 1.0, &spec).is_err());
    assert!(verify_b_prime_identity(1.0, 0.5, 0.6, &spec).is_err());
    assert!(verify_monotonicity(1.0, &[1.0, 0.5], &spec).is_err());
}

#[test]
fn slope_fit_input_validation() {
    let spec = default_spec();
    let t = SlopeTarget::FCurve;
    assert!(asymptotic_slope(t, 1.0, &[20.0], &spec).is_err());
    assert!(asymptotic_slope(t, 1.0, &[20.0, 30.0], &spec).is_err());
    assert!(asymptotic_slope(t, 1.0, &[5.0, 10.0], &spec).is_err());
}

#[test]
fn slopes_match_closed_forms() {
    let spec = default_spec();
    let ts = [20.0, 40.0, 80.0, 160.0];
    // f carries (ε/t)⁴ corrections that still show at t = 20
    for (target, tol) in [
        (SlopeTarget::FCurve, 1e-2),
        (SlopeTarget::Integral(InteractionKind::Grad), 5e-3),
        (SlopeTarget::Integral(InteractionKind::U3V), 5e-3),
    ] {
        let fit = asymptotic_slope(target, 1.0, &ts, &spec).unwrap();
        assert!(fit.relative_error() < tol, "{}: {} vs {}", target.name(), fit.coeff, fit.predicted);
    }
}

#[test]
fn b_prime_identity() {
    let spec = default_spec();
    for t in [0.3, 1.0, 4.0] {
        let c = verify_b_prime_identity(1.0, t, default_fd_step(t), &spec).unwrap();
        assert!(c.residual < 1e-4 + 3.0 * c.noise, "t = {t}: {:?}", c);
    }
}

#[test]
fn derivatives_are_negative_and_agree() {
    let rep = verify_monotonicity(1.0, &[0.2, 1.0, 5.0], &default_spec()).unwrap();
    assert!(rep.passed(), "{:?}", rep.first_violation.map(|i| rep.rows[i]));
}

#[test]
fn derivative_bracket_sign() {
    // y is closer to 2tν than to -2tν when ζ > 0
    for (z, rho) in [(0.5, 0.1), (1.0, 2.0), (3.0, 0.0)] {
        assert!(a_prime_bracket(z, rho, 0.7) > 0.0);
    }
}

#[test]
fn curves_match_pointwise() {
    let spec = default_spec();
    let grid = [0.5, 3.0];
    let c = curves(2.0, &grid, &spec).unwrap();
    assert_eq!(c.len(), 2);
    for (i, &t) in grid.iter().enumerate() {
        let p = curve_point(2.0, t, &spec).unwrap();
        assert_eq!(c.point(i).f, p.f);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn scale_invariance(eps in 0.05f64..20.0, s in 0.1f64..50.0) {
        let spec = default_spec();
        let a = curve_point(eps, s * eps, &spec).unwrap();
        let b = curve_point(1.0, s, &spec).unwrap();
        prop_assert!((a.f / b.f - 1.0).abs() < 1e-10);
        prop_assert!((a.c - b.c).abs() < 1e-10);
    }

    #[test]
    fn bracket_between_limits(s in 0.01f64..500.0) {
        let k = sobolev_constants();
        let p = curve_point(1.0, s, &default_spec()).unwrap();
        prop_assert!(p.f > 6.0 * k.s4 - 1e-9);
        prop_assert!(p.f < 6.0 * 2f64.sqrt() * k.s4);
    }
}
