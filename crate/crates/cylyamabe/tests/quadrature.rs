use cylyamabe::constants::{c4, profile, FlatBubble};
use cylyamabe::quadrature::*;
use std::f64::consts::PI;

fn spec() -> QuadratureSpec {
    QuadratureSpec::with_tol(1e-11, 1e-15)
}

#[test]
fn kronrod_rule_is_exact_to_degree_22() {
    // Gauss part exact to degree 13
    for deg in 0..=23u32 {
        let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
        let r = integrate_axis(|x| x.powi(deg as i32), &Axis::finite(-1.0, 1.0), &QuadratureSpec { max_subdivisions: 1, ..spec() });
        if deg <= 22 {
            assert!((r.value - exact).abs() < 1e-14, "deg {deg}: {} vs {exact}", r.value);
        }
        if deg <= 13 {
            assert!(r.error_estimate < 1e-14, "deg {deg}: err {}", r.error_estimate);
        }
    }
}

#[test]
fn radial_examples() {
    let r = integrate_radial(|r| r.powi(3), RadialInterval::Finite(1.0), &spec());
    assert!((r.value - 0.25).abs() < 1e-14);
    let r = integrate_radial(|r| r.powi(3) / (1.0 + r * r).powi(4), RadialInterval::Infinite, &spec());
    assert!(r.converged);
    assert!((r.value - 1.0 / 12.0).abs() < 1e-12, "{}", r.value);
    let r = integrate_radial(|r| profile(r).powi(4) * 2.0 * PI * PI * r.powi(3), RadialInterval::Infinite, &spec());
    assert!((r.value - 1.0).abs() < 1e-10, "{}", r.value);
}

#[test]
fn dirichlet_energy_of_bubble_is_sobolev_constant() {
    let r = integrate_radial(
        |r| {
            let d = -2.0 * c4() * r / (1.0 + r * r).powi(2);
            d * d * 2.0 * PI * PI * r.powi(3)
        },
        RadialInterval::Infinite,
        &spec(),
    );
    assert!((r.value - cylyamabe::constants::s4()).abs() < 1e-8);
}

#[test]
fn biradial_examples() {
    let d = BiradialDomain { zeta: (0.0, 1.0), rho_max: 1.0, centers: vec![] };
    let r = integrate_biradial(|_, _| 1.0, &d, &spec());
    assert!((r.value - 4.0 * PI / 3.0).abs() < 1e-13);
    let t = 7.0;
    let d = BiradialDomain::whole_space(vec![(t, 1.0)]);
    let r = integrate_biradial(|z, p| profile(((z - t).powi(2) + p * p).sqrt()).powi(4), &d, &spec());
    assert!(r.converged, "{r:?}");
    assert!((r.value - 1.0).abs() < 1e-9, "{r:?}");
    let t = 50.0;
    let d = BiradialDomain::whole_space(vec![(t, 1.0), (-t, 1.0)]);
    let r = integrate_biradial(
        |z, p| profile(((z - t).powi(2) + p * p).sqrt()).powi(3) * profile(((z + t).powi(2) + p * p).sqrt()),
        &d,
        &spec(),
    );
    let approx = 0.75 / (t * t);
    assert!((r.value / approx - 1.0).abs() < 0.02, "{} vs {approx}", r.value);
}

#[test]
fn ball_and_sphere_examples() {
    let s = QuadratureSpec::with_tol(1e-9, 1e-14);
    let r = integrate_ball4(|_| 1.0, 1.0, &s);
    assert!((r.value - PI * PI / 2.0).abs() < 1e-10);
    let r = integrate_ball4(|x| x.iter().map(|v| v * v).sum(), 1.0, &s);
    assert!((r.value - PI * PI / 3.0).abs() < 1e-10);
    let b = FlatBubble::standard();
    let r = integrate_ball4(|x| b.value(x).powi(4), 10.0, &s);
    assert!((1.0 - r.value) > 0.0 && (1.0 - r.value) < 1e-3, "{}", r.value);
    let r = integrate_sphere3(|_| 1.0, 1.0, &[0.0; 4], &s);
    assert!((r.value - 2.0 * PI * PI).abs() < 1e-12);
    let r = integrate_sphere3(|x| x[2], 0.7, &[0.0, 0.0, 0.3, 0.0], &s);
    assert!((r.value - 0.3 * 2.0 * PI * PI * 0.343).abs() < 1e-12);
}
