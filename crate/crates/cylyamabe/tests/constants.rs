use cylyamabe::constants::*;
use cylyamabe::quadrature::{integrate_radial, QuadratureSpec, RadialInterval};
use proptest::prelude::*;
use std::f64::consts::PI;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn closed_forms() {
    let k = sobolev_constants();
    let s6 = 6f64.sqrt();
    assert!(close(k.c4, (6.0 / (PI * PI)).powf(0.25), 1e-15));
    assert!(close(k.s4, 8.0 * PI / s6, 1e-15));
    assert!(close(k.y4, 48.0 * PI / s6, 1e-15));
    assert!(close(k.ys, 48.0 * PI / (s6 * 2f64.sqrt()), 1e-15));
    assert!(close(k.a, 6.0 * PI * s6, 1e-15));
    assert!(close(k.b, PI * s6, 1e-15));
    assert!((k.b / k.s4 - 0.75).abs() < 1e-15);
    assert_eq!(c4(), k.c4);
    assert_eq!(s4(), k.s4);
}

#[test]
fn frozen_decimals() {
    let k = sobolev_constants();
    assert!((k.s4 - 10.260_398_6).abs() < 1e-7);
    assert!((k.y4 - 61.562_391_8).abs() < 1e-7);
    assert!((k.ys - 43.531_184_7).abs() < 1e-7);
    assert!((k.a - 46.171_793_9).abs() < 1e-6);
    assert!((k.b - 7.695_299_0).abs() < 1e-6);
}

#[test]
fn quadrature_reproduces_closed_forms() {
    let spec = QuadratureSpec {
        rel_tol: 1e-15,
        abs_tol: 0.0,
        max_subdivisions: 10_000,
        grading: None,
    };
    let n = constants_by_quadrature(&spec).unwrap();
    let k = sobolev_constants();
    assert!(n.deviation < 1e-12, "{}", n.deviation);
    assert!(close(n.s4, k.s4, 1e-12));
    assert!(close(n.a, k.a, 1e-12));
    assert!((n.b_over_s4 - 0.75).abs() < 1e-12);
    assert!(n.evaluations > 0);
}

#[test]
fn bubble_is_l4_normalized() {
    // 2π² ∫ U(r)⁴ r³ dr with U = c4/(1 + r²)
    let k = c4();
    let r = integrate_radial(
        |r| 2.0 * PI * PI * k.powi(4) * r.powi(3) / (1.0 + r * r).powi(4),
        RadialInterval::Infinite,
        &QuadratureSpec::with_tol(1e-13, 0.0),
    );
    assert!((r.value - 1.0).abs() < 1e-12, "{}", r.value);
}

#[test]
fn energy_levels() {
    let k = sobolev_constants();
    assert!(close(energy_level(1, 0).unwrap(), k.ys, 1e-15));
    assert!(close(energy_level(0, 1).unwrap(), k.y4, 1e-15));
    assert!(close(energy_level(2, 0).unwrap(), k.y4, 1e-15));
    assert!(energy_level(0, 0).is_err());
    assert!(energy_level(3, 0).unwrap() < energy_level(0, 2).unwrap());
}

#[test]
fn bubble_rejects_bad_scale() {
    assert!(FlatBubble::new(0.0, [0.0; 4]).is_err());
    assert!(FlatBubble::new(f64::NAN, [0.0; 4]).is_err());
    assert!(double_bubble_value(1.0, 0.5, &[1.0, 1.0, 0.0, 0.0], &[0.0; 4]).is_err());
    assert!(double_bubble_value(1.0, -0.5, &[1.0, 0.0, 0.0, 0.0], &[0.0; 4]).is_err());
}

#[test]
fn double_bubble_at_zero_separation_doubles() {
    let p = [0.3, -0.2, 0.1, 0.4];
    let b = FlatBubble::new(0.7, [0.0; 4]).unwrap();
    let d = double_bubble_value(0.7, 0.0, &[0.0, 1.0, 0.0, 0.0], &p).unwrap();
    assert!(close(d, 2.0 * b.value(&p), 1e-15));
}

fn point() -> impl Strategy<Value = Point> {
    prop::array::uniform4(-2.0f64..2.0)
}

proptest! {
    #[test]
    fn gradient_matches_differences(eps in 0.2f64..3.0, c in point(), p in point()) {
        let b = FlatBubble::new(eps, c).unwrap();
        let g = bubble_gradient(&b, &p).unwrap();
        let h = 1e-5;
        for i in 0..4 {
            let mut a = p;
            let mut m = p;
            a[i] += h;
            m[i] -= h;
            let fd = (b.value(&a) - b.value(&m)) / (2.0 * h);
            prop_assert!((fd - g[i]).abs() < 1e-7 * (1.0 + g[i].abs()) / eps.powi(3), "{} {} {}", i, fd, g[i]);
        }
    }

    #[test]
    fn bubble_solves_yamabe_equation(eps in 0.3f64..3.0, r in 0.05f64..4.0) {
        // -ΔU = S4 U³, Laplacian of a radial function in R⁴
        let b = FlatBubble::new(eps, [0.0; 4]).unwrap();
        let u = |s: f64| b.value(&[s, 0.0, 0.0, 0.0]);
        let h = 1e-4 * eps;
        let upp = (u(r + h) - 2.0 * u(r) + u(r - h)) / (h * h);
        let up = (u(r + h) - u(r - h)) / (2.0 * h);
        let lap = upp + 3.0 * up / r;
        let rhs = s4() * u(r).powi(3);
        prop_assert!((-lap - rhs).abs() < 1e-5 * rhs.abs().max(1e-3) / eps.powi(3), "{} {}", -lap, rhs);
    }

    #[test]
    fn bubble_scaling(eps in 0.1f64..10.0, p in point()) {
        let b = FlatBubble::new(eps, [0.0; 4]).unwrap();
        let s = FlatBubble::standard();
        let q = p.map(|x| x / eps);
        prop_assert!(close(b.value(&p), s.value(&q) / eps, 1e-14));
    }

    #[test]
    fn double_bubble_is_even(eps in 0.1f64..2.0, t in 0.0f64..2.0, p in point()) {
        let nu = [0.0, 0.0, 1.0, 0.0];
        let a = double_bubble_value(eps, t, &nu, &p).unwrap();
        let m = double_bubble_value(eps, t, &nu, &p.map(|x| -x)).unwrap();
        prop_assert!(close(a, m, 1e-14));
    }
}
