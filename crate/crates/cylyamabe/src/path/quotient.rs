//! Yamabe quotients of lifted test functions by adaptive quadrature in
//! geodesic polar coordinates.

use super::profile::{Frame, Profile};
use super::{TestFunctionDescriptor, Variant};
use crate::constants::CONFORMAL_A;
use crate::error::{invalid, Error, Result};
use crate::green::smooth_step;
use crate::quadrature::{integrate_2d_many, Axis, AxisCell, IntegralResult, QuadratureSpec};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

/// Scalar curvature of the round 𝕊⁴.
const SCALAR: f64 = 12.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuotientValue {
    /// Yamabe quotient on the football.
    pub q: f64,
    pub error: f64,
    /// Quotient of the lift on 𝕊⁴, `√2·q`.
    pub lifted: f64,
    /// `∫_M 6|∇u|² + R u²` and `∫_M u⁴`.
    pub numerator: f64,
    pub denominator: f64,
    pub evaluations: usize,
}

/// Tolerances used for path quotients unless overridden.
pub fn path_spec() -> QuadratureSpec {
    QuadratureSpec {
        rel_tol: 1e-12,
        abs_tol: 0.0,
        max_subdivisions: 400_000,
        grading: None,
    }
}

fn merged_axis(lo: f64, hi: f64, centers: &[(f64, f64)], breaks: &[f64]) -> Axis {
    let graded = Axis::graded(lo, hi, centers);
    let mut pts: Vec<f64> = graded
        .cells
        .iter()
        .filter_map(|c| match c {
            AxisCell::Finite(a, _) => Some(*a),
            _ => None,
        })
        .collect();
    pts.extend_from_slice(breaks);
    Axis::with_breaks(lo, hi, &pts)
}

/// `[∫|∇h|², ∫h², ∫h⁴]` over the football, or over the whole lift.
fn football_integrals(profile: &Profile, spec: &QuadratureSpec, full_lift: bool) -> [IntegralResult; 3] {
    let eps = profile.epsilon();
    let t = profile.t;
    let four_pi = 4.0 * PI;
    match profile.variant {
        Variant::Single | Variant::Double => {
            let hi = profile.support().min(PI);
            let mut r_centers = vec![(0.0, eps)];
            let mut th_centers = Vec::new();
            if t > 0.0 {
                r_centers.push((t, eps));
                th_centers.push((0.0, (eps / t).min(1.0)));
                if full_lift {
                    th_centers.push((PI, (eps / t).min(1.0)));
                }
            }
            let ar = merged_axis(0.0, hi, &r_centers, &profile.pole_breaks());
            // a fundamental domain of y ↦ -y is θ ≤ π/2
            let th_hi = if full_lift { PI } else { FRAC_PI_2 };
            let ath = merged_axis(0.0, th_hi, &th_centers, &[]);
            integrate_2d_many(
                |r, th| {
                    let ((h, hr, hth), _) = profile.jet(Frame::Pole, r, th);
                    let (sr, sth) = (r.sin(), th.sin());
                    let w = four_pi * sr * sr * sr * sth * sth;
                    let grad = hr * hr + hth * hth / (sr * sr);
                    let h2 = h * h;
                    [w * grad, w * h2, w * h2 * h2]
                },
                &ar,
                &ath,
                spec,
            )
        }
        Variant::Glued | Variant::Interp => {
            // the smooth weight η(x₁) + η(-x₁) = 1 separates q from its image
            let core = profile.core_radius().unwrap_or(0.0);
            let a = 0.5 * (t - core).sin();
            let mut breaks = profile.center_breaks();
            breaks.extend([t, 2.0 * t]);
            let ar = merged_axis(0.0, PI, &[(0.0, eps)], &breaks);
            let ap = merged_axis(0.0, PI, &[], &[0.25 * PI, 0.5 * PI, 0.75 * PI]);
            integrate_2d_many(
                |s, psi| {
                    let ((h, hs, hp), x1) = profile.jet(Frame::Center, s, psi);
                    let eta = smooth_step((x1 + a) / (2.0 * a)).0;
                    if eta == 0.0 {
                        return [0.0; 3];
                    }
                    let (ss, sp) = (s.sin(), psi.sin());
                    let w = eta * four_pi * ss * ss * ss * sp * sp;
                    let grad = hs * hs + hp * hp / (ss * ss);
                    let h2 = h * h;
                    [w * grad, w * h2, w * h2 * h2]
                },
                &ar,
                &ap,
                spec,
            )
        }
    }
}

fn assemble(ints: [IntegralResult; 3]) -> Result<QuotientValue> {
    let [e, m2, m4] = ints;
    for r in [&e, &m2, &m4] {
        if !r.converged {
            return Err(Error::NotConverged {
                value: r.value,
                error: r.error_estimate,
                evaluations: r.evaluations,
            });
        }
    }
    let num = CONFORMAL_A * e.value + SCALAR * m2.value;
    let num_err = CONFORMAL_A * e.error_estimate + SCALAR * m2.error_estimate;
    let den = m4.value;
    if !(den > 0.0) {
        return Err(invalid("test function vanishes identically"));
    }
    let q = num / den.sqrt();
    let error = q.abs() * (num_err / num.abs() + 0.5 * m4.error_estimate / den);
    Ok(QuotientValue {
        q,
        error,
        lifted: SQRT_2 * q,
        numerator: num,
        denominator: den,
        evaluations: e.evaluations,
    })
}

/// `Q_g(u) = (∫6|∇u|² + R u²)/(∫u⁴)^{1/2}` on the football, by quadrature
/// of the lift over a fundamental domain of the covering involution.
pub fn evaluate_quotient(d: &TestFunctionDescriptor, spec: &QuadratureSpec) -> Result<QuotientValue> {
    let profile = Profile::new(d);
    if matches!(d.variant, Variant::Glued | Variant::Interp) && profile.core_radius().is_none() {
        return Err(invalid("glued descriptor is missing its matching data"));
    }
    assemble(football_integrals(&profile, spec, false))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftFactorCheck {
    pub on_quotient: QuotientValue,
    pub on_lift: QuotientValue,
    /// `|√2·Q_M / Q_lift - 1|`.
    pub relative_defect: f64,
}

/// Computes a pole-supported quotient once over a fundamental domain and
/// once over the whole lift.
pub fn lift_factor_check(d: &TestFunctionDescriptor, spec: &QuadratureSpec) -> Result<LiftFactorCheck> {
    if !matches!(d.variant, Variant::Single | Variant::Double) {
        return Err(invalid("the lift check needs a function supported in one conical chart"));
    }
    let profile = Profile::new(d);
    let on_quotient = assemble(football_integrals(&profile, spec, false))?;
    let on_lift = assemble(football_integrals(&profile, spec, true))?;
    Ok(LiftFactorCheck {
        on_quotient,
        on_lift,
        relative_defect: (SQRT_2 * on_quotient.q / on_lift.q - 1.0).abs(),
    })
}

/// `‖a - b‖_{L⁴}/‖a‖_{L⁴}` over the football.
pub fn l4_distance(a: &TestFunctionDescriptor, b: &TestFunctionDescriptor, spec: &QuadratureSpec) -> Result<f64> {
    let (pa, pb) = (Profile::new(a), Profile::new(b));
    let pole = a.pole;
    let place = |d: &TestFunctionDescriptor| if d.pole == pole { d.t } else { PI - d.t };
    let mut r_centers = vec![];
    for d in [a, b] {
        let scale = d.epsilon;
        r_centers.push((place(d), scale));
        if d.pole == pole {
            r_centers.push((0.0, scale));
        } else {
            r_centers.push((PI, scale));
        }
    }
    let min_angle = [a, b]
        .iter()
        .filter(|d| d.t > 0.0)
        .map(|d| (d.epsilon / d.t.min(PI - d.t)).min(1.0))
        .fold(1.0, f64::min);
    let mut breaks: Vec<f64> = Vec::new();
    for (p, d) in [(&pa, a), (&pb, b)] {
        let flip = |x: f64| if d.pole == pole { x } else { PI - x };
        breaks.extend(p.pole_breaks().into_iter().map(flip));
    }
    let ar = merged_axis(0.0, PI, &r_centers, &breaks);
    let ath = merged_axis(0.0, FRAC_PI_2, &[(0.0, min_angle)], &[]);
    let [diff, base] = integrate_2d_many(
        |r, th| {
            let w = 4.0 * PI * r.sin().powi(3) * th.sin().powi(2);
            let va = pa.value_at(pole, r, th);
            let vb = pb.value_at(pole, r, th);
            [w * (va - vb).powi(4), w * va.powi(4)]
        },
        &ar,
        &ath,
        &QuadratureSpec {
            rel_tol: spec.rel_tol.max(1e-8),
            abs_tol: spec.abs_tol.max(1e-30),
            ..*spec
        },
    );
    if !(base.value > 0.0) {
        return Err(invalid("reference function vanishes identically"));
    }
    Ok((diff.value.max(0.0) / base.value).powf(0.25))
}
