//! Energy curves of the antipodal double bubble `Û = U(· - tν) + U(· + tν)`.
//!
//! With `X = ∫U₊³U₋`, `Y = ∫U₊²U₋²` and `D = ∫∇U₊·∇U₋`:
//! `a = 12S₄ + 12D`, `b² = 2 + 8X + 6Y`, `c = Y`, `f = a/b`.
//! All four curves are invariant under `(ε, t) ↦ (λε, λt)`, so everything
//! is computed at `ε = 1`.

use crate::constants::{profile, profile_dr_over_r, s4, sobolev_constants};
use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate_biradial, BiradialDomain, IntegralResult, QuadratureSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InteractionKind {
    U3V,
    Grad,
    U2V2,
}

impl InteractionKind {
    pub fn name(&self) -> &'static str {
        match self {
            InteractionKind::U3V => "U3V",
            InteractionKind::Grad => "GRAD",
            InteractionKind::U2V2 => "U2V2",
        }
    }
}

/// Interaction tolerance used by the curve routines unless overridden.
pub fn default_spec() -> QuadratureSpec {
    QuadratureSpec {
        rel_tol: 1e-12,
        abs_tol: 1e-16,
        max_subdivisions: 20_000,
        grading: None,
    }
}

#[inline]
fn r_pm(z: f64, rho: f64, t: f64) -> (f64, f64) {
    let rr = rho * rho;
    (((z - t) * (z - t) + rr).sqrt(), ((z + t) * (z + t) + rr).sqrt())
}

fn domain(t: f64) -> BiradialDomain {
    if t < 0.5 {
        BiradialDomain::whole_space(vec![(0.0, 1.0)])
    } else {
        BiradialDomain::whole_space(vec![(t, 1.0), (-t, 1.0)])
    }
}

fn check_t(epsilon: f64, t: f64) -> Result<()> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(invalid(format!("t must be positive, got {t}")));
    }
    Ok(())
}

/// One interaction integral over ℝ⁴ for the pair `U_{ε,±tν}`.
pub fn interaction_integral(
    kind: InteractionKind,
    epsilon: f64,
    t: f64,
    spec: &QuadratureSpec,
) -> Result<IntegralResult> {
    check_t(epsilon, t)?;
    let t = t / epsilon;
    let d = domain(t);
    let res = match kind {
        InteractionKind::U3V => integrate_biradial(
            |z, p| {
                let (rp, rm) = r_pm(z, p, t);
                profile(rp).powi(3) * profile(rm)
            },
            &d,
            spec,
        ),
        InteractionKind::U2V2 => integrate_biradial(
            |z, p| {
                let (rp, rm) = r_pm(z, p, t);
                (profile(rp) * profile(rm)).powi(2)
            },
            &d,
            spec,
        ),
        InteractionKind::Grad => integrate_biradial(
            |z, p| {
                let (rp, rm) = r_pm(z, p, t);
                // (y - tν)·(y + tν) = |y|² - t²
                profile_dr_over_r(rp) * profile_dr_over_r(rm) * (z * z + p * p - t * t)
            },
            &d,
            spec,
        ),
    };
    if !res.converged {
        return Err(Error::NotConverged {
            value: res.value,
            error: res.error_estimate,
            evaluations: res.evaluations,
        });
    }
    Ok(res)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub t: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub f: f64,
    pub a_err: f64,
    pub b_err: f64,
    pub c_err: f64,
    pub f_err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteractionCurves {
    pub epsilon: f64,
    pub t_grid: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub f: Vec<f64>,
    pub a_err: Vec<f64>,
    pub b_err: Vec<f64>,
    pub c_err: Vec<f64>,
    pub f_err: Vec<f64>,
}

impl InteractionCurves {
    pub fn point(&self, i: usize) -> CurvePoint {
        CurvePoint {
            t: self.t_grid[i],
            a: self.a[i],
            b: self.b[i],
            c: self.c[i],
            f: self.f[i],
            a_err: self.a_err[i],
            b_err: self.b_err[i],
            c_err: self.c_err[i],
            f_err: self.f_err[i],
        }
    }

    pub fn len(&self) -> usize {
        self.t_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_grid.is_empty()
    }
}

/// `a, b, c, f` at a single separation.
pub fn curve_point(epsilon: f64, t: f64, spec: &QuadratureSpec) -> Result<CurvePoint> {
    let k = s4();
    let x = interaction_integral(InteractionKind::U3V, epsilon, t, spec)?;
    let d = interaction_integral(InteractionKind::Grad, epsilon, t, spec)?;
    let y = interaction_integral(InteractionKind::U2V2, epsilon, t, spec)?;
    let a = 12.0 * k + 12.0 * d.value;
    let a_err = 12.0 * d.error_estimate;
    let b2 = 2.0 + 8.0 * x.value + 6.0 * y.value;
    let b = b2.sqrt();
    let b_err = (8.0 * x.error_estimate + 6.0 * y.error_estimate) / (2.0 * b);
    let f = a / b;
    let f_err = a_err / b + a * b_err / b2;
    Ok(CurvePoint {
        t,
        a,
        b,
        c: y.value,
        f,
        a_err,
        b_err,
        c_err: y.error_estimate,
        f_err,
    })
}

/// The `t → 0` limits `a = 24S₄`, `b = 4`, `c = ∫U⁴ = 1`, `f = 6S₄`.
pub fn coincident_limit() -> CurvePoint {
    let k = s4();
    CurvePoint {
        t: 0.0,
        a: 24.0 * k,
        b: 4.0,
        c: 1.0,
        f: 6.0 * k,
        a_err: 0.0,
        b_err: 0.0,
        c_err: 0.0,
        f_err: 0.0,
    }
}

pub fn curves(epsilon: f64, t_grid: &[f64], spec: &QuadratureSpec) -> Result<InteractionCurves> {
    for &t in t_grid {
        check_t(epsilon, t)?;
    }
    let pts: Vec<Result<CurvePoint>> = t_grid
        .par_iter()
        .map(|&t| curve_point(epsilon, t, spec))
        .collect();
    let mut out = InteractionCurves {
        epsilon,
        t_grid: t_grid.to_vec(),
        a: vec![],
        b: vec![],
        c: vec![],
        f: vec![],
        a_err: vec![],
        b_err: vec![],
        c_err: vec![],
        f_err: vec![],
    };
    for p in pts {
        let p = p?;
        out.a.push(p.a);
        out.b.push(p.b);
        out.c.push(p.c);
        out.f.push(p.f);
        out.a_err.push(p.a_err);
        out.b_err.push(p.b_err);
        out.c_err.push(p.c_err);
        out.f_err.push(p.f_err);
    }
    Ok(out)
}

/// Default finite-difference step `max(10⁻³, 10⁻²t)`.
pub fn default_fd_step(t: f64) -> f64 {
    f64::max(1e-3, 1e-2 * t)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BPrimeCheck {
    pub t: f64,
    pub h: f64,
    pub b_prime: f64,
    pub rhs: f64,
    pub residual: f64,
    /// Bound on the part of the residual caused by quadrature error.
    pub noise: f64,
}

/// Compares `b'` with `(2/b)(a'/(6S₄) + (3/2)c')`, all derivatives by central
/// differences with step `h_fd`.
pub fn verify_b_prime_identity(
    epsilon: f64,
    t: f64,
    h_fd: f64,
    spec: &QuadratureSpec,
) -> Result<BPrimeCheck> {
    check_t(epsilon, t)?;
    if !(h_fd > 0.0 && h_fd < t) {
        return Err(invalid(format!("need 0 < h < t, got h = {h_fd}, t = {t}")));
    }
    let pts: Vec<Result<CurvePoint>> = [t - h_fd, t, t + h_fd]
        .par_iter()
        .map(|&s| curve_point(epsilon, s, spec))
        .collect();
    let lo = pts[0].clone()?;
    let mid = pts[1].clone()?;
    let hi = pts[2].clone()?;
    let d = |p: f64, m: f64| (p - m) / (2.0 * h_fd);
    let bp = d(hi.b, lo.b);
    let ap = d(hi.a, lo.a);
    let cp = d(hi.c, lo.c);
    let rhs = (2.0 / mid.b) * (ap / (6.0 * s4()) + 1.5 * cp);
    let noise = (hi.b_err + lo.b_err) / (2.0 * h_fd)
        + (2.0 / mid.b)
            * ((hi.a_err + lo.a_err) / (12.0 * s4() * h_fd) + 1.5 * (hi.c_err + lo.c_err) / (2.0 * h_fd));
    Ok(BPrimeCheck {
        t,
        h: h_fd,
        b_prime: bp,
        rhs,
        residual: (bp - rhs).abs(),
        noise,
    })
}

/// `a'(t)` and `c'(t)` from the reduced sign-definite integrands
/// `a' = 24S₄∫_{ζ>0} W ζ [U³(|y-2tν|) - U³(|y+2tν|)]`,
/// `c' = 4∫_{ζ>0} U W ζ [U²(|y-2tν|) - U²(|y+2tν|)]`, `W = U'/r`, at `ε = 1`.
pub fn derivative_quadrature(t: f64, spec: &QuadratureSpec) -> Result<(IntegralResult, IntegralResult)> {
    check_t(1.0, t)?;
    let t2 = 2.0 * t;
    let dom = BiradialDomain {
        zeta: (0.0, f64::INFINITY),
        rho_max: f64::INFINITY,
        centers: vec![(0.0, 1.0), (t2, 1.0)],
    };
    let k = s4();
    let ap = integrate_biradial(
        |z, p| {
            let r = (z * z + p * p).sqrt();
            let (rn, rf) = r_pm(z, p, t2);
            24.0 * k * profile_dr_over_r(r) * z * (profile(rn).powi(3) - profile(rf).powi(3))
        },
        &dom,
        spec,
    );
    let cp = integrate_biradial(
        |z, p| {
            let r = (z * z + p * p).sqrt();
            let (rn, rf) = r_pm(z, p, t2);
            4.0 * profile(r) * profile_dr_over_r(r) * z * (profile(rn).powi(2) - profile(rf).powi(2))
        },
        &dom,
        spec,
    );
    for r in [&ap, &cp] {
        if !r.converged {
            return Err(Error::NotConverged {
                value: r.value,
                error: r.error_estimate,
                evaluations: r.evaluations,
            });
        }
    }
    Ok((ap, cp))
}

/// Bracket `[U³(|y-2tν|) - U³(|y+2tν|)]` of the reduced `a'` integrand.
pub fn a_prime_bracket(z: f64, rho: f64, t: f64) -> f64 {
    let (rn, rf) = r_pm(z, rho, 2.0 * t);
    profile(rn).powi(3) - profile(rf).powi(3)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeRow {
    pub t: f64,
    pub a_prime_fd: f64,
    pub a_prime_quad: f64,
    pub a_prime_tol: f64,
    pub c_prime_fd: f64,
    pub c_prime_quad: f64,
    pub c_prime_tol: f64,
    pub negative: bool,
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub epsilon: f64,
    pub rows: Vec<DerivativeRow>,
    pub first_violation: Option<usize>,
}

impl MonotonicityReport {
    pub fn passed(&self) -> bool {
        self.first_violation.is_none()
    }
}

fn fd_derivative(t: f64, h: f64, spec: &QuadratureSpec) -> Result<[(f64, f64); 2]> {
    // Central differences at h and h/2; the difference of the two is the
    // truncation proxy and the finer one is reported.
    let nodes = [t - h, t - h / 2.0, t + h / 2.0, t + h];
    let pts: Vec<Result<CurvePoint>> = nodes.par_iter().map(|&s| curve_point(1.0, s, spec)).collect();
    let mut p = Vec::with_capacity(4);
    for r in pts {
        p.push(r?);
    }
    let coarse_a = (p[3].a - p[0].a) / (2.0 * h);
    let fine_a = (p[2].a - p[1].a) / h;
    let coarse_c = (p[3].c - p[0].c) / (2.0 * h);
    let fine_c = (p[2].c - p[1].c) / h;
    let noise_a = (p[2].a_err + p[1].a_err) / h;
    let noise_c = (p[2].c_err + p[1].c_err) / h;
    Ok([
        (fine_a, (fine_a - coarse_a).abs() + noise_a),
        (fine_c, (fine_c - coarse_c).abs() + noise_c),
    ])
}

/// Both estimators of `a'` and `c'` on the grid; negativity and cross
/// agreement must hold at every point.
pub fn verify_monotonicity(epsilon: f64, t_grid: &[f64], spec: &QuadratureSpec) -> Result<MonotonicityReport> {
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("grid must be strictly increasing"));
    }
    let rows: Vec<Result<DerivativeRow>> = t_grid
        .par_iter()
        .map(|&t| {
            check_t(epsilon, t)?;
            let s = t / epsilon;
            let h = default_fd_step(s).min(0.5 * s);
            let [(afd, aerr), (cfd, cerr)] = fd_derivative(s, h, spec)?;
            let (aq, cq) = derivative_quadrature(s, spec)?;
            let a_tol = aerr + aq.error_estimate;
            let c_tol = cerr + cq.error_estimate;
            // d/dt at scale ε is (1/ε) d/ds
            let k = 1.0 / epsilon;
            Ok(DerivativeRow {
                t,
                a_prime_fd: afd * k,
                a_prime_quad: aq.value * k,
                a_prime_tol: a_tol * k,
                c_prime_fd: cfd * k,
                c_prime_quad: cq.value * k,
                c_prime_tol: c_tol * k,
                negative: afd < 0.0 && aq.value < 0.0 && cfd < 0.0 && cq.value < 0.0,
                consistent: (afd - aq.value).abs() <= a_tol && (cfd - cq.value).abs() <= c_tol,
            })
        })
        .collect();
    let mut out = Vec::new();
    for r in rows {
        out.push(r?);
    }
    let first_violation = out.iter().position(|r| !(r.negative && r.consistent));
    Ok(MonotonicityReport {
        epsilon,
        rows: out,
        first_violation,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SlopeTarget {
    FCurve,
    Integral(InteractionKind),
}

impl SlopeTarget {
    /// Limit as `t → ∞` and the predicted coefficient of `(ε/t)²`.
    pub fn limit_and_prediction(&self) -> (f64, f64) {
        let k = sobolev_constants();
        match self {
            SlopeTarget::FCurve => (6.0 * 2f64.sqrt() * k.s4, -6.0 * 2f64.sqrt() * k.b),
            SlopeTarget::Integral(InteractionKind::Grad) => (0.0, k.b),
            SlopeTarget::Integral(InteractionKind::U3V) => (0.0, k.b / k.s4),
            SlopeTarget::Integral(InteractionKind::U2V2) => (0.0, 0.0),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SlopeTarget::FCurve => "f",
            SlopeTarget::Integral(k) => k.name(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub target: SlopeTarget,
    pub limit: f64,
    pub coeff: f64,
    pub predicted: f64,
    /// RMS of the relative misfit `(y - limit)/x - coeff`.
    pub residual: f64,
    pub t: Vec<f64>,
    pub values: Vec<f64>,
}

impl SlopeFit {
    pub fn relative_error(&self) -> f64 {
        ((self.coeff - self.predicted) / self.predicted).abs()
    }
}

/// Fits `value ≈ limit + coeff·(ε/t)²` with the limit held at its closed
/// form. Each point is weighted by `1/x²`, so all separations count equally
/// in relative terms.
pub fn asymptotic_slope(
    target: SlopeTarget,
    epsilon: f64,
    t_sequence: &[f64],
    spec: &QuadratureSpec,
) -> Result<SlopeFit> {
    if t_sequence.len() < 2 {
        return Err(invalid("need at least two separations"));
    }
    for w in t_sequence.windows(2) {
        if w[1] < 2.0 * w[0] * (1.0 - 1e-12) {
            return Err(invalid("separations must grow geometrically with ratio >= 2"));
        }
    }
    if t_sequence[0] / epsilon < 10.0 {
        return Err(invalid("smallest t/epsilon must be at least 10"));
    }
    let (limit, predicted) = target.limit_and_prediction();
    let vals: Vec<Result<f64>> = t_sequence
        .par_iter()
        .map(|&t| match target {
            SlopeTarget::FCurve => curve_point(epsilon, t, spec).map(|p| p.f),
            SlopeTarget::Integral(k) => interaction_integral(k, epsilon, t, spec).map(|r| r.value),
        })
        .collect();
    let mut values = Vec::new();
    for v in vals {
        values.push(v?);
    }
    let ratios: Vec<f64> = t_sequence
        .iter()
        .zip(&values)
        .map(|(&t, &y)| (y - limit) / (epsilon / t).powi(2))
        .collect();
    let n = ratios.len() as f64;
    let coeff = ratios.iter().sum::<f64>() / n;
    let residual = (ratios.iter().map(|r| (r - coeff).powi(2)).sum::<f64>() / n).sqrt();
    Ok(SlopeFit {
        target,
        limit,
        coeff,
        predicted,
        residual,
        t: t_sequence.to_vec(),
        values,
    })
}
