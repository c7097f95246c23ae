//! Closed-form constants of the four-dimensional Yamabe problem and the
//! Aubin–Talenti bubble family.

use crate::error::{invalid, Result};
use crate::quadrature::{integrate_radial, QuadratureSpec, RadialInterval};
use crate::real::Real;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::LazyLock;

pub type Point = [f64; 4];

/// Coefficient of the conformal Laplacian `-aΔ + R` in dimension four.
pub const CONFORMAL_A: f64 = 6.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormConstants {
    /// Bubble amplitude, `U(0)` for the normalized bubble.
    pub c4: f64,
    /// Sobolev constant.
    pub s4: f64,
    /// Yamabe constant of the round sphere, `6 S4`.
    pub y4: f64,
    /// Local Yamabe constant of a Z2-conical point, `Y4/√2`.
    pub ys: f64,
    /// Expansion constant `6π²c4²`.
    pub a: f64,
    /// Interaction constant `π²c4²`.
    pub b: f64,
}

static CONSTANTS: LazyLock<ClosedFormConstants> = LazyLock::new(|| {
    // ∫U⁴ = c4⁴·2π²·∫r³/(1+r²)⁴ dr = c4⁴π²/6 = 1
    let c4 = (6.0 / (PI * PI)).powf(0.25);
    let s4 = 8.0 / (c4 * c4);
    let y4 = 6.0 * s4;
    let b = PI * PI * c4 * c4;
    ClosedFormConstants {
        c4,
        s4,
        y4,
        ys: y4 / 2f64.sqrt(),
        a: 6.0 * b,
        b,
    }
});

pub fn sobolev_constants() -> ClosedFormConstants {
    *CONSTANTS
}

pub fn c4() -> f64 {
    CONSTANTS.c4
}

pub fn s4() -> f64 {
    CONSTANTS.s4
}

/// The constants recomputed from radial integrals of the unnormalized
/// profile `V = 1/(1+r²)`, with the spread of the quadrature estimates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericalConstants {
    pub c4: f64,
    pub s4: f64,
    pub y4: f64,
    pub a: f64,
    pub b: f64,
    pub b_over_s4: f64,
    /// Relative error bound propagated from the quadrature.
    pub error: f64,
    /// Largest relative deviation from [`sobolev_constants`].
    pub deviation: f64,
    pub evaluations: usize,
}

/// `c₄` from `∫U⁴ = 1`, `S₄ = ∫|∇U|²` (as `-ΔU = S₄U³`), and the interaction
/// constant from the far field `U(x) ≈ c₄|x|⁻²` paired with `∫U³`.
pub fn constants_by_quadrature(spec: &QuadratureSpec) -> Result<NumericalConstants> {
    let area = 2.0 * PI * PI;
    let run = |f: &dyn Fn(f64) -> f64| integrate_radial(f, RadialInterval::Infinite, spec);
    let v4 = run(&|r: f64| r.powi(3) / (1.0 + r * r).powi(4));
    let g2 = run(&|r: f64| 4.0 * r.powi(5) / (1.0 + r * r).powi(4));
    let v3 = run(&|r: f64| r.powi(3) / (1.0 + r * r).powi(3));
    for r in [&v4, &g2, &v3] {
        if !r.converged {
            return Err(crate::error::Error::NotConverged {
                value: r.value,
                error: r.error_estimate,
                evaluations: r.evaluations,
            });
        }
    }
    let rel = |r: &crate::quadrature::IntegralResult| r.error_estimate / r.value.abs();
    let c4 = (area * v4.value).powf(-0.25);
    let s4 = area * c4 * c4 * g2.value;
    // ∫∇U₊·∇U₋ = S₄∫U₊³U₋ ≈ S₄ U₋(x₊)∫U³ with U₋(x₊) ≈ c₄ε²/(4t²)
    let b = s4 * 0.25 * c4 * area * c4.powi(3) * v3.value;
    let exact = sobolev_constants();
    let deviation = [(c4, exact.c4), (s4, exact.s4), (b, exact.b)]
        .iter()
        .map(|(x, y)| (x / y - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(NumericalConstants {
        c4,
        s4,
        y4: 6.0 * s4,
        a: 6.0 * b,
        b,
        b_over_s4: b / s4,
        error: rel(&v4) + rel(&g2) + rel(&v3),
        deviation,
        evaluations: v4.evaluations + g2.evaluations + v3.evaluations,
    })
}

/// Normalized bubble profile `U(r) = c4/(1+r²)`.
#[inline]
pub fn profile<T: Real>(r: T) -> T {
    (r * r + 1.0).recip() * c4()
}

/// `U(r)` as a function of `u = r²`.
#[inline]
pub fn profile_sq<T: Real>(u: T) -> T {
    (u + 1.0).recip() * c4()
}

/// `U'(r)/r = -2c4/(1+r²)²`, smooth at the origin.
#[inline]
pub fn profile_dr_over_r(r: f64) -> f64 {
    let q = 1.0 + r * r;
    -2.0 * c4() / (q * q)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlatBubble {
    pub epsilon: f64,
    pub center: Point,
}

impl FlatBubble {
    pub fn new(epsilon: f64, center: Point) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(invalid(format!("bubble scale must be positive, got {epsilon}")));
        }
        Ok(FlatBubble { epsilon, center })
    }

    pub fn standard() -> Self {
        FlatBubble {
            epsilon: 1.0,
            center: [0.0; 4],
        }
    }

    pub fn value(&self, p: &Point) -> f64 {
        let r2 = dist2(p, &self.center);
        let e = self.epsilon;
        c4() / (e * (1.0 + r2 / (e * e)))
    }

    pub fn gradient(&self, p: &Point) -> [f64; 4] {
        let e = self.epsilon;
        let r2 = dist2(p, &self.center);
        let q = 1.0 + r2 / (e * e);
        let k = -2.0 * c4() / (e * e * e * q * q);
        let mut g = [0.0; 4];
        for i in 0..4 {
            g[i] = k * (p[i] - self.center[i]);
        }
        g
    }

    /// Value generic over the scalar type, for differentiation.
    pub fn value_generic<T: Real>(&self, p: &[T; 4]) -> T {
        let mut r2 = T::cst(0.0);
        for i in 0..4 {
            let d = p[i] - self.center[i];
            r2 = r2 + d * d;
        }
        let e = self.epsilon;
        (r2 / (e * e) + 1.0).recip() * (c4() / e)
    }
}

pub fn bubble_value(b: &FlatBubble, p: &Point) -> Result<f64> {
    FlatBubble::new(b.epsilon, b.center)?;
    Ok(b.value(p))
}

pub fn bubble_gradient(b: &FlatBubble, p: &Point) -> Result<[f64; 4]> {
    FlatBubble::new(b.epsilon, b.center)?;
    Ok(b.gradient(p))
}

pub fn double_bubble_value(epsilon: f64, t: f64, nu: &Point, p: &Point) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(invalid(format!("center distance must be nonnegative, got {t}")));
    }
    let n2: f64 = nu.iter().map(|x| x * x).sum();
    if (n2 - 1.0).abs() > 1e-12 {
        return Err(invalid(format!("direction must be a unit vector, |nu|^2 = {n2}")));
    }
    let plus = FlatBubble::new(epsilon, nu.map(|x| t * x))?;
    let minus = FlatBubble::new(epsilon, nu.map(|x| -t * x))?;
    Ok(plus.value(p) + minus.value(p))
}

/// Limiting Yamabe quotient of a Palais–Smale sequence with `j1` singular
/// and `j2` regular bubbles.
pub fn energy_level(j1: u32, j2: u32) -> Result<f64> {
    if j1 + j2 == 0 {
        return Err(invalid("energy level needs at least one bubble"));
    }
    let k = sobolev_constants();
    Ok(((j1 + 2 * j2) as f64).sqrt() * (2f64.sqrt() / 2.0) * k.y4)
}

pub fn dist2(a: &Point, b: &Point) -> f64 {
    (0..4).map(|i| (a[i] - b[i]) * (a[i] - b[i])).sum()
}

pub fn norm(a: &Point) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}
