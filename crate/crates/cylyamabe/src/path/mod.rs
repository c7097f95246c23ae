//! Test functions on the football, their Yamabe quotients, and the five-leg
//! competitor path between the two conical points.
//!
//! Every test function is handled through its lift to the round 𝕊⁴, written
//! in normal coordinates about the conical point it is attached to. Functions
//! on the football are exactly the lifts symmetric under `y ↦ -y`.

mod build;
mod profile;
mod quotient;

pub use build::{
    build_path, calibrate_epsilon, descriptor_at, fit_expansion_a, lambda_continuity, Calibration, CalibrationStep, ExpansionFit,
    FitLeg, LambdaContinuity, PathOptions, PathProfile, PathSample,
};
pub use quotient::{evaluate_quotient, l4_distance, lift_factor_check, path_spec, LiftFactorCheck, QuotientValue};

use crate::cone::football::Pole;
use crate::constants::{c4, Point};
use crate::error::{invalid, Result};
use crate::green::mass::CncRadial;
use crate::green::RadialModel;
use crate::quadrature::{integrate_sphere3, QuadratureSpec};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Gluing exponents `α` (bubble distance `t = ε^α`) and `ω` (gluing radius
/// `τ = ε^ω`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub alpha: f64,
    pub omega: f64,
}

impl Default for Exponents {
    fn default() -> Self {
        Exponents { alpha: 0.6, omega: 0.7 }
    }
}

impl Exponents {
    /// Requires `1 > ω > α > 1/2` and `2 + 2α - 4ω > 0`.
    pub fn new(alpha: f64, omega: f64) -> Result<Self> {
        if !(1.0 > omega && omega > alpha && alpha > 0.5) {
            return Err(invalid(format!("need 1 > omega > alpha > 1/2, got alpha = {alpha}, omega = {omega}")));
        }
        if !(2.0 + 2.0 * alpha - 4.0 * omega > 0.0) {
            return Err(invalid(format!("need 2 + 2 alpha - 4 omega > 0, got {}", 2.0 + 2.0 * alpha - 4.0 * omega)));
        }
        Ok(Exponents { alpha, omega })
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.alpha, self.omega).map(|_| ())
    }

    /// `τ(t) = t^{ω/α}`.
    pub fn tau_of(&self, t: f64) -> f64 {
        t.powf(self.omega / self.alpha)
    }

    /// Exponent of the expected deficit, `2(1 - α)`.
    pub fn deficit_power(&self) -> f64 {
        2.0 * (1.0 - self.alpha)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    /// Bubble at a conical point, cut off at `δ`.
    Single,
    /// Antipodal pair of bubbles at `±tν` in the lifted chart.
    Double,
    /// Bubble glued to the Green's function at a regular point.
    Glued,
    /// `λ e^{f/2} w + (1 - λ) u` between `Double` and `Glued`.
    Interp,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Single => "SINGLE",
            Variant::Double => "DOUBLE",
            Variant::Glued => "GLUED",
            Variant::Interp => "INTERP",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionDescriptor {
    pub variant: Variant,
    /// Conical point whose lifted chart carries the function.
    pub pole: Pole,
    pub epsilon: f64,
    /// Distance of the concentration point from `pole`.
    pub t: f64,
    /// Gluing radius, for `Glued` and `Interp`.
    pub tau: Option<f64>,
    pub lambda: Option<f64>,
    pub exponents: Exponents,
    /// Chart cutoff radius; the double bubble is cut off between `δ` and `2δ`.
    pub delta: f64,
    /// Axis of the concentration point in the lifted chart. The profiles are
    /// axially symmetric, so only this axis enters.
    pub direction: Point,
    /// Matching constant `ν` of the glued function.
    pub nu_match: Option<f64>,
    /// Constant term of the Green's function at the concentration point.
    pub a_q: Option<f64>,
    /// `c` in the conformal factor `f^q = φ_t(|z|) c|z|²`.
    pub cnc_c: Option<f64>,
    /// Overall constant factor; the quotient does not depend on it.
    pub amplitude: f64,
}

const E1: Point = [1.0, 0.0, 0.0, 0.0];

fn check_common(epsilon: f64, delta: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(delta > 0.0 && delta < PI / 4.0) {
        return Err(invalid(format!("delta = {delta} must lie in (0, π/4)")));
    }
    Ok(())
}

impl TestFunctionDescriptor {
    fn base(variant: Variant, pole: Pole, epsilon: f64, t: f64, delta: f64, exponents: Exponents) -> Self {
        TestFunctionDescriptor {
            variant,
            pole,
            epsilon,
            t,
            tau: None,
            lambda: None,
            exponents,
            delta,
            direction: E1,
            nu_match: None,
            a_q: None,
            cnc_c: None,
            amplitude: 1.0,
        }
    }

    /// `φ_{ε,P}`.
    pub fn single(epsilon: f64, delta: f64, pole: Pole) -> Result<Self> {
        check_common(epsilon, delta)?;
        Ok(Self::base(Variant::Single, pole, epsilon, 0.0, delta, Exponents::default()))
    }

    /// `u_{ε,tν}`, defined for `0 ≤ t < δ/2`.
    pub fn double(epsilon: f64, t: f64, delta: f64, pole: Pole) -> Result<Self> {
        check_common(epsilon, delta)?;
        if !(t >= 0.0 && t < 0.5 * delta) {
            return Err(invalid(format!("double bubble needs 0 <= t < δ/2, got t = {t}")));
        }
        Ok(Self::base(Variant::Double, pole, epsilon, t, delta, Exponents::default()))
    }

    /// `e^{f^q/2} w_{q,ε,τ}` at distance `t ≤ π/2` from `pole`.
    pub fn glued(epsilon: f64, t: f64, tau: f64, delta: f64, pole: Pole) -> Result<Self> {
        check_common(epsilon, delta)?;
        if !(t > 0.0 && t <= 0.5 * PI) {
            return Err(invalid(format!("glued function needs 0 < t <= π/2, got t = {t}")));
        }
        if !(tau > epsilon) {
            return Err(invalid(format!("gluing radius tau = {tau} must exceed epsilon = {epsilon}")));
        }
        let mut d = Self::base(Variant::Glued, pole, epsilon, t, delta, Exponents::default());
        d.attach_green(tau)?;
        Ok(d)
    }

    /// `φ_λ` at `t = ε^α`, `τ = ε^ω`.
    pub fn interp(epsilon: f64, lambda: f64, delta: f64, pole: Pole, exponents: Exponents) -> Result<Self> {
        check_common(epsilon, delta)?;
        exponents.validate()?;
        if !(0.0..=1.0).contains(&lambda) {
            return Err(invalid(format!("lambda = {lambda} must lie in [0, 1]")));
        }
        let t = epsilon.powf(exponents.alpha);
        if !(t < 0.5 * delta) {
            return Err(invalid(format!("t = ε^α = {t} must be below δ/2")));
        }
        let mut d = Self::base(Variant::Interp, pole, epsilon, t, delta, exponents);
        d.lambda = Some(lambda);
        d.attach_green(epsilon.powf(exponents.omega))?;
        Ok(d)
    }

    pub fn with_exponents(mut self, exponents: Exponents) -> Result<Self> {
        exponents.validate()?;
        self.exponents = exponents;
        Ok(self)
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Result<Self> {
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(invalid(format!("amplitude must be positive, got {amplitude}")));
        }
        self.amplitude = amplitude;
        Ok(self)
    }

    fn attach_green(&mut self, tau: f64) -> Result<()> {
        let t = self.t;
        let cnc = CncRadial::of_model(RadialModel::Round, t)?;
        let a_q = football_mass(t);
        let m = nu_matching(self.epsilon, tau, a_q)?;
        let radius = profile::CncProfile::new(cnc.c, t);
        let s2 = radius.r_of(2.0 * tau);
        if !(s2 < t) {
            return Err(invalid(format!(
                "gluing ball of radius 2τ = {} is not embedded at distance t = {t} from the conical point",
                2.0 * tau
            )));
        }
        self.tau = Some(tau);
        self.a_q = Some(a_q);
        self.nu_match = Some(m.nu);
        self.cnc_c = Some(cnc.c);
        Ok(())
    }

    /// Distance from the concentration point to the other conical point.
    pub fn t_from_other_pole(&self) -> f64 {
        PI - self.t
    }
}

/// `A_q = 1/(4 sin²t)` for a regular point of the football at distance `t`
/// from a conical point: the image pole of the lifted Green's function
/// evaluated at the pole itself.
pub fn football_mass(t: f64) -> f64 {
    let s = t.sin();
    0.25 / (s * s)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NuMatching {
    pub nu: f64,
    /// `1/ν` from the matching condition.
    pub inverse: f64,
    /// `c₄ε(1 - τ²A_q - ε²/τ² + ε²A_q)`.
    pub expansion: f64,
    /// `|expansion/inverse - 1|`.
    pub relative_gap: f64,
}

/// Solves `c₄ε⁻¹/(1 + ε⁻²τ²) = (τ⁻² + A_q)/ν` for `ν`.
pub fn nu_matching(epsilon: f64, tau: f64, a_q: f64) -> Result<NuMatching> {
    if !(epsilon > 0.0 && tau > epsilon) {
        return Err(invalid(format!("matching needs 0 < epsilon < tau, got {epsilon}, {tau}")));
    }
    if !(tau.powi(-2) + a_q > 0.0) {
        return Err(invalid("the Green's function must be positive on the gluing sphere"));
    }
    let k = c4();
    let ratio = epsilon / tau;
    // 1/ν = c₄ε / ((1 + ε²/τ²)(1 + τ²A_q))
    let inverse = k * epsilon / ((1.0 + ratio * ratio) * (1.0 + tau * tau * a_q));
    let expansion = k * epsilon * (1.0 - tau * tau * a_q - ratio * ratio + epsilon * epsilon * a_q);
    Ok(NuMatching {
        nu: 1.0 / inverse,
        inverse,
        expansion,
        relative_gap: (expansion / inverse - 1.0).abs(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFlux {
    /// `2π²τ³ · (∂_r U_ε)U_ε` at `r = τ`.
    pub closed_form: f64,
    pub quadrature: f64,
    pub quadrature_error: f64,
}

/// Outward flux `∫_{∂B_τ} (∂_ν U_ε) U_ε dσ` of the flat bubble.
pub fn boundary_flux(epsilon: f64, tau: f64) -> Result<BoundaryFlux> {
    if !(epsilon > 0.0 && tau > 0.0) {
        return Err(invalid(format!("need positive epsilon and tau, got {epsilon}, {tau}")));
    }
    let k = c4();
    let integrand = |r: f64| {
        let x = r / epsilon;
        let den = 1.0 + x * x;
        -2.0 * k * k * r / (epsilon.powi(4) * den * den * den)
    };
    let closed_form = 2.0 * PI * PI * tau.powi(3) * integrand(tau);
    let res = integrate_sphere3(
        |p| {
            let r = crate::constants::norm(p);
            integrand(r)
        },
        tau,
        &[0.0; 4],
        &QuadratureSpec::with_tol(1e-13, 0.0),
    );
    Ok(BoundaryFlux {
        closed_form,
        quadrature: res.value,
        quadrature_error: res.error_estimate,
    })
}
