//! The competitor path, expansion fits and the calibration of `ε`.

use super::quotient::{evaluate_quotient, l4_distance, QuotientValue};
use super::{Exponents, TestFunctionDescriptor, Variant};
use crate::cone::football::Pole;
use crate::constants::sobolev_constants;
use crate::error::{invalid, Error, Result};
use crate::quadrature::QuadratureSpec;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathOptions {
    /// Number of equally spaced `μ` samples on `[0, 5]`.
    pub grid: usize,
    pub spec: QuadratureSpec,
    /// Also measure `L⁴` distances between neighbouring samples.
    pub continuity: bool,
}

impl Default for PathOptions {
    fn default() -> Self {
        PathOptions {
            grid: 51,
            spec: super::path_spec(),
            continuity: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub mu: f64,
    /// Leg number, 1 to 5.
    pub leg: usize,
    pub descriptor: TestFunctionDescriptor,
    pub value: QuotientValue,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathProfile {
    pub epsilon: f64,
    pub exponents: Exponents,
    pub delta: f64,
    pub samples: Vec<PathSample>,
    pub max_q: f64,
    pub argmax_mu: f64,
    /// Largest error bar on the path.
    pub max_error: f64,
    /// `6S₄ - max Q`.
    pub margin: f64,
    pub endpoints: (QuotientValue, QuotientValue),
    /// `(μ, ‖left - right‖₄/‖left‖₄)` where two legs meet.
    pub transitions: Vec<(f64, f64)>,
    /// `(μ_i, μ_{i+1}, relative L⁴ distance)` when requested.
    pub neighbours: Vec<(f64, f64, f64)>,
}

impl PathProfile {
    /// Every sample satisfies `Q + k·error < 6S₄`.
    pub fn subcritical(&self, k: f64) -> bool {
        let y4 = sobolev_constants().y4;
        self.samples.iter().all(|s| s.value.q + k * s.value.error < y4)
    }

    /// Smallest `(6S₄ - Q)/error` over the path.
    pub fn worst_margin_ratio(&self) -> f64 {
        let y4 = sobolev_constants().y4;
        self.samples
            .iter()
            .map(|s| (y4 - s.value.q) / s.value.error.max(f64::MIN_POSITIVE))
            .fold(f64::INFINITY, f64::min)
    }
}

fn check_path(epsilon: f64, exponents: &Exponents, delta: f64) -> Result<()> {
    exponents.validate()?;
    if !(epsilon > 0.0) {
        return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(epsilon.powf(exponents.alpha) < 0.25 * delta) {
        return Err(invalid(format!(
            "ε^α = {} must be below δ/4 = {}",
            epsilon.powf(exponents.alpha),
            0.25 * delta
        )));
    }
    Ok(())
}

/// `τ(t) = min{t, π - t, δ/2}^{ω/α}` along the middle leg.
fn middle_tau(t: f64, exponents: &Exponents, delta: f64) -> f64 {
    exponents.tau_of(t.min(PI - t).min(0.5 * delta))
}

/// The test function at `μ ∈ [0, 5]` on the five-leg path from the north to
/// the south conical point.
pub fn descriptor_at(mu: f64, epsilon: f64, exponents: &Exponents, delta: f64) -> Result<(usize, TestFunctionDescriptor)> {
    let te = epsilon.powf(exponents.alpha);
    let e = *exponents;
    let out = if mu <= 1.0 {
        (1, TestFunctionDescriptor::double(epsilon, mu * te, delta, Pole::North)?.with_exponents(e)?)
    } else if mu <= 2.0 {
        (2, TestFunctionDescriptor::interp(epsilon, mu - 1.0, delta, Pole::North, e)?)
    } else if mu <= 3.0 {
        let t = te + (mu - 2.0) * (PI - 2.0 * te);
        let tau = middle_tau(t, exponents, delta);
        let d = if t <= 0.5 * PI {
            TestFunctionDescriptor::glued(epsilon, t, tau, delta, Pole::North)?
        } else {
            TestFunctionDescriptor::glued(epsilon, PI - t, tau, delta, Pole::South)?
        };
        (3, d.with_exponents(e)?)
    } else if mu <= 4.0 {
        (4, TestFunctionDescriptor::interp(epsilon, 4.0 - mu, delta, Pole::South, e)?)
    } else {
        (5, TestFunctionDescriptor::double(epsilon, (5.0 - mu) * te, delta, Pole::South)?.with_exponents(e)?)
    };
    Ok(out)
}

/// Evaluates the Yamabe quotient along the path on `options.grid` points.
pub fn build_path(epsilon: f64, exponents: &Exponents, delta: f64, options: &PathOptions) -> Result<PathProfile> {
    check_path(epsilon, exponents, delta)?;
    if options.grid < 6 {
        return Err(invalid("the path grid needs at least six points"));
    }
    let n = options.grid;
    let mus: Vec<f64> = (0..n).map(|i| 5.0 * i as f64 / (n - 1) as f64).collect();
    let samples: Vec<PathSample> = mus
        .par_iter()
        .map(|&mu| {
            let wrap = |e: Error| Error::PathLeg { mu, source: Box::new(e) };
            let (leg, descriptor) = descriptor_at(mu, epsilon, exponents, delta).map_err(wrap)?;
            let value = evaluate_quotient(&descriptor, &options.spec).map_err(wrap)?;
            Ok(PathSample {
                mu,
                leg,
                descriptor,
                value,
            })
        })
        .collect::<Result<_>>()?;
    let y4 = sobolev_constants().y4;
    let best = samples
        .iter()
        .max_by(|a, b| a.value.q.total_cmp(&b.value.q))
        .expect("nonempty grid");
    let (max_q, argmax_mu) = (best.value.q, best.mu);
    let max_error = samples.iter().map(|s| s.value.error).fold(0.0, f64::max);
    // both sides of each junction, and the switch of chart at the midpoint
    let junctions = [1.0, 2.0, 2.5, 3.0, 4.0];
    let transitions = junctions
        .par_iter()
        .map(|&mu| {
            let (_, left) = descriptor_at(mu - 1e-15, epsilon, exponents, delta)?;
            let right = match mu {
                m if m == 1.0 => TestFunctionDescriptor::interp(epsilon, 0.0, delta, Pole::North, *exponents)?,
                m if m == 2.0 => {
                    let t = epsilon.powf(exponents.alpha);
                    TestFunctionDescriptor::glued(epsilon, t, middle_tau(t, exponents, delta), delta, Pole::North)?
                }
                m if m == 2.5 => {
                    let t = 0.5 * PI;
                    TestFunctionDescriptor::glued(epsilon, t, middle_tau(t, exponents, delta), delta, Pole::South)?
                }
                m if m == 3.0 => TestFunctionDescriptor::interp(epsilon, 1.0, delta, Pole::South, *exponents)?,
                _ => TestFunctionDescriptor::double(epsilon, epsilon.powf(exponents.alpha), delta, Pole::South)?,
            };
            Ok((mu, l4_distance(&left, &right, &options.spec)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let neighbours = if options.continuity {
        samples
            .par_windows(2)
            .map(|w| Ok((w[0].mu, w[1].mu, l4_distance(&w[0].descriptor, &w[1].descriptor, &options.spec)?)))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    Ok(PathProfile {
        epsilon,
        exponents: *exponents,
        delta,
        endpoints: (samples[0].value, samples[n - 1].value),
        max_q,
        argmax_mu,
        max_error,
        margin: y4 - max_q,
        samples,
        transitions,
        neighbours,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum FitLeg {
    /// `u_{ε,t}` at `t = ε^α`.
    Double,
    /// `e^{f/2}w` at `t = ε^α`, `τ = ε^ω`.
    Glued,
    /// `φ_λ` at `t = ε^α`.
    Interp(f64),
}

impl FitLeg {
    pub fn name(&self) -> String {
        match self {
            FitLeg::Double => "DOUBLE".into(),
            FitLeg::Glued => "GLUED".into(),
            FitLeg::Interp(l) => format!("INTERP@{l}"),
        }
    }

    pub fn descriptor(&self, epsilon: f64, exponents: &Exponents, delta: f64) -> Result<TestFunctionDescriptor> {
        let t = epsilon.powf(exponents.alpha);
        match *self {
            FitLeg::Double => TestFunctionDescriptor::double(epsilon, t, delta, Pole::North)?.with_exponents(*exponents),
            FitLeg::Glued => TestFunctionDescriptor::glued(epsilon, t, exponents.tau_of(t), delta, Pole::North)?
                .with_exponents(*exponents),
            FitLeg::Interp(l) => TestFunctionDescriptor::interp(epsilon, l, delta, Pole::North, *exponents),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionFit {
    pub leg: FitLeg,
    pub alpha: f64,
    pub epsilons: Vec<f64>,
    pub values: Vec<QuotientValue>,
    /// `6S₄ - Q`.
    pub deficits: Vec<f64>,
    /// Least-squares `Â` in `Q = 6S₄ - Âε^{2(1-α)}`, weighted relative to
    /// the model.
    pub a_hat: f64,
    /// Largest `|deficit/(Âε^{2(1-α)}) - 1|`.
    pub residual: f64,
    /// `p` and `C` in the free fit `6S₄ - Q = Cε^p`.
    pub exponent: f64,
    pub prefactor: f64,
    /// `2(1 - α)`.
    pub exponent_target: f64,
}

/// Fits the deficit of one leg against `ε^{2(1-α)}` over a sequence of `ε`.
pub fn fit_expansion_a(
    leg: FitLeg,
    exponents: &Exponents,
    delta: f64,
    epsilons: &[f64],
    spec: &QuadratureSpec,
) -> Result<ExpansionFit> {
    exponents.validate()?;
    if epsilons.len() < 2 {
        return Err(invalid("the fit needs at least two values of epsilon"));
    }
    let y4 = sobolev_constants().y4;
    let values: Vec<QuotientValue> = epsilons
        .par_iter()
        .map(|&e| evaluate_quotient(&leg.descriptor(e, exponents, delta)?, spec))
        .collect::<Result<_>>()?;
    let p = exponents.deficit_power();
    let deficits: Vec<f64> = values.iter().map(|v| y4 - v.q).collect();
    let ratios: Vec<f64> = epsilons.iter().zip(&deficits).map(|(e, d)| d / e.powf(p)).collect();
    let a_hat = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let residual = ratios.iter().map(|r| (r / a_hat - 1.0).abs()).fold(0.0, f64::max);
    let (exponent, prefactor) = if deficits.iter().all(|d| *d > 0.0) {
        let pts: Vec<(f64, f64)> = epsilons.iter().zip(&deficits).map(|(e, d)| (e.ln(), d.ln())).collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|q| q.0).sum::<f64>() / n;
        let my = pts.iter().map(|q| q.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|q| (q.0 - mx) * (q.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|q| (q.0 - mx).powi(2)).sum();
        let slope = sxy / sxx;
        (slope, (my - slope * mx).exp())
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(ExpansionFit {
        leg,
        alpha: exponents.alpha,
        epsilons: epsilons.to_vec(),
        values,
        deficits,
        a_hat,
        residual,
        exponent,
        prefactor,
        exponent_target: p,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationStep {
    pub epsilon: f64,
    /// `(6S₄ - Q)/ε^{2(1-α)}` on the double-bubble leg.
    pub a_estimate: f64,
    /// Quotient of the glued function midway between the conical points.
    pub midpoint: QuotientValue,
    /// `(6S₄ - Q_mid)/error_mid`.
    pub midpoint_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub steps: Vec<CalibrationStep>,
    /// Values of `ε` too large for the path to fit in the conical chart.
    pub skipped: Vec<f64>,
    /// First `ε` where the midpoint clears `6S₄` by `margin_factor` error
    /// bars and the `A` estimate moved by less than `stability` relative to
    /// the previous step.
    pub epsilon: Option<f64>,
    pub margin_factor: f64,
    pub stability: f64,
}

/// Decreases `ε` geometrically from `start` by `shrink` until the path is
/// resolvably below `6S₄` at its midpoint and the double-bubble estimate
/// of `A` has settled.
#[allow(clippy::too_many_arguments)]
pub fn calibrate_epsilon(
    exponents: &Exponents,
    delta: f64,
    start: f64,
    shrink: f64,
    max_steps: usize,
    margin_factor: f64,
    stability: f64,
    spec: &QuadratureSpec,
) -> Result<Calibration> {
    exponents.validate()?;
    if !(shrink > 0.0 && shrink < 1.0) {
        return Err(invalid(format!("shrink factor must lie in (0, 1), got {shrink}")));
    }
    let y4 = sobolev_constants().y4;
    let p = exponents.deficit_power();
    let mut steps: Vec<CalibrationStep> = Vec::new();
    let mut skipped = Vec::new();
    let mut chosen = None;
    let mut eps = start;
    for _ in 0..max_steps {
        if check_path(eps, exponents, delta).is_err() {
            // the path does not fit in the chart yet
            skipped.push(eps);
            eps *= shrink;
            continue;
        }
        let double = evaluate_quotient(&FitLeg::Double.descriptor(eps, exponents, delta)?, spec)?;
        let t = 0.5 * PI;
        let mid = TestFunctionDescriptor::glued(eps, t, middle_tau(t, exponents, delta), delta, Pole::North)?;
        let midpoint = evaluate_quotient(&mid, spec)?;
        let step = CalibrationStep {
            epsilon: eps,
            a_estimate: (y4 - double.q) / eps.powf(p),
            midpoint_ratio: (y4 - midpoint.q) / midpoint.error.max(f64::MIN_POSITIVE),
            midpoint,
        };
        let settled = steps
            .last()
            .map(|prev| (step.a_estimate / prev.a_estimate - 1.0).abs() < stability)
            .unwrap_or(false);
        let clear = step.midpoint_ratio > margin_factor;
        steps.push(step);
        if settled && clear {
            chosen = Some(eps);
            break;
        }
        eps *= shrink;
    }
    Ok(Calibration {
        steps,
        skipped,
        epsilon: chosen,
        margin_factor,
        stability,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaContinuity {
    pub lambdas: Vec<f64>,
    pub values: Vec<QuotientValue>,
    /// Largest `|Q(λ_{i+1}) - Q(λ_i)|/(λ_{i+1} - λ_i)`.
    pub lipschitz: f64,
    pub max_step: f64,
}

/// `Q(φ_λ)` on `n + 1` equally spaced `λ`.
pub fn lambda_continuity(
    epsilon: f64,
    exponents: &Exponents,
    delta: f64,
    n: usize,
    spec: &QuadratureSpec,
) -> Result<LambdaContinuity> {
    if n == 0 {
        return Err(invalid("need at least one lambda step"));
    }
    let lambdas: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let values: Vec<QuotientValue> = lambdas
        .par_iter()
        .map(|&l| evaluate_quotient(&TestFunctionDescriptor::interp(epsilon, l, delta, Pole::North, *exponents)?, spec))
        .collect::<Result<_>>()?;
    let mut lipschitz: f64 = 0.0;
    let mut max_step: f64 = 0.0;
    for i in 0..n {
        let dq = (values[i + 1].q - values[i].q).abs();
        max_step = max_step.max(dq);
        lipschitz = lipschitz.max(dq / (lambdas[i + 1] - lambdas[i]));
    }
    Ok(LambdaContinuity {
        lambdas,
        values,
        lipschitz,
        max_step,
    })
}

impl PathSample {
    pub fn variant(&self) -> Variant {
        self.descriptor.variant
    }
}
