//! Pointwise evaluation of lifted test functions.

use super::{TestFunctionDescriptor, Variant};
use crate::cone::football::Pole;
use crate::cone::Cutoff;
use crate::constants::c4;
use crate::green::mass::CncRadial;
use crate::quadrature::gauss_legendre;
use crate::real::{Dual, Real};
use std::f64::consts::PI;

/// Radius map `r̄(s) = ∫₀^s e^{F/2}` of the conformal factor
/// `F(s) = φ_t(s) c s²` about a regular point at distance `t` from a tip.
#[derive(Clone, Debug)]
pub(crate) struct CncProfile {
    c: f64,
    cutoff: Cutoff,
    inner: CncRadial,
    /// `r̄(t/4)` and `r̄(t/2)`.
    knots: (f64, f64),
    gl: Vec<(f64, f64)>,
}

impl CncProfile {
    pub fn new(c: f64, t: f64) -> Self {
        let mut p = CncProfile {
            c,
            cutoff: Cutoff { t },
            inner: CncRadial { c },
            knots: (0.0, 0.0),
            gl: gauss_legendre(24),
        };
        let q = 0.25 * t;
        let k1 = p.inner.rbar(q);
        p.knots = (k1, k1 + p.transition(q, 2.0 * q));
        p
    }

    pub fn factor<T: Real>(&self, s: T) -> T {
        self.cutoff.eval(s) * s * s * self.c
    }

    fn half_exp(&self, s: f64) -> f64 {
        (0.5 * self.factor(s)).exp()
    }

    fn transition(&self, a: f64, b: f64) -> f64 {
        let h = 0.5 * (b - a);
        let m = 0.5 * (b + a);
        self.gl.iter().map(|&(x, w)| w * h * self.half_exp(m + h * x)).sum()
    }

    pub fn rbar_value(&self, s: f64) -> f64 {
        let q = 0.25 * self.cutoff.t;
        if s <= q {
            self.inner.rbar(s)
        } else if s <= 2.0 * q {
            self.knots.0 + self.transition(q, s)
        } else {
            self.knots.1 + (s - 2.0 * q)
        }
    }

    pub fn rbar<T: Real>(&self, s: T) -> T {
        let v = s.value();
        let d = Dual::<1>::var(v, 0);
        let f = self.factor(d);
        let e = (0.5 * f.v).exp();
        s.apply([self.rbar_value(v), e, 0.5 * e * f.d[0], f64::NAN])
    }

    pub fn r_of(&self, rbar: f64) -> f64 {
        let mut s = rbar;
        for _ in 0..60 {
            let step = (self.rbar_value(s) - rbar) / self.half_exp(s);
            s -= step;
            if step.abs() <= 1e-16 * rbar {
                break;
            }
        }
        s
    }
}

/// Geometry of a point of the lifted chart seen from the test function:
/// polar coordinates `(r, θ)` about the pole with `θ` measured from the
/// axis, the haversines `sin²(d/2)` of its distances to `±q`, and the chart
/// distances squared to `±t e₁`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct LiftPoint<T> {
    pub r: T,
    pub hav_plus: T,
    /// Exact distance to `q` when the frame knows it.
    pub s_plus: Option<T>,
    pub hav_minus: T,
    pub chart_minus2: T,
    pub chart_plus2: T,
}

fn atan2<T: Real>(y: T, x: T) -> T {
    let a0 = y.value().atan2(x.value());
    let (s, c) = a0.sin_cos();
    let n = (x * x + y * y).sqrt();
    ((y * c - x * s) / n).asin() + a0
}

fn half_sin2<T: Real>(x: T) -> T {
    (x * 0.5).sin().sq()
}

/// Integration frame: geodesic polar coordinates `(a, b)` on the lift about
/// the pole or about the concentration point `q = (t, θ = 0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Frame {
    Pole,
    Center,
}

impl<T: Real> LiftPoint<T> {
    pub fn from_polar(t: f64, r: T, theta: T) -> Self {
        let dr = r - t;
        let hr = half_sin2(dr);
        let st = r.sin() * t.sin();
        let sh = half_sin2(theta);
        let ch = (theta * 0.5).cos().sq();
        let rt4 = r * (4.0 * t);
        let dr2 = dr * dr;
        LiftPoint {
            r,
            hav_plus: hr + st * sh,
            s_plus: None,
            hav_minus: hr + st * ch,
            chart_minus2: dr2 + rt4 * sh,
            chart_plus2: dr2 + rt4 * ch,
        }
    }

    /// Point at distance `s` from `q` in direction angle `ψ`, with `ψ = 0`
    /// pointing away from the pole along the axis.
    pub fn from_center(t: f64, s: T, psi: T) -> (Self, f64) {
        let (st, ct) = t.sin_cos();
        let (ss, cs) = (s.sin(), s.cos());
        let cp = psi.cos();
        let x0 = cs * ct - ss * cp * st;
        let x1 = cs * st + ss * cp * ct;
        let rho = ss * psi.sin();
        let r = atan2((x1 * x1 + rho * rho).sqrt(), x0);
        let theta = atan2(rho, x1);
        let mut p = Self::from_polar(t, r, theta);
        p.hav_plus = half_sin2(s);
        p.s_plus = Some(s);
        let (a, b) = (x0 - ct, x1 + st);
        p.hav_minus = (a * a + b * b + rho * rho) * 0.25;
        (p, x1.value())
    }

    fn s_plus(&self) -> T {
        match self.s_plus {
            Some(s) => s,
            None => self.hav_plus.sqrt().asin() * 2.0,
        }
    }
}

/// A descriptor with its derived constants, ready for evaluation.
#[derive(Clone, Debug)]
pub(crate) struct Profile {
    pub variant: Variant,
    pub pole: Pole,
    pub t: f64,
    eps: f64,
    amp: f64,
    k: f64,
    chi_delta: Cutoff,
    lambda: f64,
    glued: Option<Glued>,
}

#[derive(Clone, Debug)]
struct Glued {
    radius: CncProfile,
    chi_tau: Cutoff,
    inv_nu: f64,
    a_q: f64,
    /// Distances from `q` where `r̄ = τ` and `r̄ = 2τ`.
    s1: f64,
    s2: f64,
}

impl Profile {
    pub fn new(d: &TestFunctionDescriptor) -> Self {
        let glued = match (d.tau, d.nu_match, d.a_q, d.cnc_c) {
            (Some(tau), Some(nu), Some(a_q), Some(c)) => {
                let radius = CncProfile::new(c, d.t);
                let s1 = radius.r_of(tau);
                let s2 = radius.r_of(2.0 * tau);
                Some(Glued {
                    radius,
                    chi_tau: Cutoff { t: 4.0 * tau },
                    inv_nu: 1.0 / nu,
                    a_q,
                    s1,
                    s2,
                })
            }
            _ => None,
        };
        Profile {
            variant: d.variant,
            pole: d.pole,
            t: d.t,
            eps: d.epsilon,
            amp: d.amplitude,
            k: c4(),
            chi_delta: Cutoff { t: 4.0 * d.delta },
            lambda: d.lambda.unwrap_or(1.0),
            glued,
        }
    }

    /// Radii where the profile is only finitely smooth, measured from `q`.
    pub fn center_breaks(&self) -> Vec<f64> {
        let mut out = Vec::new();
        if let Some(g) = &self.glued {
            out.extend([g.s1, g.s2, 0.25 * self.t, 0.5 * self.t]);
        }
        out
    }

    /// Radii where the profile is only finitely smooth, measured from the
    /// pole.
    pub fn pole_breaks(&self) -> Vec<f64> {
        let q = 0.25 * self.chi_delta.t;
        vec![q, 2.0 * q]
    }

    /// Largest distance from the pole where the profile can be nonzero.
    pub fn support(&self) -> f64 {
        match self.variant {
            Variant::Single | Variant::Double => 0.5 * self.chi_delta.t,
            _ => PI,
        }
    }

    /// Outer radius of the glued core, if any.
    pub fn core_radius(&self) -> Option<f64> {
        self.glued.as_ref().map(|g| g.s2)
    }

    pub fn epsilon(&self) -> f64 {
        self.eps
    }

    #[inline]
    fn bubble<T: Real>(&self, d2: T) -> T {
        (d2 + self.eps * self.eps).recip() * (self.k * self.eps)
    }

    fn double<T: Real>(&self, p: &LiftPoint<T>) -> T {
        let chi = self.chi_delta.eval(p.r);
        if chi.value() == 0.0 {
            return T::cst(0.0);
        }
        (self.bubble(p.chart_minus2) + self.bubble(p.chart_plus2)) * chi
    }

    fn glued<T: Real>(&self, g: &Glued, p: &LiftPoint<T>) -> T {
        let green = |p: &LiftPoint<T>| (p.hav_plus.recip() + p.hav_minus.recip()) * 0.25;
        let hp = p.hav_plus.value();
        // sin²(s/2) is increasing on [0, π]
        if hp > half_sin2(g.s2) {
            return green(p) * g.inv_nu;
        }
        let s = p.s_plus();
        let rb = g.radius.rbar(s);
        let half = (g.radius.factor(s) * 0.5).exp();
        if s.value() <= g.s1 {
            return half * self.bubble(rb * rb);
        }
        let chi = g.chi_tau.eval(rb);
        let local = half * ((rb * rb).recip() + g.a_q);
        ((-chi + 1.0) * green(p) + chi * local) * g.inv_nu
    }

    /// Value of the lifted test function.
    pub fn value<T: Real>(&self, p: &LiftPoint<T>) -> T {
        let v = match self.variant {
            Variant::Single => {
                let chi = self.chi_delta.eval(p.r);
                if chi.value() == 0.0 {
                    T::cst(0.0)
                } else {
                    self.bubble(p.r * p.r) * chi
                }
            }
            Variant::Double => self.double(p),
            Variant::Glued => self.glued(self.glued.as_ref().expect("glued data"), p),
            Variant::Interp => {
                let g = self.glued(self.glued.as_ref().expect("glued data"), p);
                g * self.lambda + self.double(p) * (1.0 - self.lambda)
            }
        };
        v * self.amp
    }

    /// Value and gradient components `(h, ∂_a h, ∂_b h)` in a frame.
    pub fn jet(&self, frame: Frame, a: f64, b: f64) -> ((f64, f64, f64), f64) {
        let (da, db) = (Dual::<2>::var(a, 0), Dual::<2>::var(b, 1));
        let (p, x1) = match frame {
            Frame::Pole => (LiftPoint::from_polar(self.t, da, db), f64::NAN),
            Frame::Center => LiftPoint::from_center(self.t, da, db),
        };
        let h = self.value(&p);
        ((h.v, h.d[0], h.d[1]), x1)
    }

    /// Plain value at polar coordinates `(r, θ)` about `pole`.
    pub fn value_at(&self, pole: Pole, r: f64, theta: f64) -> f64 {
        let r = if pole == self.pole { r } else { PI - r };
        self.value(&LiftPoint::from_polar(self.t, r, theta))
    }
}
