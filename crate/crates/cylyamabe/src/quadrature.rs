//! Adaptive Gauss–Kronrod integration on the symmetry-reduced domains that
//! the bubble integrals admit: half-lines, bi-radial slabs, 3-spheres and
//! 4-balls.
//!
//! Every routine is sequential and deterministic: subdivision always splits
//! the cell with the largest local error (ties broken by creation index) and
//! the final sum runs in creation order.

use crate::constants::Point;
use serde::{Deserialize, Serialize};
use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_PI_2, PI};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grading {
    pub center: Point,
    pub scale: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    pub grading: Option<Grading>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_subdivisions: 4000,
            grading: None,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tol(rel_tol: f64, abs_tol: f64) -> Self {
        QuadratureSpec {
            rel_tol,
            abs_tol,
            ..Default::default()
        }
    }

    pub fn tighter(&self, factor: f64) -> Self {
        QuadratureSpec {
            rel_tol: self.rel_tol / factor,
            abs_tol: self.abs_tol / factor,
            max_subdivisions: self.max_subdivisions * 4,
            grading: self.grading,
        }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl IntegralResult {
    pub fn into_result(self) -> crate::Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(crate::Error::NotConverged {
                value: self.value,
                error: self.error_estimate,
                evaluations: self.evaluations,
            })
        }
    }

    /// Combines independent results under addition.
    pub fn plus(self, o: IntegralResult) -> IntegralResult {
        IntegralResult {
            value: self.value + o.value,
            error_estimate: self.error_estimate + o.error_estimate,
            evaluations: self.evaluations + o.evaluations,
            converged: self.converged && o.converged,
        }
    }

    pub fn scaled(self, k: f64) -> IntegralResult {
        IntegralResult {
            value: self.value * k,
            error_estimate: self.error_estimate * k.abs(),
            ..self
        }
    }
}

// 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1].
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Nodes on [-1,1] with Kronrod and Gauss weights (Gauss weight 0 for the
/// Kronrod-only nodes).
pub(crate) fn gk15_rule() -> [(f64, f64, f64); 15] {
    let mut out = [(0.0, 0.0, 0.0); 15];
    for j in 0..7 {
        let wg = if j % 2 == 1 { WG[j / 2] } else { 0.0 };
        out[j] = (-XGK[j], WGK[j], wg);
        out[14 - j] = (XGK[j], WGK[j], wg);
    }
    out[7] = (0.0, WGK[7], WG[3]);
    out
}

/// One axis of a tensor-product domain: a sequence of cells, each mapped
/// from the unit interval.
#[derive(Clone, Debug, PartialEq)]
pub enum AxisCell {
    Finite(f64, f64),
    /// `[a, ∞)` via `x = a + w·tan(πs/2)`.
    TailRight(f64, f64),
    /// `(-∞, b]` via `x = b - w·tan(πs/2)`.
    TailLeft(f64, f64),
}

impl AxisCell {
    #[inline]
    fn map(&self, s: f64) -> (f64, f64) {
        match *self {
            AxisCell::Finite(a, b) => (a + (b - a) * s, b - a),
            AxisCell::TailRight(a, w) => {
                let th = FRAC_PI_2 * s;
                let c = th.cos();
                (a + w * th.tan(), w * FRAC_PI_2 / (c * c))
            }
            AxisCell::TailLeft(b, w) => {
                let th = FRAC_PI_2 * s;
                let c = th.cos();
                (b - w * th.tan(), w * FRAC_PI_2 / (c * c))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub cells: Vec<AxisCell>,
}

impl Axis {
    pub fn finite(a: f64, b: f64) -> Axis {
        Axis {
            cells: vec![AxisCell::Finite(a, b)],
        }
    }

    /// Axis over `[lo, hi]` (either end may be infinite) with dyadic
    /// breakpoints around each `(center, scale)`: `c ± scale/4·2^k`.
    pub fn graded(lo: f64, hi: f64, centers: &[(f64, f64)]) -> Axis {
        let mut pts: Vec<f64> = Vec::new();
        for &(c, scale) in centers {
            if c >= lo && c <= hi {
                pts.push(c);
            }
            let mut h = scale / 4.0;
            // stop once the annuli reach the domain or a generous outer radius
            let reach = if lo.is_finite() && hi.is_finite() {
                (hi - lo).abs()
            } else {
                (c.abs() + scale) * 64.0
            };
            while h <= reach {
                for p in [c - h, c + h] {
                    if p > lo && p < hi {
                        pts.push(p);
                    }
                }
                h *= 2.0;
            }
        }
        if lo.is_finite() {
            pts.push(lo);
        }
        if hi.is_finite() {
            pts.push(hi);
        }
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * (1.0 + a.abs()));
        let mut cells = Vec::new();
        let tail_w = |x: f64| {
            let mut w = x.abs();
            for &(c, s) in centers {
                w = w.max((x - c).abs()).max(s);
            }
            if w == 0.0 {
                1.0
            } else {
                w
            }
        };
        if pts.is_empty() {
            // fully infinite without centers
            cells.push(AxisCell::TailLeft(0.0, 1.0));
            cells.push(AxisCell::TailRight(0.0, 1.0));
            return Axis { cells };
        }
        if !lo.is_finite() {
            let b = pts[0];
            cells.push(AxisCell::TailLeft(b, tail_w(b)));
        }
        for w in pts.windows(2) {
            cells.push(AxisCell::Finite(w[0], w[1]));
        }
        if !hi.is_finite() {
            let a = *pts.last().unwrap();
            cells.push(AxisCell::TailRight(a, tail_w(a)));
        }
        Axis { cells }
    }

    pub fn with_breaks(lo: f64, hi: f64, breaks: &[f64]) -> Axis {
        let mut pts: Vec<f64> = breaks.iter().copied().filter(|&p| p > lo && p < hi).collect();
        pts.push(lo);
        pts.push(hi);
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * (1.0 + a.abs()));
        Axis {
            cells: pts.windows(2).map(|w| AxisCell::Finite(w[0], w[1])).collect(),
        }
    }
}

#[derive(Clone, Copy)]
struct Entry {
    err: f64,
    id: usize,
}

impl PartialEq for Entry {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err && self.id == o.id
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Entry {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err
            .total_cmp(&o.err)
            .then_with(|| o.id.cmp(&self.id))
    }
}

struct Cell1 {
    cell: usize,
    s0: f64,
    s1: f64,
    value: f64,
    err: f64,
    live: bool,
}

fn gk1<F: FnMut(f64) -> f64>(f: &mut F, cell: &AxisCell, s0: f64, s1: f64) -> (f64, f64) {
    let rule = gk15_rule();
    let h = 0.5 * (s1 - s0);
    let m = 0.5 * (s1 + s0);
    let (mut k, mut g) = (0.0, 0.0);
    for &(x, wk, wg) in rule.iter() {
        let (xv, jac) = cell.map(m + h * x);
        let v = f(xv) * jac;
        let v = if v.is_finite() { v } else { 0.0 };
        k += wk * v;
        g += wg * v;
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive integration along an [`Axis`].
pub fn integrate_axis<F: FnMut(f64) -> f64>(
    mut f: F,
    axis: &Axis,
    spec: &QuadratureSpec,
) -> IntegralResult {
    let mut cells: Vec<Cell1> = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut evals = 0;
    for (ci, c) in axis.cells.iter().enumerate() {
        let (v, e) = gk1(&mut f, c, 0.0, 1.0);
        evals += 15;
        heap.push(Entry { err: e, id: cells.len() });
        cells.push(Cell1 {
            cell: ci,
            s0: 0.0,
            s1: 1.0,
            value: v,
            err: e,
            live: true,
        });
    }
    let mut total: f64 = cells.iter().map(|c| c.value).sum();
    let mut err: f64 = cells.iter().map(|c| c.err).sum();
    let mut n_live = cells.len();
    while err > spec.target(total) && n_live < spec.max_subdivisions.max(axis.cells.len()) {
        let Some(top) = heap.pop() else { break };
        let (ci, s0, s1, v, e) = {
            let c = &mut cells[top.id];
            c.live = false;
            (c.cell, c.s0, c.s1, c.value, c.err)
        };
        let sm = 0.5 * (s0 + s1);
        if sm <= s0 || sm >= s1 {
            // interval exhausted in floating point
            cells[top.id].live = true;
            cells[top.id].err = e;
            break;
        }
        let cell = &axis.cells[ci];
        let (v1, e1) = gk1(&mut f, cell, s0, sm);
        let (v2, e2) = gk1(&mut f, cell, sm, s1);
        evals += 30;
        total += v1 + v2 - v;
        err += e1 + e2 - e;
        for (a, b, vv, ee) in [(s0, sm, v1, e1), (sm, s1, v2, e2)] {
            heap.push(Entry { err: ee, id: cells.len() });
            cells.push(Cell1 {
                cell: ci,
                s0: a,
                s1: b,
                value: vv,
                err: ee,
                live: true,
            });
        }
        n_live += 1;
    }
    let value: f64 = cells.iter().filter(|c| c.live).map(|c| c.value).sum();
    let error: f64 = cells.iter().filter(|c| c.live).map(|c| c.err).sum();
    IntegralResult {
        value,
        error_estimate: error,
        evaluations: evals,
        converged: error <= spec.target(value),
    }
}

struct Cell2<const K: usize> {
    cx: usize,
    cy: usize,
    u: (f64, f64),
    v: (f64, f64),
    value: [f64; K],
    err: [f64; K],
    split_x: bool,
    live: bool,
}

fn gk2<const K: usize, F: FnMut(f64, f64) -> [f64; K]>(
    f: &mut F,
    ax: &AxisCell,
    ay: &AxisCell,
    u: (f64, f64),
    v: (f64, f64),
) -> ([f64; K], [f64; K], bool) {
    let rule = gk15_rule();
    let hu = 0.5 * (u.1 - u.0);
    let mu = 0.5 * (u.1 + u.0);
    let hv = 0.5 * (v.1 - v.0);
    let mv = 0.5 * (v.1 + v.0);
    let mut ys = [(0.0, 0.0); 15];
    for (j, &(y, _, _)) in rule.iter().enumerate() {
        ys[j] = ay.map(mv + hv * y);
    }
    let (mut kk, mut gk, mut kg) = ([0.0; K], [0.0; K], [0.0; K]);
    for &(x, wkx, wgx) in rule.iter() {
        let (xv, jx) = ax.map(mu + hu * x);
        let (mut rk, mut rg) = ([0.0; K], [0.0; K]);
        for (j, &(_, wky, wgy)) in rule.iter().enumerate() {
            let (yv, jy) = ys[j];
            let vals = f(xv, yv);
            for i in 0..K {
                let val = vals[i] * jx * jy;
                let val = if val.is_finite() { val } else { 0.0 };
                rk[i] += wky * val;
                rg[i] += wgy * val;
            }
        }
        for i in 0..K {
            kk[i] += wkx * rk[i];
            gk[i] += wgx * rk[i];
            kg[i] += wkx * rg[i];
        }
    }
    let a = hu * hv;
    let mut value = [0.0; K];
    let mut err = [0.0; K];
    let (mut sx, mut sy) = (0.0f64, 0.0f64);
    for i in 0..K {
        let ex = ((kk[i] - gk[i]) * a).abs();
        let ey = ((kk[i] - kg[i]) * a).abs();
        value[i] = kk[i] * a;
        err[i] = ex.max(ey);
        sx = sx.max(ex);
        sy = sy.max(ey);
    }
    (value, err, sx >= sy)
}

/// Adaptive tensor-product Gauss–Kronrod integration over `ax × ay`.
pub fn integrate_2d<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    ax: &Axis,
    ay: &Axis,
    spec: &QuadratureSpec,
) -> IntegralResult {
    let [r] = integrate_2d_many(|x, y| [f(x, y)], ax, ay, spec);
    r
}

/// [`integrate_2d`] for `K` integrands sharing one adaptive mesh; a cell's
/// priority is its largest error relative to the coarse value of each
/// component, and refinement stops when every component meets `spec`.
pub fn integrate_2d_many<const K: usize, F: FnMut(f64, f64) -> [f64; K]>(
    mut f: F,
    ax: &Axis,
    ay: &Axis,
    spec: &QuadratureSpec,
) -> [IntegralResult; K] {
    let mut cells: Vec<Cell2<K>> = Vec::new();
    let mut evals = 0;
    for (ix, cx) in ax.cells.iter().enumerate() {
        for (iy, cy) in ay.cells.iter().enumerate() {
            let (val, e, sx) = gk2(&mut f, cx, cy, (0.0, 1.0), (0.0, 1.0));
            evals += 225;
            cells.push(Cell2 {
                cx: ix,
                cy: iy,
                u: (0.0, 1.0),
                v: (0.0, 1.0),
                value: val,
                err: e,
                split_x: sx,
                live: true,
            });
        }
    }
    let mut total = [0.0; K];
    let mut err = [0.0; K];
    for c in &cells {
        for i in 0..K {
            total[i] += c.value[i];
            err[i] += c.err[i];
        }
    }
    let weights: [f64; K] = std::array::from_fn(|i| 1.0 / spec.target(total[i]).max(f64::MIN_POSITIVE));
    let priority = |e: &[f64; K]| (0..K).map(|i| e[i] * weights[i]).fold(0.0, f64::max);
    let mut heap: BinaryHeap<Entry> = cells
        .iter()
        .enumerate()
        .map(|(id, c)| Entry { err: priority(&c.err), id })
        .collect();
    let mut n_live = cells.len();
    let cap = spec.max_subdivisions.max(n_live);
    let pending = |total: &[f64; K], err: &[f64; K]| (0..K).any(|i| err[i] > spec.target(total[i]));
    while pending(&total, &err) && n_live < cap {
        let Some(top) = heap.pop() else { break };
        let (cx, cy, u, v, val, e, sx) = {
            let c = &mut cells[top.id];
            c.live = false;
            (c.cx, c.cy, c.u, c.v, c.value, c.err, c.split_x)
        };
        let halves = if sx {
            let m = 0.5 * (u.0 + u.1);
            if m <= u.0 || m >= u.1 {
                cells[top.id].live = true;
                break;
            }
            [((u.0, m), v), ((m, u.1), v)]
        } else {
            let m = 0.5 * (v.0 + v.1);
            if m <= v.0 || m >= v.1 {
                cells[top.id].live = true;
                break;
            }
            [(u, (v.0, m)), (u, (m, v.1))]
        };
        for i in 0..K {
            total[i] -= val[i];
            err[i] -= e[i];
        }
        for (hu, hv) in halves {
            let (nv, ne, nsx) = gk2(&mut f, &ax.cells[cx], &ay.cells[cy], hu, hv);
            evals += 225;
            for i in 0..K {
                total[i] += nv[i];
                err[i] += ne[i];
            }
            heap.push(Entry { err: priority(&ne), id: cells.len() });
            cells.push(Cell2 {
                cx,
                cy,
                u: hu,
                v: hv,
                value: nv,
                err: ne,
                split_x: nsx,
                live: true,
            });
        }
        n_live += 1;
    }
    std::array::from_fn(|i| {
        let value: f64 = cells.iter().filter(|c| c.live).map(|c| c.value[i]).sum();
        let error: f64 = cells.iter().filter(|c| c.live).map(|c| c.err[i]).sum();
        IntegralResult {
            value,
            error_estimate: error,
            evaluations: evals,
            converged: error <= spec.target(value),
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RadialInterval {
    Finite(f64),
    Infinite,
}

/// `∫ f(r) dr` over `[0, R]` or `[0, ∞)`. Unbounded intervals are mapped by
/// `r = tan θ`; the optional grading adds dyadic breakpoints around
/// `|center|` down to `scale/4`.
pub fn integrate_radial<F: FnMut(f64) -> f64>(
    f: F,
    interval: RadialInterval,
    spec: &QuadratureSpec,
) -> IntegralResult {
    let hi = match interval {
        RadialInterval::Finite(r) => r,
        RadialInterval::Infinite => f64::INFINITY,
    };
    let centers: Vec<(f64, f64)> = match spec.grading {
        Some(g) => vec![(crate::constants::norm(&g.center), g.scale)],
        None => vec![(0.0, 1.0)],
    };
    let axis = Axis::graded(0.0, hi, &centers);
    integrate_axis(f, &axis, spec)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BiradialDomain {
    pub zeta: (f64, f64),
    pub rho_max: f64,
    /// Axial positions `(ζ_c, scale)` of bubble cores on the axis.
    pub centers: Vec<(f64, f64)>,
}

impl BiradialDomain {
    pub fn whole_space(centers: Vec<(f64, f64)>) -> Self {
        BiradialDomain {
            zeta: (f64::NEG_INFINITY, f64::INFINITY),
            rho_max: f64::INFINITY,
            centers,
        }
    }
}

/// `∫∫ F(ζ, ρ)·4πρ² dρ dζ`, the reduction of a four-dimensional integral
/// whose integrand depends only on the axial coordinate and the transverse
/// radius.
pub fn integrate_biradial<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    domain: &BiradialDomain,
    spec: &QuadratureSpec,
) -> IntegralResult {
    let mut centers = domain.centers.clone();
    if let Some(g) = spec.grading {
        centers.push((g.center[0], g.scale));
    }
    let ax = Axis::graded(domain.zeta.0, domain.zeta.1, &centers);
    let min_scale = centers.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let rho_centers = if min_scale.is_finite() {
        vec![(0.0, min_scale)]
    } else {
        vec![(0.0, 1.0)]
    };
    let ay = Axis::graded(0.0, domain.rho_max, &rho_centers);
    integrate_2d(|z, r| f(z, r) * 4.0 * PI * r * r, &ax, &ay, spec)
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out.reverse();
    out
}

fn sphere3_fixed<F: FnMut(&Point) -> f64>(f: &mut F, tau: f64, center: &Point, n: usize) -> f64 {
    // Hopf coordinates: η ∈ [0, π/2], ξ1, ξ2 ∈ [0, 2π); area form τ³ sinη cosη.
    let gl = gauss_legendre(n);
    let m = 2 * n;
    let dxi = 2.0 * PI / m as f64;
    let mut acc = 0.0;
    for &(x, w) in gl.iter() {
        let eta = FRAC_PI_4 * (x + 1.0);
        let (se, ce) = eta.sin_cos();
        let mut ring = 0.0;
        for a in 0..m {
            let (s1, c1) = ((a as f64 + 0.5) * dxi).sin_cos();
            for b in 0..m {
                let (s2, c2) = ((b as f64 + 0.25) * dxi).sin_cos();
                let p = [
                    center[0] + tau * c1 * se,
                    center[1] + tau * s1 * se,
                    center[2] + tau * c2 * ce,
                    center[3] + tau * s2 * ce,
                ];
                ring += f(&p);
            }
        }
        acc += w * FRAC_PI_4 * se * ce * ring * dxi * dxi;
    }
    acc * tau * tau * tau
}

const FRAC_PI_4: f64 = std::f64::consts::FRAC_PI_4;

/// Surface integral over the 3-sphere of radius `tau` about `center`.
pub fn integrate_sphere3<F: FnMut(&Point) -> f64>(
    mut f: F,
    tau: f64,
    center: &Point,
    spec: &QuadratureSpec,
) -> IntegralResult {
    let mut n = 4;
    let mut prev = sphere3_fixed(&mut f, tau, center, n);
    let mut evals = n * 4 * n * n;
    loop {
        let next_n = 2 * n;
        let cur = sphere3_fixed(&mut f, tau, center, next_n);
        evals += next_n * 4 * next_n * next_n;
        let err = (cur - prev).abs();
        n = next_n;
        if err <= spec.target(cur) || n >= 64 {
            return IntegralResult {
                value: cur,
                error_estimate: err,
                evaluations: evals,
                converged: err <= spec.target(cur),
            };
        }
        prev = cur;
    }
}

/// Volume integral over the 4-ball of radius `radius` centered at the
/// origin: adaptive radial rule over nested 3-sphere integrals.
pub fn integrate_ball4<F: FnMut(&Point) -> f64>(
    mut f: F,
    radius: f64,
    spec: &QuadratureSpec,
) -> IntegralResult {
    let inner = QuadratureSpec {
        rel_tol: spec.rel_tol * 0.1,
        abs_tol: spec.abs_tol * 0.1,
        ..*spec
    };
    let centers: Vec<(f64, f64)> = match spec.grading {
        Some(g) => vec![(crate::constants::norm(&g.center), g.scale)],
        None => vec![],
    };
    let axis = Axis::graded(0.0, radius, &centers);
    let origin = [0.0; 4];
    let mut inner_err = 0.0;
    let mut inner_evals = 0;
    let mut inner_ok = true;
    let mut res = integrate_axis(
        |r| {
            if r <= 0.0 {
                return 0.0;
            }
            let s = integrate_sphere3(&mut f, r, &origin, &inner);
            inner_err = f64::max(inner_err, s.error_estimate / (r * r * r).max(1e-300));
            inner_evals += s.evaluations;
            inner_ok &= s.converged;
            s.value
        },
        &axis,
        spec,
    );
    // sup of the per-area inner error times the ball volume bounds its contribution
    res.error_estimate += inner_err * PI * PI / 2.0 * radius.powi(4);
    res.evaluations += inner_evals;
    res.converged = res.converged && inner_ok;
    res
}
