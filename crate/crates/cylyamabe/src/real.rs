//! Scalar types for forward-mode differentiation.
//!
//! Closed-form metrics and test functions are written once, generic over
//! [`Real`], and evaluated with `f64`, first-order [`Dual`] numbers, or
//! third-order Taylor jets [`Jet3`] in four variables.

use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::LazyLock;

pub trait Real:
    Copy
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn cst(v: f64) -> Self;
    fn value(&self) -> f64;
    /// Composes a univariate function given its value and first three
    /// derivatives at `self.value()`.
    fn apply(self, d: [f64; 4]) -> Self;

    fn sqrt(self) -> Self {
        let v = self.value();
        let s = v.sqrt();
        self.apply([s, 0.5 / s, -0.25 / (s * v), 0.375 / (s * v * v)])
    }
    fn sin(self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.apply([s, c, -s, -c])
    }
    fn cos(self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.apply([c, -s, -c, s])
    }
    fn exp(self) -> Self {
        let e = self.value().exp();
        self.apply([e, e, e, e])
    }
    fn ln(self) -> Self {
        let v = self.value();
        self.apply([v.ln(), 1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v)])
    }
    fn recip(self) -> Self {
        let v = self.value();
        let r = 1.0 / v;
        self.apply([r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r])
    }
    fn powi(self, n: i32) -> Self {
        let v = self.value();
        let nf = n as f64;
        self.apply([
            v.powi(n),
            nf * v.powi(n - 1),
            nf * (nf - 1.0) * v.powi(n - 2),
            nf * (nf - 1.0) * (nf - 2.0) * v.powi(n - 3),
        ])
    }
    fn asin(self) -> Self {
        let v = self.value();
        let w = 1.0 - v * v;
        let r = w.sqrt();
        self.apply([
            v.asin(),
            1.0 / r,
            v / (w * r),
            (1.0 + 2.0 * v * v) / (w * w * r),
        ])
    }
    fn sq(self) -> Self {
        self * self
    }
}

impl Real for f64 {
    #[inline]
    fn cst(v: f64) -> Self {
        v
    }
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
    #[inline]
    fn apply(self, d: [f64; 4]) -> Self {
        d[0]
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn recip(self) -> Self {
        1.0 / self
    }
    #[inline]
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    #[inline]
    fn asin(self) -> Self {
        f64::asin(self)
    }
}

/// First-order dual number in `N` variables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<const N: usize> {
    pub v: f64,
    pub d: [f64; N],
}

impl<const N: usize> Dual<N> {
    pub fn var(v: f64, i: usize) -> Self {
        let mut d = [0.0; N];
        d[i] = 1.0;
        Dual { v, d }
    }
}

impl<const N: usize> Add for Dual<N> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        let mut d = self.d;
        for i in 0..N {
            d[i] += o.d[i];
        }
        Dual { v: self.v + o.v, d }
    }
}
impl<const N: usize> Sub for Dual<N> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        let mut d = self.d;
        for i in 0..N {
            d[i] -= o.d[i];
        }
        Dual { v: self.v - o.v, d }
    }
}
impl<const N: usize> Mul for Dual<N> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        let mut d = [0.0; N];
        for i in 0..N {
            d[i] = self.d[i] * o.v + self.v * o.d[i];
        }
        Dual { v: self.v * o.v, d }
    }
}
impl<const N: usize> Div for Dual<N> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let inv = 1.0 / o.v;
        let v = self.v * inv;
        let mut d = [0.0; N];
        for i in 0..N {
            d[i] = (self.d[i] - v * o.d[i]) * inv;
        }
        Dual { v, d }
    }
}
impl<const N: usize> Neg for Dual<N> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        let mut d = self.d;
        for x in d.iter_mut() {
            *x = -*x;
        }
        Dual { v: -self.v, d }
    }
}
impl<const N: usize> Add<f64> for Dual<N> {
    type Output = Self;
    #[inline]
    fn add(self, o: f64) -> Self {
        Dual { v: self.v + o, d: self.d }
    }
}
impl<const N: usize> Sub<f64> for Dual<N> {
    type Output = Self;
    #[inline]
    fn sub(self, o: f64) -> Self {
        Dual { v: self.v - o, d: self.d }
    }
}
impl<const N: usize> Mul<f64> for Dual<N> {
    type Output = Self;
    #[inline]
    fn mul(self, o: f64) -> Self {
        let mut d = self.d;
        for x in d.iter_mut() {
            *x *= o;
        }
        Dual { v: self.v * o, d }
    }
}
impl<const N: usize> Div<f64> for Dual<N> {
    type Output = Self;
    #[inline]
    fn div(self, o: f64) -> Self {
        self * (1.0 / o)
    }
}

impl<const N: usize> Real for Dual<N> {
    #[inline]
    fn cst(v: f64) -> Self {
        Dual { v, d: [0.0; N] }
    }
    #[inline]
    fn value(&self) -> f64 {
        self.v
    }
    #[inline]
    fn apply(self, f: [f64; 4]) -> Self {
        let mut d = self.d;
        for x in d.iter_mut() {
            *x *= f[1];
        }
        Dual { v: f[0], d }
    }
}

/// Number of monomials of degree at most three in four variables.
pub const JET_LEN: usize = 35;

struct JetTables {
    /// Exponent vector of each monomial.
    exps: [[u8; 4]; JET_LEN],
    /// Products `(a, b, c)` with `x^a x^b = x^c` and total degree at most 3.
    prods: Vec<(u8, u8, u8)>,
}

static TABLES: LazyLock<JetTables> = LazyLock::new(|| {
    let mut exps = [[0u8; 4]; JET_LEN];
    let mut n = 1;
    for i in 0..4 {
        exps[n][i] = 1;
        n += 1;
    }
    for i in 0..4 {
        for j in i..4 {
            exps[n][i] += 1;
            exps[n][j] += 1;
            n += 1;
        }
    }
    for i in 0..4 {
        for j in i..4 {
            for k in j..4 {
                exps[n][i] += 1;
                exps[n][j] += 1;
                exps[n][k] += 1;
                n += 1;
            }
        }
    }
    debug_assert_eq!(n, JET_LEN);
    let deg = |e: &[u8; 4]| e.iter().map(|&x| x as usize).sum::<usize>();
    let mut prods = Vec::new();
    for a in 0..JET_LEN {
        for b in 0..JET_LEN {
            if deg(&exps[a]) + deg(&exps[b]) > 3 {
                continue;
            }
            let mut e = [0u8; 4];
            for i in 0..4 {
                e[i] = exps[a][i] + exps[b][i];
            }
            let c = exps.iter().position(|x| *x == e).unwrap();
            prods.push((a as u8, b as u8, c as u8));
        }
    }
    JetTables { exps, prods }
});

fn jet_index(e: [u8; 4]) -> usize {
    TABLES.exps.iter().position(|x| *x == e).unwrap()
}

/// Truncated Taylor polynomial of degree 3 in four variables.
///
/// Coefficients are Taylor coefficients, so `∂_i∂_j f = c_ij` for `i ≠ j`
/// and `2 c_ii` on the diagonal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet3 {
    pub c: [f64; JET_LEN],
}

impl Jet3 {
    pub fn var(v: f64, i: usize) -> Self {
        let mut c = [0.0; JET_LEN];
        c[0] = v;
        c[1 + i] = 1.0;
        Jet3 { c }
    }

    /// Seeds a point `x` as four independent variables.
    pub fn point(x: &[f64; 4]) -> [Jet3; 4] {
        [0, 1, 2, 3].map(|i| Jet3::var(x[i], i))
    }

    pub fn d1(&self, i: usize) -> f64 {
        self.c[1 + i]
    }

    pub fn d2(&self, i: usize, j: usize) -> f64 {
        let mut e = [0u8; 4];
        e[i] += 1;
        e[j] += 1;
        let f = if i == j { 2.0 } else { 1.0 };
        f * self.c[jet_index(e)]
    }

    pub fn d3(&self, i: usize, j: usize, k: usize) -> f64 {
        let mut e = [0u8; 4];
        e[i] += 1;
        e[j] += 1;
        e[k] += 1;
        let f: f64 = e
            .iter()
            .map(|&m| match m {
                2 => 2.0,
                3 => 6.0,
                _ => 1.0,
            })
            .product();
        f * self.c[jet_index(e)]
    }
}

impl Add for Jet3 {
    type Output = Self;
    #[inline]
    fn add(mut self, o: Self) -> Self {
        for i in 0..JET_LEN {
            self.c[i] += o.c[i];
        }
        self
    }
}
impl Sub for Jet3 {
    type Output = Self;
    #[inline]
    fn sub(mut self, o: Self) -> Self {
        for i in 0..JET_LEN {
            self.c[i] -= o.c[i];
        }
        self
    }
}
impl Mul for Jet3 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut c = [0.0; JET_LEN];
        for &(a, b, r) in TABLES.prods.iter() {
            c[r as usize] += self.c[a as usize] * o.c[b as usize];
        }
        Jet3 { c }
    }
}
impl Div for Jet3 {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}
impl Neg for Jet3 {
    type Output = Self;
    fn neg(mut self) -> Self {
        for x in self.c.iter_mut() {
            *x = -*x;
        }
        self
    }
}
impl Add<f64> for Jet3 {
    type Output = Self;
    fn add(mut self, o: f64) -> Self {
        self.c[0] += o;
        self
    }
}
impl Sub<f64> for Jet3 {
    type Output = Self;
    fn sub(mut self, o: f64) -> Self {
        self.c[0] -= o;
        self
    }
}
impl Mul<f64> for Jet3 {
    type Output = Self;
    fn mul(mut self, o: f64) -> Self {
        for x in self.c.iter_mut() {
            *x *= o;
        }
        self
    }
}
impl Div<f64> for Jet3 {
    type Output = Self;
    fn div(self, o: f64) -> Self {
        self * (1.0 / o)
    }
}

impl Real for Jet3 {
    fn cst(v: f64) -> Self {
        let mut c = [0.0; JET_LEN];
        c[0] = v;
        Jet3 { c }
    }
    fn value(&self) -> f64 {
        self.c[0]
    }
    fn apply(self, f: [f64; 4]) -> Self {
        let mut d = self;
        d.c[0] = 0.0;
        let d2 = d * d;
        let d3 = d2 * d;
        let mut out = d * f[1] + d2 * (f[2] / 2.0) + d3 * (f[3] / 6.0);
        out.c[0] = f[0];
        out
    }
}

/// Power series `Σ a_n u^n` with value and derivative evaluation.
#[derive(Clone, Debug)]
pub struct Series {
    pub coeffs: Vec<f64>,
}

impl Series {
    /// Value and first three derivatives at `u`.
    pub fn eval(&self, u: f64) -> [f64; 4] {
        let mut out = [0.0; 4];
        for k in 0..4 {
            let mut acc = 0.0;
            for n in (k..self.coeffs.len()).rev() {
                let mut fall = 1.0;
                for m in 0..k {
                    fall *= (n - m) as f64;
                }
                acc = acc * u + self.coeffs[n] * fall;
            }
            out[k] = acc;
        }
        out
    }

    pub fn apply<T: Real>(&self, u: T) -> T {
        u.apply(self.eval(u.value()))
    }
}
