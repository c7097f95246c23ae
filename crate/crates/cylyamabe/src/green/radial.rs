//! Chebyshev spectral elements for the radial mode equations
//! `-6[u'' + 3(w'/w)u' - l(l+2)u/w²] + R u = f` on `[0, δ]`.

use crate::error::{invalid, Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Chebyshev–Gauss–Lobatto points on `[-1, 1]`, ascending.
pub fn lobatto_nodes(p: usize) -> Vec<f64> {
    (0..=p)
        .map(|j| -(std::f64::consts::PI * j as f64 / p as f64).cos())
        .collect()
}

fn lobatto_weights(p: usize) -> Vec<f64> {
    (0..=p)
        .map(|j| {
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == p {
                0.5 * s
            } else {
                s
            }
        })
        .collect()
}

/// Differentiation matrix on the reference nodes.
fn diff_matrix(x: &[f64], w: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = (w[j] / w[i]) / (x[i] - x[j]);
                d[(i, j)] = v;
                diag -= v;
            }
        }
        d[(i, i)] = diag;
    }
    d
}

/// Element partition of `[0, δ]` with `p`-th order Lobatto nodes per element.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralMesh {
    pub breaks: Vec<f64>,
    pub order: usize,
    #[serde(skip)]
    reference: Vec<f64>,
    #[serde(skip)]
    weights: Vec<f64>,
    #[serde(skip)]
    d1: Option<DMatrix<f64>>,
}

impl SpectralMesh {
    pub fn new(breaks: Vec<f64>, order: usize) -> Result<Self> {
        if breaks.len() < 2 || breaks.windows(2).any(|w| !(w[1] > w[0])) || breaks[0] != 0.0 {
            return Err(invalid("element breaks must increase from 0"));
        }
        if order < 4 {
            return Err(invalid("element order must be at least 4"));
        }
        let reference = lobatto_nodes(order);
        let weights = lobatto_weights(order);
        let d1 = diff_matrix(&reference, &weights);
        Ok(SpectralMesh {
            breaks,
            order,
            reference,
            weights,
            d1: Some(d1),
        })
    }

    /// `n` equal elements on `[0, δ]`.
    pub fn uniform(delta: f64, n: usize, order: usize) -> Result<Self> {
        if n == 0 || !(delta > 0.0) {
            return Err(invalid("need a positive radius and at least one element"));
        }
        Self::new((0..=n).map(|k| delta * k as f64 / n as f64).collect(), order)
    }

    pub fn elements(&self) -> usize {
        self.breaks.len() - 1
    }

    pub fn dofs(&self) -> usize {
        self.elements() * self.order + 1
    }

    /// Global node coordinates.
    pub fn nodes(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dofs());
        for e in 0..self.elements() {
            let (a, b) = (self.breaks[e], self.breaks[e + 1]);
            let start = if e == 0 { 0 } else { 1 };
            for s in &self.reference[start..] {
                out.push(0.5 * (a + b) + 0.5 * (b - a) * s);
            }
        }
        out
    }

    fn d1(&self) -> &DMatrix<f64> {
        self.d1.as_ref().expect("mesh built through SpectralMesh::new")
    }

    fn element_of(&self, r: f64) -> usize {
        let e = self.breaks.partition_point(|b| *b <= r);
        e.saturating_sub(1).min(self.elements() - 1)
    }

    /// Barycentric interpolation of nodal values.
    pub fn interpolate(&self, values: &[f64], r: f64) -> f64 {
        let e = self.element_of(r);
        let (a, b) = (self.breaks[e], self.breaks[e + 1]);
        let s = (2.0 * r - a - b) / (b - a);
        let base = e * self.order;
        let mut num = 0.0;
        let mut den = 0.0;
        for (j, (xj, wj)) in self.reference.iter().zip(&self.weights).enumerate() {
            let d = s - xj;
            if d == 0.0 {
                return values[base + j];
            }
            let c = wj / d;
            num += c * values[base + j];
            den += c;
        }
        num / den
    }

    /// Element index and normalized barycentric weights of the interpolant
    /// at `r`.
    pub fn stencil(&self, r: f64) -> (usize, Vec<f64>) {
        let e = self.element_of(r);
        let (a, b) = (self.breaks[e], self.breaks[e + 1]);
        let s = (2.0 * r - a - b) / (b - a);
        let mut w = vec![0.0; self.order + 1];
        for (j, xj) in self.reference.iter().enumerate() {
            if s == *xj {
                w[j] = 1.0;
                return (e, w);
            }
        }
        let mut den = 0.0;
        for (j, (xj, wj)) in self.reference.iter().zip(&self.weights).enumerate() {
            w[j] = wj / (s - xj);
            den += w[j];
        }
        for v in w.iter_mut() {
            *v /= den;
        }
        (e, w)
    }

    /// Derivative of the interpolant.
    pub fn derivative(&self, values: &[f64], r: f64) -> f64 {
        let e = self.element_of(r);
        let (a, b) = (self.breaks[e], self.breaks[e + 1]);
        let base = e * self.order;
        let loc: Vec<f64> = (0..=self.order).map(|j| values[base + j]).collect();
        let dl = self.d1() * DVector::from_vec(loc);
        let scale = 2.0 / (b - a);
        self.interpolate_local(&dl.iter().map(|v| v * scale).collect::<Vec<_>>(), e, r)
    }

    fn interpolate_local(&self, loc: &[f64], e: usize, r: f64) -> f64 {
        let (a, b) = (self.breaks[e], self.breaks[e + 1]);
        let s = (2.0 * r - a - b) / (b - a);
        let mut num = 0.0;
        let mut den = 0.0;
        for (j, (xj, wj)) in self.reference.iter().zip(&self.weights).enumerate() {
            let d = s - xj;
            if d == 0.0 {
                return loc[j];
            }
            let c = wj / d;
            num += c * loc[j];
            den += c;
        }
        num / den
    }
}

/// Coefficients of the radial operator at `r`: `(3w'/w, 1/w², R)`.
pub type RadialCoefficients<'a> = &'a (dyn Fn(f64) -> (f64, f64, f64) + Sync);

/// Solves one mode with `u(δ) = boundary` and regularity at `r = 0`.
pub fn solve_mode(
    mesh: &SpectralMesh,
    l: usize,
    coeffs: RadialCoefficients<'_>,
    rhs: &[f64],
    boundary: f64,
) -> Result<Vec<f64>> {
    let n = mesh.dofs();
    if rhs.len() != n {
        return Err(invalid("right-hand side length does not match the mesh"));
    }
    let p = mesh.order;
    let lambda = (l * (l + 2)) as f64;
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut b = DVector::<f64>::zeros(n);
    let d1 = mesh.d1();
    let d2 = d1 * d1;
    let nodes = mesh.nodes();
    for e in 0..mesh.elements() {
        let (lo, hi) = (mesh.breaks[e], mesh.breaks[e + 1]);
        let s1 = 2.0 / (hi - lo);
        let s2 = s1 * s1;
        let base = e * p;
        for i in 1..p {
            let row = base + i;
            let r = nodes[row];
            let (a1, inv_w2, scal) = coeffs(r);
            for j in 0..=p {
                let col = base + j;
                a[(row, col)] += -6.0 * (s2 * d2[(i, j)] + a1 * s1 * d1[(i, j)]);
            }
            a[(row, row)] += 6.0 * lambda * inv_w2 + scal;
            b[row] = rhs[row];
        }
        // interface: continuity of the flux
        if e + 1 < mesh.elements() {
            let row = base + p;
            let (nlo, nhi) = (mesh.breaks[e + 1], mesh.breaks[e + 2]);
            let t1 = 2.0 / (nhi - nlo);
            for j in 0..=p {
                a[(row, base + j)] += s1 * d1[(p, j)];
                a[(row, base + p + j)] -= t1 * d1[(0, j)];
            }
        }
    }
    // regularity at the origin
    if l == 0 {
        let s1 = 2.0 / (mesh.breaks[1] - mesh.breaks[0]);
        for j in 0..=p {
            a[(0, j)] = s1 * d1[(0, j)];
        }
    } else {
        a[(0, 0)] = 1.0;
    }
    a[(n - 1, n - 1)] = 1.0;
    b[n - 1] = boundary;
    let sol = banded_solve(a, b, p, p).ok_or_else(|| Error::Residual(format!("singular radial system for mode {l}")))?;
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(Error::Residual(format!("non-finite radial solution for mode {l}")));
    }
    Ok(sol)
}

/// Gaussian elimination with partial pivoting for a matrix with `kl`
/// sub-diagonals and `ku` super-diagonals, stored densely.
fn banded_solve(mut a: DMatrix<f64>, mut b: DVector<f64>, kl: usize, ku: usize) -> Option<Vec<f64>> {
    let n = b.len();
    // row swaps widen the upper band to kl + ku
    let upper = kl + ku;
    for k in 0..n {
        let last = (k + kl).min(n - 1);
        let piv = (k..=last).max_by(|&i, &j| a[(i, k)].abs().total_cmp(&a[(j, k)].abs()))?;
        if a[(piv, k)] == 0.0 {
            return None;
        }
        let hi = (k + upper).min(n - 1);
        if piv != k {
            for j in k..=hi {
                let tmp = a[(k, j)];
                a[(k, j)] = a[(piv, j)];
                a[(piv, j)] = tmp;
            }
            b.swap_rows(k, piv);
        }
        let d = a[(k, k)];
        for i in (k + 1)..=last {
            let f = a[(i, k)] / d;
            if f == 0.0 {
                continue;
            }
            a[(i, k)] = 0.0;
            for j in (k + 1)..=hi {
                a[(i, j)] -= f * a[(k, j)];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let hi = (k + upper).min(n - 1);
        let mut acc = b[k];
        for j in (k + 1)..=hi {
            acc -= a[(k, j)] * x[j];
        }
        x[k] = acc / a[(k, k)];
    }
    Some(x)
}
