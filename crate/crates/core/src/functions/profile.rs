//! Profiles `ψ: R^n → R` underlying cylindrical functions.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::shape::Shape;
use crate::error::{invalid, Result};

/// Certified bounds of a function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bounds {
    pub infimum: f64,
    pub supremum: f64,
    /// `sup |Df|`
    pub grad_sup: f64,
    pub lipschitz: f64,
}

impl Bounds {
    /// `‖f‖_∞`.
    pub fn sup_norm(&self) -> f64 {
        self.infimum.abs().max(self.supremum.abs())
    }
}

/// A smooth function of `n` real variables with exact derivatives.
pub trait Profile: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn value(&self, xi: &[f64]) -> f64;
    fn gradient(&self, xi: &[f64], out: &mut [f64]);
    /// Row-major `n × n` Hessian.
    fn hessian(&self, xi: &[f64], out: &mut [f64]);
    fn bounds(&self) -> Bounds;

    /// `(ψ, ψ', ψ'')` for one-dimensional profiles.
    fn eval1(&self, u: f64) -> (f64, f64, f64) {
        let mut g = [0.0];
        let mut h = [0.0];
        self.gradient(&[u], &mut g);
        self.hessian(&[u], &mut h);
        (self.value(&[u]), g[0], h[0])
    }
}

/// One term `c φ(k (ξ_i - m))` acting on coordinate `i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coord: usize,
    pub shape: Shape,
    pub scale: f64,
    pub rate: f64,
    pub shift: f64,
}

impl Term {
    pub fn new(shape: Shape, scale: f64, rate: f64, shift: f64) -> Self {
        Self { coord: 0, shape, scale, rate, shift }
    }

    pub fn on(mut self, coord: usize) -> Self {
        self.coord = coord;
        self
    }

    #[inline]
    fn eval(&self, u: f64) -> (f64, f64, f64) {
        let (v, d1, d2) = self.shape.eval(self.rate * (u - self.shift));
        (self.scale * v, self.scale * self.rate * d1, self.scale * self.rate * self.rate * d2)
    }

    fn range(&self) -> (f64, f64) {
        let (lo, hi) = self.shape.range();
        let (a, b) = (self.scale * lo, self.scale * hi);
        let fix = |v: f64| if v.is_nan() { 0.0 } else { v };
        if self.scale >= 0.0 {
            (fix(a), fix(b))
        } else {
            (fix(b), fix(a))
        }
    }

    fn slope(&self) -> f64 {
        let s = self.shape.slope();
        if self.scale == 0.0 {
            0.0
        } else {
            (self.scale * self.rate).abs() * s
        }
    }
}

/// `ψ(ξ) = offset + Σ_k c_k φ_k(r_k (ξ_{i_k} - m_k))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Additive {
    pub dim: usize,
    pub offset: f64,
    pub terms: Vec<Term>,
}

impl Additive {
    pub fn new(dim: usize, offset: f64, terms: Vec<Term>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("profile needs at least one variable"));
        }
        if let Some(t) = terms.iter().find(|t| t.coord >= dim) {
            return Err(invalid(format!("term on coordinate {} of a {dim}-variable profile", t.coord)));
        }
        Ok(Self { dim, offset, terms })
    }

    /// One-variable profile.
    pub fn scalar(offset: f64, terms: Vec<Term>) -> Self {
        Self { dim: 1, offset, terms: terms.into_iter().map(|t| t.on(0)).collect() }
    }
}

impl Profile for Additive {
    fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn value(&self, xi: &[f64]) -> f64 {
        self.offset + self.terms.iter().map(|t| t.eval(xi[t.coord]).0).sum::<f64>()
    }

    fn gradient(&self, xi: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for t in &self.terms {
            out[t.coord] += t.eval(xi[t.coord]).1;
        }
    }

    fn hessian(&self, xi: &[f64], out: &mut [f64]) {
        let n = self.dim;
        out.iter_mut().for_each(|v| *v = 0.0);
        for t in &self.terms {
            out[t.coord * n + t.coord] += t.eval(xi[t.coord]).2;
        }
    }

    fn bounds(&self) -> Bounds {
        let mut lo = self.offset;
        let mut hi = self.offset;
        let mut slopes = vec![0.0; self.dim];
        for t in &self.terms {
            let (a, b) = t.range();
            lo += a;
            hi += b;
            slopes[t.coord] += t.slope();
        }
        let g = slopes.iter().map(|s| s * s).sum::<f64>().sqrt();
        Bounds { infimum: lo, supremum: hi, grad_sup: g, lipschitz: g }
    }

    #[inline]
    fn eval1(&self, u: f64) -> (f64, f64, f64) {
        let mut acc = (self.offset, 0.0, 0.0);
        for t in &self.terms {
            let (v, d1, d2) = t.eval(u);
            acc.0 += v;
            acc.1 += d1;
            acc.2 += d2;
        }
        acc
    }
}

/// Scalar maps for [`compose_scalar`](super::compose_scalar).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "map")]
pub enum ScalarMap {
    Exp,
    Log,
    Square,
    /// `v^p` for `v > 0`.
    Power { p: f64 },
    /// `v log v` for `v > 0`.
    XLogX,
    /// `a + b v`.
    Affine { a: f64, b: f64 },
    /// `c tanh(v / c)`, a smooth cap at `±c`.
    Cap { c: f64 },
}

impl ScalarMap {
    #[inline]
    pub fn eval(self, v: f64) -> (f64, f64, f64) {
        match self {
            ScalarMap::Exp => {
                let e = v.exp();
                (e, e, e)
            }
            ScalarMap::Log => (v.ln(), 1.0 / v, -1.0 / (v * v)),
            ScalarMap::Square => (v * v, 2.0 * v, 2.0),
            ScalarMap::Power { p } => {
                let w = v.powf(p - 2.0);
                (w * v * v, p * w * v, p * (p - 1.0) * w)
            }
            ScalarMap::XLogX => (v * v.ln(), v.ln() + 1.0, 1.0 / v),
            ScalarMap::Affine { a, b } => (a + b * v, b, 0.0),
            ScalarMap::Cap { c } => {
                let t = (v / c).tanh();
                let s = 1.0 - t * t;
                (c * t, s, -2.0 * t * s / c)
            }
        }
    }

    /// Checks the map is defined on `[lo, hi]`.
    pub fn check_domain(self, lo: f64) -> Result<()> {
        match self {
            ScalarMap::Log | ScalarMap::XLogX | ScalarMap::Power { .. } if lo <= 0.0 => Err(invalid(
                format!("{self:?} needs a strictly positive argument but the infimum is {lo}"),
            )),
            _ => Ok(()),
        }
    }

    /// Range of the map over `[lo, hi]` and `sup |Φ'|` there.
    pub fn interval(self, lo: f64, hi: f64) -> (f64, f64, f64) {
        let at = |v: f64| -> (f64, f64) {
            if v.is_infinite() {
                match self {
                    ScalarMap::Exp if v < 0.0 => (0.0, 0.0),
                    ScalarMap::Affine { a, b } => (a + b * v, b.abs()),
                    ScalarMap::Cap { c } => (c * v.signum(), 0.0),
                    ScalarMap::Log if v > 0.0 => (f64::INFINITY, 0.0),
                    _ => (f64::INFINITY, f64::INFINITY),
                }
            } else {
                let (f, d, _) = self.eval(v);
                (f, d.abs())
            }
        };
        let (f_lo, d_lo) = at(lo);
        let (f_hi, d_hi) = at(hi);
        // |Φ'| peaks at an end point except for the cap, whose slope peaks at 0.
        let dmax = match self {
            ScalarMap::Cap { .. } if lo <= 0.0 && hi >= 0.0 => 1.0,
            _ => d_lo.max(d_hi),
        };
        let (mut rmin, mut rmax) = (f_lo.min(f_hi), f_lo.max(f_hi));
        match self {
            ScalarMap::Square if lo < 0.0 && hi > 0.0 => rmin = 0.0,
            ScalarMap::Square => {
                let (a, b) = (lo * lo, hi * hi);
                rmin = a.min(b);
                rmax = a.max(b);
            }
            ScalarMap::XLogX => {
                let m = (-1.0f64).exp();
                if lo < m && hi > m {
                    rmin = -m;
                }
                if hi.is_infinite() {
                    rmax = f64::INFINITY;
                }
            }
            _ => {}
        }
        (rmin, rmax, dmax)
    }
}

/// `Φ ∘ ψ`.
#[derive(Debug, Clone)]
pub struct Composite {
    pub inner: Arc<dyn Profile>,
    pub map: ScalarMap,
}

impl Profile for Composite {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[inline]
    fn value(&self, xi: &[f64]) -> f64 {
        self.map.eval(self.inner.value(xi)).0
    }

    fn gradient(&self, xi: &[f64], out: &mut [f64]) {
        let (_, d1, _) = self.map.eval(self.inner.value(xi));
        self.inner.gradient(xi, out);
        out.iter_mut().for_each(|g| *g *= d1);
    }

    fn hessian(&self, xi: &[f64], out: &mut [f64]) {
        let n = self.dim();
        let (_, d1, d2) = self.map.eval(self.inner.value(xi));
        let mut g = vec![0.0; n];
        self.inner.gradient(xi, &mut g);
        self.inner.hessian(xi, out);
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = d1 * out[i * n + j] + d2 * g[i] * g[j];
            }
        }
    }

    fn bounds(&self) -> Bounds {
        let b = self.inner.bounds();
        let (lo, hi, dmax) = self.map.interval(b.infimum, b.supremum);
        let scale = |x: f64| if x == 0.0 { 0.0 } else { dmax * x };
        Bounds { infimum: lo, supremum: hi, grad_sup: scale(b.grad_sup), lipschitz: scale(b.lipschitz) }
    }

    #[inline]
    fn eval1(&self, u: f64) -> (f64, f64, f64) {
        let (v, d1, d2) = self.inner.eval1(u);
        let (f, p1, p2) = self.map.eval(v);
        (f, p1 * d1, p2 * d1 * d1 + p1 * d2)
    }
}
