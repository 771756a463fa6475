//! Gauss-Legendre rules and adaptive Gauss-Kronrod (7/15) integration.
//!
//! The adaptive driver works for any value type implementing [`QuadValue`],
//! which covers `f64` and `Complex64`.

use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that can be accumulated by a quadrature rule.
pub trait QuadValue:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn magnitude(&self) -> f64;
    fn is_finite_value(&self) -> bool;
}

impl QuadValue for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl QuadValue for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn is_finite_value(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// An n-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the rule by Newton iteration on the Legendre polynomial.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (c + h * x, h * w))
    }

    pub fn integrate<V: QuadValue>(&self, mut f: impl FnMut(f64) -> V, a: f64, b: f64) -> V {
        let mut acc = V::default();
        for (x, w) in self.mapped(a, b) {
            acc = acc + f(x) * w;
        }
        acc
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Cached rule with `n` nodes for the sizes used across the crate.
pub fn gauss_legendre(n: usize) -> &'static GaussLegendre {
    static RULES: OnceLock<Vec<GaussLegendre>> = OnceLock::new();
    let rules = RULES.get_or_init(|| (1..=32).map(GaussLegendre::new).collect());
    assert!((1..=32).contains(&n), "cached Gauss-Legendre rules cover 1..=32 nodes");
    &rules[n - 1]
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15<V: QuadValue>(f: &mut impl FnMut(f64) -> V, a: f64, b: f64) -> (V, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k = k + s * WGK[j];
        if j % 2 == 1 {
            g = g + s * WG[j / 2];
        }
    }
    let k = k * h;
    let g = g * h;
    (k, (k - g).magnitude())
}

/// Absolute/relative stopping rule for the adaptive driver.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-12, rel: 1e-10, max_intervals: 4000 }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel, ..Self::default() }
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral<V> {
    pub value: V,
    pub error: f64,
    pub evaluations: usize,
}

struct Piece<V> {
    a: f64,
    b: f64,
    value: V,
    error: f64,
}

impl<V> PartialEq for Piece<V> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<V> Eq for Piece<V> {}
impl<V> PartialOrd for Piece<V> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<V> Ord for Piece<V> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Adaptive G7K15 over the consecutive intervals given by `breaks`.
pub fn adaptive_breaks<V: QuadValue>(
    mut f: impl FnMut(f64) -> V,
    breaks: &[f64],
    tol: Tolerance,
) -> Result<Integral<V>> {
    let mut heap = BinaryHeap::new();
    let mut total = V::default();
    let mut err = 0.0;
    let mut evals = 0;
    for w in breaks.windows(2) {
        if w[1] == w[0] {
            continue;
        }
        let (v, e) = kronrod15(&mut f, w[0], w[1]);
        evals += 15;
        total = total + v;
        err += e;
        heap.push(Piece { a: w[0], b: w[1], value: v, error: e });
    }
    loop {
        if !total.is_finite_value() {
            return Err(Error::Quadrature(format!(
                "non-finite integrand on [{}, {}]",
                breaks[0],
                breaks[breaks.len() - 1]
            )));
        }
        if err <= tol.abs.max(tol.rel * total.magnitude()) {
            break;
        }
        if heap.len() >= tol.max_intervals {
            return Err(Error::Quadrature(format!(
                "no convergence after {} intervals (error estimate {err:.3e})",
                heap.len()
            )));
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval below floating resolution; accept what we have.
            heap.push(worst);
            break;
        }
        let (v1, e1) = kronrod15(&mut f, worst.a, mid);
        let (v2, e2) = kronrod15(&mut f, mid, worst.b);
        evals += 30;
        total = total - worst.value + v1 + v2;
        err += e1 + e2 - worst.error;
        heap.push(Piece { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Piece { a: mid, b: worst.b, value: v2, error: e2 });
    }
    // Re-sum to limit drift from the running updates.
    let mut value = V::default();
    let mut error = 0.0;
    for p in heap.iter() {
        value = value + p.value;
        error += p.error;
    }
    Ok(Integral { value, error, evaluations: evals })
}

/// Adaptive G7K15 on `[a, b]`.
pub fn adaptive<V: QuadValue>(
    f: impl FnMut(f64) -> V,
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Result<Integral<V>> {
    adaptive_breaks(f, &[a, b], tol)
}

/// `∫_0^b f(r) dr` for an integrand behaving like `r^exponent` at the origin
/// (`exponent > -1`).
///
/// The substitution `r = b e^{-v}` turns the power singularity into an
/// exponentially decaying integrand; the piece below the cut is added from
/// the power law.
pub fn near_zero<V: QuadValue>(
    mut f: impl FnMut(f64) -> V,
    b: f64,
    exponent: f64,
    tol: Tolerance,
) -> Result<Integral<V>> {
    if exponent <= -1.0 {
        return Err(Error::Divergent(format!(
            "integrand ~ r^{exponent} is not integrable at the origin"
        )));
    }
    let decay = exponent + 1.0;
    let v_max = (40.0 / decay).min(700.0);
    let mut breaks = vec![0.0];
    let mut v = 1.0;
    while v < v_max {
        breaks.push(v);
        v *= 2.0;
    }
    breaks.push(v_max);
    let mut inner = adaptive_breaks(
        |v: f64| {
            let r = b * (-v).exp();
            f(r) * r
        },
        &breaks,
        tol,
    )?;
    let r_cut = b * (-v_max).exp();
    let remainder = f(r_cut) * (r_cut / decay);
    inner.value = inner.value + remainder;
    inner.error += remainder.magnitude() * 1e-3;
    Ok(inner)
}

/// `∫_a^∞ f(r) dr` through `r = a + v / (1 - v)`.
pub fn semi_infinite<V: QuadValue>(
    mut f: impl FnMut(f64) -> V,
    a: f64,
    tol: Tolerance,
) -> Result<Integral<V>> {
    adaptive_breaks(
        |v: f64| {
            if v >= 1.0 {
                return V::default();
            }
            let s = 1.0 - v;
            f(a + v / s) * (1.0 / (s * s))
        },
        &[0.0, 0.5, 0.75, 0.875, 0.9375, 1.0],
        tol,
    )
}
