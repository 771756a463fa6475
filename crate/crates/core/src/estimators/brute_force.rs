//! Brute-force reference values for the forms on the real line.
//!
//! Deliberately independent of [`MeasureRule`](crate::levy::MeasureRule):
//! uniform midpoint grids, the leading Taylor term subtracted on `|y| < 1` and
//! integrated after the substitution `u = y^{q-α}`, and the tail mapped to a
//! bounded interval. Slow, and meant only as a cross-check.

use super::FormKind;
use crate::error::{invalid, Result};
use crate::functions::CylindricalFunction;
use crate::levy::{LevyMeasure, TailClass};

/// Grid cells per unit interval.
const CELLS: usize = 40_000;

fn density(m: &LevyMeasure, y: f64) -> f64 {
    m.rays().iter().filter(|r| r.direction[0] * y > 0.0).map(|r| r.weight * r.k(y.abs())).sum()
}

fn midpoint(a: f64, b: f64, cells: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / cells as f64;
    (0..cells).map(|i| f(a + h * (i as f64 + 0.5))).sum::<f64>() * h
}

/// `∫_{0<|y|<1} |y|^q M(dy)` through `u = |y|^{q-α}`.
fn small_moment(m: &LevyMeasure, q: f64) -> f64 {
    let alpha = m.singularity_order();
    let e = q - alpha;
    [1.0, -1.0]
        .iter()
        .map(|&sign| {
            midpoint(0.0, 1.0, CELLS, |u| {
                let y = u.powf(1.0 / e);
                y.powf(1.0 + alpha) * density(m, sign * y) / e
            })
        })
        .sum()
}

/// `∫_{|y|>1} g(y) M(dy)`.
fn far(m: &LevyMeasure, g: &dyn Fn(f64) -> f64) -> f64 {
    let mut total = 0.0;
    for sign in [1.0, -1.0] {
        total += match m.tail_class() {
            TailClass::Power { index } => {
                // y = v^{-1/γ}: dy M ≈ y^{1+γ} m(y) dv / γ.
                midpoint(0.0, 1.0, 4 * CELLS, |v| {
                    let y = v.powf(-1.0 / index);
                    g(sign * y) * y.powf(1.0 + index) * density(m, sign * y) / index
                })
            }
            TailClass::Gaussian { rate } => {
                let end = 1.0 + (60.0 / rate).sqrt();
                midpoint(1.0, end, 8 * CELLS, |y| g(sign * y) * density(m, sign * y))
            }
            TailClass::Exponential { rate } => {
                let end = 1.0 + 60.0 / rate;
                midpoint(1.0, end, 16 * CELLS, |y| g(sign * y) * density(m, sign * y))
            }
            TailClass::Compact { radius } => {
                if radius > 1.0 {
                    midpoint(1.0, radius, CELLS, |y| g(sign * y) * density(m, sign * y))
                } else {
                    0.0
                }
            }
        };
    }
    total
}

/// The inner integral of `kind` at `x ∈ R`.
pub fn inner(kind: FormKind, f: &CylindricalFunction, m: &LevyMeasure, x: f64) -> Result<f64> {
    if m.dimension() != 1 || f.ambient_dim() != 1 {
        return Err(invalid("the brute-force oracle works on the real line only"));
    }
    let v = f.value(&[x]);
    let dv = f.gradient(&[x])[0];
    let lift = |u: f64| match kind {
        FormKind::Dirichlet => u,
        FormKind::Entropy { p } => u.powf(p),
        FormKind::Weighted { p } => u.abs().powf(p),
    };
    let big_f = lift(v);
    let a = match kind {
        FormKind::Dirichlet => dv,
        FormKind::Entropy { p } => p * v.powf(p - 1.0) * dv,
        FormKind::Weighted { p } => p * v.abs().powf(p - 1.0) * v.signum() * dv,
    };
    let g = |y: f64| {
        let inc = lift(f.value(&[x + y])) - big_f;
        match kind {
            FormKind::Dirichlet => inc * inc,
            FormKind::Entropy { .. } => inc * inc / big_f,
            FormKind::Weighted { p } => {
                if y.abs() < 1.0 {
                    inc.abs() * y.abs().powf(2.0 - p)
                } else {
                    inc.abs()
                }
            }
        }
    };
    // Leading term near 0 as (coefficient, power of |y|).
    let (coef, q) = match kind {
        FormKind::Dirichlet => (a * a, 2.0),
        FormKind::Entropy { .. } => (a * a / big_f, 2.0),
        FormKind::Weighted { p } => (a.abs(), 3.0 - p),
    };
    let near = midpoint(-1.0, 1.0, 2 * CELLS, |y| (g(y) - coef * y.abs().powf(q)) * density(m, y));
    Ok(near + coef * small_moment(m, q) + far(m, &g))
}

/// The form with `σ` replaced by the empirical measure of `xs`.
pub fn form(kind: FormKind, f: &CylindricalFunction, m: &LevyMeasure, xs: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for &x in xs {
        total += inner(kind, f, m, x)?;
    }
    Ok(total / xs.len() as f64)
}
