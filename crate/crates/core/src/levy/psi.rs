//! Exponential tail functionals `ψ(s) = ∫_{|y|>1} |y| e^{s|y|} M(dy)` and
//! `M_s = ∫ |y|² e^{s|y|} M(dy)`.

use super::measure::{ray_integral, LevyMeasure, TailClass};
use crate::error::{invalid, Error, Result};

fn exp_weighted(m: &LevyMeasure, s: f64, p: f64, lo: f64) -> Result<f64> {
    if s < 0.0 {
        return Err(invalid("exponential weight must be non-negative"));
    }
    let tail = m.tail_class();
    if !tail.has_exp_moment(s) {
        return Err(Error::Divergent(format!("∫ e^{{{s}|y|}} M(dy) diverges for tail {tail:?}")));
    }
    let order = m.singularity_order();
    let weight = move |r: f64| (s * r).exp();
    let mut total = 0.0;
    for ray in m.rays() {
        let v = match tail {
            TailClass::Gaussian { rate } => {
                // The integrand peaks near s/(2 rate); cut 60 e-folds past it.
                let end = lo.max(1.0) + s / (2.0 * rate) + (60.0 / rate).sqrt() + 1.0;
                ray_integral(ray, order, tail, lo, end, p, &weight)?
            }
            _ => ray_integral(ray, order, tail, lo, f64::INFINITY, p, &weight)?,
        };
        total += ray.weight * v;
    }
    Ok(total)
}

/// `ψ(s)`.
pub fn psi_of(m: &LevyMeasure, s: f64) -> Result<f64> {
    exp_weighted(m, s, 1.0, 1.0)
}

/// `M_s = ∫ |y|² e^{s|y|} M(dy)`.
pub fn ms_of(m: &LevyMeasure, s: f64) -> Result<f64> {
    exp_weighted(m, s, 2.0, 0.0)
}

/// Largest `s` for which `ψ(s)` is finite, or infinity.
fn psi_domain(m: &LevyMeasure) -> f64 {
    match m.tail_class() {
        TailClass::Exponential { rate } => rate,
        TailClass::Power { .. } => 0.0,
        _ => f64::INFINITY,
    }
}

/// `ψ^{-1}(v)` by bracket expansion and bisection; `v` must exceed `ψ(0+)`.
pub fn psi_inverse(m: &LevyMeasure, v: f64) -> Result<f64> {
    let floor = psi_of(m, 0.0)?;
    if !(v > floor) {
        return Err(invalid(format!("ψ^{{-1}}({v}) undefined: ψ(0+) = {floor}")));
    }
    let cap = psi_domain(m);
    let mut hi = 1.0f64.min(0.5 * cap);
    while psi_of(m, hi)? < v {
        hi = if cap.is_finite() { 0.5 * (hi + cap) } else { 2.0 * hi };
        if hi > 1e6 || (cap.is_finite() && cap - hi < 1e-14) {
            return Err(Error::Quadrature(format!("could not bracket ψ^{{-1}}({v})")));
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-12 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if psi_of(m, mid)? < v {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `ψ^{-1}` extended by 0 below `ψ(0+)`, the generalised inverse of the
/// non-decreasing map `ψ`.
pub fn psi_inverse_generalised(m: &LevyMeasure, v: f64) -> Result<f64> {
    if v <= psi_of(m, 0.0)? {
        Ok(0.0)
    } else {
        psi_inverse(m, v)
    }
}
