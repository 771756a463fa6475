//! Inverse-CDF tables for the radial part of a ray restricted to `r ≥ ε`.
//!
//! With `Ḡ(r) = ∫_r^∞ k` the variable `v = -ln(Ḡ(r)/Ḡ(ε))` of a draw is
//! standard exponential, so the table stores `r` on a uniform grid in `v`
//! (built by interpolating `ln r`) and a draw is one exponential variate plus
//! a linear interpolation.

use crate::error::{Error, Result};
use crate::levy::{Ray, TailClass};
use crate::quad::gauss_legendre;

/// Points of the `v` grid.
pub const TABLE_POINTS: usize = 10_000;
const CELLS: usize = 4000;

#[derive(Debug, Clone)]
pub struct RayTable {
    pub direction: Vec<f64>,
    /// `w Ḡ(ε)`, the jump intensity carried by this ray.
    pub mass: f64,
    v_max: f64,
    dv: f64,
    r: Vec<f64>,
    /// `d ln r / dv` past the end of the table.
    tail_slope: f64,
}

impl RayTable {
    pub fn new(ray: &Ray, tail: TailClass, eps: f64) -> Result<Self> {
        let r_end = match tail {
            TailClass::Compact { radius } => radius.max(eps * 1.000001),
            TailClass::Gaussian { rate } => eps.max(1.0) + (45.0 / rate).sqrt(),
            TailClass::Exponential { rate } => eps.max(1.0) + 45.0 / rate,
            TailClass::Power { index } => eps.max(1.0) * 1e14f64.powf(1.0 / index),
        };
        let (l0, l1) = (eps.ln(), r_end.ln());
        let rule = gauss_legendre(4);
        let mut grid = Vec::with_capacity(CELLS + 1);
        let mut cell = Vec::with_capacity(CELLS);
        for i in 0..=CELLS {
            grid.push(l0 + (l1 - l0) * i as f64 / CELLS as f64);
        }
        for i in 0..CELLS {
            let (a, b) = (grid[i].exp(), grid[i + 1].exp());
            cell.push(rule.integrate(|r: f64| ray.k(r), a, b));
        }
        let beyond = match tail {
            TailClass::Power { index } => ray.k(r_end) * r_end / index,
            _ => 0.0,
        };
        // Survival function at the grid nodes.
        let mut surv = vec![0.0; CELLS + 1];
        surv[CELLS] = beyond;
        for i in (0..CELLS).rev() {
            surv[i] = surv[i + 1] + cell[i];
        }
        let total = surv[0];
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::Quadrature(format!("ray mass beyond ε = {eps} is {total}")));
        }
        // v at the nodes; stop where the survival vanishes.
        let mut v_nodes = Vec::with_capacity(CELLS + 1);
        let mut l_nodes = Vec::with_capacity(CELLS + 1);
        for i in 0..=CELLS {
            if surv[i] <= 0.0 {
                break;
            }
            let v = -(surv[i] / total).ln();
            if v_nodes.last().is_some_and(|&p| v <= p) {
                continue;
            }
            v_nodes.push(v);
            l_nodes.push(grid[i]);
        }
        let v_max = *v_nodes.last().unwrap();
        let dv = v_max / (TABLE_POINTS - 1) as f64;
        let mut ln_r = Vec::with_capacity(TABLE_POINTS);
        let mut j = 0;
        for i in 0..TABLE_POINTS {
            let v = (i as f64 * dv).min(v_max);
            while j + 2 < v_nodes.len() && v_nodes[j + 1] < v {
                j += 1;
            }
            let (va, vb) = (v_nodes[j], v_nodes[(j + 1).min(v_nodes.len() - 1)]);
            let (la, lb) = (l_nodes[j], l_nodes[(j + 1).min(l_nodes.len() - 1)]);
            let s = if vb > va { ((v - va) / (vb - va)).clamp(0.0, 1.0) } else { 0.0 };
            ln_r.push(la + s * (lb - la));
        }
        let tail_slope = match tail {
            TailClass::Power { index } => 1.0 / index,
            _ => 0.0,
        };
        let r = ln_r.into_iter().map(f64::exp).collect();
        Ok(Self { direction: ray.direction.clone(), mass: ray.weight * total, v_max, dv, r, tail_slope })
    }

    /// Radius for the exponential variate `e`.
    #[inline]
    pub fn radius(&self, e: f64) -> f64 {
        if e >= self.v_max {
            return self.r[TABLE_POINTS - 1] * ((e - self.v_max) * self.tail_slope).exp();
        }
        let x = e / self.dv;
        let i = (x as usize).min(TABLE_POINTS - 2);
        let s = x - i as f64;
        self.r[i] + s * (self.r[i + 1] - self.r[i])
    }
}
