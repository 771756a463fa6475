//! Fixed quadrature rules for integrals against a Lévy measure.
//!
//! `∫ g(y) M(dy)` is split at `|y| = δ`. Outside the ball the rule holds
//! precomputed nodes `(r_i, w_i)` on every ray; inside, callers use a Taylor
//! surrogate through the moments `∫_0^δ r^p k(r) dr`, `p = 2, 3, 4`.

use super::measure::{ray_integral, LevyMeasure, Ray, TailClass};
use crate::error::Result;
use crate::linalg;
use crate::quad::gauss_legendre;

/// Default split radius.
pub const DEFAULT_DELTA: f64 = 1e-3;

const POINTS: usize = 8;


/// Nodes of one ray.
#[derive(Debug, Clone)]
pub struct RayRule {
    pub direction: Vec<f64>,
    /// `(r, weight)` with the ray weight and `k(r)` folded in.
    pub nodes: Vec<(f64, f64)>,
    /// `w ∫_0^δ r^p k(r) dr` for `p = 2, 3, 4`.
    pub small: [f64; 3],
}

#[derive(Debug, Clone)]
pub struct MeasureRule {
    pub delta: f64,
    pub dimension: usize,
    pub rays: Vec<RayRule>,
}

fn push_panel(nodes: &mut Vec<(f64, f64)>, ray: &Ray, a: f64, b: f64) {
    for (r, w) in gauss_legendre(POINTS).mapped(a, b) {
        let k = ray.k(r);
        if k != 0.0 {
            nodes.push((r, ray.weight * w * k));
        }
    }
}

fn ray_nodes(ray: &Ray, tail: TailClass, delta: f64) -> Vec<(f64, f64)> {
    let mut nodes = Vec::new();
    let mut a = delta;
    while a < 1.0 {
        let b = (2.0 * a).min(1.0);
        push_panel(&mut nodes, ray, a, b);
        a = b;
    }
    let start = delta.max(1.0);
    match tail {
        TailClass::Compact { radius } => {
            let mut a = start;
            while a < radius {
                let b = (a + 0.5).min(radius);
                push_panel(&mut nodes, ray, a, b);
                a = b;
            }
        }
        TailClass::Gaussian { rate } => {
            let end = start + (40.0 / rate).sqrt();
            let mut a = start;
            while a < end {
                let b = (a + 0.5).min(end);
                push_panel(&mut nodes, ray, a, b);
                a = b;
            }
        }
        TailClass::Exponential { rate } => {
            let end = start + 40.0 / rate;
            let mut a = start;
            let mut width = 0.5 / rate;
            while a < end {
                let b = (a + width).min(end);
                push_panel(&mut nodes, ray, a, b);
                a = b;
                width *= 1.2;
            }
        }
        TailClass::Power { index } => {
            // r = start/v, v ∈ (v_min, 1], geometric panels in v.
            let v_min = 1e-12f64.powf(1.0 / index);
            let mut hi = 1.0;
            while hi > v_min {
                let lo = (0.5 * hi).max(v_min);
                for (v, w) in gauss_legendre(POINTS).mapped(lo, hi) {
                    let r = start / v;
                    let k = ray.k(r);
                    if k != 0.0 {
                        nodes.push((r, ray.weight * w * k * start / (v * v)));
                    }
                }
                hi = lo;
            }
            // Remaining mass ≈ k(R) R / index, placed at a representative radius.
            let r_end = start / v_min;
            let mass = ray.k(r_end) * r_end / index;
            if mass > 0.0 {
                nodes.push((r_end * 2f64.powf(1.0 / index), ray.weight * mass));
            }
        }
    }
    nodes
}

impl MeasureRule {
    pub fn new(m: &LevyMeasure, delta: f64) -> Result<Self> {
        let order = m.singularity_order();
        let tail = m.tail_class();
        let mut rays = Vec::with_capacity(m.rays().len());
        for ray in m.rays() {
            let mut small = [0.0; 3];
            for (i, p) in [2.0, 3.0, 4.0].into_iter().enumerate() {
                small[i] = ray.weight * ray_integral(ray, order, tail, 0.0, delta, p, &|_| 1.0)?;
            }
            rays.push(RayRule { direction: ray.direction.clone(), nodes: ray_nodes(ray, tail, delta), small });
        }
        Ok(Self { delta, dimension: m.dimension(), rays })
    }

    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.rays.iter().map(|r| r.nodes.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `∫_{|y|≥δ} g(y) M(dy)`.
    pub fn integrate_outer(&self, mut g: impl FnMut(&[f64]) -> f64) -> f64 {
        let mut y = vec![0.0; self.dimension];
        let mut total = 0.0;
        for ray in &self.rays {
            for &(r, w) in &ray.nodes {
                for (yi, ui) in y.iter_mut().zip(&ray.direction) {
                    *yi = r * ui;
                }
                total += w * g(&y);
            }
        }
        total
    }

    /// The rule seen through the projections `ξ = H y`.
    pub fn project(&self, basis: &[Vec<f64>]) -> ProjectedRule {
        let rays = self
            .rays
            .iter()
            .map(|ray| ProjectedRay {
                coef: basis.iter().map(|h| linalg::dot(h, &ray.direction)).collect(),
                nodes: ray.nodes.clone(),
                small: ray.small,
            })
            .collect();
        ProjectedRule { delta: self.delta, rays }
    }
}

/// One ray after projection: `H(r u) = r c`.
#[derive(Debug, Clone)]
pub struct ProjectedRay {
    pub coef: Vec<f64>,
    pub nodes: Vec<(f64, f64)>,
    pub small: [f64; 3],
}

#[derive(Debug, Clone)]
pub struct ProjectedRule {
    pub delta: f64,
    pub rays: Vec<ProjectedRay>,
}
