//! Lévy measures in ray form.
//!
//! Every measure is stored as a finite family of rays: direction `u_j`,
//! weight `w_j` and a radial density `k_j`, so that
//! `∫ g dM = Σ_j w_j ∫_0^∞ g(r u_j) k_j(r) dr`.
//! One-dimensional densities give the two rays `±1`, two-dimensional
//! densities are split into equally spaced polar directions, and spherical
//! measures are already in this form.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::quad::{self, Tolerance};

pub type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type DensityFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Number of polar directions used for two-dimensional densities.
pub const POLAR_DIRECTIONS: usize = 48;

/// Decay class of the radial density at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "class")]
pub enum TailClass {
    /// `k(r) ≲ e^{-rate r}`.
    Exponential { rate: f64 },
    /// `k(r) ≲ e^{-rate r^2}`.
    Gaussian { rate: f64 },
    /// `M(|y| > R) ~ R^{-index}`.
    Power { index: f64 },
    /// No mass beyond `radius`.
    Compact { radius: f64 },
}

impl TailClass {
    /// Whether `∫_{|y|>1} |y|^p M(dy)` is finite.
    pub fn has_moment(&self, p: f64) -> bool {
        match *self {
            TailClass::Power { index } => p < index,
            _ => true,
        }
    }

    /// Whether `∫_{|y|>1} e^{s|y|} M(dy)` is finite.
    pub fn has_exp_moment(&self, s: f64) -> bool {
        match *self {
            TailClass::Power { .. } => s <= 0.0,
            TailClass::Exponential { rate } => s < rate,
            _ => true,
        }
    }
}

/// One ray of a measure.
#[derive(Clone)]
pub struct Ray {
    pub direction: Vec<f64>,
    pub weight: f64,
    pub radial: RadialFn,
}

impl Ray {
    pub fn new(direction: Vec<f64>, weight: f64, radial: RadialFn) -> Self {
        Self { direction, weight, radial }
    }

    pub fn k(&self, r: f64) -> f64 {
        (self.radial)(r)
    }
}

impl fmt::Debug for Ray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Ray")
            .field("direction", &self.direction)
            .field("weight", &self.weight)
            .finish()
    }
}

#[derive(Clone)]
enum Shape {
    Zero,
    Density(DensityFn),
    Rays,
}

/// A Lévy measure on `R^d`.
#[derive(Clone)]
pub struct LevyMeasure {
    dimension: usize,
    singularity_order: f64,
    tail: TailClass,
    shape: Shape,
    rays: Vec<Ray>,
    symmetric: bool,
}

impl fmt::Debug for LevyMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LevyMeasure")
            .field("dimension", &self.dimension)
            .field("singularity_order", &self.singularity_order)
            .field("tail", &self.tail)
            .field("rays", &self.rays.len())
            .field("symmetric", &self.symmetric)
            .finish()
    }
}

impl LevyMeasure {
    /// The zero measure.
    pub fn zero(dimension: usize) -> Self {
        Self {
            dimension,
            singularity_order: 0.0,
            tail: TailClass::Compact { radius: 0.0 },
            shape: Shape::Zero,
            rays: Vec::new(),
            symmetric: true,
        }
    }

    /// Measure with a Lebesgue density in dimension one or two.
    ///
    /// `singularity_order` is the α with `density(y) ~ |y|^{-d-α}` at the
    /// origin; it must lie in `[0, 2)`.
    pub fn from_density(
        dimension: usize,
        density: DensityFn,
        singularity_order: f64,
        tail: TailClass,
    ) -> Result<Self> {
        let rays = match dimension {
            1 => {
                let plus = density.clone();
                let minus = density.clone();
                vec![
                    Ray::new(vec![1.0], 1.0, Arc::new(move |r| plus(&[r]))),
                    Ray::new(vec![-1.0], 1.0, Arc::new(move |r| minus(&[-r]))),
                ]
            }
            2 => {
                let n = POLAR_DIRECTIONS;
                (0..n)
                    .map(|i| {
                        let th = 2.0 * std::f64::consts::PI * (i as f64 + 0.5) / n as f64;
                        let (s, c) = th.sin_cos();
                        let dens = density.clone();
                        Ray::new(
                            vec![c, s],
                            2.0 * std::f64::consts::PI / n as f64,
                            Arc::new(move |r| r * dens(&[r * c, r * s])),
                        )
                    })
                    .collect()
            }
            _ => {
                return Err(Error::Unsupported(format!(
                    "densities in dimension {dimension}; use spherical atoms instead"
                )))
            }
        };
        let mut m = Self {
            dimension,
            singularity_order,
            tail,
            shape: Shape::Density(density),
            rays,
            symmetric: false,
        };
        m.validate()?;
        Ok(m)
    }

    /// `M(A) = Σ_j w_j ∫_0^∞ χ_A(r u_j) k(r) dr` with unit directions `u_j`.
    pub fn spherical(
        atoms: Vec<(Vec<f64>, f64)>,
        radial: RadialFn,
        singularity_order: f64,
        tail: TailClass,
    ) -> Result<Self> {
        let dimension = atoms.first().map(|a| a.0.len()).ok_or_else(|| invalid("no atoms"))?;
        let mut rays = Vec::with_capacity(atoms.len());
        for (u, w) in atoms {
            if u.len() != dimension {
                return Err(Error::Dimension { expected: dimension, got: u.len() });
            }
            let n = linalg::norm(&u);
            if (n - 1.0).abs() > 1e-10 {
                return Err(invalid("spherical atoms must be unit vectors"));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(invalid("atom weights must be positive"));
            }
            rays.push(Ray::new(u, w, radial.clone()));
        }
        Self::from_rays(dimension, rays, singularity_order, tail)
    }

    /// Measure given directly by rays (directions need not be unit length
    /// checked here beyond finiteness).
    pub fn from_rays(
        dimension: usize,
        rays: Vec<Ray>,
        singularity_order: f64,
        tail: TailClass,
    ) -> Result<Self> {
        let mut m = Self {
            dimension,
            singularity_order,
            tail,
            shape: Shape::Rays,
            rays,
            symmetric: false,
        };
        m.validate()?;
        Ok(m)
    }

    fn validate(&mut self) -> Result<()> {
        if !(0.0..2.0).contains(&self.singularity_order) {
            return Err(invalid(format!(
                "singularity order {} outside [0, 2)",
                self.singularity_order
            )));
        }
        for ray in &self.rays {
            if ray.direction.len() != self.dimension {
                return Err(Error::Dimension { expected: self.dimension, got: ray.direction.len() });
            }
            // Compare the declared order with the observed small-r slope.
            let (r1, r2) = (1e-7, 1e-6);
            let (k1, k2) = (ray.k(r1), ray.k(r2));
            if k1 < 0.0 || k2 < 0.0 || !k1.is_finite() || !k2.is_finite() {
                return Err(invalid("radial density must be finite and non-negative near 0"));
            }
            if k1 > 0.0 && k2 > 0.0 {
                let observed = (k1 / k2).ln() / 10f64.ln() - 1.0;
                if observed > self.singularity_order + 0.05 {
                    return Err(invalid(format!(
                        "observed singularity order {observed:.3} exceeds declared {}",
                        self.singularity_order
                    )));
                }
            }
        }
        let mass = self.truncated_second_moment()?;
        if !mass.is_finite() {
            return Err(invalid("∫(1 ∧ |y|²) M(dy) is not finite"));
        }
        self.symmetric = self.detect_symmetry();
        Ok(())
    }

    fn detect_symmetry(&self) -> bool {
        let probes = [1e-3, 0.05, 0.4, 1.0, 2.5];
        self.rays.iter().all(|ray| {
            self.rays.iter().any(|other| {
                ray.direction.iter().zip(&other.direction).all(|(a, b)| (a + b).abs() < 1e-12)
                    && (ray.weight - other.weight).abs() <= 1e-12 * ray.weight
                    && probes.iter().all(|&r| {
                        let (a, b) = (ray.k(r), other.k(r));
                        (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300)
                    })
            })
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn singularity_order(&self) -> f64 {
        self.singularity_order
    }

    pub fn tail_class(&self) -> TailClass {
        self.tail
    }

    pub fn rays(&self) -> &[Ray] {
        &self.rays
    }

    pub fn is_zero(&self) -> bool {
        self.rays.is_empty()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Lebesgue density at `y`, when the measure has one.
    pub fn density(&self, y: &[f64]) -> Option<f64> {
        match &self.shape {
            Shape::Zero => Some(0.0),
            Shape::Density(f) => Some(f(y)),
            Shape::Rays if self.dimension == 1 => {
                let r = y[0].abs();
                let s = y[0].signum();
                Some(
                    self.rays
                        .iter()
                        .filter(|ray| ray.direction[0].signum() == s)
                        .map(|ray| ray.weight * ray.k(r / ray.direction[0].abs()) / ray.direction[0].abs())
                        .sum(),
                )
            }
            Shape::Rays => None,
        }
    }

    /// Same measure multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut m = self.clone();
        for ray in &mut m.rays {
            ray.weight *= factor;
        }
        if let Shape::Density(f) = &self.shape {
            let f = f.clone();
            m.shape = Shape::Density(Arc::new(move |y| factor * f(y)));
        }
        m
    }

    /// `Σ_j w_j ∫_lo^hi r^p k_j(r) dr` with `hi = ∞` allowed.
    pub fn radial_moment(&self, p: f64, lo: f64, hi: f64) -> Result<f64> {
        let mut total = 0.0;
        for ray in &self.rays {
            total += ray.weight * ray_integral(ray, self.singularity_order, self.tail, lo, hi, p, &|_| 1.0)?;
        }
        Ok(total)
    }

    /// `∫ (1 ∧ |y|²) M(dy)`.
    pub fn truncated_second_moment(&self) -> Result<f64> {
        Ok(self.radial_moment(2.0, 0.0, 1.0)? + self.radial_moment(0.0, 1.0, f64::INFINITY)?)
    }

    /// `M(|y| > eps)`.
    pub fn mass_outside(&self, eps: f64) -> Result<f64> {
        self.radial_moment(0.0, eps, f64::INFINITY)
    }

    /// `∫ |y|^p M(dy)`; infinite when either end diverges.
    pub fn moment(&self, p: f64) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        if p - 1.0 - self.singularity_order <= -1.0 || !self.tail.has_moment(p) {
            return f64::INFINITY;
        }
        self.radial_moment(p, 0.0, f64::INFINITY).unwrap_or(f64::INFINITY)
    }

    /// `∫_{|y|>1} |y|^p M(dy)`.
    pub fn moment_outside_unit(&self, p: f64) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        if !self.tail.has_moment(p) {
            return f64::INFINITY;
        }
        self.radial_moment(p, 1.0, f64::INFINITY).unwrap_or(f64::INFINITY)
    }

    /// `Σ_j w_j u_j u_j^T ∫_0^eps r² k_j(r) dr`, the covariance of the jumps
    /// below `eps`.
    pub fn small_jump_covariance(&self, eps: f64) -> Result<Vec<f64>> {
        let d = self.dimension;
        let mut cov = vec![0.0; d * d];
        for ray in &self.rays {
            let m2 = ray.weight * ray_integral(ray, self.singularity_order, self.tail, 0.0, eps, 2.0, &|_| 1.0)?;
            for i in 0..d {
                for j in 0..d {
                    cov[i * d + j] += m2 * ray.direction[i] * ray.direction[j];
                }
            }
        }
        Ok(cov)
    }

    /// `∫_{lo<|y|≤hi} y M(dy)`.
    pub fn first_moment_vector(&self, lo: f64, hi: f64) -> Result<Vec<f64>> {
        let mut v = vec![0.0; self.dimension];
        if self.symmetric {
            return Ok(v);
        }
        for ray in &self.rays {
            let m1 = ray.weight * ray_integral(ray, self.singularity_order, self.tail, lo, hi, 1.0, &|_| 1.0)?;
            for (vi, ui) in v.iter_mut().zip(&ray.direction) {
                *vi += m1 * ui;
            }
        }
        Ok(v)
    }
}

/// `∫_lo^hi r^p g(r) k(r) dr` along one ray, with the power singularity at the
/// origin and the declared tail handled explicitly. `g` must be bounded.
pub fn ray_integral(
    ray: &Ray,
    order: f64,
    tail: TailClass,
    lo: f64,
    hi: f64,
    p: f64,
    g: &dyn Fn(f64) -> f64,
) -> Result<f64> {
    if hi <= lo {
        return Ok(0.0);
    }
    let tol = Tolerance::new(1e-14, 1e-11);
    let f = |r: f64| {
        let k = ray.k(r);
        if k == 0.0 {
            0.0
        } else {
            r.powf(p) * g(r) * k
        }
    };
    let mut total = 0.0;
    let split = 1.0f64.max(lo).min(hi);
    if lo < split {
        let v = if lo == 0.0 {
            let exponent = p - 1.0 - order;
            if exponent <= -1.0 {
                return Err(Error::Divergent(format!(
                    "∫_0 r^{p} k(r) dr diverges at the origin (order {order})"
                )));
            }
            quad::near_zero(f, split, exponent, tol)?.value
        } else {
            quad::adaptive_breaks(f, &geometric_breaks(lo, split), tol)?.value
        };
        total += v;
    }
    if hi > split {
        total += if hi.is_finite() && hi - split <= 100.0 {
            quad::adaptive_breaks(f, &linear_breaks(split, hi), tol)?.value
        } else if hi.is_finite() {
            // Long ranges as a difference of tails.
            tail_integral(&f, split, tail, p, tol)? - tail_integral(&f, hi, tail, p, tol)?
        } else {
            tail_integral(&f, split, tail, p, tol)?
        };
    }
    Ok(total)
}

fn geometric_breaks(lo: f64, hi: f64) -> Vec<f64> {
    let mut b = vec![lo];
    let mut x = lo;
    while x * 2.0 < hi {
        x *= 2.0;
        b.push(x);
    }
    b.push(hi);
    b
}

fn linear_breaks(lo: f64, hi: f64) -> Vec<f64> {
    let n = ((hi - lo) / 0.5).ceil().clamp(1.0, 200.0) as usize;
    (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

/// `∫_a^∞ f(r) dr` where `f ~ r^growth k(r)` and `k` has the given tail.
pub fn tail_integral(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    tail: TailClass,
    growth: f64,
    tol: Tolerance,
) -> Result<f64> {
    match tail {
        TailClass::Compact { radius } => {
            if radius <= a {
                Ok(0.0)
            } else {
                Ok(quad::adaptive_breaks(f, &linear_breaks(a, radius), tol)?.value)
            }
        }
        TailClass::Gaussian { rate } => {
            let r_end = a + (60.0 / rate).sqrt() + growth.max(0.0);
            Ok(quad::adaptive_breaks(f, &linear_breaks(a, r_end), tol)?.value)
        }
        TailClass::Exponential { .. } => Ok(quad::semi_infinite(f, a, tol)?.value),
        TailClass::Power { index } => {
            let exponent = index - growth - 1.0;
            if exponent <= -1.0 {
                return Err(Error::Divergent(format!(
                    "tail ∫ r^{growth} k(r) dr diverges for power tail index {index}"
                )));
            }
            Ok(quad::near_zero(|v: f64| f(a / v) * a / (v * v), 1.0, exponent, tol)?.value)
        }
    }
}
