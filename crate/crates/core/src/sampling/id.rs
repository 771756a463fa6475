//! Draws from an infinitely divisible law `[b, Q, M]` run for time `Δt`.
//!
//! Jumps above `ε` form a compound Poisson sum, one ray table per ray. The
//! jumps below `ε` are either dropped or replaced by a centred Gaussian with
//! covariance `∫_{|y|≤ε} y y^T M(dy)`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use super::table::RayTable;
use crate::error::{invalid, Result};
use crate::levy::{LevyMeasure, LevyTriple};
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmallJumpPolicy {
    Drop,
    GaussianSubstitute,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpScheme {
    /// Jumps with `|y| ≤ epsilon` are not simulated individually.
    pub epsilon: f64,
    pub policy: SmallJumpPolicy,
}

impl Default for JumpScheme {
    fn default() -> Self {
        Self { epsilon: 1e-2, policy: SmallJumpPolicy::GaussianSubstitute }
    }
}

impl JumpScheme {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(invalid(format!("small-jump cutoff must lie in (0, 1), got {}", self.epsilon)));
        }
        Ok(())
    }
}

/// The compound Poisson part of a measure: rays above `ε` and their masses.
#[derive(Debug, Clone)]
pub struct JumpSampler {
    dimension: usize,
    tables: Vec<RayTable>,
    /// Cumulative masses, used to pick a ray.
    cumulative: Vec<f64>,
    rate: f64,
}

impl JumpSampler {
    pub fn new(m: &LevyMeasure, eps: f64) -> Result<Self> {
        let mut tables = Vec::new();
        for ray in m.rays() {
            if ray.weight > 0.0 {
                tables.push(RayTable::new(ray, m.tail_class(), eps)?);
            }
        }
        let mut cumulative = Vec::with_capacity(tables.len());
        let mut rate = 0.0;
        for t in &tables {
            rate += t.mass;
            cumulative.push(rate);
        }
        Ok(Self { dimension: m.dimension(), tables, cumulative, rate })
    }

    /// `M(|y| > ε)`.
    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// One jump, written into `out`.
    #[inline]
    pub fn jump<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let table = if self.tables.len() == 1 {
            &self.tables[0]
        } else {
            let u = rng.random::<f64>() * self.rate;
            let i = self.cumulative.partition_point(|&c| c <= u).min(self.tables.len() - 1);
            &self.tables[i]
        };
        let e: f64 = Exp1.sample(rng);
        let r = table.radius(e);
        for (o, u) in out.iter_mut().zip(&table.direction) {
            *o = r * u;
        }
    }

    /// Number of jumps in a window of length `dt`.
    pub fn count<R: Rng + ?Sized>(&self, rng: &mut R, dt: f64) -> u64 {
        let mean = self.rate * dt;
        if mean <= 0.0 {
            return 0;
        }
        Poisson::new(mean).map(|p| p.sample(rng) as u64).unwrap_or(0)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }
}

/// Sampler for the law at time `Δt` of a Lévy process with triple `[b, Q, M]`.
#[derive(Debug, Clone)]
pub struct IdSampler {
    jumps: JumpSampler,
    /// `b - ∫_{ε<|y|≤1} y M(dy)`.
    shift: Vec<f64>,
    /// `L` with `L L^T = Q + Σ_ε`, or `None` if that matrix vanishes.
    factor: Option<DMatrix<f64>>,
}

impl IdSampler {
    pub fn new(triple: &LevyTriple, scheme: &JumpScheme) -> Result<Self> {
        scheme.validate()?;
        let m = &triple.m;
        let d = triple.dimension();
        let eps = scheme.epsilon;
        let jumps = JumpSampler::new(m, eps)?;
        let mut shift = triple.b.clone();
        let mut cov = triple.q.clone();
        if !m.is_zero() {
            let comp = m.first_moment_vector(eps, 1.0)?;
            for (s, c) in shift.iter_mut().zip(comp) {
                *s -= c;
            }
            if scheme.policy == SmallJumpPolicy::GaussianSubstitute {
                let sigma = m.small_jump_covariance(eps)?;
                cov += DMatrix::from_row_slice(d, d, &sigma);
            }
        }
        let factor = if cov.amax() > 0.0 { Some(linalg::psd_factor(&cov)?) } else { None };
        Ok(Self { jumps, shift, factor })
    }

    pub fn dimension(&self) -> usize {
        self.shift.len()
    }

    pub fn jumps(&self) -> &JumpSampler {
        &self.jumps
    }

    /// `b - ∫_{ε<|y|≤1} y M(dy)`.
    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    pub fn factor(&self) -> Option<&DMatrix<f64>> {
        self.factor.as_ref()
    }

    /// One draw of the increment over a window of length `dt`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, dt: f64, out: &mut [f64]) {
        let d = self.dimension();
        for (o, s) in out.iter_mut().zip(&self.shift) {
            *o = dt * s;
        }
        let mut y = vec![0.0; d];
        for _ in 0..self.jumps.count(rng, dt) {
            self.jumps.jump(rng, &mut y);
            for (o, v) in out.iter_mut().zip(&y) {
                *o += v;
            }
        }
        if let Some(l) = &self.factor {
            add_gaussian(rng, l, dt.sqrt(), out);
        }
    }
}

/// `out += scale · L z` with `z` standard normal.
pub(crate) fn add_gaussian<R: Rng + ?Sized>(rng: &mut R, l: &DMatrix<f64>, scale: f64, out: &mut [f64]) {
    let d = l.nrows();
    let z: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
    for i in 0..d {
        let mut v = 0.0;
        for j in 0..d {
            v += l[(i, j)] * z[j];
        }
        out[i] += scale * v;
    }
}
