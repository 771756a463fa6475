//! Seeded simulation of Lévy increments, Ornstein–Uhlenbeck paths, `μ_t`
//! and the invariant measure `σ`.
//!
//! Every batch is cut into blocks of [`BLOCK`](crate::rng::BLOCK) draws and
//! block `b` uses its own generator, so a sample set depends on the seed only,
//! never on the number of threads.

mod id;
mod ou;
mod table;

use std::io::Write;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use id::{IdSampler, JumpSampler, JumpScheme, SmallJumpPolicy};
pub use ou::OuSampler;
pub use table::{RayTable, TABLE_POINTS};

use crate::error::{invalid, Result};
use crate::exec::Executor;
use crate::levy::{EvolvedTriple, LevyMeasure, LevyTriple, SemigroupFamily};
use crate::linalg;
use crate::rng::{block_count, block_range, RandomStream};

/// `n` points of `R^d`, stored row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    dimension: usize,
    data: Vec<f64>,
}

impl SampleSet {
    pub fn new(dimension: usize, data: Vec<f64>) -> Result<Self> {
        if dimension == 0 || data.len() % dimension != 0 {
            return Err(invalid(format!("{} values do not split into rows of {dimension}", data.len())));
        }
        Ok(Self { dimension, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(1, |r| r.len());
        if rows.iter().any(|r| r.len() != d) {
            return Err(invalid("rows of unequal length"));
        }
        Self::new(d, rows.concat())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dimension
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dimension)
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        self.rows().map(|r| r[k]).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Pointwise sum with another set of the same shape.
    pub fn add(&self, other: &SampleSet) -> Result<SampleSet> {
        if self.dimension != other.dimension || self.len() != other.len() {
            return Err(invalid("sample sets differ in shape"));
        }
        Self::new(self.dimension, self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect())
    }

    /// CSV with header `x1,…,xd` and one row per draw.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let header: Vec<String> = (1..=self.dimension).map(|k| format!("x{k}")).collect();
        writeln!(w, "{}", header.join(","))?;
        for row in self.rows() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// Fills `n` rows of dimension `d` block by block.
fn generate<F>(d: usize, n: usize, stream: RandomStream, exec: &Executor, draw: F) -> Result<SampleSet>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng, &mut [f64]) + Sync + Send,
{
    let blocks = exec.map(block_count(n), |b| {
        let range = block_range(b, n);
        let mut rng = stream.block_rng(b as u64);
        let mut out = vec![0.0; range.len() * d];
        for row in out.chunks_exact_mut(d) {
            draw(&mut rng, row);
        }
        out
    });
    SampleSet::new(d, blocks.concat())
}

/// One increment `Y(Δt)` of the Lévy process with jump measure `M`.
pub fn sample_levy_increment<R: Rng + ?Sized>(
    m: &LevyMeasure,
    dt: f64,
    scheme: &JumpScheme,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if dt <= 0.0 {
        return Err(invalid("time step must be positive"));
    }
    let sampler = IdSampler::new(&LevyTriple::pure_jump(m.clone()), scheme)?;
    let mut out = vec![0.0; m.dimension()];
    sampler.sample(rng, dt, &mut out);
    Ok(out)
}

/// `n` independent increments over a window of length `dt` for the triple.
pub fn sample_increments(
    triple: &LevyTriple,
    dt: f64,
    n: usize,
    scheme: &JumpScheme,
    stream: RandomStream,
    exec: &Executor,
) -> Result<SampleSet> {
    if dt <= 0.0 {
        return Err(invalid("time step must be positive"));
    }
    let sampler = IdSampler::new(triple, scheme)?;
    generate(triple.dimension(), n, stream, exec, |rng, row| sampler.sample(rng, dt, row))
}

/// `Z(T)` started at `x0`.
pub fn simulate_ou_path<R: Rng + ?Sized>(
    x0: &[f64],
    horizon: f64,
    triple: &LevyTriple,
    semigroup: &SemigroupFamily,
    scheme: &JumpScheme,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if horizon <= 0.0 {
        return Err(invalid("horizon must be positive"));
    }
    let sampler = OuSampler::new(triple, semigroup, scheme, horizon)?;
    let mut out = vec![0.0; x0.len()];
    sampler.sample(rng, x0, &mut out);
    Ok(out)
}

/// `n` independent copies of `Z(T)` started at `x0`.
pub fn simulate_ou_paths(
    x0: &[f64],
    horizon: f64,
    n: usize,
    evolved: &EvolvedTriple,
    scheme: &JumpScheme,
    stream: RandomStream,
    exec: &Executor,
) -> Result<SampleSet> {
    if horizon <= 0.0 {
        return Err(invalid("horizon must be positive"));
    }
    let sampler = OuSampler::new(evolved.triple(), evolved.semigroup(), scheme, horizon)?;
    generate(evolved.dimension(), n, stream, exec, |rng, row| sampler.sample(rng, x0, row))
}

/// `n` draws of `μ_t`, the law with triple `[b_t, Q_t, M_t]`.
pub fn sample_mu_t(
    t: f64,
    n: usize,
    evolved: &EvolvedTriple,
    scheme: &JumpScheme,
    stream: RandomStream,
    exec: &Executor,
) -> Result<SampleSet> {
    if t <= 0.0 {
        return Err(invalid("time must be positive"));
    }
    let triple = evolved.mu_t_triple(t)?;
    sample_increments(&triple, 1.0, n, scheme, stream, exec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvariantMethod {
    /// Infinitely divisible sampling from `[b_∞, Q_∞, M_∞]`.
    Direct,
    /// `Z(T, 0)` with `‖e^{TB}‖ ≤ 1e-6`.
    LongHorizon,
}

/// Horizon used by [`InvariantMethod::LongHorizon`].
pub fn long_horizon(semigroup: &SemigroupFamily) -> Result<f64> {
    semigroup.horizon_for(1e-6)
}

/// `n` draws of the invariant measure `σ`.
pub fn sample_invariant(
    n: usize,
    evolved: &EvolvedTriple,
    scheme: &JumpScheme,
    stream: RandomStream,
    exec: &Executor,
    method: InvariantMethod,
) -> Result<SampleSet> {
    let sg = evolved.semigroup();
    match method {
        InvariantMethod::Direct => {
            let triple = evolved.invariant_triple()?;
            sample_increments(&triple, 1.0, n, scheme, stream, exec)
        }
        InvariantMethod::LongHorizon => {
            let horizon = long_horizon(sg)?;
            let x0 = vec![0.0; evolved.dimension()];
            simulate_ou_paths(&x0, horizon, n, evolved, scheme, stream, exec)
        }
    }
}

/// `n` draws of `N(0, Q)`.
pub fn sample_gaussian(q: &DMatrix<f64>, n: usize, stream: RandomStream, exec: &Executor) -> Result<SampleSet> {
    if !linalg::is_psd(q, 1e-10) {
        return Err(invalid("covariance is not symmetric positive semidefinite"));
    }
    let l = linalg::psd_factor(q)?;
    generate(q.nrows(), n, stream, exec, |rng, row| id::add_gaussian(rng, &l, 1.0, row))
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Critical value of the two-sample KS statistic at level 1%.
pub fn ks_critical_1pct(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    1.628 * ((n + m) / (n * m)).sqrt()
}
