//! Monte Carlo and quadrature estimators for the quantities entering the
//! inequalities.
//!
//! Sums are always taken sequentially over values returned in sample order,
//! so an estimate never depends on how many threads produced the values.

pub mod brute_force;
mod forms;
mod table;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use forms::{
    dirichlet_form, form_inner, form_values, integrate_form, integrate_form_with_values, nonlocal_entropy_form, weighted_increment_form, FormKind, FormOptions, InnerIntegral,
};
pub(crate) use table::evaluate_many;
pub use table::Tabulated;

use crate::error::{invalid, Error, Result};
use crate::exec::Executor;
use crate::functions::CylindricalFunction;
use crate::levy::{EvolvedTriple, LevyMeasure};
use crate::rng::RandomStream;
use crate::sampling::{IdSampler, JumpScheme, SampleSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Mc,
    Quadrature,
    Hybrid,
}

/// A value with its standard error. Quadrature values carry their error
/// bound in `std_error`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub method: Method,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, std_error: 0.0, n: 0, method: Method::Quadrature }
    }

    pub fn quadrature(value: f64, error: f64) -> Self {
        Self { value, std_error: error.abs(), n: 0, method: Method::Quadrature }
    }

    /// `c · self`.
    pub fn scale(self, c: f64) -> Self {
        Self { value: c * self.value, std_error: c.abs() * self.std_error, ..self }
    }

    /// `√self` by the delta method (an estimate of zero stays exact).
    pub fn sqrt(self) -> Self {
        let v = self.value.max(0.0).sqrt();
        let se = if v > 0.0 { self.std_error / (2.0 * v) } else { self.std_error.sqrt() };
        Self { value: v, std_error: se, ..self }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Sample mean and standard error of `values`.
pub fn mean_of(values: &[f64]) -> Result<Estimate> {
    if values.is_empty() {
        return Err(invalid("no samples"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(Estimate { value: mean, std_error: (var / n).sqrt(), n: values.len(), method: Method::Mc })
}

/// `f` at every sample, in order.
pub fn evaluate<F>(f: F, samples: &SampleSet, exec: &Executor) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    exec.map_chunks(samples.len(), 4096, |r| r.map(|i| f(samples.row(i))).collect())
}

/// `m_σ(f)`.
pub fn estimate_mean<F>(f: F, samples: &SampleSet) -> Result<Estimate>
where
    F: Fn(&[f64]) -> f64,
{
    let values: Vec<f64> = samples.rows().map(f).collect();
    mean_of(&values)
}

/// `Ent(g) = E[g log g] - E[g] log E[g]` for positive values, with the
/// delta-method standard error.
pub fn entropy_of(values: &[f64]) -> Result<Estimate> {
    if values.is_empty() {
        return Err(invalid("no samples"));
    }
    if let Some(bad) = values.iter().find(|v| !(**v > 0.0)) {
        return Err(invalid(format!("entropy needs positive values, found {bad}")));
    }
    if values.iter().all(|&v| v == values[0]) {
        return Ok(Estimate { value: 0.0, std_error: 0.0, n: values.len(), method: Method::Mc });
    }
    let n = values.len() as f64;
    let m = values.iter().sum::<f64>() / n;
    let a = values.iter().map(|g| g * g.ln()).sum::<f64>() / n;
    let ent = (a - m * m.ln()).max(0.0);
    // Influence function of (a, m) ↦ a - m ln m.
    let c = m.ln() + 1.0;
    let infl: Vec<f64> = values.iter().map(|g| g * g.ln() - c * g).collect();
    let im = infl.iter().sum::<f64>() / n;
    let var = if values.len() > 1 { infl.iter().map(|v| (v - im).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    Ok(Estimate { value: ent, std_error: (var / n).sqrt(), n: values.len(), method: Method::Mc })
}

/// `Ent_σ(f^p)`.
pub fn estimate_entropy<F>(f: F, p: f64, samples: &SampleSet) -> Result<Estimate>
where
    F: Fn(&[f64]) -> f64,
{
    let mut values = Vec::with_capacity(samples.len());
    for x in samples.rows() {
        let v = f(x);
        if !(v > 0.0) {
            return Err(invalid(format!("entropy needs a positive function, found f = {v}")));
        }
        values.push(v.powf(p));
    }
    entropy_of(&values)
}

/// `∫ |x|^p σ(dx)` from samples.
pub fn moment(samples: &SampleSet, p: f64) -> Result<Estimate> {
    if p < 0.0 {
        return Err(invalid("moment order must be non-negative"));
    }
    let values: Vec<f64> = samples.rows().map(|x| crate::linalg::norm(x).powf(p)).collect();
    mean_of(&values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// `B_1 = {|y| ≤ 1}`.
    Ball,
    /// `B_1^c`.
    Outside,
    Whole,
}

/// `∫_A |y|^p M(dy)` by quadrature; divergence is an error.
pub fn measure_moment(m: &LevyMeasure, p: f64, region: Region) -> Result<Estimate> {
    let (lo, hi) = match region {
        Region::Ball => (0.0, 1.0),
        Region::Outside => (1.0, f64::INFINITY),
        Region::Whole => (0.0, f64::INFINITY),
    };
    if hi.is_infinite() && !m.is_zero() && !m.tail_class().has_moment(p) {
        return Err(Error::Divergent(format!("M has no moment of order {p} outside the unit ball")));
    }
    if lo == 0.0 && !m.is_zero() && p <= m.singularity_order() {
        return Err(Error::Divergent(format!("M has no moment of order {p} near the origin")));
    }
    let v = m.radial_moment(p, lo, hi)?;
    Ok(Estimate::quadrature(v, 1e-8 * v.abs()))
}

/// `σ(g ≥ m_σ(g) + t)` with the Wilson score half-width (z = 1) as the
/// standard error; `values` are `g` at the samples and `mean` is `m_σ(g)`.
pub fn tail_probability(values: &[f64], mean: f64, t: f64) -> Result<Estimate> {
    if values.is_empty() {
        return Err(invalid("no samples"));
    }
    if t < 0.0 {
        return Err(invalid("tail level must be non-negative"));
    }
    let n = values.len() as f64;
    let k = values.iter().filter(|&&g| g >= mean + t).count() as f64;
    let p = k / n;
    let half = (p * (1.0 - p) / n + 1.0 / (4.0 * n * n)).sqrt() / (1.0 + 1.0 / n);
    Ok(Estimate { value: p, std_error: half, n: values.len(), method: Method::Mc })
}

/// Real and imaginary parts of an estimated characteristic function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexEstimate {
    pub re: Estimate,
    pub im: Estimate,
}

/// Mean of `e^{i⟨x, ξ⟩}` over the samples.
pub fn empirical_char(samples: &SampleSet, xi: &[f64]) -> Result<ComplexEstimate> {
    if xi.len() != samples.dimension() {
        return Err(Error::Dimension { expected: samples.dimension(), got: xi.len() });
    }
    let mut re = Vec::with_capacity(samples.len());
    let mut im = Vec::with_capacity(samples.len());
    for x in samples.rows() {
        let (s, c) = crate::linalg::dot(x, xi).sin_cos();
        re.push(c);
        im.push(s);
    }
    Ok(ComplexEstimate { re: mean_of(&re)?, im: mean_of(&im)? })
}

/// Monte Carlo realisation of `P_t f(x) = ∫ f(T_t x + y) μ_t(dy)`.
#[derive(Debug, Clone)]
pub struct SemigroupMc {
    t: f64,
    flow: DMatrix<f64>,
    sampler: Option<IdSampler>,
}

impl SemigroupMc {
    pub fn new(evolved: &EvolvedTriple, t: f64, scheme: &JumpScheme) -> Result<Self> {
        if t < 0.0 {
            return Err(invalid("time must be non-negative"));
        }
        let sampler = if t > 0.0 { Some(IdSampler::new(&evolved.mu_t_triple(t)?, scheme)?) } else { None };
        Ok(Self { t, flow: evolved.semigroup().matrix(t), sampler })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    /// `T_t x`.
    pub fn transport(&self, x: &[f64]) -> Vec<f64> {
        crate::linalg::mat_vec(&self.flow, x)
    }

    /// `n` draws of `μ_t`.
    pub fn noise(&self, n: usize, stream: RandomStream, exec: &Executor) -> Result<SampleSet> {
        let d = self.flow.nrows();
        let Some(sampler) = &self.sampler else {
            return SampleSet::new(d, vec![0.0; n * d]);
        };
        let blocks = exec.map(crate::rng::block_count(n), |b| {
            let range = crate::rng::block_range(b, n);
            let mut rng = stream.block_rng(b as u64);
            let mut out = vec![0.0; range.len() * d];
            for row in out.chunks_exact_mut(d) {
                sampler.sample(&mut rng, 1.0, row);
            }
            out
        });
        SampleSet::new(d, blocks.concat())
    }

    /// `P_t f(x)` averaged over the given draws of `μ_t`.
    pub fn apply_with<F>(&self, f: F, x: &[f64], noise: &SampleSet) -> Result<Estimate>
    where
        F: Fn(&[f64]) -> f64,
    {
        let base = self.transport(x);
        if self.sampler.is_none() {
            return Ok(Estimate { value: f(&base), std_error: 0.0, n: 1, method: Method::Mc });
        }
        let mut z = vec![0.0; base.len()];
        let values: Vec<f64> = noise
            .rows()
            .map(|y| {
                for k in 0..z.len() {
                    z[k] = base[k] + y[k];
                }
                f(&z)
            })
            .collect();
        mean_of(&values)
    }
}

/// `P_t f(x)` from `n` fresh draws of `μ_t`.
#[allow(clippy::too_many_arguments)]
pub fn semigroup_apply(
    f: &CylindricalFunction,
    t: f64,
    x: &[f64],
    n: usize,
    evolved: &EvolvedTriple,
    scheme: &JumpScheme,
    stream: RandomStream,
    exec: &Executor,
) -> Result<Estimate> {
    let mc = SemigroupMc::new(evolved, t, scheme)?;
    let noise = mc.noise(n, stream, exec)?;
    mc.apply_with(|z| f.value(z), x, &noise)
}
