//! The nonlocal forms `∫∫ G(f(x+y), f(x), y) M(dy) σ(dx)`.
//!
//! The outer integral is a Monte Carlo mean over samples of `σ`. The inner
//! integral uses a [`MeasureRule`]: nodes for `|y| ≥ δ` and, below `δ`, the
//! Taylor expansion of the integrand in `y` integrated against the small-jump
//! moments of `M`.

use serde::{Deserialize, Serialize};

use super::table::evaluate_many;
use super::{mean_of, Estimate, Method};
use crate::error::{invalid, Error, Result};
use crate::exec::Executor;
use crate::functions::CylindricalFunction;
use crate::levy::measure::ray_integral;
use crate::levy::{LevyMeasure, MeasureRule, ProjectedRule, DEFAULT_DELTA};
use crate::sampling::SampleSet;

/// Which form to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormKind {
    /// `|f(x+y) - f(x)|²`.
    Dirichlet,
    /// `|f^p(x+y) - f^p(x)|² / f^p(x)` for positive `f`.
    Entropy { p: f64 },
    /// `||f|^p(x+y) - |f|^p(x)|` times `1` on `|y| ≥ 1` and `|y|^{2-p}` inside;
    /// `p = 2` is the plain increment integral.
    Weighted { p: f64 },
}

impl FormKind {
    /// `F = φ(f)` and its first two derivatives.
    #[inline]
    fn lift(self, v: f64) -> (f64, f64, f64) {
        match self {
            FormKind::Dirichlet => (v, 1.0, 0.0),
            FormKind::Entropy { p } => {
                if p == 1.0 {
                    (v, 1.0, 0.0)
                } else {
                    (v.powf(p), p * v.powf(p - 1.0), p * (p - 1.0) * v.powf(p - 2.0))
                }
            }
            FormKind::Weighted { p } => {
                let a = v.abs();
                (a.powf(p), p * a.powf(p - 1.0) * v.signum(), p * (p - 1.0) * a.powf(p - 2.0))
            }
        }
    }

    #[inline]
    fn value(self, v: f64) -> f64 {
        match self {
            FormKind::Dirichlet => v,
            FormKind::Entropy { p } => {
                if p == 1.0 {
                    v
                } else {
                    v.powf(p)
                }
            }
            FormKind::Weighted { p } => v.abs().powf(p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormOptions {
    /// Split radius of the inner integral.
    pub delta: f64,
    /// Samples on which the effect of halving `δ` is measured.
    pub check_samples: usize,
    /// Tabulate inner integrals of rank-one functions.
    pub tabulate: bool,
}

impl Default for FormOptions {
    fn default() -> Self {
        Self { delta: DEFAULT_DELTA, check_samples: 200, tabulate: true }
    }
}

/// `x ↦ ∫ G(f(x+y), f(x), y) M(dy)` for one form and one function.
#[derive(Debug, Clone)]
pub struct InnerIntegral {
    kind: FormKind,
    f: CylindricalFunction,
    rule: ProjectedRule,
    /// For the weighted form: `w ∫_0^δ r^{3-p} k(r) dr` per ray.
    weighted_small: Vec<f64>,
}

impl InnerIntegral {
    pub fn new(kind: FormKind, f: &CylindricalFunction, m: &LevyMeasure, delta: f64) -> Result<Self> {
        if f.ambient_dim() != m.dimension() {
            return Err(Error::Dimension { expected: m.dimension(), got: f.ambient_dim() });
        }
        let rule = MeasureRule::new(m, delta)?.project(f.basis());
        let mut weighted_small = Vec::new();
        match kind {
            FormKind::Entropy { p } if p < 1.0 => return Err(invalid("entropy form needs p ≥ 1")),
            FormKind::Weighted { p } => {
                if p < 2.0 {
                    return Err(invalid("weighted increment form needs p ≥ 2"));
                }
                let q = 3.0 - p;
                if !m.is_zero() && q <= m.singularity_order() {
                    return Err(Error::Divergent(format!(
                        "∫_{{B_1}} |y|^{{3-p}} M(dy) diverges for p = {p} and singularity order {}",
                        m.singularity_order()
                    )));
                }
                for ray in m.rays() {
                    weighted_small.push(
                        ray.weight
                            * ray_integral(ray, m.singularity_order(), m.tail_class(), 0.0, delta, q, &|_| 1.0)?,
                    );
                }
            }
            _ => {}
        }
        Ok(Self { kind, f: f.clone(), rule, weighted_small })
    }

    pub fn function(&self) -> &CylindricalFunction {
        &self.f
    }

    /// The inner integral at projected coordinates `ξ = Hx`; `NaN` when the
    /// entropy form meets a non-positive value.
    pub fn at(&self, xi: &[f64]) -> f64 {
        let n = xi.len();
        let core = self.f.core();
        let v = core.value(xi);
        if matches!(self.kind, FormKind::Entropy { .. }) && !(v > 0.0) {
            return f64::NAN;
        }
        let (big_f, d1, d2) = self.kind.lift(v);
        let mut g = vec![0.0; n];
        core.gradient(xi, &mut g);
        let mut hess = vec![0.0; n * n];
        let need_hess = !matches!(self.kind, FormKind::Weighted { .. });
        if need_hess {
            core.hessian(xi, &mut hess);
        }
        let mut z = vec![0.0; n];
        let mut total = 0.0;
        for (j, ray) in self.rule.rays.iter().enumerate() {
            // a = ⟨DF, c⟩ and q = ⟨D²F c, c⟩ along the ray.
            let gc: f64 = g.iter().zip(&ray.coef).map(|(a, b)| a * b).sum();
            let a = d1 * gc;
            let small = match self.kind {
                FormKind::Weighted { .. } => a.abs() * self.weighted_small[j],
                _ => {
                    let mut hc = 0.0;
                    for i in 0..n {
                        for k in 0..n {
                            hc += ray.coef[i] * hess[i * n + k] * ray.coef[k];
                        }
                    }
                    let q = d2 * gc * gc + d1 * hc;
                    let s = a * a * ray.small[0] + a * q * ray.small[1];
                    if matches!(self.kind, FormKind::Entropy { .. }) {
                        s / big_f
                    } else {
                        s
                    }
                }
            };
            total += small;
            for &(r, w) in &ray.nodes {
                for k in 0..n {
                    z[k] = xi[k] + r * ray.coef[k];
                }
                let inc = self.kind.value(core.value(&z)) - big_f;
                total += w * match self.kind {
                    FormKind::Dirichlet => inc * inc,
                    FormKind::Entropy { .. } => inc * inc / big_f,
                    FormKind::Weighted { p } => {
                        if r < 1.0 {
                            inc.abs() * r.powf(2.0 - p)
                        } else {
                            inc.abs()
                        }
                    }
                };
            }
        }
        total
    }

    /// The inner integral at a point `x` of the ambient space.
    pub fn at_point(&self, x: &[f64]) -> f64 {
        self.at(&self.f.project(x))
    }
}

/// The inner integral of a form at a single point `x`.
pub fn form_inner(kind: FormKind, f: &CylindricalFunction, m: &LevyMeasure, x: &[f64], delta: f64) -> Result<f64> {
    Ok(InnerIntegral::new(kind, f, m, delta)?.at_point(x))
}

fn inner_values(inner: &InnerIntegral, samples: &SampleSet, tabulate: bool, exec: &Executor) -> Vec<f64> {
    let f = inner.function();
    if tabulate && f.rank() == 1 {
        let h = &f.basis()[0];
        let xs: Vec<f64> = samples.rows().map(|x| crate::linalg::dot(h, x)).collect();
        evaluate_many(&xs, &|u: f64| inner.at(&[u]), exec)
    } else {
        exec.map_chunks(samples.len(), 1024, |r| r.map(|i| inner.at_point(samples.row(i))).collect())
    }
}

fn checked_values(inner: &InnerIntegral, samples: &SampleSet, opts: &FormOptions, exec: &Executor) -> Result<Vec<f64>> {
    let values = inner_values(inner, samples, opts.tabulate, exec);
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(invalid(format!(
            "form integrand is not finite at sample {i} (f = {})",
            inner.function().value(samples.row(i))
        )));
    }
    Ok(values)
}

/// The inner integral at every sample, in order.
pub fn form_values(
    kind: FormKind,
    f: &CylindricalFunction,
    samples: &SampleSet,
    m: &LevyMeasure,
    opts: &FormOptions,
    exec: &Executor,
) -> Result<Vec<f64>> {
    let inner = InnerIntegral::new(kind, f, m, opts.delta)?;
    checked_values(&inner, samples, opts, exec)
}

/// Outer Monte Carlo over `σ` samples of the inner integral.
pub fn integrate_form(
    kind: FormKind,
    f: &CylindricalFunction,
    samples: &SampleSet,
    m: &LevyMeasure,
    opts: &FormOptions,
    exec: &Executor,
) -> Result<Estimate> {
    Ok(integrate_form_with_values(kind, f, samples, m, opts, exec)?.1)
}

/// [`integrate_form`] together with the per-sample inner integrals, for
/// estimators paired with other functionals of the same samples.
pub fn integrate_form_with_values(
    kind: FormKind,
    f: &CylindricalFunction,
    samples: &SampleSet,
    m: &LevyMeasure,
    opts: &FormOptions,
    exec: &Executor,
) -> Result<(Vec<f64>, Estimate)> {
    if samples.is_empty() {
        return Err(invalid("no samples"));
    }
    let inner = InnerIntegral::new(kind, f, m, opts.delta)?;
    let values = checked_values(&inner, samples, opts, exec)?;
    let mc = mean_of(&values)?;
    // Sensitivity to the split radius, measured on a prefix of the samples.
    let k = opts.check_samples.min(samples.len());
    let bias = if k > 0 && !m.is_zero() {
        let half = InnerIntegral::new(kind, f, m, opts.delta / 2.0)?;
        let diffs = exec.map(k, |i| half.at_point(samples.row(i)) - inner.at_point(samples.row(i)));
        (diffs.iter().sum::<f64>() / k as f64).abs()
    } else {
        0.0
    };
    let est = Estimate { value: mc.value, std_error: mc.std_error.hypot(bias), n: mc.n, method: Method::Hybrid };
    Ok((values, est))
}

/// `∫∫ |f^p(x+y) - f^p(x)|² / f^p(x) M(dy) σ(dx)`.
pub fn nonlocal_entropy_form(
    f: &CylindricalFunction,
    p: f64,
    samples: &SampleSet,
    m: &LevyMeasure,
    opts: &FormOptions,
    exec: &Executor,
) -> Result<Estimate> {
    if f.bounds().infimum <= 0.0 {
        return Err(invalid(format!("entropy form needs inf f > 0, '{}' has {}", f.name(), f.bounds().infimum)));
    }
    integrate_form(FormKind::Entropy { p }, f, samples, m, opts, exec)
}

/// `∫∫ |f(x+y) - f(x)|² M(dy) σ(dx)`.
pub fn dirichlet_form(
    f: &CylindricalFunction,
    samples: &SampleSet,
    m: &LevyMeasure,
    opts: &FormOptions,
    exec: &Executor,
) -> Result<Estimate> {
    integrate_form(FormKind::Dirichlet, f, samples, m, opts, exec)
}

/// `∫∫ ||f|^p(x+y) - |f|^p(x)| [χ_{B_1^c}(y) + |y|^{2-p} χ_{B_1}(y)] M(dy) σ(dx)`.
pub fn weighted_increment_form(
    f: &CylindricalFunction,
    p: f64,
    samples: &SampleSet,
    m: &LevyMeasure,
    opts: &FormOptions,
    exec: &Executor,
) -> Result<Estimate> {
    if p <= 2.0 {
        return Err(invalid("weighted increment form needs p > 2"));
    }
    integrate_form(FormKind::Weighted { p }, f, samples, m, opts, exec)
}
