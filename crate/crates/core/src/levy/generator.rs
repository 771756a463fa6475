//! The generator
//! `L f(x) = ½ Tr[Q D²f(x)] + ⟨b + Bx, Df(x)⟩ + ∫ (f(x+y) - f(x) - ⟨Df(x), y⟩ χ_{B_1}(y)) M(dy)`
//! on cylindrical functions.

use nalgebra::DMatrix;

use super::rule::{MeasureRule, ProjectedRule, DEFAULT_DELTA};
use super::semigroup::SemigroupFamily;
use super::triple::LevyTriple;
use crate::error::{Error, Result};
use crate::functions::CylindricalFunction;
use crate::linalg;

/// `L` specialised to one function, with the measure rule projected onto the
/// function's basis.
#[derive(Debug, Clone)]
pub struct Generator {
    f: CylindricalFunction,
    rule: ProjectedRule,
    /// `H Q H^T`, row-major.
    hqh: Vec<f64>,
    drift: Vec<f64>,
    b: DMatrix<f64>,
}

impl Generator {
    pub fn new(triple: &LevyTriple, semigroup: &SemigroupFamily, f: &CylindricalFunction, delta: f64) -> Result<Self> {
        let d = triple.dimension();
        if f.ambient_dim() != d || semigroup.dimension() != d {
            return Err(Error::Dimension { expected: d, got: f.ambient_dim() });
        }
        let rule = MeasureRule::new(&triple.m, delta)?.project(f.basis());
        let n = f.rank();
        let mut hqh = vec![0.0; n * n];
        for i in 0..n {
            let qh = linalg::mat_vec(&triple.q, &f.basis()[i]);
            for j in 0..n {
                hqh[i * n + j] = linalg::dot(&qh, &f.basis()[j]);
            }
        }
        Ok(Self { f: f.clone(), rule, hqh, drift: triple.b.clone(), b: semigroup.generator().clone() })
    }

    /// `L f(x)`.
    pub fn at(&self, x: &[f64]) -> f64 {
        let xi = self.f.project(x);
        self.local(x, &xi) + self.nonlocal(&xi)
    }

    /// Drift, transport and Gaussian terms.
    pub fn local(&self, x: &[f64], xi: &[f64]) -> f64 {
        let n = self.f.rank();
        let core = self.f.core();
        let mut g = vec![0.0; n];
        core.gradient(xi, &mut g);
        let mut field = linalg::mat_vec(&self.b, x);
        for (v, b) in field.iter_mut().zip(&self.drift) {
            *v += b;
        }
        let mut total: f64 = g.iter().zip(self.f.basis()).map(|(gk, h)| gk * linalg::dot(h, &field)).sum();
        if self.hqh.iter().any(|&v| v != 0.0) {
            let mut hess = vec![0.0; n * n];
            core.hessian(xi, &mut hess);
            total += 0.5 * hess.iter().zip(&self.hqh).map(|(a, b)| a * b).sum::<f64>();
        }
        total
    }

    /// The jump part, which depends on `x` only through `ξ = Hx`.
    pub fn nonlocal(&self, xi: &[f64]) -> f64 {
        let n = xi.len();
        let core = self.f.core();
        let base = core.value(xi);
        let mut g = vec![0.0; n];
        let mut hess = vec![0.0; n * n];
        core.gradient(xi, &mut g);
        core.hessian(xi, &mut hess);
        let mut z = vec![0.0; n];
        let mut total = 0.0;
        for ray in &self.rule.rays {
            let a = linalg::dot(&g, &ray.coef);
            let mut q = 0.0;
            for i in 0..n {
                for j in 0..n {
                    q += ray.coef[i] * hess[i * n + j] * ray.coef[j];
                }
            }
            total += 0.5 * q * ray.small[0];
            for &(r, w) in &ray.nodes {
                for k in 0..n {
                    z[k] = xi[k] + r * ray.coef[k];
                }
                let comp = if r < 1.0 { r * a } else { 0.0 };
                total += w * (core.value(&z) - base - comp);
            }
        }
        total
    }
}

/// `L f(x)` in one call.
pub fn apply_generator(
    triple: &LevyTriple,
    semigroup: &SemigroupFamily,
    f: &CylindricalFunction,
    x: &[f64],
) -> Result<f64> {
    Ok(Generator::new(triple, semigroup, f, DEFAULT_DELTA)?.at(x))
}
