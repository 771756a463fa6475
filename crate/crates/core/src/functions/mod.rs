//! Cylindrical test functions `f(x) = ψ(⟨x,h_1⟩, …, ⟨x,h_n⟩)` with exact
//! derivatives and certified bounds.

pub mod mollify;
pub mod profile;
pub mod shape;
mod suites;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

pub use mollify::{LipschitzFn, Mollified};
pub use profile::{Additive, Bounds, Composite, Profile, ScalarMap, Term};
pub use shape::Shape;
pub use suites::{standard_suites, suite, Suite, SUITE_NAMES};

use crate::error::{invalid, Error, Result};
use crate::linalg;

/// A function of finitely many projections of `x ∈ R^d`.
#[derive(Clone)]
pub struct CylindricalFunction {
    name: String,
    basis: Vec<Vec<f64>>,
    core: Arc<dyn Profile>,
    bounds: Bounds,
}

impl fmt::Debug for CylindricalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CylindricalFunction")
            .field("name", &self.name)
            .field("basis", &self.basis)
            .field("bounds", &self.bounds)
            .finish()
    }
}

/// Operator norm of the `n × d` matrix with rows `basis`.
fn basis_norm(basis: &[Vec<f64>]) -> f64 {
    let n = basis.len();
    let d = basis[0].len();
    let h = DMatrix::from_fn(n, d, |i, j| basis[i][j]);
    h.singular_values().max()
}

impl CylindricalFunction {
    pub fn new(name: impl Into<String>, basis: Vec<Vec<f64>>, core: Arc<dyn Profile>) -> Result<Self> {
        if basis.is_empty() || basis.len() != core.dim() {
            return Err(Error::Dimension { expected: core.dim(), got: basis.len() });
        }
        let d = basis[0].len();
        if d == 0 || basis.iter().any(|h| h.len() != d) {
            return Err(invalid("basis vectors must share a positive dimension"));
        }
        let b = core.bounds();
        let scale = basis_norm(&basis);
        let lift = |v: f64| if v == 0.0 { 0.0 } else { v * scale };
        let bounds = Bounds {
            infimum: b.infimum,
            supremum: b.supremum,
            grad_sup: lift(b.grad_sup),
            lipschitz: lift(b.lipschitz),
        };
        Ok(Self { name: name.into(), basis, core, bounds })
    }

    /// `ψ(⟨x, h⟩)` for a single direction `h`.
    pub fn along(name: impl Into<String>, h: Vec<f64>, core: impl Profile + 'static) -> Result<Self> {
        Self::new(name, vec![h], Arc::new(core))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis[0].len()
    }

    /// Number of projections `n`.
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn core(&self) -> &Arc<dyn Profile> {
        &self.core
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    /// `(⟨x,h_1⟩, …, ⟨x,h_n⟩)`.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        self.basis.iter().map(|h| linalg::dot(h, x)).collect()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.core.value(&self.project(x))
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let xi = self.project(x);
        let mut g = vec![0.0; self.rank()];
        self.core.gradient(&xi, &mut g);
        let mut out = vec![0.0; self.ambient_dim()];
        for (gk, h) in g.iter().zip(&self.basis) {
            for (o, hv) in out.iter_mut().zip(h) {
                *o += gk * hv;
            }
        }
        out
    }

    pub fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.rank();
        let d = self.ambient_dim();
        let xi = self.project(x);
        let mut h = vec![0.0; n * n];
        self.core.hessian(&xi, &mut h);
        let basis = DMatrix::from_fn(n, d, |i, j| self.basis[i][j]);
        let core = DMatrix::from_row_slice(n, n, &h);
        basis.transpose() * core * basis
    }
}

/// `Φ ∘ f` with bounds propagated over the certified range of `f`.
pub fn compose_scalar(f: &CylindricalFunction, map: ScalarMap) -> Result<CylindricalFunction> {
    let b = f.core.bounds();
    map.check_domain(b.infimum)?;
    let core: Arc<dyn Profile> = Arc::new(Composite { inner: f.core.clone(), map });
    let (lo, hi, _) = map.interval(b.infimum, b.supremum);
    if lo.is_nan() || hi.is_nan() {
        return Err(invalid(format!("{map:?} is undefined on the range of {}", f.name)));
    }
    CylindricalFunction::new(format!("{:?}({})", map, f.name), f.basis.clone(), core)
}

/// Smooth cylindrical approximation `g_{m,n}` of a Lipschitz `g: R^d → R`:
/// `g` is restricted to the span of the first `n` coordinate directions and
/// convolved with a bump of radius `1/m`.
pub fn mollify_lipschitz(
    g: LipschitzFn,
    lipschitz: f64,
    range: (f64, f64),
    d: usize,
    n: usize,
    m: f64,
) -> Result<CylindricalFunction> {
    if n == 0 || n > d {
        return Err(invalid(format!("truncation dimension {n} must lie in 1..={d}")));
    }
    let restricted: LipschitzFn = Arc::new(move |xi: &[f64]| {
        let mut x = vec![0.0; d];
        x[..xi.len()].copy_from_slice(xi);
        g(&x)
    });
    let core = Mollified::new(restricted, n, m, lipschitz, range)?;
    let basis = (0..n)
        .map(|k| {
            let mut e = vec![0.0; d];
            e[k] = 1.0;
            e
        })
        .collect();
    CylindricalFunction::new(format!("mollified_n{n}_m{m}"), basis, Arc::new(core))
}
