//! The linear flow `T_t = e^{tB}` together with its growth bound.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::linalg;

/// Constants with `‖T_t‖ ≤ K e^{ωt}` for `t ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthBound {
    pub k: f64,
    pub omega: f64,
}

#[derive(Debug, Clone)]
enum Structure {
    Scalar(f64),
    Symmetric { values: DVector<f64>, vectors: DMatrix<f64> },
    General,
}

/// `T_t = e^{tB}` on `R^d`.
#[derive(Debug, Clone)]
pub struct SemigroupFamily {
    b: DMatrix<f64>,
    structure: Structure,
    growth: GrowthBound,
}

impl SemigroupFamily {
    pub fn new(b: DMatrix<f64>) -> Result<Self> {
        if !b.is_square() || b.nrows() == 0 {
            return Err(invalid("generator B must be a non-empty square matrix"));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(invalid("generator B has non-finite entries"));
        }
        let d = b.nrows();
        let diag0 = b[(0, 0)];
        let scalar = (0..d).all(|i| (0..d).all(|j| {
            let want = if i == j { diag0 } else { 0.0 };
            b[(i, j)] == want
        }));
        let structure = if scalar {
            Structure::Scalar(diag0)
        } else if linalg::is_symmetric(&b, 1e-14) {
            let eig = b.clone().symmetric_eigen();
            Structure::Symmetric { values: eig.eigenvalues, vectors: eig.eigenvectors }
        } else {
            Structure::General
        };
        let abscissa = linalg::spectral_abscissa(&b);
        let growth = if linalg::is_normal(&b, 1e-12) {
            GrowthBound { k: 1.0, omega: abscissa }
        } else {
            // Non-normal: widen the rate slightly and measure the transient.
            let omega = abscissa + 0.01 * abscissa.abs().max(1e-3);
            let horizon = 40.0 / omega.abs().max(1e-3);
            let mut k: f64 = 1.0;
            for i in 0..=2000 {
                let t = horizon * i as f64 / 2000.0;
                let norm = (&b * t).exp().norm();
                k = k.max(norm * (-omega * t).exp());
            }
            GrowthBound { k: k * (1.0 + 1e-6), omega }
        };
        Ok(Self { b, structure, growth })
    }

    /// `B = -β I` on `R^d`.
    pub fn scalar(d: usize, beta: f64) -> Result<Self> {
        Self::new(DMatrix::from_diagonal_element(d, d, -beta))
    }

    pub fn dimension(&self) -> usize {
        self.b.nrows()
    }

    pub fn generator(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn growth_bound(&self) -> GrowthBound {
        self.growth
    }

    /// Some `κ > 0` with `T_t = e^{-κt} I`, if the flow is a scalar contraction.
    pub fn scalar_rate(&self) -> Option<f64> {
        match self.structure {
            Structure::Scalar(b) => Some(-b),
            _ => None,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        !matches!(self.structure, Structure::General)
    }

    pub fn is_normal(&self) -> bool {
        linalg::is_normal(&self.b, 1e-12)
    }

    pub fn spectral_abscissa(&self) -> f64 {
        linalg::spectral_abscissa(&self.b)
    }

    /// Largest eigenvalue for symmetric `B` (Λ in the domination bounds).
    pub fn max_eigenvalue(&self) -> Option<f64> {
        match &self.structure {
            Structure::Scalar(b) => Some(*b),
            Structure::Symmetric { values, .. } => Some(values.max()),
            Structure::General => None,
        }
    }

    pub fn trace(&self) -> f64 {
        self.b.trace()
    }

    /// The matrix `e^{tB}`.
    pub fn matrix(&self, t: f64) -> DMatrix<f64> {
        match &self.structure {
            Structure::Scalar(b) => {
                DMatrix::from_diagonal_element(self.dimension(), self.dimension(), (b * t).exp())
            }
            Structure::Symmetric { values, vectors } => {
                let e = values.map(|l| (l * t).exp());
                vectors * DMatrix::from_diagonal(&e) * vectors.transpose()
            }
            Structure::General => (&self.b * t).exp(),
        }
    }

    /// `T_t x`.
    pub fn apply(&self, t: f64, x: &[f64]) -> Vec<f64> {
        match &self.structure {
            Structure::Scalar(b) => {
                let s = (b * t).exp();
                x.iter().map(|v| v * s).collect()
            }
            _ => linalg::mat_vec(&self.matrix(t), x),
        }
    }

    /// `T_t^* ξ`.
    pub fn apply_adjoint(&self, t: f64, xi: &[f64]) -> Vec<f64> {
        match &self.structure {
            Structure::Scalar(_) | Structure::Symmetric { .. } => self.apply(t, xi),
            Structure::General => linalg::mat_vec(&self.matrix(t).transpose(), xi),
        }
    }

    /// `|det T_t| = e^{t tr B}`.
    pub fn det(&self, t: f64) -> f64 {
        (t * self.trace()).exp()
    }

    /// Smallest `T` with `K e^{ωT} ≤ level`.
    pub fn horizon_for(&self, level: f64) -> Result<f64> {
        let GrowthBound { k, omega } = self.growth;
        if omega >= 0.0 {
            return Err(invalid("flow is not exponentially stable (growth rate ω ≥ 0)"));
        }
        Ok(((level / k).ln() / omega).max(0.0))
    }
}
