//! Smooth cylindrical approximations of Lipschitz functions by convolution
//! with a compactly supported bump.

use std::fmt;
use std::sync::{Arc, OnceLock};

use super::profile::{Bounds, Profile};
use crate::error::{Error, Result};
use crate::quad::{self, gauss_legendre, Tolerance};

pub type LipschitzFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// `e^{-1/(1-r²)}` and its first two radial derivatives, unnormalised.
#[inline]
fn bump(r: f64) -> (f64, f64, f64) {
    let q = 1.0 - r * r;
    if q <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let v = (-1.0 / q).exp();
    let q2 = q * q;
    let d1 = v * (-2.0 * r / q2);
    let d2 = v * (4.0 * r * r - 2.0 * q2 - 8.0 * r * r * q) / (q2 * q2);
    (v, d1, d2)
}

/// Normalising constants for unit mass in one and two dimensions.
fn bump_mass(n: usize) -> f64 {
    static MASS: OnceLock<[f64; 2]> = OnceLock::new();
    let m = MASS.get_or_init(|| {
        let tol = Tolerance::new(1e-16, 1e-14);
        let one = 2.0 * quad::adaptive(|r: f64| bump(r).0, 0.0, 1.0, tol).unwrap().value;
        let two = 2.0 * std::f64::consts::PI * quad::adaptive(|r: f64| r * bump(r).0, 0.0, 1.0, tol).unwrap().value;
        [one, two]
    });
    m[n - 1]
}

/// `ξ ↦ ∫ ψ(ξ - w) ρ_m(w) dw` with `ρ_m(w) = m^n ρ(m w)`.
#[derive(Clone)]
pub struct Mollified {
    inner: LipschitzFn,
    n: usize,
    m: f64,
    lipschitz: f64,
    range: (f64, f64),
}

impl fmt::Debug for Mollified {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Mollified").field("n", &self.n).field("m", &self.m).field("lipschitz", &self.lipschitz).finish()
    }
}

impl Mollified {
    /// `inner` is a function of `n ∈ {1, 2}` variables with Lipschitz
    /// constant `lipschitz` and range contained in `range`.
    pub fn new(inner: LipschitzFn, n: usize, m: f64, lipschitz: f64, range: (f64, f64)) -> Result<Self> {
        if !(1..=2).contains(&n) {
            return Err(Error::Unsupported(format!("mollification in {n} variables (supported: 1, 2)")));
        }
        if !(m > 0.0) {
            return Err(Error::Invalid("mollification index must be positive".into()));
        }
        Ok(Self { inner, n, m, lipschitz, range })
    }

    /// `(value, gradient, row-major Hessian)`; derivatives fall on the kernel.
    fn moments(&self, xi: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
        let m = self.m;
        let base = (self.inner)(xi);
        match self.n {
            1 => {
                let mass = bump_mass(1);
                let tol = Tolerance::new(1e-15, 1e-13);
                let eval = |order: usize| {
                    quad::adaptive_breaks(
                        |z: f64| {
                            let (v, d1, d2) = bump(z.abs());
                            let g = (self.inner)(&[xi[0] - z / m]);
                            match order {
                                0 => (g - base) * v,
                                1 => (g - base) * d1 * z.signum() * m,
                                _ => (g - base) * d2 * m * m,
                            }
                        },
                        &[-1.0, -0.5, 0.0, 0.5, 1.0],
                        tol,
                    )
                    .map(|r| r.value / mass)
                    .unwrap_or(f64::NAN)
                };
                (base + eval(0), vec![eval(1)], vec![eval(2)])
            }
            _ => {
                let mass = bump_mass(2);
                let radial = gauss_legendre(32);
                let angular = 96;
                let mut value = 0.0;
                let mut grad = [0.0; 2];
                let mut hess = [0.0; 4];
                for panel in 0..4 {
                    let (a, b) = (panel as f64 / 4.0, (panel + 1) as f64 / 4.0);
                    for (r, wr) in radial.mapped(a, b) {
                        let (v, d1, d2) = bump(r);
                        for k in 0..angular {
                            let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / angular as f64;
                            let (s, c) = th.sin_cos();
                            let w = wr * r * 2.0 * std::f64::consts::PI / angular as f64 / mass;
                            let g = (self.inner)(&[xi[0] - r * c / m, xi[1] - r * s / m]) - base;
                            let e = [c, s];
                            value += w * g * v;
                            for i in 0..2 {
                                grad[i] += w * g * d1 * e[i] * m;
                                for j in 0..2 {
                                    let delta = if i == j { 1.0 } else { 0.0 };
                                    let h = d2 * e[i] * e[j] + d1 * (delta - e[i] * e[j]) / r;
                                    hess[i * 2 + j] += w * g * h * m * m;
                                }
                            }
                        }
                    }
                }
                (base + value, grad.to_vec(), hess.to_vec())
            }
        }
    }
}

impl Profile for Mollified {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, xi: &[f64]) -> f64 {
        self.moments(xi).0
    }

    fn gradient(&self, xi: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.moments(xi).1);
    }

    fn hessian(&self, xi: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.moments(xi).2);
    }

    fn bounds(&self) -> Bounds {
        Bounds {
            infimum: self.range.0,
            supremum: self.range.1,
            grad_sup: self.lipschitz,
            lipschitz: self.lipschitz,
        }
    }
}
