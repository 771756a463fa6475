//! Lévy triples `[b, Q, M]` and their characteristic exponent.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::measure::{LevyMeasure, Ray, TailClass};
use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::quad::{self, gauss_legendre, Tolerance};

/// Drift `b`, Gaussian covariance `Q` and jump measure `M`.
#[derive(Debug, Clone)]
pub struct LevyTriple {
    pub b: Vec<f64>,
    pub q: DMatrix<f64>,
    pub m: LevyMeasure,
}

impl LevyTriple {
    pub fn new(b: Vec<f64>, q: DMatrix<f64>, m: LevyMeasure) -> Result<Self> {
        let d = m.dimension();
        if b.len() != d {
            return Err(Error::Dimension { expected: d, got: b.len() });
        }
        if q.nrows() != d || q.ncols() != d {
            return Err(Error::Dimension { expected: d, got: q.nrows() });
        }
        if !linalg::is_psd(&q, 1e-12) {
            return Err(invalid("Q must be symmetric positive semidefinite"));
        }
        Ok(Self { b, q, m })
    }

    /// Pure-jump triple with zero drift.
    pub fn pure_jump(m: LevyMeasure) -> Self {
        let d = m.dimension();
        Self { b: vec![0.0; d], q: DMatrix::zeros(d, d), m }
    }

    pub fn dimension(&self) -> usize {
        self.m.dimension()
    }

    pub fn has_gaussian_part(&self) -> bool {
        self.q.amax() > 0.0
    }
}

/// `λ(ξ) = -i⟨ξ,b⟩ + ½⟨Qξ,ξ⟩ - ∫ (e^{i⟨y,ξ⟩} - 1 - i⟨y,ξ⟩ χ_{|y|<1}) M(dy)`.
pub fn characteristic_exponent(triple: &LevyTriple, xi: &[f64]) -> Result<Complex64> {
    let d = triple.dimension();
    if xi.len() != d {
        return Err(Error::Dimension { expected: d, got: xi.len() });
    }
    let drift = linalg::dot(xi, &triple.b);
    let qxi = linalg::mat_vec(&triple.q, xi);
    let gauss = 0.5 * linalg::dot(&qxi, xi);
    let mut jumps = Complex64::new(0.0, 0.0);
    let m = &triple.m;
    for ray in m.rays() {
        let z = linalg::dot(&ray.direction, xi);
        jumps += ray_char_integral(ray, m.singularity_order(), m.tail_class(), z)? * ray.weight;
    }
    Ok(Complex64::new(gauss, -drift) - jumps)
}

/// `(cos u - 1, sin u - u)` without cancellation for small `u`.
fn oscillation(u: f64) -> (f64, f64) {
    if u.abs() < 1e-2 {
        let u2 = u * u;
        let cm1 = -u2 / 2.0 * (1.0 - u2 / 12.0 * (1.0 - u2 / 30.0));
        let smu = -u * u2 / 6.0 * (1.0 - u2 / 20.0 * (1.0 - u2 / 42.0));
        (cm1, smu)
    } else {
        let h = (0.5 * u).sin();
        (-2.0 * h * h, u.sin() - u)
    }
}

/// `∫_0^∞ (e^{irz} - 1 - irz χ_{r<1}) k(r) dr` along one ray.
pub fn ray_char_integral(ray: &Ray, order: f64, tail: TailClass, z: f64) -> Result<Complex64> {
    if z == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let q = z.abs();
    let compensated = |r: f64| {
        let k = ray.k(r);
        if k == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let (c, s) = oscillation(r * z);
        if r < 1.0 {
            Complex64::new(c, s) * k
        } else {
            Complex64::new(c, s + r * z) * k
        }
    };
    // Origin: integrand ~ r^{1-α}.
    let r_a = 0.5 * (1.0f64).min(1.0 / q);
    let tol = Tolerance::new(1e-15, 1e-12);
    let mut total = quad::near_zero(compensated, r_a, 1.0 - order, tol)?.value;

    let (r_end, power) = match tail {
        TailClass::Compact { radius } => (radius.max(r_a), None),
        TailClass::Gaussian { rate } => ((60.0 / rate).sqrt() + 1.0, None),
        TailClass::Exponential { rate } => (60.0 / rate + 1.0, None),
        TailClass::Power { index } => ((40.0 / q).max(40.0), Some(index)),
    };
    // Oscillation-resolving panels: geometric growth capped at a quarter period.
    let rule = gauss_legendre(12);
    let quarter = 0.5 * std::f64::consts::PI / q;
    let mut a = r_a;
    while a < r_end {
        let mut b = (2.0 * a).min(a + quarter).min(r_end);
        if a < 1.0 && b > 1.0 {
            b = 1.0;
        }
        total += rule.integrate(compensated, a, b);
        a = b;
    }
    if let Some(gamma) = power {
        let r = r_end;
        let k_r = ray.k(r);
        let nu = 1.0 + gamma;
        // ∫_R^∞ e^{irz} (r/R)^{-ν} dr through the asymptotic series.
        let step = Complex64::new(0.0, -1.0 / (z * r));
        let mut term = Complex64::new(1.0, 0.0);
        let mut series = term;
        for n in 0..16 {
            term *= step * (nu + n as f64);
            series += term;
            if term.norm() < 1e-17 * series.norm() {
                break;
            }
        }
        let lead = Complex64::new(0.0, 1.0) * Complex64::from_polar(1.0, r * z) / z;
        total += lead * series * k_r;
        total -= Complex64::new(k_r * r / gamma, 0.0);
    }
    if !(total.re.is_finite() && total.im.is_finite()) {
        return Err(Error::Quadrature(format!("characteristic integral not finite at z = {z}")));
    }
    Ok(total)
}
