//! One-dimensional building blocks with exact derivatives and certified
//! ranges.

use serde::{Deserialize, Serialize};

/// Elementary profiles `u ↦ φ(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Identity,
    Square,
    Tanh,
    Sin,
    Cos,
    /// `e^{-u²/2}`
    Gauss,
    /// `1/(1+u²)`
    Lorentz,
    Atan,
    /// `u/√(1+u²)`
    Ratio,
    /// `√(1+u²) - 1`
    SoftAbs,
    /// `log cosh u`
    LogCosh,
    /// `u e^{-u²/2}`
    GaussSlope,
}

impl Shape {
    /// `(φ, φ', φ'')` at `u`.
    #[inline]
    pub fn eval(self, u: f64) -> (f64, f64, f64) {
        match self {
            Shape::Identity => (u, 1.0, 0.0),
            Shape::Square => (u * u, 2.0 * u, 2.0),
            Shape::Tanh => {
                let t = u.tanh();
                let s = 1.0 - t * t;
                (t, s, -2.0 * t * s)
            }
            Shape::Sin => {
                let (s, c) = u.sin_cos();
                (s, c, -s)
            }
            Shape::Cos => {
                let (s, c) = u.sin_cos();
                (c, -s, -c)
            }
            Shape::Gauss => {
                let g = (-0.5 * u * u).exp();
                (g, -u * g, (u * u - 1.0) * g)
            }
            Shape::Lorentz => {
                let q = 1.0 / (1.0 + u * u);
                (q, -2.0 * u * q * q, (6.0 * u * u - 2.0) * q * q * q)
            }
            Shape::Atan => {
                let q = 1.0 / (1.0 + u * u);
                (u.atan(), q, -2.0 * u * q * q)
            }
            Shape::Ratio => {
                let q = 1.0 / (1.0 + u * u);
                let r = q.sqrt();
                (u * r, q * r, -3.0 * u * q * q * r)
            }
            Shape::SoftAbs => {
                let s = (1.0 + u * u).sqrt();
                // √(1+u²) - 1 = u² / (√(1+u²) + 1) avoids cancellation.
                (u * u / (s + 1.0), u / s, 1.0 / (s * s * s))
            }
            Shape::LogCosh => {
                let a = u.abs();
                // log cosh u = |u| + log(1 + e^{-2|u|}) - log 2
                let v = a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2;
                let t = u.tanh();
                (v, t, 1.0 - t * t)
            }
            Shape::GaussSlope => {
                let g = (-0.5 * u * u).exp();
                let u2 = u * u;
                (u * g, (1.0 - u2) * g, u * (u2 - 3.0) * g)
            }
        }
    }

    #[inline]
    pub fn value(self, u: f64) -> f64 {
        self.eval(u).0
    }

    /// `(inf φ, sup φ)` over the real line.
    pub fn range(self) -> (f64, f64) {
        use std::f64::consts::FRAC_PI_2;
        match self {
            Shape::Identity => (f64::NEG_INFINITY, f64::INFINITY),
            Shape::Square | Shape::SoftAbs | Shape::LogCosh => (0.0, f64::INFINITY),
            Shape::Tanh | Shape::Sin | Shape::Cos | Shape::Ratio => (-1.0, 1.0),
            Shape::Gauss | Shape::Lorentz => (0.0, 1.0),
            Shape::Atan => (-FRAC_PI_2, FRAC_PI_2),
            Shape::GaussSlope => {
                let m = (-0.5f64).exp();
                (-m, m)
            }
        }
    }

    /// `sup |φ'|`.
    pub fn slope(self) -> f64 {
        match self {
            Shape::Square => f64::INFINITY,
            Shape::Gauss => (-0.5f64).exp(),
            // max of 2u/(1+u²)² at u = 1/√3
            Shape::Lorentz => 3.0 * 3f64.sqrt() / 8.0,
            _ => 1.0,
        }
    }
}
