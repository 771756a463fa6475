//! The three worked models: a fractional Ornstein–Uhlenbeck operator, an
//! α-stable noise with a spherical spectral measure, and a tempered stable
//! (Koponen-type) noise.
//!
//! Every model carries the domination function `h(t) = e^{-κt}` and the
//! closed-form constants that the generic machinery is checked against.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::levy::{EvolvedTriple, LevyMeasure, LevyTriple, SemigroupFamily, TailClass};
use crate::linalg;
use crate::quad::{self, Tolerance};

/// A model with its closed-form data.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub name: String,
    pub evolved: EvolvedTriple,
    /// `κ` in `h(t) = e^{-κt}`.
    pub h_rate: f64,
    /// Closed-form `b_∞`.
    pub b_inf: Vec<f64>,
    /// Named closed-form constants.
    pub known: BTreeMap<String, f64>,
}

impl ModelSpec {
    pub fn triple(&self) -> &LevyTriple {
        self.evolved.triple()
    }

    pub fn semigroup(&self) -> &SemigroupFamily {
        self.evolved.semigroup()
    }

    pub fn dimension(&self) -> usize {
        self.evolved.dimension()
    }

    pub fn h(&self, t: f64) -> f64 {
        (-self.h_rate * t).exp()
    }

    /// `‖h‖_{L¹(0,∞)}`, the log-Sobolev constant.
    pub fn h_l1(&self) -> f64 {
        1.0 / self.h_rate
    }

    /// `‖h‖_{L¹}` by quadrature, independent of the closed form.
    pub fn h_l1_quadrature(&self) -> Result<f64> {
        Ok(quad::semi_infinite(|t| self.h(t), 0.0, Tolerance::new(1e-14, 1e-13))?.value)
    }

    pub fn known(&self, key: &str) -> Option<f64> {
        self.known.get(key).copied()
    }

    /// Whether `M` has exponential moments of every order.
    pub fn has_exponential_moments(&self) -> bool {
        let m = &self.triple().m;
        m.is_zero() || matches!(m.tail_class(), TailClass::Gaussian { .. } | TailClass::Compact { .. })
    }

    /// Compares each known constant with the generic computation; returns
    /// `(name, closed form, computed, holds)`.
    pub fn consistency(&self) -> Result<Vec<(String, f64, f64, bool)>> {
        let m = &self.triple().m;
        let mut out = Vec::new();
        let h = self.h_l1_quadrature()?;
        out.push(("h_l1".to_string(), self.h_l1(), h, (h - self.h_l1()).abs() <= 1e-10));
        let b = self.evolved.drift_bt(f64::INFINITY)?;
        for (i, (want, got)) in self.b_inf.iter().zip(&b).enumerate() {
            out.push((format!("b_inf[{i}]"), *want, *got, (want - got).abs() <= 1e-3 * want.abs() + 1e-6));
        }
        for (key, &v) in &self.known {
            let row = match key.as_str() {
                "first_moment" => {
                    let got = m.moment_outside_unit(1.0);
                    (got, (got - v).abs() <= 1e-6 * v)
                }
                "first_moment_bound" => {
                    let got = m.moment_outside_unit(1.0);
                    (got, got <= v)
                }
                "small_jump_bound" => {
                    let got = self.evolved.integrated_small_jumps()?;
                    (got, got <= v * (1.0 + 1e-9))
                }
                "small_jump_integral" => {
                    let got = self.evolved.integrated_small_jumps()?;
                    (got, (got - v).abs() <= 1e-6 * v)
                }
                "psi_constant" => {
                    // ψ(a) ≥ C e^a at a few orders.
                    let ok = [0.5, 1.0, 2.0]
                        .iter()
                        .map(|&a| crate::levy::psi_of(m, a).map(|p| p >= v * f64::exp(a)))
                        .collect::<Result<Vec<_>>>()?
                        .into_iter()
                        .all(|x| x);
                    (crate::levy::psi_of(m, 1.0)? / 1f64.exp(), ok)
                }
                "q_inf" => {
                    let got = self.evolved.gaussian_qt(f64::INFINITY)?[(0, 0)];
                    (got, (got - v).abs() <= 1e-8)
                }
                _ => continue,
            };
            out.push((key.clone(), v, row.0, row.1));
        }
        Ok(out)
    }
}

/// Tempered stable noise `M(dx) = c e^{-x²} |x|^{-1-2s} dx` on `R`, with
/// `T_t = e^{-βt}`.
pub fn build_koponen(c: f64, s: f64, beta: f64, b: f64) -> Result<ModelSpec> {
    if !(c > 0.0 && beta > 0.0) || !(s > 0.0 && s < 1.0) {
        return Err(invalid(format!("koponen needs c > 0, s ∈ (0,1), β > 0 (got c={c}, s={s}, β={beta})")));
    }
    let m = LevyMeasure::from_density(
        1,
        Arc::new(move |y: &[f64]| {
            let a = y[0].abs();
            if a == 0.0 {
                0.0
            } else {
                c * (-a * a).exp() * a.powf(-1.0 - 2.0 * s)
            }
        }),
        2.0 * s,
        TailClass::Gaussian { rate: 1.0 },
    )?;
    let triple = LevyTriple::new(vec![b], DMatrix::zeros(1, 1), m)?;
    let evolved = EvolvedTriple::new(triple, SemigroupFamily::scalar(1, beta)?)?;
    let psi_c = 2.0
        * c
        * quad::semi_infinite(|y| (-y * y).exp() * y.powf(-2.0 * s), 1.0, Tolerance::new(1e-15, 1e-12))?.value;
    let mut known = BTreeMap::new();
    known.insert("first_moment_bound".into(), 2.0 * c / ((2.0 * s + 1.0) * std::f64::consts::E));
    known.insert("small_jump_bound".into(), c / (2.0 * s * s * (1.0 - s) * beta));
    known.insert("psi_constant".into(), psi_c);
    Ok(ModelSpec { name: "koponen".into(), evolved, h_rate: 2.0 * s * beta, b_inf: vec![b / beta], known })
}

/// α-stable noise `M(B) = ∫_0^∞ r^{-1-α} Σ_j w_j χ_B(r u_j) dr` with
/// `T_t = e^{-βt} I`. The atoms must come in pairs `±u` of equal weight.
pub fn build_alpha_stable(alpha: f64, beta: f64, atoms: Vec<(Vec<f64>, f64)>, b: Vec<f64>) -> Result<ModelSpec> {
    if !(alpha > 1.0 && alpha < 2.0) || beta <= 0.0 {
        return Err(invalid(format!("α-stable model needs α ∈ (1,2) and β > 0 (got α={alpha}, β={beta})")));
    }
    let d = b.len();
    for (u, w) in &atoms {
        let paired = atoms.iter().any(|(v, x)| {
            v.len() == u.len() && v.iter().zip(u).all(|(p, q)| (p + q).abs() < 1e-12) && (w - x).abs() <= 1e-12 * w
        });
        if !paired {
            return Err(invalid("spherical measure must be symmetric: every atom u needs a partner -u of equal weight"));
        }
    }
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    let m = LevyMeasure::spherical(
        atoms,
        Arc::new(move |r: f64| if r > 0.0 { r.powf(-1.0 - alpha) } else { 0.0 }),
        alpha,
        TailClass::Power { index: alpha },
    )?;
    if m.dimension() != d {
        return Err(Error::Dimension { expected: d, got: m.dimension() });
    }
    let triple = LevyTriple::new(b.clone(), DMatrix::zeros(d, d), m)?;
    let evolved = EvolvedTriple::new(triple, SemigroupFamily::scalar(d, beta)?)?;
    // ∫(1 ∧ |e^{-βr} y|²) M(dy) = e^{-αβr} ∫(1 ∧ |y|²) M(dy) by scaling.
    let truncated = total * (1.0 / (2.0 - alpha) + 1.0 / alpha);
    let mut known = BTreeMap::new();
    known.insert("first_moment".into(), total / (alpha - 1.0));
    known.insert("small_jump_integral".into(), truncated / (alpha * beta));
    let b_inf = b.iter().map(|v| v / beta).collect();
    Ok(ModelSpec { name: "alpha_stable".into(), evolved, h_rate: alpha * beta, b_inf, known })
}

/// The atoms `±e_k` with unit weights in `R^d`.
pub fn coordinate_atoms(d: usize) -> Vec<(Vec<f64>, f64)> {
    let mut atoms = Vec::with_capacity(2 * d);
    for k in 0..d {
        for sign in [1.0, -1.0] {
            let mut u = vec![0.0; d];
            u[k] = sign;
            atoms.push((u, 1.0));
        }
    }
    atoms
}

/// Fractional Ornstein–Uhlenbeck noise with density
/// `c (det Q^{1/2})^{-1} |Q^{-1/2} y|^{-2s-d}` and drift matrix `B`.
///
/// Requires `Q` positive definite, `B` symmetric negative definite, `QB = BQ`
/// and `min |λ_i(B)| > |Tr B| / (2s + d)`.
pub fn build_fractional_ou(q: DMatrix<f64>, b: DMatrix<f64>, s: f64, c: f64) -> Result<ModelSpec> {
    let d = q.nrows();
    if !(s > 0.5 && s < 1.0) || c <= 0.0 {
        return Err(invalid(format!("fractional OU needs s ∈ (1/2, 1) and c > 0 (got s={s}, c={c})")));
    }
    if q.ncols() != d || b.nrows() != d || b.ncols() != d {
        return Err(Error::Dimension { expected: d, got: b.nrows() });
    }
    if !linalg::is_symmetric(&q, 1e-12) || !linalg::is_symmetric(&b, 1e-12) {
        return Err(invalid("Q and B must be symmetric"));
    }
    let qe = q.clone().symmetric_eigen();
    if qe.eigenvalues.min() <= 0.0 {
        return Err(invalid("Q must be positive definite"));
    }
    let be = b.clone().symmetric_eigen();
    if be.eigenvalues.max() >= 0.0 {
        return Err(Error::Hypothesis(format!(
            "exponential_stability fails: B must be negative definite (largest eigenvalue {})",
            be.eigenvalues.max()
        )));
    }
    let scale = q.amax().max(b.amax()).max(1.0);
    if (&q * &b - &b * &q).amax() > 1e-10 * scale * scale {
        return Err(invalid("Q and B must commute"));
    }
    let dd = d as f64;
    let min_abs = be.eigenvalues.iter().map(|l| l.abs()).fold(f64::INFINITY, f64::min);
    let trace = b.trace();
    if min_abs <= trace.abs() / (2.0 * s + dd) {
        return Err(Error::Hypothesis(format!(
            "condition min|λ_i| > |Tr B|/(2s+d) fails: {min_abs} ≤ {}",
            trace.abs() / (2.0 * s + dd)
        )));
    }
    let root = linalg::psd_sqrt(&q)?;
    let inv_root = root.clone().try_inverse().ok_or_else(|| invalid("Q^{1/2} is singular"))?;
    let norm = c / root.determinant();
    let exponent = 2.0 * s + dd;
    let m = LevyMeasure::from_density(
        d,
        Arc::new(move |y: &[f64]| {
            let z = linalg::mat_vec(&inv_root, y);
            let r = linalg::norm(&z);
            if r == 0.0 {
                0.0
            } else {
                norm * r.powf(-exponent)
            }
        }),
        2.0 * s,
        TailClass::Power { index: 2.0 * s },
    )?;
    let triple = LevyTriple::new(vec![0.0; d], DMatrix::zeros(d, d), m)?;
    let evolved = EvolvedTriple::new(triple, SemigroupFamily::new(b)?)?;
    let lambda = be.eigenvalues.max();
    let h_rate = trace - exponent * lambda;
    let mut known = BTreeMap::new();
    known.insert("tail_exponent".into(), 2.0 * s);
    Ok(ModelSpec { name: "fractional_ou".into(), evolved, h_rate, b_inf: vec![0.0; d], known })
}

/// The same model with Gaussian covariance `Q` added to the noise.
pub fn with_gaussian_part(model: &ModelSpec, q: DMatrix<f64>) -> Result<ModelSpec> {
    let d = model.dimension();
    if q.nrows() != d || q.ncols() != d {
        return Err(Error::Dimension { expected: d, got: q.nrows() });
    }
    if !linalg::is_psd(&q, 1e-12) {
        return Err(invalid("Gaussian covariance must be symmetric positive semidefinite"));
    }
    let b = model.semigroup().generator();
    let scale = q.amax().max(b.amax()).max(1.0);
    if (&q * b - b * &q).amax() > 1e-10 * scale * scale {
        return Err(invalid("Gaussian covariance must commute with B"));
    }
    let src = model.triple();
    let triple = LevyTriple::new(src.b.clone(), q.clone(), src.m.clone())?;
    let evolved = EvolvedTriple::new(triple, model.semigroup().clone())?;
    let mut known = model.known.clone();
    if d == 1 {
        known.insert("q_inf".into(), q[(0, 0)] / (-2.0 * b[(0, 0)]));
    }
    let name = if q.amax() > 0.0 { format!("{}+gaussian", model.name) } else { model.name.clone() };
    Ok(ModelSpec { name, evolved, h_rate: model.h_rate, b_inf: model.b_inf.clone(), known })
}

fn d_c() -> f64 {
    1.0
}
fn d_s() -> f64 {
    0.75
}
fn d_beta() -> f64 {
    1.0
}
fn d_alpha() -> f64 {
    1.5
}
fn d_dim() -> usize {
    2
}

/// Model selection with parameter overrides, as read from a run config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelParams {
    Koponen {
        #[serde(default = "d_c")]
        c: f64,
        #[serde(default = "d_s")]
        s: f64,
        #[serde(default = "d_beta")]
        beta: f64,
        #[serde(default)]
        b: f64,
        /// Variance of an added Gaussian part.
        #[serde(default)]
        gaussian: f64,
    },
    AlphaStable {
        #[serde(default = "d_alpha")]
        alpha: f64,
        #[serde(default = "d_beta")]
        beta: f64,
        #[serde(default = "d_dim")]
        dimension: usize,
        /// Drift; zero when omitted.
        #[serde(default)]
        b: Option<Vec<f64>>,
    },
    FractionalOu {
        #[serde(default = "d_s")]
        s: f64,
        #[serde(default = "d_c")]
        c: f64,
        /// `Q`, row by row; identity when omitted.
        #[serde(default)]
        q: Option<Vec<Vec<f64>>>,
        /// `B`, row by row; `-I` when omitted.
        #[serde(default)]
        b_matrix: Option<Vec<Vec<f64>>>,
        #[serde(default = "d_one")]
        dimension: usize,
    },
}

fn d_one() -> usize {
    1
}

pub const MODEL_NAMES: [&str; 3] = ["koponen", "alpha_stable", "fractional_ou"];

fn matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let d = rows.len();
    if d == 0 || rows.iter().any(|r| r.len() != d) {
        return Err(invalid("matrix must be square and non-empty"));
    }
    Ok(DMatrix::from_row_slice(d, d, &rows.concat()))
}

impl ModelParams {
    /// Default parameters of the model called `name`.
    pub fn named(name: &str) -> Result<Self> {
        let json = format!("{{\"name\":\"{name}\"}}");
        serde_json::from_str(&json)
            .map_err(|_| invalid(format!("unknown model '{name}' (known: {})", MODEL_NAMES.join(", "))))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Koponen { .. } => "koponen",
            Self::AlphaStable { .. } => "alpha_stable",
            Self::FractionalOu { .. } => "fractional_ou",
        }
    }

    pub fn build(&self) -> Result<ModelSpec> {
        match self {
            Self::Koponen { c, s, beta, b, gaussian } => {
                let m = build_koponen(*c, *s, *beta, *b)?;
                if *gaussian != 0.0 {
                    with_gaussian_part(&m, DMatrix::from_element(1, 1, *gaussian))
                } else {
                    Ok(m)
                }
            }
            Self::AlphaStable { alpha, beta, dimension, b } => {
                let b = b.clone().unwrap_or_else(|| vec![0.0; *dimension]);
                if b.len() != *dimension {
                    return Err(Error::Dimension { expected: *dimension, got: b.len() });
                }
                build_alpha_stable(*alpha, *beta, coordinate_atoms(*dimension), b)
            }
            Self::FractionalOu { s, c, q, b_matrix, dimension } => {
                let d = *dimension;
                let q = match q {
                    Some(rows) => matrix(rows)?,
                    None => DMatrix::identity(d, d),
                };
                let b = match b_matrix {
                    Some(rows) => matrix(rows)?,
                    None => -DMatrix::identity(d, d),
                };
                build_fractional_ou(q, b, *s, *c)
            }
        }
    }
}

/// The three models with their default parameters.
pub fn standard_models() -> Result<Vec<ModelSpec>> {
    MODEL_NAMES.iter().map(|n| ModelParams::named(n)?.build()).collect()
}
