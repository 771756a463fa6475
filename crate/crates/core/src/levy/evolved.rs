//! The family `μ_t` generated by a Lévy triple and a flow, and its limit `σ`.
//!
//! `μ_t` has characteristic function `exp(-∫_0^t λ(T_s^* ξ) ds)` and triple
//! `[b_t, Q_t, M_t]` with `M_t = ∫_0^t M∘T_s^{-1} ds`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::measure::{ray_integral, LevyMeasure, Ray};
use super::semigroup::SemigroupFamily;
use super::triple::{characteristic_exponent, LevyTriple};
use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::quad::{self, gauss_legendre, Tolerance};

/// A triple together with the flow it is transported by.
#[derive(Debug, Clone)]
pub struct EvolvedTriple {
    triple: LevyTriple,
    semigroup: SemigroupFamily,
}

impl EvolvedTriple {
    pub fn new(triple: LevyTriple, semigroup: SemigroupFamily) -> Result<Self> {
        if triple.dimension() != semigroup.dimension() {
            return Err(Error::Dimension { expected: triple.dimension(), got: semigroup.dimension() });
        }
        Ok(Self { triple, semigroup })
    }

    pub fn triple(&self) -> &LevyTriple {
        &self.triple
    }

    pub fn semigroup(&self) -> &SemigroupFamily {
        &self.semigroup
    }

    pub fn dimension(&self) -> usize {
        self.triple.dimension()
    }

    /// Time after which the integrands in `s` are negligible; requires a
    /// stable flow.
    pub fn integration_horizon(&self) -> Result<f64> {
        let order = self.triple.m.singularity_order();
        let decay = if order > 0.0 { order.min(1.0) } else { 1.0 };
        let g = self.semigroup.growth_bound();
        if g.omega >= 0.0 {
            return Err(Error::Hypothesis("flow is not exponentially stable".into()));
        }
        Ok(((32.0 * std::f64::consts::LN_10 / decay) + g.k.ln()) / -g.omega)
    }

    fn time_breaks(&self, t: f64) -> Result<(Vec<f64>, f64)> {
        let end = if t.is_finite() { t } else { self.integration_horizon()? };
        let unit = 1.0 / self.semigroup.growth_bound().omega.abs().max(1e-3);
        let mut breaks = vec![0.0];
        let mut s = 0.25 * unit;
        while s < end {
            breaks.push(s);
            s *= 2.0;
        }
        breaks.push(end);
        Ok((breaks, end))
    }

    /// `∫_0^t λ(T_s^* ξ) ds`; `t = ∞` gives the exponent of `σ`.
    pub fn exponent_integral(&self, t: f64, xi: &[f64]) -> Result<Complex64> {
        if t < 0.0 {
            return Err(invalid("time must be non-negative"));
        }
        if t == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let (breaks, _) = self.time_breaks(t)?;
        let mut failure = None;
        let r = quad::adaptive_breaks(
            |s: f64| {
                let eta = self.semigroup.apply_adjoint(s, xi);
                match characteristic_exponent(&self.triple, &eta) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        Complex64::new(0.0, 0.0)
                    }
                }
            },
            &breaks,
            Tolerance::new(1e-14, 1e-12),
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(r.value)
    }

    /// `μ̂_t(ξ)`.
    pub fn mu_hat(&self, t: f64, xi: &[f64]) -> Result<Complex64> {
        Ok((-self.exponent_integral(t, xi)?).exp())
    }

    /// `|μ̂_{t+s}(ξ) - μ̂_t(T_s^* ξ) μ̂_s(ξ)|`.
    pub fn semigroup_consistency(&self, t: f64, s: f64, xi: &[f64]) -> Result<f64> {
        let lhs = self.mu_hat(t + s, xi)?;
        let shifted = self.semigroup.apply_adjoint(s, xi);
        let rhs = self.mu_hat(t, &shifted)? * self.mu_hat(s, xi)?;
        Ok((lhs - rhs).norm())
    }

    /// Drift `b_t = ∫_0^t T_s b ds + ∫_0^t ∫ T_s y (χ_{B_1}(T_s y) - χ_{B_1}(y)) M(dy) ds`.
    pub fn drift_bt(&self, t: f64) -> Result<Vec<f64>> {
        let d = self.dimension();
        let b = &self.triple.b;
        let mut out = if t.is_finite() {
            linalg::integrated_exp_apply(self.semigroup.generator(), b, t)
        } else {
            let minus_b = -self.semigroup.generator().clone();
            let lu = minus_b.lu();
            let sol = lu
                .solve(&linalg::to_dvector(b))
                .ok_or_else(|| invalid("B is singular; b_∞ undefined"))?;
            sol.iter().copied().collect()
        };
        let m = &self.triple.m;
        if m.is_symmetric() || m.is_zero() {
            return Ok(out);
        }
        let (breaks, _) = self.time_breaks(t)?;
        for ray in m.rays() {
            for i in 0..d {
                let mut failure = None;
                let v = quad::adaptive_breaks(
                    |s: f64| {
                        let tu = self.semigroup.apply(s, &ray.direction);
                        let a = linalg::norm(&tu);
                        let j = if a < 1.0 {
                            ray_integral(ray, m.singularity_order(), m.tail_class(), 1.0, 1.0 / a, 1.0, &|_| 1.0)
                        } else {
                            ray_integral(ray, m.singularity_order(), m.tail_class(), 1.0 / a, 1.0, 1.0, &|_| 1.0)
                                .map(|v| -v)
                        };
                        match j {
                            Ok(j) => tu[i] * j,
                            Err(e) => {
                                failure.get_or_insert(e);
                                0.0
                            }
                        }
                    },
                    &breaks,
                    Tolerance::new(1e-13, 1e-10),
                )?;
                if let Some(e) = failure {
                    return Err(e);
                }
                out[i] += ray.weight * v.value;
            }
        }
        Ok(out)
    }

    /// Lebesgue density of `M_t` at `y`: `∫_0^t |det T_s|^{-1} m(T_s^{-1} y) ds`.
    pub fn levy_mt_density(&self, t: f64, y: &[f64]) -> Result<f64> {
        let m = &self.triple.m;
        if m.density(y).is_none() {
            return Err(Error::Unsupported(
                "measure has no Lebesgue density; use evolved_measure for ray densities".into(),
            ));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        let (breaks, _) = self.time_breaks(t)?;
        let r = quad::adaptive_breaks(
            |s: f64| {
                let pre = self.semigroup.apply(-s, y);
                m.density(&pre).unwrap_or(0.0) / self.semigroup.det(s)
            },
            &breaks,
            Tolerance::new(1e-300, 1e-10),
        )?;
        Ok(r.value)
    }

    /// `Q_t = ∫_0^t T_s Q T_s^* ds`.
    pub fn gaussian_qt(&self, t: f64) -> Result<DMatrix<f64>> {
        let d = self.dimension();
        let q = &self.triple.q;
        if q.amax() == 0.0 || t == 0.0 {
            return Ok(DMatrix::zeros(d, d));
        }
        let (breaks, _) = self.time_breaks(t)?;
        let mut out = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in i..d {
                let v = quad::adaptive_breaks(
                    |s: f64| {
                        let e = self.semigroup.matrix(s);
                        (&e * q * e.transpose())[(i, j)]
                    },
                    &breaks,
                    Tolerance::new(1e-15, 1e-12),
                )?
                .value;
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        Ok(out)
    }

    /// Whether every ray of `M` is mapped into itself by the flow, with the
    /// contraction rates.
    fn eigen_rates(&self) -> Option<Vec<f64>> {
        let b = self.semigroup.generator();
        self.triple
            .m
            .rays()
            .iter()
            .map(|ray| {
                let bu = linalg::mat_vec(b, &ray.direction);
                let lam = linalg::dot(&bu, &ray.direction) / linalg::dot(&ray.direction, &ray.direction);
                let resid: f64 = bu.iter().zip(&ray.direction).map(|(x, u)| (x - lam * u).powi(2)).sum();
                (resid.sqrt() <= 1e-12 * (1.0 + lam.abs()) && lam < 0.0).then_some(-lam)
            })
            .collect()
    }

    /// `M_t` in ray form; `t = ∞` gives the jump measure of `σ`.
    pub fn evolved_measure(&self, t: f64) -> Result<LevyMeasure> {
        let m = &self.triple.m;
        let d = self.dimension();
        if m.is_zero() {
            return Ok(LevyMeasure::zero(d));
        }
        let order = m.singularity_order();
        let tail = m.tail_class();
        if let Some(rates) = self.eigen_rates() {
            // On an invariant ray with rate κ the radial density of M_t is
            // (Ḡ(ρ) - Ḡ(ρ e^{κt})) / (κρ) with Ḡ the tail mass of k.
            let rays = m
                .rays()
                .iter()
                .zip(rates)
                .map(|(ray, kappa)| {
                    let base = ray.clone();
                    let radial = Arc::new(move |rho: f64| {
                        if rho <= 0.0 {
                            return 0.0;
                        }
                        let hi = if t.is_finite() { rho * (kappa * t).exp() } else { f64::INFINITY };
                        ray_integral(&base, order, tail, rho, hi, 0.0, &|_| 1.0).unwrap_or(f64::NAN)
                            / (kappa * rho)
                    });
                    Ray::new(ray.direction.clone(), ray.weight, radial)
                })
                .collect();
            return LevyMeasure::from_rays(d, rays, order, tail);
        }
        // General flow: discretise the time integral of the push-forwards.
        let (breaks, _) = self.time_breaks(t)?;
        let rule = gauss_legendre(8);
        let mut rays = Vec::new();
        for ray in m.rays() {
            for w in breaks.windows(2) {
                for (s, ws) in rule.mapped(w[0], w[1]) {
                    let tu = self.semigroup.apply(s, &ray.direction);
                    let a = linalg::norm(&tu);
                    let dir: Vec<f64> = tu.iter().map(|v| v / a).collect();
                    let base = ray.clone();
                    rays.push(Ray::new(dir, ray.weight * ws, Arc::new(move |rho: f64| base.k(rho / a) / a)));
                }
            }
        }
        LevyMeasure::from_rays(d, rays, order, tail)
    }

    /// `[b_∞, Q_∞, M_∞]`, the triple of the invariant measure `σ`.
    pub fn invariant_triple(&self) -> Result<LevyTriple> {
        if self.semigroup.spectral_abscissa() >= 0.0 {
            return Err(Error::Hypothesis("B is not Hurwitz-stable; σ does not exist".into()));
        }
        let b = self.drift_bt(f64::INFINITY)?;
        let q = self.gaussian_qt(f64::INFINITY)?;
        let m = self.evolved_measure(f64::INFINITY)?;
        LevyTriple::new(b, q, m)
    }

    /// `μ_t`'s triple.
    pub fn mu_t_triple(&self, t: f64) -> Result<LevyTriple> {
        let b = self.drift_bt(t)?;
        let q = self.gaussian_qt(t)?;
        let m = self.evolved_measure(t)?;
        LevyTriple::new(b, q, m)
    }

    /// `∫ (1 ∧ |y|²) M_t(dy)` computed from the flow, and the bound
    /// `∫_0^t max(1, K² e^{2ωs}) ds · ∫ (1 ∧ |y|²) M(dy)`.
    pub fn truncated_mass_bound(&self, t: f64) -> Result<(f64, f64)> {
        let g = self.semigroup.growth_bound();
        let base = self.triple.m.truncated_second_moment()?;
        let factor = if g.omega < 0.0 {
            // max(1, K² e^{2ωs}) = K² e^{2ωs} until s* = ln K / -ω, then 1.
            let s_star = (g.k.ln() / -g.omega).max(0.0).min(t);
            g.k * g.k * (1.0 - (2.0 * g.omega * s_star).exp()) / (-2.0 * g.omega) + (t - s_star)
        } else if g.omega == 0.0 {
            g.k * g.k * t
        } else {
            g.k * g.k * ((2.0 * g.omega * t).exp() - 1.0) / (2.0 * g.omega)
        };
        Ok((self.flow_truncated_mass(t)?, factor * base))
    }

    fn flow_truncated_mass(&self, t: f64) -> Result<f64> {
        let m = &self.triple.m;
        let order = m.singularity_order();
        let tail = m.tail_class();
        let (breaks, _) = self.time_breaks(t)?;
        let mut value = 0.0;
        for ray in m.rays() {
            let v = quad::adaptive_breaks(
                |s: f64| {
                    let a = linalg::norm(&self.semigroup.apply(s, &ray.direction));
                    ray_integral(ray, order, tail, 0.0, 1.0 / a, 2.0, &|_| 1.0).unwrap_or(f64::NAN) * a * a
                        + ray_integral(ray, order, tail, 1.0 / a, f64::INFINITY, 0.0, &|_| 1.0)
                            .unwrap_or(f64::NAN)
                },
                &breaks,
                Tolerance::new(1e-12, 1e-9),
            )?;
            value += ray.weight * v.value;
        }
        Ok(value)
    }

    /// `∫_0^∞ ∫ (1 ∧ |T_s y|²) M(dy) ds = ∫ (1 ∧ |y|²) M_∞(dy)`.
    pub fn integrated_small_jumps(&self) -> Result<f64> {
        let m = &self.triple.m;
        if m.is_zero() {
            return Ok(0.0);
        }
        let order = m.singularity_order();
        let tail = m.tail_class();
        let Some(rates) = self.eigen_rates() else {
            return self.flow_truncated_mass(f64::INFINITY);
        };
        // On a ray contracted at rate κ: ∫_0^∞ (1 ∧ e^{-2κs} r²) ds equals
        // r²/(2κ) for r ≤ 1 and (ln r + 1/2)/κ beyond.
        let mut total = 0.0;
        for (ray, kappa) in m.rays().iter().zip(rates) {
            let inner = ray_integral(ray, order, tail, 0.0, 1.0, 2.0, &|_| 1.0)? / (2.0 * kappa);
            let outer = ray_integral(ray, order, tail, 1.0, f64::INFINITY, 0.0, &|r| (r.ln() + 0.5) / kappa)?;
            total += ray.weight * (inner + outer);
        }
        Ok(total)
    }

    /// Whether the flow maps every ray of `M` into itself.
    pub fn has_invariant_rays(&self) -> bool {
        self.eigen_rates().is_some()
    }

    /// Contraction rates of the rays of `M`, when each is invariant.
    pub fn ray_rates(&self) -> Option<Vec<f64>> {
        self.eigen_rates()
    }
}
