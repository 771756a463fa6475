//! Log-Sobolev, Poincaré and exponential-entropy checks.

use super::{entropy_influence, paired_uncertainty, Harness, RowHead, VerificationResult};
use crate::error::{invalid, Error, Result};
use crate::estimators::{entropy_of, integrate_form_with_values, mean_of, Estimate, FormKind, Method};
use crate::functions::CylindricalFunction;
use crate::levy::ms_of;
use crate::linalg;
use crate::sampling::{sample_gaussian, SampleSet};

pub(crate) const LOG_SOBOLEV: &str = "Ent_σ(f^p) ≤ C ∫∫ |f^p(x+y) - f^p(x)|² / f^p(x) M(dy) σ(dx)";
pub(crate) const LOG_SOBOLEV_H20: &str = "Ent_σ(|f|) ≤ C c_f ∫∫ |f(x+y) - f(x)|² M(dy) σ(dx)";
pub(crate) const POINCARE: &str = "‖f - m_σ(f)‖_{L²(σ)} ≤ √(2C) (∫∫ |f(x+y) - f(x)|² M(dy) σ(dx))^{1/2}";
pub(crate) const EXP_ENTROPY: &str = "Ent_σ(e^f) ≤ C τ² M_{2τ} m_σ(e^f), Lip(f) ≤ τ";
pub(crate) const GAUSSIAN: &str =
    "Ent_{γ*σ}(f^p) ≤ c ∫ f^{p-2} |Q_∞^{1/2} Df|² d(γ*σ) + C ∫∫ |f^p(x+y) - f^p(x)|² / f^p(x) M(dy) (γ*σ)(dx)";

fn values(f: &CylindricalFunction, s: &SampleSet, h: &Harness) -> Vec<f64> {
    crate::estimators::evaluate(|x| f.value(x), s, h.exec())
}

fn log_sobolev_on(
    h: &Harness,
    f: &CylindricalFunction,
    p: f64,
    samples: &SampleSet,
) -> Result<(Estimate, Vec<f64>, Estimate, Vec<f64>)> {
    if !(p >= 1.0) {
        return Err(invalid("log-Sobolev exponent must be at least 1"));
    }
    if !(f.bounds().infimum > 0.0) {
        return Err(invalid(format!("'{}' has no positive infimum", f.name())));
    }
    let fp: Vec<f64> = values(f, samples, h).into_iter().map(|v| v.powf(p)).collect();
    let lhs = entropy_of(&fp)?;
    let m = &h.jump_part().triple().m;
    let (form, rhs) = integrate_form_with_values(FormKind::Entropy { p }, f, samples, m, &h.forms, h.exec())?;
    Ok((lhs, entropy_influence(&fp), rhs, form))
}

/// `Ent_σ(f^p) ≤ C ∫∫ |f^p(x+y) - f^p(x)|²/f^p(x) M(dy)σ(dx)` with `C = ‖h‖_{L¹}`.
pub fn verify_log_sobolev(h: &Harness, f: &CylindricalFunction, p: f64) -> Result<VerificationResult> {
    let head = RowHead { name: "log_sobolev", function: f.name(), anchor: LOG_SOBOLEV };
    let (lhs, li, rhs, ri) = log_sobolev_on(h, f, p, h.sigma())?;
    let c = h.log_sobolev_constant();
    let u = paired_uncertainty(&li, &ri, c, &rhs);
    let mut row = h.at_most_with(&head, lhs, rhs, c, "C = ‖h‖_{L¹(0,∞)}, closed form of the domination function", u);
    row.note = format!("p = {p}");
    Ok(row)
}

/// `Ent_σ(|f|) ≤ C c_f ∫∫ |f(x+y) - f(x)|² M(dy)σ(dx)` with `c_f = 1/inf|f|`.
pub fn verify_log_sobolev_h20(h: &Harness, f: &CylindricalFunction) -> Result<VerificationResult> {
    let head = RowHead { name: "log_sobolev_h20", function: f.name(), anchor: LOG_SOBOLEV_H20 };
    let b = f.bounds();
    let floor = if b.infimum > 0.0 {
        b.infimum
    } else if b.supremum < 0.0 {
        -b.supremum
    } else {
        return Err(invalid(format!("'{}' has no certified positive lower bound on |f|", f.name())));
    };
    let abs: Vec<f64> = values(f, h.sigma(), h).into_iter().map(f64::abs).collect();
    let lhs = entropy_of(&abs)?;
    let m = &h.jump_part().triple().m;
    let (form, rhs) = integrate_form_with_values(FormKind::Dirichlet, f, h.sigma(), m, &h.forms, h.exec())?;
    let c = h.log_sobolev_constant() / floor;
    let u = paired_uncertainty(&entropy_influence(&abs), &form, c, &rhs);
    let mut row = h.at_most_with(&head, lhs, rhs, c, "C c_f with C = ‖h‖_{L¹} and c_f = 1/inf|f|", u);
    row.note = format!("inf|f| = {floor}");
    Ok(row)
}

/// `‖f - m_σ(f)‖_{L²(σ)} ≤ √(2C) √(∫∫ |f(x+y) - f(x)|² M(dy)σ(dx))`.
pub fn verify_poincare(h: &Harness, f: &CylindricalFunction) -> Result<VerificationResult> {
    let head = RowHead { name: "poincare", function: f.name(), anchor: POINCARE };
    let v = values(f, h.sigma(), h);
    let mean = mean_of(&v)?.value;
    let sq: Vec<f64> = v.iter().map(|x| (x - mean).powi(2)).collect();
    let var = mean_of(&sq)?;
    let m = &h.jump_part().triple().m;
    let (form, dir) = integrate_form_with_values(FormKind::Dirichlet, f, h.sigma(), m, &h.forms, h.exec())?;
    let c2 = 2.0 * h.log_sobolev_constant();
    // Decide on the squared inequality, then carry the error to the square
    // roots through a - b = (a² - b²)/(a + b).
    let u_sq = paired_uncertainty(&sq, &form, c2, &dir);
    let (lhs, rhs) = (var.sqrt(), dir.sqrt());
    let c = c2.sqrt();
    let denom = lhs.value + c * rhs.value;
    let u = if denom > 0.0 { u_sq / denom } else { 0.0 };
    Ok(h.at_most_with(&head, lhs, rhs, c, "√(2C) with C = ‖h‖_{L¹}", u))
}

/// `Ent_σ(e^f) ≤ C τ² M_{2τ} m_σ(e^f)` for `Lip(f) ≤ τ`.
pub fn verify_exp_entropy(h: &Harness, f: &CylindricalFunction, tau: f64) -> Result<VerificationResult> {
    let head = RowHead { name: "exp_entropy", function: f.name(), anchor: EXP_ENTROPY };
    if !(tau >= 0.0) || f.bounds().lipschitz > tau * (1.0 + 1e-12) {
        return Err(invalid(format!("Lip('{}') = {} exceeds τ = {tau}", f.name(), f.bounds().lipschitz)));
    }
    let m = &h.jump_part().triple().m;
    let constant = if tau == 0.0 { 0.0 } else { h.log_sobolev_constant() * tau * tau * ms_of(m, 2.0 * tau)? };
    let e: Vec<f64> = values(f, h.sigma(), h).into_iter().map(f64::exp).collect();
    if e.iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergent(format!("e^f overflows for '{}'", f.name())));
    }
    let lhs = entropy_of(&e)?;
    let rhs = mean_of(&e)?;
    let u = paired_uncertainty(&entropy_influence(&e), &e, constant, &rhs);
    let mut row = h.at_most_with(
        &head,
        lhs,
        rhs,
        constant,
        "C τ² M_{2τ} with C = ‖h‖_{L¹} and M_s = ∫|y|² e^{s|y|} M(dy) by quadrature",
        u,
    );
    row.note = format!("τ = {tau}");
    Ok(row)
}

/// `c` in front of the Gaussian energy: `p²/2` from the log-Sobolev
/// inequality of `γ = N(0, Q_∞)`, which equals `p² |Λ| ‖ψ‖_{L¹} / 2` for
/// `ψ(t) = e^{Λt}`.
pub fn gaussian_constant(p: f64) -> f64 {
    0.5 * p * p
}

/// The log-Sobolev inequality for `γ*σ` when `Q ≠ 0`. With `Q = 0` every
/// field of the row equals that of [`verify_log_sobolev`] apart from the
/// name and anchor.
pub fn verify_log_sobolev_gaussian(h: &Harness, f: &CylindricalFunction, p: f64) -> Result<VerificationResult> {
    let head = RowHead { name: "log_sobolev_gaussian", function: f.name(), anchor: GAUSSIAN };
    let model = h.model();
    let q = &model.triple().q;
    let gaussian = q.iter().any(|&v| v != 0.0);
    let (samples, q_inf) = if gaussian {
        let b = model.semigroup().generator();
        if !model.semigroup().is_symmetric() || (b * q - q * b).abs().max() > 1e-12 * (b.abs().max() * q.abs().max()) {
            return Err(Error::Hypothesis("the Gaussian gradient estimate needs B symmetric and commuting with Q".into()));
        }
        let q_inf = model.evolved.gaussian_qt(f64::INFINITY)?;
        let g = sample_gaussian(&q_inf, h.n(), h.stream(super::Checker::LogSobolevGaussian, 0), h.exec())?;
        (h.sigma().add(&g)?, Some(q_inf))
    } else {
        (h.sigma().clone(), None)
    };
    let (lhs, li, form, fi) = log_sobolev_on(h, f, p, &samples)?;
    let c_big = h.log_sobolev_constant();
    let (rhs, ri) = match &q_inf {
        None => (form, fi),
        Some(q_inf) => {
            // The split-radius part of the form error carries over unchanged.
            let systematic = (form.std_error.powi(2) - mean_of(&fi)?.std_error.powi(2)).max(0.0).sqrt();
            let ratio = gaussian_constant(p) / c_big;
            let energy = h.exec().map(samples.len(), |i| {
                let x = samples.row(i);
                let g = f.gradient(x);
                f.value(x).powf(p - 2.0) * linalg::dot(&g, &linalg::mat_vec(q_inf, &g))
            });
            let ri: Vec<f64> = fi.iter().zip(&energy).map(|(a, e)| a + ratio * e).collect();
            let mc = mean_of(&ri)?;
            let rhs = Estimate { std_error: mc.std_error.hypot(systematic), method: Method::Hybrid, ..mc };
            (rhs, ri)
        }
    };
    let u = paired_uncertainty(&li, &ri, c_big, &rhs);
    let note = if gaussian { "c = p²/2 from the log-Sobolev inequality of γ = N(0, Q_∞); rhs = form + (c/C)·energy" } else { "Q = 0: reduces to the log-Sobolev check for σ" };
    let mut row = h.at_most_with(&head, lhs, rhs, c_big, "C = ‖h‖_{L¹}; the Gaussian term enters the rhs with weight c/C", u);
    row.note = format!("p = {p}; {note}");
    Ok(row)
}
