//! The `L^p` bootstrap and the transfer of moments from `M` to `σ`.

use super::{paired_uncertainty, verdict_nonnegative, Harness, RowHead, Verdict, VerificationResult};
use crate::error::{invalid, Error, Result};
use crate::estimators::{
    estimate_mean, integrate_form_with_values, mean_of, measure_moment, moment, Estimate, FormKind, Method, Region,
};
use crate::functions::{compose_scalar, CylindricalFunction, ScalarMap};
use crate::levy::LevyMeasure;

pub(crate) const LP_BOOTSTRAP: &str =
    "‖f‖_p^p ≤ c_p ∫∫ ||f|^p(x+y) - |f|^p(x)| [χ_{B_1^c}(y) + |y|^{2-p} χ_{B_1}(y)] M(dy) σ(dx), m_σ(f) = 0";
pub(crate) const MOMENT_TRANSFER: &str = "σ(p) ≤ C_1 σ(2)^{p/2} + C_2 M(p) + C_3 M(1)";

/// `c_p` of the bootstrap estimate, starting from the weak estimate
/// `‖g‖_2² ≤ c ∫∫ ||g|²(x+y) - |g|²(x)| M(dy)σ(dx)` with `c = c_sq`.
///
/// For `p ∈ (2, 4]` the chain uses Hölder on `B_1` and Jensen on `B_1^c`;
/// for `p ∈ (4, 8]` it applies the `(2, 4]` step to `|f|^{p/2}` once more.
pub fn bootstrap_constant(c_sq: f64, m: &LevyMeasure, p: f64) -> Result<(f64, String)> {
    if !(p > 2.0 && p <= 8.0) {
        return Err(invalid(format!("bootstrap exponent must lie in (2, 8], got {p}")));
    }
    let inner = measure_moment(m, 2.0, Region::Ball)?.value;
    let outer = measure_moment(m, 0.0, Region::Outside)?.value;
    if p <= 4.0 {
        let e = 0.5 * (p - 2.0);
        let a = 2f64.powf(e) * inner.powf(e);
        let b = (2.0 * outer).powf(e);
        let c = c_sq.powf(0.5 * p) * a.max(b) + c_sq;
        let note = format!(
            "c^{{p/2}} max(2^{{(p-2)/2}} (∫_{{B_1}}|y|²M)^{{(p-2)/2}}, (2M(B_1^c))^{{(p-2)/2}}) + c, c = {c_sq}"
        );
        Ok((c, note))
    } else {
        let (half, _) = bootstrap_constant(c_sq, m, 0.5 * p)?;
        let c = 2.0 * half * half * outer.max(inner) + c_sq;
        Ok((c, format!("2 c_{{p/2}}² max(M(B_1^c), ∫_{{B_1}}|y|²M) + c with c_{{p/2}} = {half}, c = {c_sq}")))
    }
}

/// `‖f‖_p^p ≤ c_p · weighted increment form` for the centred `f`.
///
/// The weak estimate the bootstrap starts from is checked on the same
/// samples first; it can fail for sign-changing functions, and then the
/// instance is out of scope.
pub fn verify_lp_bootstrap(h: &Harness, f: &CylindricalFunction, p: f64) -> Result<VerificationResult> {
    let head = RowHead { name: "lp_bootstrap", function: f.name(), anchor: LP_BOOTSTRAP };
    let m = &h.jump_part().triple().m;
    let c_sq = 2.0 * h.log_sobolev_constant();
    let (c_p, note) = bootstrap_constant(c_sq, m, p)?;
    let mean = estimate_mean(|x| f.value(x), h.sigma())?;
    let g = compose_scalar(f, ScalarMap::Affine { a: -mean.value, b: 1.0 })?.with_name(f.name());
    let (rhs_values, rhs) = integrate_form_with_values(FormKind::Weighted { p }, &g, h.sigma(), m, &h.forms, h.exec())?;
    let gv = crate::estimators::evaluate(|x| g.value(x), h.sigma(), h.exec());

    let sq: Vec<f64> = gv.iter().map(|v| v * v).collect();
    let (weak_values, weak) =
        integrate_form_with_values(FormKind::Weighted { p: 2.0 }, &g, h.sigma(), m, &h.forms, h.exec())?;
    let weak_lhs = mean_of(&sq)?;
    let d = c_sq * weak.value - weak_lhs.value;
    let premise = verdict_nonnegative(d, paired_uncertainty(&sq, &weak_values, c_sq, &weak), weak_lhs.value.max(1e-300));
    if premise == Verdict::Fail {
        return Err(Error::Hypothesis(format!(
            "the weak L² estimate fails for '{}' ({} > {c_sq}·{})",
            f.name(),
            weak_lhs.value,
            weak.value
        )));
    }

    let lp: Vec<f64> = gv.iter().map(|v| v.abs().powf(p)).collect();
    let lhs = mean_of(&lp)?;
    let u = paired_uncertainty(&lp, &rhs_values, c_p, &rhs);
    let mut row = h.at_most_with(&head, lhs, rhs, c_p, &note, u);
    row.note = format!(
        "p = {p}; centred by m_σ(f) = {:.6}; weak L² premise {}",
        mean.value,
        if premise == Verdict::Pass { "holds" } else { "undecided" }
    );
    Ok(row)
}

/// Constants of the moment-transfer bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// `ε` in the Young step.
    pub epsilon: f64,
}

/// `C_1 = 2`, `C_2 = 2cp 2^{p-2}`, `C_3 = 2c(1 + 2^{p-2}) ε^{1-p}` with
/// `ε = (2c(1 + 2^{p-2})(p - 1)M(1))^{-1}` and `c` the weak-estimate constant.
pub fn moment_transfer_constants(c: f64, p: f64, m1: f64) -> MomentConstants {
    let k = 1.0 + 2f64.powf(p - 2.0);
    let c2 = 2.0 * c * p * 2f64.powf(p - 2.0);
    if m1 == 0.0 {
        return MomentConstants { c1: 2.0, c2, c3: 0.0, epsilon: f64::INFINITY };
    }
    let epsilon = 1.0 / (2.0 * c * k * (p - 1.0) * m1);
    MomentConstants { c1: 2.0, c2, c3: 2.0 * c * k * epsilon.powf(1.0 - p), epsilon }
}

/// `σ(p) ≤ C_1 σ(2)^{p/2} + C_2 M(p) + C_3 M(1)`, where `M(q) = ∫|y|^q M(dy)`.
pub fn verify_moment_transfer(h: &Harness, p: f64) -> Result<VerificationResult> {
    let function = format!("|x|^{p}");
    let head = RowHead { name: "moment_transfer", function: &function, anchor: MOMENT_TRANSFER };
    if !(p > 2.0) {
        return Err(invalid("moment transfer needs p > 2"));
    }
    let m = &h.jump_part().triple().m;
    let whole = |q: f64| -> Result<f64> {
        if m.is_zero() {
            return Ok(0.0);
        }
        Ok(measure_moment(m, q, Region::Whole)?.value)
    };
    let m1 = whole(1.0).map_err(|e| match e {
        Error::Divergent(msg) => Error::Hypothesis(format!("M(1) is infinite: {msg}")),
        other => other,
    })?;
    let mp = whole(p)?;
    let c = 2.0 * h.log_sobolev_constant();
    let k = moment_transfer_constants(c, p, m1);
    let s2 = moment(h.sigma(), 2.0)?;
    let lhs = moment(h.sigma(), p)?;
    let base = s2.value.powf(0.5 * p);
    let rhs_value = k.c1 * base + k.c2 * mp + k.c3 * m1;
    // Delta method for σ(2)^{p/2}; the M-moments are quadrature values.
    let se = k.c1 * 0.5 * p * s2.value.powf(0.5 * p - 1.0) * s2.std_error;
    let rhs = Estimate { value: rhs_value, std_error: se, n: s2.n, method: Method::Mc };
    let note = format!(
        "C_1 = 2, C_2 = {:.6}, C_3 = {:.6} from the Young step with ε = {:.3e} and c = 2‖h‖_{{L¹}}",
        k.c2, k.c3, k.epsilon
    );
    let mut row = h.at_most(&head, lhs, rhs, 1.0, &note);
    row.note = format!("M(1) = {m1:.6}, M({p}) = {mp:.6}, σ(2) = {:.6}", s2.value);
    Ok(row)
}
