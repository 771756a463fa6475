//! Checks that involve the semigroup or the generator: the gradient
//! surrogate, invariance of `σ`, and the chain-rule identity.

use super::{Checker, Harness, RowHead, Verdict, VerificationResult, QUADRATURE_BUDGET};
use crate::error::{Error, Result};
use crate::estimators::{evaluate_many, integrate_form_with_values, mean_of, Estimate, FormKind, Method, SemigroupMc};
use crate::functions::CylindricalFunction;
use crate::levy::{Generator, MeasureRule};
use crate::linalg;

pub(crate) const SURROGATE: &str =
    "∫ |P_t f(x+y) - P_t f(x)|^p M(dy) ≤ h(t) ∫ |P_t(f(·+y) - f)(x)|^p M(dy)";
pub(crate) const INVARIANCE: &str = "∫ P_t f dσ = ∫ f dσ";
pub(crate) const GENERATOR: &str = "∫ L f dσ = 0";
pub(crate) const CHAIN: &str =
    "∫ Φ'(f) Lf dσ = ∫∫ [Φ(f(x)) - Φ(f(x+y)) + Φ'(f(x))(f(x+y) - f(x))] M(dy) σ(dx), Φ(ξ) = ξ²";

/// Batches for the jackknife of the gradient surrogate.
const BATCHES: usize = 10;

/// Jackknife of `θ = Σ_b`-based statistics: the bias-corrected value and
/// its standard error from leave-one-batch-out values.
fn jackknife(full: f64, leave_out: &[f64]) -> (f64, f64) {
    let b = leave_out.len() as f64;
    let mean = leave_out.iter().sum::<f64>() / b;
    let var = (b - 1.0) / b * leave_out.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    (b * full - (b - 1.0) * mean, var.sqrt())
}

/// Both sides at one point `x`: full values and leave-one-batch-out values.
struct SurrogateSides {
    lhs: (f64, Vec<f64>),
    rhs: (f64, Vec<f64>),
}

fn surrogate_at(
    h: &Harness,
    f: &CylindricalFunction,
    mc: &SemigroupMc,
    noise: &crate::sampling::SampleSet,
    rule: &MeasureRule,
    x: &[f64],
    p: f64,
) -> SurrogateSides {
    let core = f.core();
    let rank = f.rank();
    let n = noise.len();
    let base = mc.transport(x);
    let zs: Vec<Vec<f64>> = noise
        .rows()
        .map(|y| {
            let z: Vec<f64> = base.iter().zip(y).map(|(a, b)| a + b).collect();
            f.project(&z)
        })
        .collect();
    let f0: Vec<f64> = zs.iter().map(|z| core.value(z)).collect();
    let batch_of = |j: usize| j * BATCHES / n;
    let sg = h.jump_part().semigroup();
    let t = mc.time();
    // Per ray: coefficients for the transported (lhs) and plain (rhs) jump.
    let coefs: Vec<(Vec<f64>, Vec<f64>)> = rule
        .rays
        .iter()
        .map(|ray| {
            let moved = sg.apply(t, &ray.direction);
            (f.project(&moved), f.project(&ray.direction))
        })
        .collect();
    let nodes: Vec<(usize, f64, f64)> =
        rule.rays.iter().enumerate().flat_map(|(i, ray)| ray.nodes.iter().map(move |&(r, w)| (i, r, w))).collect();
    // Batch sums of the increments at every node, both sides.
    let sums = h.exec().map(nodes.len(), |k| {
        let (i, r, _) = nodes[k];
        let mut out = [[0.0; BATCHES]; 2];
        let mut z = vec![0.0; rank];
        for (side, coef) in [&coefs[i].0, &coefs[i].1].into_iter().enumerate() {
            for (j, zj) in zs.iter().enumerate() {
                for c in 0..rank {
                    z[c] = zj[c] + r * coef[c];
                }
                out[side][batch_of(j)] += core.value(&z) - f0[j];
            }
        }
        out
    });
    // Small jumps: the increment is r ⟨DF(z), c⟩ to leading order.
    let mut grad = vec![0.0; rank];
    let small_sums: Vec<[[f64; BATCHES]; 2]> = coefs
        .iter()
        .map(|(a, b)| {
            let mut out = [[0.0; BATCHES]; 2];
            for (j, zj) in zs.iter().enumerate() {
                core.gradient(zj, &mut grad);
                out[0][batch_of(j)] += linalg::dot(&grad, a);
                out[1][batch_of(j)] += linalg::dot(&grad, b);
            }
            out
        })
        .collect();
    let counts: Vec<f64> = (0..BATCHES).map(|b| (0..n).filter(|&j| batch_of(j) == b).count() as f64).collect();
    let small_index = (p as usize) - 2;
    // Σ_nodes w |mean|^p + Σ_rays small |mean gradient|^p, excluding batch `skip`.
    let total = |side: usize, skip: Option<usize>| -> f64 {
        let mean_of_batches = |s: &[f64; BATCHES]| {
            let (mut num, mut den) = (0.0, 0.0);
            for b in 0..BATCHES {
                if Some(b) != skip {
                    num += s[b];
                    den += counts[b];
                }
            }
            num / den
        };
        let mut acc = 0.0;
        for (k, &(_, _, w)) in nodes.iter().enumerate() {
            acc += w * mean_of_batches(&sums[k][side]).abs().powf(p);
        }
        for (i, ray) in rule.rays.iter().enumerate() {
            acc += ray.small[small_index] * mean_of_batches(&small_sums[i][side]).abs().powf(p);
        }
        acc
    };
    let side = |s: usize| (total(s, None), (0..BATCHES).map(|b| total(s, Some(b))).collect::<Vec<_>>());
    SurrogateSides { lhs: side(0), rhs: side(1) }
}

/// The pointwise gradient surrogate at `surrogate_points` draws of `σ`;
/// the row reports the worst point.
pub fn verify_gradient_surrogate(h: &Harness, f: &CylindricalFunction, t: f64, p: f64) -> Result<VerificationResult> {
    let head = RowHead { name: "gradient_surrogate", function: f.name(), anchor: SURROGATE };
    if !(t > 0.0) {
        return Err(crate::error::invalid("the gradient surrogate needs t > 0"));
    }
    if ![2.0, 3.0, 4.0].contains(&p) {
        return Err(Error::Unsupported(format!("gradient surrogate is implemented for p ∈ {{2, 3, 4}}, got {p}")));
    }
    let draws = h.settings.surrogate_draws.min(h.n()).max(BATCHES * 2);
    let mc = SemigroupMc::new(h.jump_part(), t, &h.scheme)?;
    let noise = mc.noise(draws, h.stream(Checker::GradientSurrogate, 0), h.exec())?;
    let rule = MeasureRule::new(&h.jump_part().triple().m, h.forms.delta)?;
    let ht = h.model().h(t);
    let k = h.settings.surrogate_points.min(h.n());
    let mut worst: Option<(VerificationResult, usize)> = None;
    for i in 0..k {
        let idx = i * h.n() / k;
        let s = surrogate_at(h, f, &mc, &noise, &rule, h.sigma().row(idx), p);
        let (l, lse) = jackknife(s.lhs.0, &s.lhs.1);
        let (r, rse) = jackknife(s.rhs.0, &s.rhs.1);
        let d_out: Vec<f64> = s.lhs.1.iter().zip(&s.rhs.1).map(|(a, b)| ht * b - a).collect();
        let (_, dse) = jackknife(ht * s.rhs.0 - s.lhs.0, &d_out);
        let lhs = Estimate { value: l, std_error: lse, n: draws, method: Method::Mc };
        let rhs = Estimate { value: r, std_error: rse, n: draws, method: Method::Mc };
        let u = dse.hypot(QUADRATURE_BUDGET * l.abs());
        let row = h.at_most_with(&head, lhs, rhs, ht, "h(t) = e^{-κt}, closed form of the domination function", u);
        let rank = |v: Verdict| match v {
            Verdict::Fail => 0,
            Verdict::Indeterminate => 1,
            Verdict::Pass => 2,
        };
        let replace = match &worst {
            None => true,
            Some((w, _)) => {
                (rank(row.verdict), row.margin) < (rank(w.verdict), w.margin)
                    || (rank(row.verdict) == rank(w.verdict) && row.margin.is_nan())
            }
        };
        if replace {
            worst = Some((row, idx));
        }
    }
    let (mut row, idx) = worst.expect("at least one point");
    row.note = format!(
        "t = {t}, p = {p}; worst of {k} points, x = {:?}; {draws} draws of μ_t",
        h.sigma().row(idx).iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>()
    );
    Ok(row)
}

/// `Lf` at every sample of `σ`, with the jump part of each value.
fn generator_values(h: &Harness, f: &CylindricalFunction) -> Result<(Vec<f64>, Vec<f64>)> {
    let jump = h.jump_part();
    let gen = Generator::new(jump.triple(), jump.semigroup(), f, h.forms.delta)?;
    let s = h.sigma();
    let nonlocal = if f.rank() == 1 {
        let hv = &f.basis()[0];
        let xs: Vec<f64> = s.rows().map(|x| linalg::dot(hv, x)).collect();
        evaluate_many(&xs, &|u: f64| gen.nonlocal(&[u]), h.exec())
    } else {
        h.exec().map(s.len(), |i| gen.nonlocal(&f.project(s.row(i))))
    };
    let total = h.exec().map(s.len(), |i| {
        let x = s.row(i);
        gen.local(x, &f.project(x)) + nonlocal[i]
    });
    Ok((total, nonlocal))
}

/// `∫ P_t f dσ = ∫ f dσ` with paired draws, and `∫ Lf dσ = 0`.
pub fn verify_invariance_and_generator(
    h: &Harness,
    f: &CylindricalFunction,
    t: f64,
) -> Result<(VerificationResult, VerificationResult)> {
    let mc = SemigroupMc::new(h.jump_part(), t, &h.scheme)?;
    let noise = mc.noise(h.n(), h.stream(Checker::Invariance, 0), h.exec())?;
    let s = h.sigma();
    let moved = h.exec().map(s.len(), |i| {
        let base = mc.transport(s.row(i));
        let z: Vec<f64> = base.iter().zip(noise.row(i)).map(|(a, b)| a + b).collect();
        f.value(&z)
    });
    let here = crate::estimators::evaluate(|x| f.value(x), s, h.exec());
    let diff: Vec<f64> = moved.iter().zip(&here).map(|(a, b)| a - b).collect();
    let head = RowHead { name: "invariance", function: f.name(), anchor: INVARIANCE };
    let mut a = h.identity(&head, mean_of(&moved)?, mean_of(&here)?, mean_of(&diff)?.std_error);
    a.note = format!("t = {t}; one draw of μ_t per sample");

    let (lf, nonlocal) = generator_values(h, f)?;
    let est = mean_of(&lf)?;
    let budget = QUADRATURE_BUDGET * nonlocal.iter().map(|v| v.abs()).sum::<f64>() / nonlocal.len() as f64;
    let head = RowHead { name: "generator", function: f.name(), anchor: GENERATOR };
    let b = h.identity(&head, est, Estimate::exact(0.0), est.std_error.hypot(budget));
    Ok((a, b))
}

/// The chain-rule identity with `Φ(ξ) = ξ²`:
/// `∫ 2f Lf dσ = -∫∫ |f(x+y) - f(x)|² M(dy)σ(dx)`.
pub fn verify_chain_identity(h: &Harness, f: &CylindricalFunction) -> Result<VerificationResult> {
    let head = RowHead { name: "chain_identity", function: f.name(), anchor: CHAIN };
    let (lf, nonlocal) = generator_values(h, f)?;
    let s = h.sigma();
    let fv = crate::estimators::evaluate(|x| f.value(x), s, h.exec());
    let left: Vec<f64> = fv.iter().zip(&lf).map(|(a, b)| 2.0 * a * b).collect();
    let m = &h.jump_part().triple().m;
    let (dir_values, dir) = integrate_form_with_values(FormKind::Dirichlet, f, s, m, &h.forms, h.exec())?;
    let sum: Vec<f64> = left.iter().zip(&dir_values).map(|(a, b)| a + b).collect();
    let lhs = mean_of(&left)?;
    let rhs = Estimate { value: -dir.value, ..dir };
    let jump_scale = fv.iter().zip(&nonlocal).map(|(a, b)| (2.0 * a * b).abs()).sum::<f64>() / fv.len() as f64;
    let systematic = (dir.std_error.powi(2) - mean_of(&dir_values)?.std_error.powi(2)).max(0.0).sqrt();
    let u = mean_of(&sum)?.std_error.hypot(systematic).hypot(QUADRATURE_BUDGET * (jump_scale + dir.value.abs()));
    Ok(h.identity(&head, lhs, rhs, u))
}
