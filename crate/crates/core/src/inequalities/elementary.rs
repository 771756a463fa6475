//! The scalar inequalities used inside the proofs, checked on random
//! arguments.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Checker, Harness, RowHead, Verdict, VerificationResult};
use crate::estimators::Estimate;
use crate::rng::RandomStream;

/// Absolute slack per unit of magnitude of the terms involved.
pub const SLACK: f64 = 1e-12;

/// `(r-s)²/s - [r log r - r - s log s + s - (r-s) log s]`, nonnegative for
/// `r, s > 0` by `log t ≤ t - 1`, and the size of the terms.
pub fn entropy_lemma_gap(r: f64, s: f64) -> (f64, f64) {
    let lhs = r * r.ln() - r - s * s.ln() + s - (r - s) * s.ln();
    let rhs = (r - s).powi(2) / s;
    (rhs - lhs, 1.0 + (r * r.ln()).abs() + (s * s.ln()).abs() + r + s + rhs)
}

/// `||a|^p - |b|^p| - ||a| - |b||^p`, nonnegative for `p ≥ 1`.
pub fn power_lemma_gap(a: f64, b: f64, p: f64) -> (f64, f64) {
    let (a, b) = (a.abs(), b.abs());
    let big = (a.powf(p) - b.powf(p)).abs();
    (big - (a - b).abs().powf(p), 1.0 + a.powf(p) + b.powf(p))
}

/// `(e^α - 1)x - (e^{αx} - 1)`, nonnegative for `x ∈ [0, 1]`, `α > 0`.
pub fn exp_chord_gap(alpha: f64, x: f64) -> (f64, f64) {
    let chord = alpha.exp_m1() * x;
    (chord - (alpha * x).exp_m1(), 1.0 + alpha.exp())
}

/// Outcome of one lemma over many random arguments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub name: String,
    pub statement: String,
    pub trials: usize,
    pub violations: usize,
    /// Most negative `gap / magnitude` seen.
    pub worst: f64,
}

fn run(name: &str, statement: &str, trials: usize, mut gap: impl FnMut() -> (f64, f64)) -> LemmaReport {
    let (mut violations, mut worst) = (0, f64::INFINITY);
    for _ in 0..trials {
        let (g, size) = gap();
        let scaled = g / size;
        worst = worst.min(scaled);
        if !(scaled >= -SLACK) {
            violations += 1;
        }
    }
    LemmaReport { name: name.into(), statement: statement.into(), trials, violations, worst }
}

fn log_uniform<R: Rng>(rng: &mut R) -> f64 {
    10f64.powf(rng.random_range(-3.0..3.0))
}

/// The three lemmas on `trials` random arguments each.
pub fn elementary_lemmas(trials: usize, stream: RandomStream) -> Vec<LemmaReport> {
    let mut rng = stream.rng();
    let mut out = Vec::with_capacity(3);
    {
        let rng = &mut rng;
        out.push(run(
            "entropy_lemma",
            "r log r - r - s log s + s - (r-s) log s ≤ (r-s)²/s for r, s > 0",
            trials,
            || {
                let r = log_uniform(rng);
                // Every tenth pair has r = s, the equality case.
                let s = if rng.random_range(0..10) == 0 { r } else { log_uniform(rng) };
                entropy_lemma_gap(r, s)
            },
        ));
    }
    {
        let rng = &mut rng;
        out.push(run("power_lemma", "||a| - |b||^p ≤ ||a|^p - |b|^p| for p ≥ 1", trials, || {
            let a = rng.random_range(-10.0..10.0);
            let b = if rng.random_range(0..10) == 0 { a } else { rng.random_range(-10.0..10.0) };
            power_lemma_gap(a, b, rng.random_range(1.0..6.0))
        }));
    }
    {
        let rng = &mut rng;
        out.push(run("exp_chord", "e^{αx} - 1 ≤ (e^α - 1)x for x ∈ (0, 1), α > 0", trials, || {
            let alpha = rng.random_range(1e-6..20.0);
            let x = if rng.random_range(0..10) == 0 { 1.0 - 1e-12 } else { rng.random_range(0.0..1.0) };
            exp_chord_gap(alpha, x)
        }));
    }
    out
}

/// The lemmas as rows: `lhs` is the violation count, `rhs` zero.
pub fn elementary_lemma_suite(h: &Harness, trials: usize) -> Vec<VerificationResult> {
    elementary_lemmas(trials, h.stream(Checker::Elementary, 0))
        .into_iter()
        .map(|rep| {
            let head = RowHead { name: "elementary", function: &rep.name, anchor: &rep.statement };
            let mut r = h.at_most_with(
                &head,
                Estimate::exact(rep.violations as f64),
                Estimate::exact(0.0),
                1.0,
                "violation count, slack 1e-12 per unit magnitude",
                0.0,
            );
            r.n = rep.trials;
            r.verdict = if rep.violations == 0 { Verdict::Pass } else { Verdict::Fail };
            r.note = format!("{} trials, worst scaled gap {:.3e}", rep.trials, rep.worst);
            r
        })
        .collect()
}
