//! Both sides of each inequality, the constant in front of the right-hand
//! side, and a verdict that accounts for Monte Carlo and quadrature error.
//!
//! A [`Harness`] owns one model, one seed and one set of invariant draws; each
//! checker reads the draws it needs and takes its own random substreams.

mod bootstrap;
mod dynamics;
mod elementary;
mod entropy;
mod tails;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use bootstrap::{bootstrap_constant, moment_transfer_constants, verify_lp_bootstrap, verify_moment_transfer, MomentConstants};
pub use dynamics::{verify_chain_identity, verify_gradient_surrogate, verify_invariance_and_generator};
pub use elementary::{
    elementary_lemma_suite, elementary_lemmas, entropy_lemma_gap, exp_chord_gap, power_lemma_gap, LemmaReport, SLACK,
};
pub use entropy::{
    gaussian_constant, verify_exp_entropy, verify_log_sobolev, verify_log_sobolev_gaussian, verify_log_sobolev_h20,
    verify_poincare,
};
pub use tails::{
    fit_tail_slope, smoothed_norm, verify_exp_integrability, verify_tail_bound, verify_tail_slope, PsiTable,
};

use crate::error::{invalid, Error, Result};
use crate::estimators::{Estimate, FormOptions, Method};
use crate::exec::Executor;
use crate::functions::{suite, CylindricalFunction};
use crate::levy::{EvolvedTriple, LevyTriple};
use crate::models::ModelSpec;
use crate::rng::RandomStream;
use crate::sampling::{sample_invariant, InvariantMethod, JumpScheme, SampleSet};

/// Relative error budget for values computed with the measure rule; the
/// brute-force oracle comparison stays well inside it.
pub const QUADRATURE_BUDGET: f64 = 1e-3;

/// Standard errors on either side of zero inside which no verdict is given.
pub const BAND: f64 = 3.0;

/// Standard errors beyond which an identity is declared violated.
pub const IDENTITY_FAIL: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Indeterminate,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Indeterminate => "indeterminate",
        }
    }
}

/// One checked instance of an inequality: `lhs ≤ constant · rhs`, or an
/// identity `lhs = rhs` when `constant` is one and the anchor says so.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationResult {
    pub name: String,
    pub model: String,
    pub function: String,
    pub seed: u64,
    #[serde(rename = "N")]
    pub n: usize,
    pub lhs: Estimate,
    pub rhs: Estimate,
    pub constant: f64,
    /// Where the constant comes from.
    pub constant_note: String,
    /// `(constant · rhs - lhs) / scale`.
    pub margin: f64,
    pub verdict: Verdict,
    /// The statement being checked.
    pub anchor: String,
    pub note: String,
}

/// `sqrt(se² + budget²)` with the quadrature budget for rule-based values.
pub fn uncertainty(e: &Estimate) -> f64 {
    match e.method {
        Method::Hybrid => e.std_error.hypot(QUADRATURE_BUDGET * e.value.abs()),
        _ => e.std_error,
    }
}

/// Verdict on `d ≥ 0` given its uncertainty `u`.
pub fn verdict_nonnegative(d: f64, u: f64, scale: f64) -> Verdict {
    if !d.is_finite() || !u.is_finite() {
        return Verdict::Indeterminate;
    }
    // Rounding-level uncertainties count as exact.
    if u <= 1e-12 * scale {
        return if d >= -1e-12 * scale { Verdict::Pass } else { Verdict::Fail };
    }
    if d > BAND * u {
        Verdict::Pass
    } else if d < -BAND * u {
        Verdict::Fail
    } else {
        Verdict::Indeterminate
    }
}

/// Verdict on `d = 0` given its uncertainty `u`.
pub fn verdict_zero(d: f64, u: f64, scale: f64) -> Verdict {
    if !d.is_finite() || !u.is_finite() {
        return Verdict::Indeterminate;
    }
    let a = d.abs();
    if a <= BAND * u || a <= 1e-12 * scale {
        Verdict::Pass
    } else if a > IDENTITY_FAIL * u {
        Verdict::Fail
    } else {
        Verdict::Indeterminate
    }
}

fn scale_of(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s > 0.0 && s.is_finite() {
        s
    } else {
        1.0
    }
}

/// Influence values of `Ent(g) = E[g log g] - E[g] log E[g]`: their sample
/// mean has the same first-order fluctuation as the entropy estimate.
pub(crate) fn entropy_influence(values: &[f64]) -> Vec<f64> {
    let m = values.iter().sum::<f64>() / values.len() as f64;
    let c = m.ln() + 1.0;
    values.iter().map(|&g| if g > 0.0 { g * g.ln() - c * g } else { -c * g }).collect()
}

/// Uncertainty of `c · mean(r) - mean(l)` for values taken on the same
/// samples, plus whatever part of `rhs.std_error` is not sampling error
/// and the quadrature budget when `rhs` is rule-based.
pub(crate) fn paired_uncertainty(l: &[f64], r: &[f64], c: f64, rhs: &Estimate) -> f64 {
    let n = l.len() as f64;
    let diff: Vec<f64> = l.iter().zip(r).map(|(a, b)| c * b - a).collect();
    let se_of = |v: &[f64]| {
        if v.len() < 2 {
            return 0.0;
        }
        let m = v.iter().sum::<f64>() / n;
        (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
    };
    let systematic = (rhs.std_error.powi(2) - se_of(r).powi(2)).max(0.0).sqrt();
    let budget = if rhs.method == Method::Hybrid { QUADRATURE_BUDGET * rhs.value.abs() } else { 0.0 };
    se_of(&diff).hypot(c.abs() * systematic.hypot(budget))
}

/// Shared fields of the rows produced by one checker call.
#[derive(Debug, Clone)]
pub(crate) struct RowHead<'a> {
    pub name: &'a str,
    pub function: &'a str,
    pub anchor: &'a str,
}

/// Draws, options and bookkeeping shared by all checkers on one model.
pub struct Harness<'a> {
    model: &'a ModelSpec,
    jump: EvolvedTriple,
    sigma: SampleSet,
    seed: u64,
    exec: &'a Executor,
    pub scheme: JumpScheme,
    pub forms: FormOptions,
    pub settings: CheckSettings,
}

impl<'a> Harness<'a> {
    /// Draws `n` samples of `σ`, the invariant measure of the jump part.
    pub fn new(model: &'a ModelSpec, n: usize, seed: u64, exec: &'a Executor) -> Result<Self> {
        Self::with_settings(model, n, seed, exec, JumpScheme::default(), CheckSettings::default())
    }

    pub fn with_settings(
        model: &'a ModelSpec,
        n: usize,
        seed: u64,
        exec: &'a Executor,
        scheme: JumpScheme,
        settings: CheckSettings,
    ) -> Result<Self> {
        if n < 2 {
            return Err(invalid("verification needs at least two samples"));
        }
        scheme.validate()?;
        settings.validate()?;
        let t = model.triple();
        let d = t.dimension();
        let pure = LevyTriple::new(t.b.clone(), nalgebra::DMatrix::zeros(d, d), t.m.clone())?;
        let jump = EvolvedTriple::new(pure, model.semigroup().clone())?;
        let sigma = sample_invariant(n, &jump, &scheme, RandomStream::new(seed, 0), exec, InvariantMethod::Direct)?;
        Ok(Self { model, jump, sigma, seed, exec, scheme, forms: FormOptions::default(), settings })
    }

    pub fn model(&self) -> &ModelSpec {
        self.model
    }

    /// The model without its Gaussian part; `σ` is its invariant measure.
    pub fn jump_part(&self) -> &EvolvedTriple {
        &self.jump
    }

    pub fn sigma(&self) -> &SampleSet {
        &self.sigma
    }

    pub fn n(&self) -> usize {
        self.sigma.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn exec(&self) -> &Executor {
        self.exec
    }

    /// `C = ‖h‖_{L¹}`.
    pub fn log_sobolev_constant(&self) -> f64 {
        self.model.h_l1()
    }

    /// A stream private to `checker`, independent of the `σ` draws.
    pub fn stream(&self, checker: Checker, k: u64) -> RandomStream {
        RandomStream::new(self.seed, 1 + 1000 * checker.index() as u64 + k)
    }

    fn row(&self, head: &RowHead, lhs: Estimate, rhs: Estimate, constant: f64, constant_note: &str) -> VerificationResult {
        VerificationResult {
            name: head.name.to_string(),
            model: self.model.name.clone(),
            function: head.function.to_string(),
            seed: self.seed,
            n: self.n(),
            lhs,
            rhs,
            constant,
            constant_note: constant_note.to_string(),
            margin: f64::NAN,
            verdict: Verdict::Indeterminate,
            anchor: head.anchor.to_string(),
            note: String::new(),
        }
    }

    /// `lhs ≤ constant · rhs`.
    pub(crate) fn at_most(
        &self,
        head: &RowHead,
        lhs: Estimate,
        rhs: Estimate,
        constant: f64,
        constant_note: &str,
    ) -> VerificationResult {
        let u = uncertainty(&lhs).hypot(constant.abs() * uncertainty(&rhs));
        self.at_most_with(head, lhs, rhs, constant, constant_note, u)
    }

    /// As [`at_most`](Self::at_most) with a given uncertainty of the margin,
    /// for paired estimates whose errors are correlated.
    pub(crate) fn at_most_with(
        &self,
        head: &RowHead,
        lhs: Estimate,
        rhs: Estimate,
        constant: f64,
        constant_note: &str,
        u: f64,
    ) -> VerificationResult {
        let d = constant * rhs.value - lhs.value;
        let scale = scale_of(lhs.value, constant * rhs.value);
        let mut r = self.row(head, lhs, rhs, constant, constant_note);
        r.margin = d / scale;
        r.verdict = verdict_nonnegative(d, u, scale);
        r
    }

    /// `lhs = rhs` with the uncertainty `u` of the difference.
    pub(crate) fn identity(&self, head: &RowHead, lhs: Estimate, rhs: Estimate, u: f64) -> VerificationResult {
        let d = rhs.value - lhs.value;
        let scale = scale_of(lhs.value, rhs.value);
        let mut r = self.row(head, lhs, rhs, 1.0, "identity");
        r.margin = d / scale;
        r.verdict = verdict_zero(d, u, scale);
        r
    }

    /// A row whose hypotheses fail or whose sides are infinite.
    pub(crate) fn not_applicable(&self, head: &RowHead, reason: impl Into<String>) -> VerificationResult {
        let nan = Estimate { value: f64::NAN, std_error: f64::NAN, n: 0, method: Method::Quadrature };
        let mut r = self.row(head, nan, nan, f64::NAN, "not assembled");
        r.note = reason.into();
        r
    }

    /// Members of the named suite on this model's space.
    pub fn suite(&self, name: &str) -> Result<Vec<CylindricalFunction>> {
        Ok(suite(name, self.model.dimension())?.functions)
    }

    /// Runs `checkers` in order and collects their rows.
    pub fn run(&self, checkers: &[Checker]) -> Result<Vec<VerificationResult>> {
        let mut out = Vec::new();
        for &c in checkers {
            out.extend(self.run_one(c)?);
        }
        Ok(out)
    }

    fn run_one(&self, checker: Checker) -> Result<Vec<VerificationResult>> {
        let s = &self.settings;
        // Out-of-scope instances become indeterminate rows.
        let each = |suite: &str, f: &dyn Fn(&CylindricalFunction) -> Result<VerificationResult>| -> Result<Vec<_>> {
            let mut rows = Vec::new();
            for g in self.suite(suite)? {
                let head = RowHead { name: checker.name(), function: g.name(), anchor: checker.anchor() };
                rows.push(or_not_applicable(self, &head, f(&g))?);
            }
            Ok(rows)
        };
        let single = |r: Result<VerificationResult>, function: &str| -> Result<Vec<VerificationResult>> {
            let head = RowHead { name: checker.name(), function, anchor: checker.anchor() };
            Ok(vec![or_not_applicable(self, &head, r)?])
        };
        match checker {
            Checker::LogSobolev | Checker::LogSobolevGaussian => {
                let mut rows = Vec::new();
                for &p in &s.log_sobolev_p {
                    rows.extend(each("positive", &|f| {
                        if checker == Checker::LogSobolev {
                            verify_log_sobolev(self, f, p)
                        } else {
                            verify_log_sobolev_gaussian(self, f, p)
                        }
                    })?);
                }
                Ok(rows)
            }
            Checker::LogSobolevH20 => each("positive", &|f| verify_log_sobolev_h20(self, f)),
            Checker::Poincare => each("centred", &|f| verify_poincare(self, f)),
            Checker::LpBootstrap => each("centred", &|f| verify_lp_bootstrap(self, f, s.lp_p)),
            Checker::MomentTransfer => single(verify_moment_transfer(self, s.moment_p), &format!("|x|^{}", s.moment_p)),
            Checker::ExpEntropy => each("lipschitz", &|f| verify_exp_entropy(self, f, f.bounds().lipschitz)),
            Checker::GradientSurrogate => {
                each("centred", &|f| verify_gradient_surrogate(self, f, s.surrogate_t, s.surrogate_p))
            }
            Checker::Invariance => {
                let mut rows = Vec::new();
                for f in self.suite("centred")? {
                    let (a, b) = verify_invariance_and_generator(self, &f, s.invariance_t)?;
                    rows.push(a);
                    rows.push(b);
                }
                Ok(rows)
            }
            Checker::ChainIdentity => each("centred", &|f| verify_chain_identity(self, f)),
            Checker::TailBound | Checker::ExpIntegrability => {
                let g = match smoothed_norm(self.model.dimension()) {
                    Ok(g) => g,
                    Err(e) => return single(Err(e), "soft_abs"),
                };
                if checker == Checker::TailBound {
                    verify_tail_bound(self, &g)
                } else {
                    verify_exp_integrability(self, &g, s.exp_c0)
                }
            }
            Checker::TailSlope => single(verify_tail_slope(self), "|x|"),
            Checker::Elementary => Ok(elementary_lemma_suite(self, s.elementary_trials)),
        }
    }
}

/// Converts the errors that mean "this instance is out of scope" into a
/// row; everything else propagates.
pub(crate) fn or_not_applicable(
    h: &Harness,
    head: &RowHead,
    r: Result<VerificationResult>,
) -> Result<VerificationResult> {
    match r {
        Err(e @ (Error::Divergent(_) | Error::Hypothesis(_) | Error::Unsupported(_))) => {
            Ok(h.not_applicable(head, e.to_string()))
        }
        other => other,
    }
}

/// Tunable parameters of the checkers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckSettings {
    /// Exponents for the log-Sobolev checks.
    pub log_sobolev_p: Vec<f64>,
    /// Exponent of the bootstrap `L^p` estimate.
    pub lp_p: f64,
    /// Moment order in the moment-transfer bound.
    pub moment_p: f64,
    pub surrogate_t: f64,
    pub surrogate_p: f64,
    /// Points `x` at which the gradient surrogate is checked.
    pub surrogate_points: usize,
    /// Draws of `μ_t` per point.
    pub surrogate_draws: usize,
    pub invariance_t: f64,
    /// Draws of `σ` used by the tail checks.
    pub tail_samples: usize,
    /// Largest `c` tried in the exponential integrability check.
    pub exp_c0: f64,
    pub elementary_trials: usize,
}

impl Default for CheckSettings {
    fn default() -> Self {
        Self {
            log_sobolev_p: vec![1.0, 2.0],
            lp_p: 3.0,
            moment_p: 3.0,
            surrogate_t: 1.0,
            surrogate_p: 2.0,
            surrogate_points: 5,
            surrogate_draws: 10_000,
            invariance_t: 1.0,
            tail_samples: 1_000_000,
            exp_c0: 0.1,
            elementary_trials: 100_000,
        }
    }
}

impl CheckSettings {
    pub fn validate(&self) -> Result<()> {
        if self.log_sobolev_p.iter().any(|&p| !(p >= 1.0)) {
            return Err(invalid("log-Sobolev exponents must be at least 1"));
        }
        if !(self.lp_p > 2.0 && self.lp_p <= 8.0) {
            return Err(invalid("lp_p must lie in (2, 8]"));
        }
        if !(self.moment_p > 2.0) {
            return Err(invalid("moment_p must exceed 2"));
        }
        if !(self.surrogate_t > 0.0 && self.invariance_t > 0.0) {
            return Err(invalid("times must be positive"));
        }
        if self.surrogate_points == 0 || self.surrogate_draws < 20 || self.tail_samples < 100 {
            return Err(invalid("sample counts are too small"));
        }
        if !(self.exp_c0 > 0.0) {
            return Err(invalid("exp_c0 must be positive"));
        }
        Ok(())
    }
}

/// The checkers, addressable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Checker {
    LogSobolev,
    LogSobolevH20,
    Poincare,
    LpBootstrap,
    MomentTransfer,
    ExpEntropy,
    GradientSurrogate,
    Invariance,
    ChainIdentity,
    LogSobolevGaussian,
    TailBound,
    ExpIntegrability,
    TailSlope,
    Elementary,
}

impl Checker {
    pub const ALL: [Checker; 14] = [
        Checker::LogSobolev,
        Checker::LogSobolevH20,
        Checker::Poincare,
        Checker::LpBootstrap,
        Checker::MomentTransfer,
        Checker::ExpEntropy,
        Checker::GradientSurrogate,
        Checker::Invariance,
        Checker::ChainIdentity,
        Checker::LogSobolevGaussian,
        Checker::TailBound,
        Checker::ExpIntegrability,
        Checker::TailSlope,
        Checker::Elementary,
    ];

    /// The checkers backed by a theorem with explicit constants.
    pub const THEOREMS: [Checker; 8] = [
        Checker::LogSobolev,
        Checker::Poincare,
        Checker::ExpEntropy,
        Checker::GradientSurrogate,
        Checker::Invariance,
        Checker::ChainIdentity,
        Checker::LpBootstrap,
        Checker::MomentTransfer,
    ];

    fn index(self) -> usize {
        Self::ALL.iter().position(|&c| c == self).expect("listed")
    }

    pub fn name(self) -> &'static str {
        match self {
            Checker::LogSobolev => "log_sobolev",
            Checker::LogSobolevH20 => "log_sobolev_h20",
            Checker::Poincare => "poincare",
            Checker::LpBootstrap => "lp_bootstrap",
            Checker::MomentTransfer => "moment_transfer",
            Checker::ExpEntropy => "exp_entropy",
            Checker::GradientSurrogate => "gradient_surrogate",
            Checker::Invariance => "invariance",
            Checker::ChainIdentity => "chain_identity",
            Checker::LogSobolevGaussian => "log_sobolev_gaussian",
            Checker::TailBound => "tail_bound",
            Checker::ExpIntegrability => "exp_integrability",
            Checker::TailSlope => "tail_slope",
            Checker::Elementary => "elementary",
        }
    }

    /// The statement a checker's rows refer to.
    pub fn anchor(self) -> &'static str {
        match self {
            Checker::LogSobolev => entropy::LOG_SOBOLEV,
            Checker::LogSobolevH20 => entropy::LOG_SOBOLEV_H20,
            Checker::Poincare => entropy::POINCARE,
            Checker::LpBootstrap => bootstrap::LP_BOOTSTRAP,
            Checker::MomentTransfer => bootstrap::MOMENT_TRANSFER,
            Checker::ExpEntropy => entropy::EXP_ENTROPY,
            Checker::GradientSurrogate => dynamics::SURROGATE,
            Checker::Invariance => dynamics::INVARIANCE,
            Checker::ChainIdentity => dynamics::CHAIN,
            Checker::LogSobolevGaussian => entropy::GAUSSIAN,
            Checker::TailBound => tails::TAIL_GAUSSIAN,
            Checker::ExpIntegrability => tails::EXP_INTEGRABILITY,
            Checker::TailSlope => tails::TAIL_SLOPE,
            Checker::Elementary => "elementary inequalities used in the proofs",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL.iter().copied().find(|c| c.name() == name).ok_or_else(|| {
            let known: Vec<_> = Self::ALL.iter().map(|c| c.name()).collect();
            invalid(format!("unknown checker '{name}' (known: {})", known.join(", ")))
        })
    }
}

/// CSV column names of [`write_csv`].
pub const CSV_HEADER: [&str; 15] = [
    "name",
    "model",
    "function",
    "seed",
    "N",
    "lhs",
    "lhs_se",
    "rhs",
    "rhs_se",
    "constant",
    "margin",
    "verdict",
    "anchor",
    "constant_note",
    "note",
];

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One row per result.
pub fn write_csv<W: Write>(rows: &[VerificationResult], mut out: W) -> Result<()> {
    writeln!(out, "{}", CSV_HEADER.join(","))?;
    for r in rows {
        let fields = [
            r.name.clone(),
            r.model.clone(),
            r.function.clone(),
            r.seed.to_string(),
            r.n.to_string(),
            r.lhs.value.to_string(),
            r.lhs.std_error.to_string(),
            r.rhs.value.to_string(),
            r.rhs.std_error.to_string(),
            r.constant.to_string(),
            r.margin.to_string(),
            r.verdict.as_str().to_string(),
            r.anchor.clone(),
            r.constant_note.clone(),
            r.note.clone(),
        ];
        let line: Vec<String> = fields.iter().map(|f| csv_field(f)).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

/// The rows as a JSON array.
pub fn write_json<W: Write>(rows: &[VerificationResult], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    writeln!(out)?;
    Ok(())
}
