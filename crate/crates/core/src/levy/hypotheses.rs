//! Executable checks of the standing hypotheses on `[b, Q, M]` and `T_t`.

use serde::Serialize;

use super::evolved::EvolvedTriple;
use crate::error::Result;
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClauseStatus {
    Pass,
    Fail,
    /// No criterion is available for this input; not a failure.
    NotVerified,
}

/// One clause of a hypothesis.
#[derive(Debug, Clone, Serialize)]
pub struct Clause {
    pub name: &'static str,
    pub status: ClauseStatus,
    pub value: f64,
    pub note: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct HypothesisReport {
    pub clauses: Vec<Clause>,
}

impl HypothesisReport {
    /// No clause failed.
    pub fn all_pass(&self) -> bool {
        self.clauses.iter().all(|c| c.status != ClauseStatus::Fail)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.clauses.iter().filter(|c| c.status == ClauseStatus::Fail).map(|c| c.name).collect()
    }

    pub fn get(&self, name: &str) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.name == name)
    }

    pub fn push(&mut self, clause: Clause) {
        self.clauses.push(clause);
    }
}

fn clause(name: &'static str, ok: bool, value: f64, note: impl Into<String>) -> Clause {
    Clause { name, status: if ok { ClauseStatus::Pass } else { ClauseStatus::Fail }, value, note: note.into() }
}

/// Runs every clause; failures are verdicts, never errors.
pub fn check_hypotheses(evolved: &EvolvedTriple) -> HypothesisReport {
    let mut report = HypothesisReport::default();
    let m = &evolved.triple().m;
    let sg = evolved.semigroup();

    let first = m.moment_outside_unit(1.0);
    report.push(clause(
        "first_moment_outside_unit",
        first.is_finite(),
        first,
        "∫_{|y|>1} |y| M(dy)",
    ));

    report.push(if sg.is_symmetric() {
        clause("adjoint_eigenbasis", true, 0.0, "B symmetric: orthonormal eigenbasis of B^*")
    } else {
        Clause {
            name: "adjoint_eigenbasis",
            status: ClauseStatus::NotVerified,
            value: f64::NAN,
            note: "B not symmetric: eigenbasis of B^* not verified".into(),
        }
    });

    let abscissa = sg.spectral_abscissa();
    let stable = abscissa < 0.0;
    report.push(clause(
        "exponential_stability",
        stable,
        abscissa,
        "spectral abscissa of B must be negative",
    ));

    report.push(drift_clause(evolved, stable));

    let small = if stable { evolved.integrated_small_jumps() } else { Ok(f64::INFINITY) };
    report.push(match small {
        Ok(v) => clause("integrated_small_jumps", v.is_finite(), v, "∫_0^∞ ∫ (1 ∧ |T_s y|²) M(dy) ds"),
        Err(e) => clause("integrated_small_jumps", false, f64::INFINITY, e.to_string()),
    });
    report
}

/// `b_t` is Cauchy along `t_k = 2^k / |ω|` up to the integration horizon.
fn drift_clause(evolved: &EvolvedTriple, stable: bool) -> Clause {
    const NAME: &str = "drift_convergence";
    if !stable {
        return clause(NAME, false, f64::INFINITY, "b_t has no limit without exponential stability");
    }
    let run = || -> Result<(f64, f64)> {
        let omega = evolved.semigroup().growth_bound().omega.abs();
        let horizon = evolved.integration_horizon()?;
        let mut t = 1.0 / omega;
        let mut prev = evolved.drift_bt(t)?;
        let mut last_step = f64::INFINITY;
        while t < horizon {
            t = (2.0 * t).min(horizon);
            let next = evolved.drift_bt(t)?;
            let diff: Vec<f64> = next.iter().zip(&prev).map(|(a, b)| a - b).collect();
            last_step = linalg::norm(&diff);
            prev = next;
        }
        Ok((last_step, linalg::norm(&prev)))
    };
    match run() {
        Ok((step, size)) => clause(
            NAME,
            step <= 1e-8 * (1.0 + size),
            step,
            format!("last increment of b_t on a doubling grid; |b_∞| = {size:.6e}"),
        ),
        Err(e) => clause(NAME, false, f64::NAN, e.to_string()),
    }
}

/// Result of a domination check `h(t) M - M∘T_t^{-1} ≥ 0`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Domination {
    pub pass: bool,
    /// Minimum of `h(t) m(y) - m_t(y)` over the grid.
    pub worst_margin: f64,
    /// Maximum of `h(t) m(y)`, the scale the margin is judged against.
    pub scale: f64,
}

/// Densities of `M` and `M∘T_t^{-1}` at `y`. Measures without a Lebesgue
/// density are compared ray by ray at radius `|y|`, which needs every ray to
/// be invariant under the flow.
fn density_pairs(evolved: &EvolvedTriple, t: f64, y: &[f64]) -> Option<Vec<(f64, f64)>> {
    let m = &evolved.triple().m;
    let sg = evolved.semigroup();
    if let Some(base) = m.density(y) {
        let pre = sg.apply(-t, y);
        let pushed = m.density(&pre)? / sg.det(t);
        return Some(vec![(base, pushed)]);
    }
    let rates = evolved.ray_rates()?;
    let r = linalg::norm(y);
    Some(
        m.rays()
            .iter()
            .zip(rates)
            .map(|(ray, kappa)| {
                let g = (kappa * t).exp();
                (ray.weight * ray.k(r), ray.weight * g * ray.k(r * g))
            })
            .collect(),
    )
}

/// Evaluates `h(t) m(y) - m_{M∘T_t^{-1}}(y)` on `grid`.
pub fn check_domination(evolved: &EvolvedTriple, h: &dyn Fn(f64) -> f64, t: f64, grid: &[Vec<f64>]) -> Domination {
    let ht = h(t);
    let mut worst = f64::INFINITY;
    let mut scale: f64 = 0.0;
    for y in grid {
        let Some(pairs) = density_pairs(evolved, t, y) else {
            return Domination { pass: false, worst_margin: f64::NAN, scale: f64::NAN };
        };
        for (base, pushed) in pairs {
            worst = worst.min(ht * base - pushed);
            scale = scale.max(ht * base).max(pushed);
        }
    }
    let pass = worst.is_finite() && worst >= -1e-10 * scale;
    Domination { pass, worst_margin: worst, scale }
}

/// Smallest admissible `h(t) = sup_y m_t(y)/m(y)` at each time, and the
/// largest rate `a` with `h(t) ≤ e^{-a t}` on the sampled times.
#[derive(Debug, Clone, Serialize)]
pub struct DominationFit {
    pub times: Vec<f64>,
    pub h_min: Vec<f64>,
    pub rate: f64,
}

pub fn domination_search(evolved: &EvolvedTriple, times: &[f64], grid: &[Vec<f64>]) -> Option<DominationFit> {
    let mut h_min = Vec::with_capacity(times.len());
    for &t in times {
        let mut best: f64 = 0.0;
        for y in grid {
            for (base, pushed) in density_pairs(evolved, t, y)? {
                if base > 0.0 {
                    best = best.max(pushed / base);
                }
            }
        }
        h_min.push(best);
    }
    let rate = times.iter().zip(&h_min).map(|(t, h)| -h.ln() / t).fold(f64::INFINITY, f64::min);
    Some(DominationFit { times: times.to_vec(), h_min, rate })
}

/// Symmetric logarithmic grid `±[lo, hi]` along `direction`.
pub fn radial_grid(direction: &[f64], lo: f64, hi: f64, points: usize) -> Vec<Vec<f64>> {
    let n = linalg::norm(direction);
    let mut grid = Vec::with_capacity(2 * points);
    for i in 0..points {
        let r = lo * (hi / lo).powf(i as f64 / (points - 1).max(1) as f64);
        for sign in [1.0, -1.0] {
            grid.push(direction.iter().map(|u| sign * r * u / n).collect());
        }
    }
    grid
}
