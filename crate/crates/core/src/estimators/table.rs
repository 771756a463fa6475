//! Interpolation tables for smooth functions of one variable.
//!
//! Inner integrals of the forms depend on a sample only through `ξ = ⟨h, x⟩`
//! when the test function has rank one. Tabulating them on a uniform grid
//! turns the outer Monte Carlo loop into interpolations; every table is
//! validated against exact evaluations before it is used.

use crate::exec::Executor;

/// Values of `f` on a uniform grid, read back by four-point Lagrange
/// interpolation.
#[derive(Debug, Clone)]
pub struct Tabulated {
    lo: f64,
    hi: f64,
    step: f64,
    values: Vec<f64>,
}

impl Tabulated {
    pub fn build<F>(lo: f64, hi: f64, points: usize, f: &F, exec: &Executor) -> Self
    where
        F: Fn(f64) -> f64 + Sync,
    {
        let points = points.max(4);
        let step = (hi - lo) / (points - 1) as f64;
        let values = exec.map(points, |i| f(lo + step * i as f64));
        Self { lo, hi, step, values }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.values.len();
        let u = (x - self.lo) / self.step;
        let i = (u.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
        let t = u - i as f64;
        // Nodes at 0, 1, 2, 3 relative to i.
        let w0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
        let w1 = t * (t - 2.0) * (t - 3.0) / 2.0;
        let w2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
        let w3 = t * (t - 1.0) * (t - 2.0) / 6.0;
        w0 * self.values[i] + w1 * self.values[i + 1] + w2 * self.values[i + 2] + w3 * self.values[i + 3]
    }

    /// Largest scaled deviation from `f` at `probes` cell midpoints.
    fn check<F>(&self, f: &F, probes: usize, exec: &Executor) -> f64
    where
        F: Fn(f64) -> f64 + Sync,
    {
        let n = self.values.len() - 1;
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        let errs = exec.map(probes, |k| {
            let cell = (k * n) / probes + (n / (2 * probes)).min(n - 1);
            let x = self.lo + self.step * (cell as f64 + 0.5);
            let exact = f(x);
            (self.eval(x) - exact).abs() / (1e-10 * scale + 1e-8 * exact.abs())
        });
        errs.into_iter().fold(0.0, f64::max)
    }
}

/// `f` at every point of `xs`, through a validated table where possible.
pub(crate) fn evaluate_many<F>(xs: &[f64], f: &F, exec: &Executor) -> Vec<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    const MIN_POINTS: usize = 4000;
    if xs.len() < MIN_POINTS {
        return exec.map(xs.len(), |i| f(xs[i]));
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q = |p: f64| sorted[((sorted.len() - 1) as f64 * p) as usize];
    let (lo, hi) = (q(0.005), q(0.995));
    let width = hi - lo;
    let table = if width > 0.0 {
        let (lo, hi) = (lo - 1e-3 * width, hi + 1e-3 * width);
        let mut accepted = None;
        for points in [1025, 4097, 16385] {
            let t = Tabulated::build(lo, hi, points, f, exec);
            if t.check(f, 48, exec) <= 1.0 {
                accepted = Some(t);
                break;
            }
        }
        accepted
    } else {
        None
    };
    match table {
        Some(t) => exec.map(xs.len(), |i| if t.contains(xs[i]) { t.eval(xs[i]) } else { f(xs[i]) }),
        None => exec.map(xs.len(), |i| f(xs[i])),
    }
}
