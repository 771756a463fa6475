//! `mehler hypotheses | verify | sample`.
//!
//! Exit codes: 0 when everything passes, 1 on a fail verdict or a failed
//! hypothesis, 2 on a usage or configuration error.

mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mehler::exec::Executor;
use mehler::inequalities::{write_csv, write_json, Harness, Verdict};
use mehler::levy::hypotheses::{radial_grid, ClauseStatus};
use mehler::levy::{check_domination, check_hypotheses};
use mehler::models::ModelSpec;
use mehler::rng::RandomStream;
use mehler::sampling::{sample_invariant, sample_mu_t, JumpScheme};
use mehler::Error;

use config::{Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "mehler", version, about = "Checks functional inequalities for invariant measures of Mehler semigroups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the standing hypotheses and closed-form constants of a model.
    Hypotheses(Common),
    /// Run the inequality checkers; writes verify.csv and verify.json.
    Verify(Common),
    /// Draw from the invariant measure (or μ_t); writes samples.csv.
    Sample(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model name: koponen, alpha_stable or fractional_ou.
    #[arg(long)]
    model: Option<String>,
    /// Comma-separated checker names, or "theorems" / "all".
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of draws.
    #[arg(long)]
    samples: Option<usize>,
    /// Output directory; defaults to $MEHLER_OUT_DIR, then ".".
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    chains: Option<usize>,
}

enum Failure {
    /// Exit 1.
    Check(String),
    /// Exit 2.
    Usage(String),
}

type Outcome = Result<(), Failure>;

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

/// Hypothesis violations exit 1; anything else raised while setting up is a
/// configuration problem.
fn setup(e: Error) -> Failure {
    match e {
        Error::Hypothesis(m) => Failure::Check(m),
        other => Failure::Usage(other.to_string()),
    }
}

fn runtime(e: Error) -> Failure {
    Failure::Check(e.to_string())
}

fn resolve(c: &Common) -> Result<RunConfig, Failure> {
    let mut cfg = match &c.config {
        Some(path) => RunConfig::load(path).map_err(Failure::Usage)?,
        None => RunConfig::default(),
    };
    cfg.apply(&Overrides {
        model: c.model.clone(),
        suite: c.suite.clone(),
        seed: c.seed,
        samples: c.samples,
        out: c.out.clone(),
        chains: c.chains,
    })
    .map_err(Failure::Usage)?;
    Ok(cfg)
}

fn executor(cfg: &RunConfig) -> Result<Executor, Failure> {
    match cfg.chains {
        Some(k) => Executor::with_threads(k).map_err(usage),
        None => Ok(Executor::default()),
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Failure> {
    std::fs::create_dir_all(dir).map_err(|e| usage(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    File::create(&path).map(BufWriter::new).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

struct Row {
    check: &'static str,
    name: String,
    pass: Option<bool>,
    value: f64,
    reference: f64,
    note: String,
}

fn hypothesis_rows(model: &ModelSpec) -> Result<Vec<Row>, Failure> {
    let mut rows = Vec::new();
    for c in check_hypotheses(&model.evolved).clauses {
        let pass = match c.status {
            ClauseStatus::Pass => Some(true),
            ClauseStatus::Fail => Some(false),
            ClauseStatus::NotVerified => None,
        };
        rows.push(Row { check: "clause", name: c.name.into(), pass, value: c.value, reference: f64::NAN, note: c.note });
    }
    for (name, want, got, ok) in model.consistency().map_err(runtime)? {
        rows.push(Row { check: "closed_form", name, pass: Some(ok), value: got, reference: want, note: String::new() });
    }
    // Radial grids along up to eight rays of M.
    let rays = model.triple().m.rays();
    let step = rays.len().div_ceil(8).max(1);
    let grid: Vec<Vec<f64>> =
        rays.iter().step_by(step).flat_map(|r| radial_grid(&r.direction, 1e-3, 10.0, 40)).collect();
    if !grid.is_empty() {
        for t in [0.1, 1.0, 5.0] {
            let d = check_domination(&model.evolved, &|s| model.h(s), t, &grid);
            rows.push(Row {
                check: "domination",
                name: format!("t={t}"),
                pass: Some(d.pass),
                value: d.worst_margin,
                reference: d.scale,
                note: format!("h(t) = exp(-{} t) against the density of M∘T_t^{{-1}} on {} points", model.h_rate, grid.len()),
            });
        }
    }
    Ok(rows)
}

fn hypotheses(c: &Common) -> Outcome {
    let cfg = resolve(c)?;
    let params = cfg.model();
    let dir = cfg.out_dir();
    let rows = match params.build() {
        Ok(model) => hypothesis_rows(&model)?,
        Err(Error::Hypothesis(m)) => {
            let name = m.split_whitespace().next().unwrap_or("model").to_string();
            vec![Row { check: "clause", name, pass: Some(false), value: f64::NAN, reference: f64::NAN, note: m }]
        }
        Err(e) => return Err(usage(e)),
    };
    let mut w = create(&dir, "hypotheses.csv")?;
    let io = |e: std::io::Error| runtime(e.into());
    writeln!(w, "model,check,name,status,value,reference,note").map_err(io)?;
    let mut failed = Vec::new();
    for r in &rows {
        let status = match r.pass {
            Some(true) => "pass",
            Some(false) => "fail",
            None => "not_verified",
        };
        if r.pass == Some(false) {
            failed.push(format!("{} {}", r.check, r.name));
        }
        println!("{status:>12}  {:<12} {:<28} {:.6e}", r.check, r.name, r.value);
        writeln!(
            w,
            "{},{},{},{status},{},{},{}",
            params.name(),
            r.check,
            csv_field(&r.name),
            r.value,
            r.reference,
            csv_field(&r.note)
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("failed: {}", failed.join(", "))))
    }
}

fn verify(c: &Common) -> Outcome {
    let cfg = resolve(c)?;
    let seed = cfg.seed.ok_or_else(|| usage("verify needs a seed (--seed or \"seed\" in the config)"))?;
    let checkers = cfg.checkers().map_err(Failure::Usage)?;
    let n = cfg.samples.unwrap_or(100_000);
    let exec = executor(&cfg)?;
    let model = cfg.model().build().map_err(setup)?;
    let report = check_hypotheses(&model.evolved);
    if !report.all_pass() {
        return Err(Failure::Check(format!("hypotheses fail: {}", report.failures().join(", "))));
    }
    let scheme = cfg.scheme.unwrap_or_default();
    let mut h = Harness::with_settings(&model, n, seed, &exec, scheme, cfg.settings.clone()).map_err(setup)?;
    if let Some(delta) = cfg.delta {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(usage(format!("delta must lie in (0, 1), got {delta}")));
        }
        h.forms.delta = delta;
    }
    let rows = h.run(&checkers).map_err(runtime)?;
    let dir = cfg.out_dir();
    let io = |e: Error| runtime(e);
    let mut w = create(&dir, "verify.csv")?;
    write_csv(&rows, &mut w).map_err(io)?;
    w.flush().map_err(|e| runtime(e.into()))?;
    let mut w = create(&dir, "verify.json")?;
    write_json(&rows, &mut w).map_err(io)?;
    w.flush().map_err(|e| runtime(e.into()))?;

    let count = |v: Verdict| rows.iter().filter(|r| r.verdict == v).count();
    println!(
        "{}: {} rows, {} pass, {} indeterminate, {} fail (seed {seed}, N = {n})",
        model.name,
        rows.len(),
        count(Verdict::Pass),
        count(Verdict::Indeterminate),
        count(Verdict::Fail)
    );
    for r in rows.iter().filter(|r| r.verdict != Verdict::Pass) {
        println!("  {:?} {} / {}: {}", r.verdict, r.name, r.function, r.note);
    }
    if count(Verdict::Fail) > 0 {
        Err(Failure::Check(format!("{} fail verdicts", count(Verdict::Fail))))
    } else {
        Ok(())
    }
}

fn sample(c: &Common) -> Outcome {
    let cfg = resolve(c)?;
    let exec = executor(&cfg)?;
    let model = cfg.model().build().map_err(setup)?;
    let n = cfg.samples.unwrap_or(10_000);
    let stream = RandomStream::new(cfg.seed.unwrap_or(0), 0);
    let scheme: JumpScheme = cfg.scheme.unwrap_or_default();
    let draws = match cfg.sample.time {
        Some(t) => sample_mu_t(t, n, &model.evolved, &scheme, stream, &exec),
        None => sample_invariant(n, &model.evolved, &scheme, stream, &exec, cfg.sample.method),
    }
    .map_err(setup)?;
    let mut w = create(&cfg.out_dir(), "samples.csv")?;
    draws.write_csv(&mut w).map_err(runtime)?;
    w.flush().map_err(|e| runtime(e.into()))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = match &cli.command {
        Command::Hypotheses(c) => hypotheses(c),
        Command::Verify(c) => verify(c),
        Command::Sample(c) => sample(c),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(m)) => {
            eprintln!("mehler: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("mehler: {m}");
            ExitCode::from(2)
        }
    }
}
