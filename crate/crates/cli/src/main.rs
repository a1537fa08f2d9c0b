//! `spinorflow`: validate parallel Cauchy pairs, evolve them, and check the
//! evolution against its invariants.
//!
//! Exit status: 0 success, 1 invalid pair, 2 numeric or assertion failure,
//! 3 I/O, schema or usage error.

mod input;
mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use spinorflow::cauchy::{self, DEFAULT_TOL};
use spinorflow::lorentz::{curvature_report, CurvatureReport};
use spinorflow::numeric::{flow_residuals, integrate_samples, FlowState, StepOptions};
use spinorflow::verify::{run_suite, sample_times, Check, Suite, VerifyConfig};
use spinorflow::{Boundary, ClosedFormFlow, FlowError, Lifespan, Tolerance};

use input::Job;
use output::{sci, to_json, Table};

#[derive(Parser)]
#[command(name = "spinorflow", version, about = "Left-invariant parallel spinor flows on 3D Lie groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a pair against the algebraic system and the table of solutions.
    Validate(Common),
    /// Report the Lie group a valid pair lives on.
    Classify(Common),
    /// Sample the flow on a time grid.
    Flow {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        window: Window,
        #[arg(long, value_enum, default_value_t = Method::Exact)]
        method: Method,
        /// Fixed RK4 step for `--method rk4`.
        #[arg(long, default_value_t = 1e-4)]
        step: f64,
    },
    /// Maximal interval of existence and the immortality verdict.
    Lifespan(Common),
    /// Three- and four-dimensional curvature on a time grid.
    Curvature {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        window: Window,
    },
    /// Run an invariant suite over the middle 90% of the lifespan.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "all", value_parser = parse_suite)]
        suite: Suite,
        /// Sample times per assertion.
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
}

#[derive(Args, Clone)]
struct Common {
    /// Pair document, or a JSON array of them with `--sweep`.
    input: PathBuf,
    /// Treat the input as an array and process every element.
    #[arg(long)]
    sweep: bool,
    /// Process sweep elements concurrently.
    #[arg(long, requires = "sweep")]
    parallel: bool,
    /// Zero tolerance for the algebraic tests.
    #[arg(long, env = "SPINORFLOW_TOL", default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Output file; a directory with `--sweep`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args, Clone, Copy)]
struct Window {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    t0: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    t1: f64,
    #[arg(long, default_value_t = 11)]
    samples: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Exact,
    Rk4,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn parse_suite(s: &str) -> std::result::Result<Suite, String> {
    s.parse().map_err(|e: FlowError| e.to_string())
}

/// Result of one pair: the document, console notes and an exit status.
struct Outcome {
    content: String,
    ext: &'static str,
    /// Goes to stdout when the content is written to a file, stderr otherwise.
    summary: Vec<String>,
    warnings: Vec<String>,
    code: u8,
}

impl Outcome {
    fn new(content: String, ext: &'static str) -> Self {
        Outcome {
            content,
            ext,
            summary: Vec::new(),
            warnings: Vec::new(),
            code: 0,
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<FlowError>() {
            return match e {
                FlowError::InvalidPair(_) => 1,
                FlowError::SingularTime { .. }
                | FlowError::OutOfDomain { .. }
                | FlowError::NotApplicable(_)
                | FlowError::StepFailure { .. } => 2,
                FlowError::InvalidLapse(_) | FlowError::InvalidInput(_) => 3,
            };
        }
    }
    3
}

fn boundary(b: Boundary, negative: bool) -> String {
    match b {
        Boundary::Finite(t) => sci(t),
        Boundary::Infinite if negative => "-inf".into(),
        Boundary::Infinite => "inf".into(),
        Boundary::Unknown => "unknown".into(),
    }
}

fn lifespan_line(span: &Lifespan) -> String {
    format!(
        "lifespan: ({}, {}), immortal: {}",
        boundary(span.t_minus, true),
        boundary(span.t_plus, false),
        span.immortal
    )
}

fn conflict_warning(span: &Lifespan) -> Option<String> {
    span.criteria_conflict.then(|| {
        "warning: the forward-only immortality criterion disagrees with the two-sided lifespan; the two-sided verdict is reported".into()
    })
}

fn tolerance(common: &Common) -> Result<Tolerance> {
    Ok(Tolerance::new(common.tol)?)
}

fn validate(job: &Job, tol: Tolerance, format: Option<Format>) -> Result<Outcome> {
    let report = match cauchy::validate(&job.pair, tol) {
        Ok(r) => r,
        Err(FlowError::InvalidPair(violations)) => {
            let mut out = if format == Some(Format::Json) {
                let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
                Outcome::new(to_json(&json!({ "valid": false, "violations": list }))?, "json")
            } else {
                let mut s = String::from("valid: false\n");
                for v in &violations {
                    s.push_str(&format!("violation: {v}\n"));
                }
                Outcome::new(s, "txt")
            };
            out.code = 1;
            return Ok(out);
        }
        Err(e) => return Err(e.into()),
    };
    let inv = job.pair.invariants();
    let group = cauchy::classify(&job.pair, tol)?;
    let c = cauchy::constraints(&job.pair, tol)?;
    if format == Some(Format::Json) {
        let doc = json!({
            "valid": true,
            "row": report.row,
            "row_description": report.row.description(),
            "group": group.name(),
            "mu": group.mu(),
            "lambda": inv.lambda,
            "trace": inv.trace,
            "delta": inv.delta,
            "residuals": report.residuals,
            "H0": c.hamiltonian,
            "momentum_residual": c.momentum_residual,
            "constrained_ricci_flat": c.is_vacuum_admissible,
        });
        return Ok(Outcome::new(to_json(&doc)?, "json"));
    }
    let mut s = String::from("valid: true\n");
    s.push_str(&format!("row: {}\n", report.row.description()));
    s.push_str(&format!("group: {}\n", group.name()));
    if let Some(mu) = group.mu() {
        s.push_str(&format!("mu: {}\n", sci(mu)));
    }
    s.push_str(&format!("lambda: {}\n", sci(inv.lambda)));
    s.push_str(&format!("T: {}\n", sci(inv.trace)));
    s.push_str(&format!("Delta: {}\n", sci(inv.delta)));
    s.push_str(&format!("H0: {}\n", sci(c.hamiltonian)));
    let m = c.momentum_residual;
    s.push_str(&format!("momentum: [{}, {}, {}]\n", sci(m[0]), sci(m[1]), sci(m[2])));
    s.push_str(&format!("constrained_ricci_flat: {}\n", c.is_vacuum_admissible));
    Ok(Outcome::new(s, "txt"))
}

fn classify(job: &Job, tol: Tolerance, format: Option<Format>) -> Result<Outcome> {
    let group = cauchy::classify(&job.pair, tol)?;
    if format == Some(Format::Json) {
        let doc = json!({ "group": group.name(), "mu": group.mu() });
        return Ok(Outcome::new(to_json(&doc)?, "json"));
    }
    let mut s = format!("group: {}\n", group.name());
    if let Some(mu) = group.mu() {
        s.push_str(&format!("mu: {}\n", sci(mu)));
    }
    Ok(Outcome::new(s, "txt"))
}

fn lifespan(job: &Job, tol: Tolerance, format: Option<Format>) -> Result<Outcome> {
    let flow = ClosedFormFlow::new(&job.pair, &job.lapse, tol)?;
    let span = flow.lifespan();
    let mut out = if format == Some(Format::Json) {
        Outcome::new(to_json(&span)?, "json")
    } else {
        let forward = span
            .forward_criterion
            .map_or("n/a".to_string(), |b| b.to_string());
        Outcome::new(
            format!(
                "t_minus: {}\nt_plus: {}\nimmortal: {}\nforward_criterion: {}\n",
                boundary(span.t_minus, true),
                boundary(span.t_plus, false),
                span.immortal,
                forward
            ),
            "txt",
        )
    };
    out.warnings.extend(conflict_warning(&span));
    Ok(out)
}

/// Distance kept from an open lifespan boundary when clipping.
fn margin(b: f64) -> f64 {
    1e-3 * b.abs().max(1.0)
}

/// The requested window intersected with the lifespan and the lapse domain.
fn clip(flow: &ClosedFormFlow, w: Window) -> Result<(f64, f64, Option<String>)> {
    if !(w.t0.is_finite() && w.t1.is_finite() && w.t0 < w.t1) {
        return Err(FlowError::InvalidInput(format!("need t0 < t1, got [{}, {}]", w.t0, w.t1)).into());
    }
    if w.samples < 2 {
        return Err(FlowError::InvalidInput("need at least two samples".into()).into());
    }
    let span = flow.lifespan();
    let (dlo, dhi) = flow.profile().domain();
    let lo = match span.t_minus {
        Boundary::Finite(b) => (b + margin(b)).max(dlo),
        _ => dlo,
    };
    let hi = match span.t_plus {
        Boundary::Finite(b) => (b - margin(b)).min(dhi),
        _ => dhi,
    };
    let (a, b) = (w.t0.max(lo), w.t1.min(hi));
    if a >= b {
        return Err(FlowError::SingularTime { t: w.t0 }.into());
    }
    let note = (a != w.t0 || b != w.t1).then(|| {
        format!(
            "warning: window [{}, {}] clipped to [{}, {}] by the lifespan",
            sci(w.t0),
            sci(w.t1),
            sci(a),
            sci(b)
        )
    });
    Ok((a, b, note))
}

const FLOW_COLUMNS: [&str; 28] = [
    "t", "B_t", "theta_uu", "theta_ul", "theta_un", "theta_ll", "theta_ln", "theta_nn", "U_uu",
    "U_ul", "U_un", "U_lu", "U_ll", "U_ln", "U_nu", "U_nl", "U_nn", "h_uu", "h_ul", "h_un", "h_ll",
    "h_ln", "h_nn", "H_t", "r1", "r2", "r3", "r4",
];

fn flow_row(job: &Job, st: &FlowState, hamiltonian: f64) -> Vec<f64> {
    let mut row = vec![st.t, st.b];
    row.extend(st.theta.components());
    row.extend(st.u.u.iter().flatten());
    row.extend(st.metric.components());
    row.push(hamiltonian);
    row.extend(flow_residuals(st, &job.pair).as_array());
    row
}

fn flow(job: &Job, tol: Tolerance, w: Window, method: Method, step: f64, format: Format) -> Result<Outcome> {
    let flow = ClosedFormFlow::new(&job.pair, &job.lapse, tol)?;
    let span = flow.lifespan();
    let (a, b, note) = clip(&flow, w)?;
    let times = sample_times(a, b, w.samples);
    let rows: Vec<Vec<f64>> = match method {
        Method::Exact => times
            .iter()
            .map(|&t| -> Result<Vec<f64>> {
                let st = FlowState::new(
                    &job.pair,
                    t,
                    flow.b(t)?,
                    flow.beta(t)?,
                    flow.theta(t)?,
                    flow.frame(t)?.u,
                );
                Ok(flow_row(job, &st, flow.hamiltonian(t)?))
            })
            .collect::<Result<_>>()?,
        Method::Rk4 => {
            let traj = integrate_samples(&job.pair, &job.lapse, &times, &StepOptions::fixed(step))?;
            if traj.truncated || traj.states.len() != times.len() {
                let t = traj.states.last().map_or(a, |s| s.t);
                return Err(FlowError::StepFailure { t, step }.into());
            }
            traj.states.iter().map(|st| flow_row(job, st, st.hamiltonian)).collect()
        }
    };
    let table = Table {
        header: FLOW_COLUMNS.iter().map(|s| s.to_string()).collect(),
        rows,
    };
    let mut out = match format {
        Format::Csv => Outcome::new(table.to_csv(), "csv"),
        Format::Json => {
            let doc = json!({
                "method": match method { Method::Exact => "exact", Method::Rk4 => "rk4" },
                "t0": a,
                "t1": b,
                "clipped": note.is_some(),
                "lifespan": span,
                "columns": table.header,
                "rows": table.rows,
            });
            Outcome::new(to_json(&doc)?, "json")
        }
    };
    out.summary.push(lifespan_line(&span));
    out.warnings.extend(note);
    out.warnings.extend(conflict_warning(&span));
    Ok(out)
}

fn curvature_table(reports: &[CurvatureReport]) -> Table {
    let mut header: Vec<String> = ["t", "H_t", "H_t_recomputed", "R"].map(String::from).to_vec();
    header.extend(["uu", "ul", "un", "ll", "ln", "nn"].map(|c| format!("ric3_{c}")));
    header.extend(["u", "l", "n"].map(|c| format!("momentum_{c}")));
    for a in 0..4 {
        for b in a..4 {
            header.push(format!("ric4_{a}{b}"));
        }
    }
    header.push("ricci_identity_residual".into());
    let rows = reports
        .iter()
        .map(|r| {
            let mut row = vec![r.t, r.hamiltonian, r.hamiltonian_recomputed, r.scalar_curvature];
            row.extend(r.ricci3.components());
            row.extend(r.momentum_residual);
            for a in 0..4 {
                for b in a..4 {
                    row.push(r.ricci4[a][b]);
                }
            }
            row.push(r.ricci_identity_residual);
            row
        })
        .collect();
    Table { header, rows }
}

fn curvature(job: &Job, tol: Tolerance, w: Window, format: Format) -> Result<Outcome> {
    let flow = ClosedFormFlow::new(&job.pair, &job.lapse, tol)?;
    let span = flow.lifespan();
    let (a, b, note) = clip(&flow, w)?;
    let reports: Vec<CurvatureReport> = sample_times(a, b, w.samples)
        .into_iter()
        .map(|t| curvature_report(&flow, t))
        .collect::<spinorflow::Result<_>>()?;
    let mut out = match format {
        Format::Csv => Outcome::new(curvature_table(&reports).to_csv(), "csv"),
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                lifespan: Lifespan,
                reports: &'a [CurvatureReport],
            }
            Outcome::new(to_json(&Doc { lifespan: span, reports: &reports })?, "json")
        }
    };
    out.summary.push(lifespan_line(&span));
    out.warnings.extend(note);
    Ok(out)
}

fn verify(job: &Job, tol: Tolerance, suite: Suite, samples: usize, format: Option<Format>) -> Result<Outcome> {
    if samples < 2 {
        return Err(FlowError::InvalidInput("need at least two samples".into()).into());
    }
    let config = VerifyConfig {
        samples,
        tol,
        ..VerifyConfig::default()
    };
    let report = run_suite(&job.pair, &job.lapse, suite, &config)?;
    let mut out = if format == Some(Format::Json) {
        Outcome::new(to_json(&report)?, "json")
    } else {
        let mut s = String::new();
        for a in &report.assertions {
            let status = if a.skipped {
                "SKIP"
            } else if a.passed {
                "PASS"
            } else {
                "FAIL"
            };
            let op = match a.check {
                Check::AtMost => "<=",
                Check::Above => ">",
            };
            let value = if a.skipped { "n/a".to_string() } else { sci(a.value) };
            s.push_str(&format!("{status} {}.{}: {value} (need {op} {})\n", a.suite, a.name, sci(a.bound)));
        }
        Outcome::new(s, "txt")
    };
    if !report.passed() {
        out.code = 2;
    }
    Ok(out)
}

fn run_job(cmd: &Command, job: &Job) -> Result<Outcome> {
    match cmd {
        Command::Validate(c) => validate(job, tolerance(c)?, c.format),
        Command::Classify(c) => classify(job, tolerance(c)?, c.format),
        Command::Lifespan(c) => lifespan(job, tolerance(c)?, c.format),
        Command::Flow { common, window, method, step } => flow(
            job,
            tolerance(common)?,
            *window,
            *method,
            *step,
            common.format.unwrap_or(Format::Csv),
        ),
        Command::Curvature { common, window } => {
            curvature(job, tolerance(common)?, *window, common.format.unwrap_or(Format::Json))
        }
        Command::Verify { common, suite, samples } => {
            verify(job, tolerance(common)?, *suite, *samples, common.format)
        }
    }
}

fn common(cmd: &Command) -> &Common {
    match cmd {
        Command::Validate(c) | Command::Classify(c) | Command::Lifespan(c) => c,
        Command::Flow { common, .. } | Command::Curvature { common, .. } | Command::Verify { common, .. } => {
            common
        }
    }
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).with_context(|| format!("cannot write {}", path.display()))
}

fn emit(outcome: &Outcome, out: Option<&Path>, label: Option<usize>) -> Result<()> {
    for w in &outcome.warnings {
        match label {
            Some(i) => eprintln!("[{i}] {w}"),
            None => eprintln!("{w}"),
        }
    }
    match out {
        Some(path) => {
            write_file(path, &outcome.content)?;
            for s in &outcome.summary {
                match label {
                    Some(i) => println!("[{i}] {s}"),
                    None => println!("{s}"),
                }
            }
        }
        None => {
            if let Some(i) = label {
                println!("== [{i}] ==");
            }
            print!("{}", outcome.content);
            for s in &outcome.summary {
                eprintln!("{s}");
            }
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<u8> {
    let c = common(&cli.command);
    if !c.sweep {
        let job = input::load_one(&c.input)?;
        return match run_job(&cli.command, &job) {
            Ok(outcome) => {
                emit(&outcome, c.out.as_deref(), None)?;
                Ok(outcome.code)
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                Ok(exit_code(&e))
            }
        };
    }

    let jobs = input::load_sweep(&c.input)?;
    if let Some(dir) = &c.out {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    } else if matches!(cli.command, Command::Flow { .. } | Command::Curvature { .. }) {
        bail!("a sweep of tables needs --out DIR");
    }
    let work = |job: &Job| run_job(&cli.command, job);
    let results: Vec<Result<Outcome>> = if c.parallel {
        jobs.par_iter().map(work).collect()
    } else {
        jobs.iter().map(work).collect()
    };
    let mut worst = 0;
    for (i, r) in results.iter().enumerate() {
        match r {
            Ok(outcome) => {
                let path = c.out.as_ref().map(|d| d.join(format!("{i:04}.{}", outcome.ext)));
                emit(outcome, path.as_deref(), Some(i))?;
                worst = worst.max(outcome.code);
            }
            Err(e) => {
                eprintln!("[{i}] error: {e:#}");
                worst = worst.max(exit_code(e));
            }
        }
    }
    Ok(worst)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
