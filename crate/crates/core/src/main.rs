//! `liftsdp` command-line front end.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use liftsdp::ball::truncated_adjacency;
use liftsdp::ball::DEFAULT_BALL_CAP;
use liftsdp::builtins::load_poly;
use liftsdp::dsl::serialize_poly;
use liftsdp::experiment::{
    compare_spectra, estimate_s_star, run_experiment, ExperimentConfig, DEFAULT_DENSE_CUTOFF,
};
use liftsdp::lift::{evaluate, find_bad_vertices, sample_lift, sample_lift_unsigned, LiftInstance};
use liftsdp::pasting::certify_lower_bound;
use liftsdp::poly::MatrixPolynomial;
use liftsdp::sdp::{part_sdp_dual, part_sdp_primal, refine_dual, sdp_primal, Partition, SolverParams};
use liftsdp::spectral::summarize;
use liftsdp::Error;

/// Comma-separated values, or a half-open range `a..b`.
#[derive(Clone, Debug)]
struct List<T>(Vec<T>);

impl<T: FromStr + Copy> FromStr for List<T>
where
    std::ops::Range<T>: Iterator<Item = T>,
{
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = |x: &str| format!("cannot parse `{x}`");
        if let Some((a, b)) = s.split_once("..") {
            let a: T = a.trim().parse().map_err(|_| bad(a))?;
            let b: T = b.trim().parse().map_err(|_| bad(b))?;
            return Ok(List((a..b).collect()));
        }
        s.split(',')
            .filter(|x| !x.trim().is_empty())
            .map(|x| x.trim().parse().map_err(|_| bad(x)))
            .collect::<Result<_, _>>()
            .map(List)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Parser, Debug)]
#[command(name = "liftsdp", version, about = "SDP and eigenvalue bounds for random matrix-polynomial lifts")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Polynomial: a DSL file or `builtin:<name>`.
    #[arg(long, global = true, default_value = "builtin:p3")]
    poly: String,
    /// Lift sizes, e.g. `500,2000`.
    #[arg(long, global = true)]
    n: Option<List<usize>>,
    /// Seeds, e.g. `0,1,2` or `0..5`.
    #[arg(long, global = true)]
    seeds: Option<List<u64>>,
    /// Ball radii; `bracket` uses the largest as `f0_max`.
    #[arg(long, global = true)]
    f0: Option<List<usize>>,
    /// Work with `−A`.
    #[arg(long, global = true)]
    negate: bool,
    /// Gap tolerance (dual stopping rule; bracket early stop).
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,
    /// Output directory for report.json, spectra/ and solutions/.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Largest dimension for dense eigen-solves.
    #[arg(long = "dense-cutoff", global = true, default_value_t = DEFAULT_DENSE_CUTOFF)]
    dense_cutoff: usize,
    /// Number of solver restarts.
    #[arg(long, global = true, default_value_t = 5)]
    restarts: usize,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Parse a polynomial and print a summary.
    Parse,
    /// Sample lifts and report their bad-vertex fraction at cycle length `2 f0 + deg p`.
    Sample,
    /// Extreme eigenvalues (and full spectra below the dense cutoff); with `--f0`, compares with the ball.
    Spectrum {
        /// Use unsigned lifts.
        #[arg(long)]
        unsigned: bool,
    },
    /// Basic SDP primal and dual on sampled lifts.
    Sdp,
    /// Partitioned SDP primal and dual on truncated balls.
    Partsdp,
    /// Certified lower bound by pasting the radius-`f0` ball solution.
    Paste {
        /// Also solve the basic SDP for comparison.
        #[arg(long)]
        compare: bool,
    },
    /// Bracket on the infinite-lift value from balls of radius up to `f0`.
    Bracket,
    /// Full pipeline; writes report.json.
    Experiment {
        /// Pasting radius for lower bounds per lift.
        #[arg(long = "paste-f0")]
        paste_f0: Option<usize>,
    },
}

/// Failure with an exit code: 2 for invalid input, 3 for non-convergence.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NonConvergence { .. } => 3,
            Error::Io(_) | Error::Json(_) => 1,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: 1, message: e.to_string() }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure { code: 1, message: e.to_string() }
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure { code: 1, message: e.to_string() }
    }
}

struct Ctx {
    cli: Cli,
    p: MatrixPolynomial,
    params: SolverParams,
}

impl Ctx {
    fn ns(&self) -> Result<Vec<usize>, Failure> {
        match &self.cli.n {
            Some(List(v)) if !v.is_empty() => Ok(v.clone()),
            _ => Err(invalid("--n is required and must be nonempty")),
        }
    }

    fn seeds(&self) -> Result<Vec<u64>, Failure> {
        match &self.cli.seeds {
            Some(List(v)) if !v.is_empty() => Ok(v.clone()),
            Some(_) => Err(invalid("seeds list is empty")),
            None => Ok(vec![0]),
        }
    }

    fn f0s(&self) -> Result<Vec<usize>, Failure> {
        match &self.cli.f0 {
            Some(List(v)) if !v.is_empty() => Ok(v.clone()),
            _ => Err(invalid("--f0 is required and must be nonempty")),
        }
    }

    fn jobs(&self) -> Result<Vec<(usize, u64)>, Failure> {
        let seeds = self.seeds()?;
        let ns = self.ns()?;
        let d = self.p.signature().d;
        for &n in &ns {
            if n < 2 {
                return Err(Error::LiftTooSmall(n).into());
            }
            if d > 0 && n % 2 == 1 {
                return Err(Error::OddLiftSize { n }.into());
            }
        }
        Ok(ns.iter().flat_map(|&n| seeds.iter().map(move |&s| (n, s))).collect())
    }

    fn write_json<T: Serialize>(&self, rel: &str, value: &T) -> Result<(), Failure> {
        if let Some(dir) = &self.cli.out {
            let path = dir.join(rel);
            ensure_parent(&path)?;
            fs::write(&path, serde_json::to_string_pretty(value)?)?;
        }
        Ok(())
    }

    fn write_spectrum(&self, rel: &str, values: &[f64]) -> Result<(), Failure> {
        if let Some(dir) = &self.cli.out {
            let path = dir.join("spectra").join(rel);
            ensure_parent(&path)?;
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["index", "eigenvalue"])?;
            for (k, v) in values.iter().enumerate() {
                w.write_record([k.to_string(), format!("{v:.15e}")])?;
            }
            w.flush()?;
        }
        Ok(())
    }
}

fn ensure_parent(path: &Path) -> std::io::Result<()> {
    match path.parent() {
        Some(dir) => fs::create_dir_all(dir),
        None => Ok(()),
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Prints a JSON value, or as CSV when it is an object or a list of objects.
fn emit(value: &Value, format: Format) -> Result<(), Failure> {
    match format {
        Format::Json => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{}", serde_json::to_string_pretty(value)?)?;
        }
        Format::Csv => {
            let rows: Vec<&serde_json::Map<String, Value>> = match value {
                Value::Array(items) => items.iter().filter_map(Value::as_object).collect(),
                Value::Object(m) => vec![m],
                _ => vec![],
            };
            let mut w = csv::Writer::from_writer(std::io::stdout());
            if let Some(first) = rows.first() {
                let keys: Vec<&String> = first.keys().collect();
                w.write_record(&keys)?;
                for row in &rows {
                    w.write_record(keys.iter().map(|k| row.get(*k).map(cell).unwrap_or_default()))?;
                }
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// Emits whatever was computed before a failure, then reports the failure.
fn finish(rows: Vec<Value>, failure: Option<Failure>, format: Format) -> Result<(), Failure> {
    emit(&Value::Array(rows), format)?;
    failure.map_or(Ok(()), Err)
}

fn lift_for(ctx: &Ctx, n: usize, seed: u64, signed: bool) -> Result<LiftInstance, Failure> {
    let sig = ctx.p.signature();
    Ok(if signed { sample_lift(sig, n, seed)? } else { sample_lift_unsigned(sig, n, seed)? })
}

fn cmd_parse(ctx: &Ctx) -> Result<(), Failure> {
    let p = &ctx.p;
    let sig = p.signature();
    let v = json!({
        "source": ctx.cli.poly,
        "d": sig.d,
        "e": sig.e,
        "r": p.r(),
        "terms": p.num_terms(),
        "degree": p.degree(),
        "self_adjoint": p.is_self_adjoint(),
        "norm_bound": p.operator_norm_bound(),
        "dsl": serialize_poly(p),
    });
    emit(&v, ctx.cli.format)
}

fn cmd_sample(ctx: &Ctx) -> Result<(), Failure> {
    let f0 = ctx.cli.f0.as_ref().and_then(|l| l.0.iter().max().copied());
    let mut rows = Vec::new();
    for (n, seed) in ctx.jobs()? {
        let lift = lift_for(ctx, n, seed, true)?;
        let a = evaluate(&ctx.p, &lift)?;
        let mut row = json!({ "n": n, "seed": seed, "dim": a.dim(), "nnz": a.nnz() });
        if let Some(f0) = f0 {
            let bound = 2 * f0 + ctx.p.degree();
            let bad = find_bad_vertices(&lift, bound);
            row["cycle_bound"] = json!(bound);
            row["bad_fraction"] = json!(bad.fraction());
        }
        ctx.write_json(&format!("solutions/lift_n{n}_s{seed}.json"), &lift.record())?;
        rows.push(row);
    }
    finish(rows, None, ctx.cli.format)
}

fn cmd_spectrum(ctx: &Ctx, unsigned: bool) -> Result<(), Failure> {
    let f0 = ctx.cli.f0.as_ref().and_then(|l| l.0.iter().max().copied());
    let cutoff = ctx.cli.dense_cutoff;
    let mut rows = Vec::new();
    if let Some(f0) = f0 {
        let af = truncated_adjacency(&ctx.p, f0, DEFAULT_BALL_CAP)?;
        if let Ok(s) = summarize(&af.matrix, ctx.params.eig_tol, cutoff) {
            if let Some(spec) = &s.spectrum {
                ctx.write_spectrum(&format!("ball_f{f0}.csv"), spec)?;
            }
        }
    }
    for (n, seed) in ctx.jobs()? {
        let lift = lift_for(ctx, n, seed, !unsigned)?;
        let a = evaluate(&ctx.p, &lift)?;
        let s = match summarize(&a, ctx.params.eig_tol, cutoff) {
            Ok(s) => s,
            Err(e) => return finish(rows, Some(e.into()), ctx.cli.format),
        };
        let mut row = json!({
            "n": n,
            "seed": seed,
            "signed": !unsigned,
            "lambda_max": s.lambda_max,
            "lambda_min": s.lambda_min,
            "residual": s.residual,
        });
        if let Some(spec) = &s.spectrum {
            ctx.write_spectrum(&format!("lift_n{n}_s{seed}.csv"), spec)?;
        }
        if let Some(f0) = f0 {
            if a.dim() <= cutoff {
                let c = compare_spectra(&ctx.p, &lift, f0, cutoff)?;
                row["f0"] = json!(f0);
                row["hausdorff"] = json!(c.hausdorff);
                row["lambda_max_ball"] = json!(c.lambda_max_ball);
                row["lambda_max_diff"] = json!(c.lambda_max_diff);
            }
        }
        rows.push(row);
    }
    finish(rows, None, ctx.cli.format)
}

fn cmd_sdp(ctx: &Ctx) -> Result<(), Failure> {
    let mut rows = Vec::new();
    for (n, seed) in ctx.jobs()? {
        let lift = lift_for(ctx, n, seed, true)?;
        let a = evaluate(&ctx.p, &lift)?;
        let step = sdp_primal(&a, &ctx.params)
            .and_then(|sol| refine_dual(&a, Partition::Rows, Some(&sol), &ctx.params).map(|d| (sol, d)));
        let (sol, dual) = match step {
            Ok(x) => x,
            Err(e) => return finish(rows, Some(e.into()), ctx.cli.format),
        };
        ctx.write_json(
            &format!("solutions/sdp_n{n}_s{seed}.json"),
            &json!({ "primal": sol, "dual": dual }),
        )?;
        rows.push(json!({
            "n": n,
            "seed": seed,
            "primal": sol.objective,
            "dual": dual.value,
            "gap": dual.value - sol.objective,
            "rank": sol.k(),
            "iterations": sol.iterations,
            "converged": sol.converged,
            "dual_iterations": dual.iterations,
        }));
    }
    finish(rows, None, ctx.cli.format)
}

fn cmd_partsdp(ctx: &Ctx) -> Result<(), Failure> {
    let mut rows = Vec::new();
    for f0 in ctx.f0s()? {
        let af = truncated_adjacency(&ctx.p, f0, DEFAULT_BALL_CAP)?;
        let step = part_sdp_primal(&af, &ctx.params)
            .and_then(|sol| part_sdp_dual(&af, Some(&sol), &ctx.params).map(|d| (sol, d)));
        let (sol, dual) = match step {
            Ok(x) => x,
            Err(e) => return finish(rows, Some(e.into()), ctx.cli.format),
        };
        ctx.write_json(&format!("solutions/partsdp_f{f0}.json"), &json!({ "primal": sol, "dual": dual }))?;
        rows.push(json!({
            "f0": f0,
            "vertices": af.ball.len(),
            "dim": af.dim(),
            "primal": sol.objective,
            "dual": dual.value,
            "gap": dual.value - sol.objective,
            "rank": sol.k(),
            "iterations": sol.iterations,
            "converged": sol.converged,
        }));
    }
    finish(rows, None, ctx.cli.format)
}

fn cmd_paste(ctx: &Ctx, compare: bool) -> Result<(), Failure> {
    let f0s = ctx.f0s()?;
    let [f0] = f0s[..] else {
        return Err(invalid("paste takes a single --f0"));
    };
    let mut rows = Vec::new();
    for (n, seed) in ctx.jobs()? {
        match certify_lower_bound(&ctx.p, n, seed, f0, &ctx.params, compare) {
            Ok(rep) => {
                ctx.write_json(&format!("solutions/paste_n{n}_s{seed}_f{f0}.json"), &rep)?;
                rows.push(serde_json::to_value(rep)?);
            }
            Err(e) => return finish(rows, Some(e.into()), ctx.cli.format),
        }
    }
    finish(rows, None, ctx.cli.format)
}

fn cmd_bracket(ctx: &Ctx) -> Result<(), Failure> {
    let f0_max = ctx.f0s()?.into_iter().max().unwrap();
    let est = estimate_s_star(&ctx.p, f0_max, ctx.cli.tol, &ctx.params)?;
    ctx.write_json("report.json", &est)?;
    match ctx.cli.format {
        Format::Json => emit(&serde_json::to_value(&est)?, Format::Json),
        Format::Csv => emit(&serde_json::to_value(&est.balls)?, Format::Csv),
    }
}

fn cmd_experiment(ctx: &Ctx, paste_f0: Option<usize>) -> Result<(), Failure> {
    let mut config = ExperimentConfig::new(
        &ctx.cli.poly,
        ctx.ns()?,
        ctx.seeds()?,
        ctx.cli.f0.as_ref().map(|l| l.0.clone()).unwrap_or_default(),
    );
    config.negate = ctx.cli.negate;
    config.solver = ctx.params.clone();
    config.paste_f0 = paste_f0;
    let report = run_experiment(&config)?;
    ctx.write_json("report.json", &report)?;
    match ctx.cli.format {
        Format::Json => emit(&serde_json::to_value(&report)?, Format::Json)?,
        Format::Csv => emit(&serde_json::to_value(&report.lifts)?, Format::Csv)?,
    }
    if report.has_non_convergence() {
        return Err(Failure { code: 3, message: "some stages did not converge; see report".into() });
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(invalid("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| invalid(e.to_string()))?;
    }
    if !(cli.tol > 0.0) {
        return Err(invalid("--tol must be positive"));
    }
    if cli.restarts == 0 {
        return Err(invalid("--restarts must be positive"));
    }
    let p = load_poly(&cli.poly)?;
    p.check_self_adjoint()?;
    let p = if cli.negate { p.negated() } else { p };
    let params = SolverParams { gap_tol: cli.tol, restarts: cli.restarts, ..SolverParams::default() };
    let ctx = Ctx { cli, p, params };
    match &ctx.cli.cmd {
        Cmd::Parse => cmd_parse(&ctx),
        Cmd::Sample => cmd_sample(&ctx),
        Cmd::Spectrum { unsigned } => cmd_spectrum(&ctx, *unsigned),
        Cmd::Sdp => cmd_sdp(&ctx),
        Cmd::Partsdp => cmd_partsdp(&ctx),
        Cmd::Paste { compare } => cmd_paste(&ctx, *compare),
        Cmd::Bracket => cmd_bracket(&ctx),
        Cmd::Experiment { paste_f0 } => cmd_experiment(&ctx, *paste_f0),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
