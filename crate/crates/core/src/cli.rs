//! The `qdiff` command line front end.
//!
//! Every subcommand reads a problem file, writes a JSON report (to stdout, or
//! to `--out <dir>` together with plot-ready CSV files) and maps the outcome
//! to an exit status: `0` success, `1` hypothesis or solve failure, `2` input
//! error.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::approx::{approximate_limit, ApproxConfig};
use crate::error::{Error, Result};
use crate::lp::{solve_lp, LpConfig};
use crate::model::{ProblemSpec, Window};
use crate::series::{check_hypotheses, CheckOptions, Flavor, HypothesisId, Verdict};
use crate::solver::{backfill, solve_bounded, SolveConfig};
use crate::verify::{residual, residual_range};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "qdiff",
    version,
    about = "Solve and verify second-order neutral difference equations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check hypotheses and print witnesses.
    Check(CheckArgs),
    /// Bounded solution by Picard iteration in the zero-prefix ball.
    Solve(SolveArgs),
    /// Solution in the unit ball of l^p.
    SolveLp(SolveLpArgs),
    /// The q_n -> 1 cascade of scaled auxiliary problems.
    Approx(ApproxArgs),
    /// Residual of a solution CSV against the equation.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Problem file (JSON).
    #[arg(long)]
    pub problem: PathBuf,
    /// Directory for report.json and CSV output; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed recorded in the report (all current subcommands are deterministic).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma separated ids, e.g. `Hq,Hsb`; all when absent.
    #[arg(long)]
    pub hypotheses: Option<String>,
    /// C of the cascade hypothesis.
    #[arg(long = "C")]
    pub c: Option<f64>,
    /// rho of the schedule w_k = 1 - rho^k.
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    /// Ball radius for local bounds of f.
    #[arg(long = "M", default_value_t = 1.0)]
    pub m: f64,
    /// Scan limit for index searches.
    #[arg(long, default_value_t = 10_000)]
    pub horizon: i64,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: Common,
    /// Ball radius.
    #[arg(long = "M", default_value_t = 1.0)]
    pub m: f64,
    #[arg(long = "tol-fp", default_value_t = 1e-12)]
    pub tol_fp: f64,
    #[arg(long = "tol-res", default_value_t = 1e-8)]
    pub tol_res: f64,
    /// Number of indices in the solution window.
    #[arg(long, default_value_t = 256)]
    pub window: usize,
    /// tail | partial | shifted
    #[arg(long, default_value = "tail")]
    pub flavor: Flavor,
    /// Multiplier w on q.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// Start index; scanned for when absent.
    #[arg(long)]
    pub n0: Option<i64>,
    /// Extend the solution backwards to index max(tau, sigma).
    #[arg(long)]
    pub full: bool,
}

#[derive(Debug, Args)]
pub struct SolveLpArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    #[arg(long = "tol-fp", default_value_t = 1e-13)]
    pub tol_fp: f64,
    #[arg(long = "tol-res", default_value_t = 1e-8)]
    pub tol_res: f64,
    #[arg(long, default_value_t = 256)]
    pub window: usize,
    /// tail | partial
    #[arg(long, default_value = "tail")]
    pub flavor: Flavor,
}

#[derive(Debug, Args)]
pub struct ApproxArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long = "C", default_value_t = 0.9)]
    pub c: f64,
    #[arg(long, default_value_t = 0.625)]
    pub rho: f64,
    /// First k of the cascade (at least the certified k0).
    #[arg(long)]
    pub kmin: Option<i64>,
    /// Last k of the cascade (default kmin + 6).
    #[arg(long)]
    pub kmax: Option<i64>,
    #[arg(long = "tol-fp", default_value_t = 1e-13)]
    pub tol_fp: f64,
    #[arg(long = "tol-res", default_value_t = 1e-8)]
    pub tol_res: f64,
    /// Coordinate tolerance for declaring convergence.
    #[arg(long = "tol-c", default_value_t = 1e-6)]
    pub tol_c: f64,
    #[arg(long, default_value_t = 256)]
    pub window: usize,
    /// Start every auxiliary solve at the largest admissible n0.
    #[arg(long = "common-n0")]
    pub common_n0: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Solution CSV with header `n,x`.
    #[arg(long)]
    pub solution: PathBuf,
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Check(a) => &a.common,
            Command::Solve(a) => &a.common,
            Command::SolveLp(a) => &a.common,
            Command::Approx(a) => &a.common,
            Command::Verify(a) => &a.common,
        }
    }
}

/// Whether an error stems from the input rather than from the mathematics.
pub fn is_input_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Invalid(_) | Error::Io(_) | Error::Json(_) | Error::Csv(_) | Error::Index { .. }
    )
}

/// Writes one CSV file into the output directory.
type CsvWriter = Box<dyn FnOnce(&mut dyn Write) -> Result<()>>;

/// What a subcommand produced.
struct Outcome {
    report: serde_json::Value,
    csv: Vec<(&'static str, CsvWriter)>,
    success: bool,
}

impl Outcome {
    fn new(report: impl Serialize, success: bool) -> Self {
        Self {
            report: serde_json::to_value(report).expect("reports serialize"),
            csv: Vec::new(),
            success,
        }
    }

    fn with_csv(
        mut self,
        name: &'static str,
        write: impl FnOnce(&mut dyn Write) -> Result<()> + 'static,
    ) -> Self {
        self.csv.push((name, Box::new(write)));
        self
    }
}

fn window_csv(x: Window) -> impl FnOnce(&mut dyn Write) -> Result<()> {
    move |w| x.write_csv(w)
}

fn check(problem: &ProblemSpec, args: &CheckArgs) -> Result<Outcome> {
    let which = match &args.hypotheses {
        Some(list) => HypothesisId::parse_list(list)?,
        None => HypothesisId::ALL.to_vec(),
    };
    let opts = CheckOptions {
        c: args.c,
        rho: args.rho,
        p: args.p,
        m: args.m,
        horizon: args.horizon,
    };
    let reports = check_hypotheses(problem, &which, &opts);
    let success = reports.iter().all(|r| r.verdict == Verdict::Holds);
    Ok(Outcome::new(
        serde_json::json!({ "seed": args.common.seed, "hypotheses": reports }),
        success,
    ))
}

fn solve(problem: &ProblemSpec, args: &SolveArgs) -> Result<Outcome> {
    let cfg = SolveConfig {
        m: args.m,
        tol_fp: args.tol_fp,
        tol_res: args.tol_res,
        window_len: args.window,
        flavor: args.flavor,
        scale: args.scale,
        n0: args.n0,
        ..Default::default()
    };
    let res = solve_bounded(problem, &cfg)?;
    let x = if args.full {
        backfill(problem, &res)?
    } else {
        res.solution.clone()
    };
    let report = serde_json::json!({
        "seed": args.common.seed,
        "n0": res.n0, "M": res.m, "flavor": res.flavor, "scale": res.scale, "horizon": res.horizon,
        "kappa": res.kappa, "iterations": res.iterations, "defect": res.defect,
        "residual_sup": res.residual_sup, "residual_bound": res.residual_bound,
        "residual_range": res.residual_range, "truncation_error": res.truncation_error,
        "f_bounds": res.f_bounds, "window": [x.start, x.end()], "full": args.full,
    });
    Ok(Outcome::new(report, true).with_csv("solution.csv", window_csv(x)))
}

fn solve_lp_cmd(problem: &ProblemSpec, args: &SolveLpArgs) -> Result<Outcome> {
    let cfg = LpConfig {
        p: args.p,
        tol_fp: args.tol_fp,
        tol_res: args.tol_res,
        window_len: args.window,
        flavor: args.flavor,
        ..Default::default()
    };
    let res = solve_lp(problem, &cfg)?;
    let s = &res.solve;
    let report = serde_json::json!({
        "seed": args.common.seed,
        "p": res.p, "norm": res.norm, "kappa_p": res.kappa_p, "tail_profile": res.tail_profile,
        "neglected_tail_bound": res.neglected_tail_bound, "n0": s.n0, "horizon": s.horizon,
        "iterations": s.iterations, "defect": s.defect, "residual_sup": s.residual_sup,
        "residual_bound": s.residual_bound, "truncation_error": s.truncation_error,
    });
    Ok(Outcome::new(report, true).with_csv("solution.csv", window_csv(res.solve.solution)))
}

fn approx(problem: &ProblemSpec, args: &ApproxArgs) -> Result<Outcome> {
    let defaults = ApproxConfig::default();
    let cfg = ApproxConfig {
        c: args.c,
        rho: args.rho,
        k_min: args.kmin,
        k_max: args.kmax,
        tol_c: args.tol_c,
        common_n0: args.common_n0,
        solve: SolveConfig {
            tol_fp: args.tol_fp,
            tol_res: args.tol_res,
            window_len: args.window,
            ..defaults.solve
        },
        ..defaults
    };
    let rep = approximate_limit(problem, &cfg)?;
    let mut json = serde_json::to_value(&rep).expect("reports serialize");
    json["seed"] = args.common.seed.into();
    let limit = rep.limit.clone();
    let mut table = Vec::new();
    rep.write_differences_csv(&mut table)?;
    Ok(Outcome {
        report: json,
        csv: Vec::new(),
        success: true,
    }
    .with_csv("limit.csv", window_csv(limit))
    .with_csv("differences.csv", move |w| Ok(w.write_all(&table)?)))
}

fn verify(problem: &ProblemSpec, args: &VerifyArgs) -> Result<Outcome> {
    let x = Window::read_csv(File::open(&args.solution)?)?;
    let (from, to) = residual_range(problem, &x);
    let rep = residual(problem, &x, from, to)?;
    let report = serde_json::json!({
        "seed": args.common.seed, "from": rep.from, "to": rep.to, "sup": rep.sup, "argmax": rep.argmax,
    });
    Ok(Outcome::new(report, true).with_csv("residual.csv", move |w| rep.write_csv(w)))
}

fn emit(outcome: Outcome, out: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    let text = serde_json::to_string_pretty(&outcome.report)?;
    match out {
        None => writeln!(stdout, "{text}")?,
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join("report.json"), text + "\n")?;
            for (name, write) in outcome.csv {
                let mut f = BufWriter::new(File::create(dir.join(name))?);
                write(&mut f)?;
                f.flush()?;
            }
        }
    }
    Ok(())
}

/// Execute a parsed command line, writing the report to `stdout` when no
/// output directory is given. Returns the exit status.
pub fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let common = cli.command.common();
    let problem = match ProblemSpec::load(&common.problem) {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}: {e}", common.problem.display());
            return EXIT_INPUT;
        }
    };
    let outcome = match &cli.command {
        Command::Check(a) => check(&problem, a),
        Command::Solve(a) => solve(&problem, a),
        Command::SolveLp(a) => solve_lp_cmd(&problem, a),
        Command::Approx(a) => approx(&problem, a),
        Command::Verify(a) => verify(&problem, a),
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return if is_input_error(&e) {
                EXIT_INPUT
            } else {
                EXIT_FAILURE
            };
        }
    };
    let success = outcome.success;
    if let Err(e) = emit(outcome, common.out.as_deref(), stdout) {
        let _ = writeln!(stderr, "error: {e}");
        return EXIT_INPUT;
    }
    if success {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}

/// Parse `args` (program name first) and execute.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(
            &cli,
            &mut std::io::stdout().lock(),
            &mut std::io::stderr().lock(),
        ),
        Err(e) => {
            let _ = e.print();
            // --help and --version are not errors
            if e.exit_code() == 0 {
                EXIT_OK
            } else {
                EXIT_INPUT
            }
        }
    }
}
