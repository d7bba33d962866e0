//! `cnls` command-line front end.
//!
//! Exit status: 0 success, 1 hypothesis failure, 2 solver failure, 3 input
//! error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use cnls_core::config::{format_float, parse_config_with, Config, GridOverride, Report};
use cnls_core::continuation::trace_branch;
use cnls_core::greens::Domain;
use cnls_core::hypotheses::{check_all, HypothesisReport, Variant};
use cnls_core::model::{Grid, Problem};
use cnls_core::operator::{Kernels, WavePair};
use cnls_core::oracle::{oracle_solve_with, Boundary, OracleOptions};
use cnls_core::solver::{solve, Solution, SolverConfig, Symmetry};
use cnls_core::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_HYPOTHESIS: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "cnls", version, about = "Solitary waves of linearly coupled NLS systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Problem document (TOML).
    config: PathBuf,
    /// Write the key=value report to this file as well.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Override the grid point count (odd).
    #[arg(long = "grid-N")]
    grid_n: Option<usize>,
    /// Override the grid half-width.
    #[arg(long = "grid-L")]
    grid_l: Option<f64>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    /// Profile CSV (x,u1,u2); written to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Solve even when a required hypothesis fails.
    #[arg(long)]
    override_hypotheses: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the existence hypotheses and print witnesses.
    Check {
        #[command(flatten)]
        common: Common,
    },
    /// Positive solution on the full line.
    Solve(SolveArgs),
    /// Odd solution from the half-line problem.
    SolveOdd(SolveArgs),
    /// Trace a branch in lambda.
    Branch {
        #[command(flatten)]
        solve: SolveArgs,
        /// Comma-separated parameter values, solved in the given order.
        #[arg(long, value_delimiter = ',', required = true)]
        lambdas: Vec<f64>,
        /// nonlinear (c, f scaled) or fully (b, c, e, f scaled).
        #[arg(long, default_value = "nonlinear")]
        variant: String,
        /// Directory for one profile CSV per converged point.
        #[arg(long)]
        profiles: Option<PathBuf>,
    },
    /// Finite-difference Newton solve, independent of the Green's pipeline.
    Oracle(SolveArgs),
    /// Sample a Green's kernel on a subgrid (x,s,G).
    Greens {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
        /// 1 for the kernel of -u'' + a u, 2 for -u'' + d u.
        #[arg(long, default_value_t = 1)]
        component: usize,
        /// Use every stride-th node; defaults to about 101 nodes per axis.
        #[arg(long)]
        stride: Option<usize>,
    },
}

/// A failed run: exit status and message.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::HypothesisFailure(_) => EXIT_HYPOTHESIS,
        Error::NoNontrivialSolution(_)
        | Error::NewtonDivergence { .. }
        | Error::SingularJacobian(_)
        | Error::IntegrationOverflow(_) => EXIT_SOLVER,
        Error::InvalidCoefficient(_)
        | Error::EmptySupport
        | Error::InvalidGrid(_)
        | Error::NonPositivePotential(_)
        | Error::DivisionDomain(_)
        | Error::UnsupportedNonlinearity(_)
        | Error::ParameterOutOfRange { .. }
        | Error::SymmetryViolation(_)
        | Error::SupportContainsOrigin
        | Error::Parse { .. } => EXIT_INPUT,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

type Outcome = std::result::Result<i32, Failure>;

/// Parses `args` (including the program name) and runs one subcommand.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Outcome {
    match cmd {
        Command::Check { common } => check(&common, stdout),
        Command::Solve(args) => solve_cmd(&args, Symmetry::None, stdout, stderr),
        Command::SolveOdd(args) => solve_cmd(&args, Symmetry::Odd, stdout, stderr),
        Command::Branch {
            solve,
            lambdas,
            variant,
            profiles,
        } => branch(&solve, &lambdas, &variant, profiles.as_deref(), stdout, stderr),
        Command::Oracle(args) => oracle(&args, stdout, stderr),
        Command::Greens {
            common,
            out,
            component,
            stride,
        } => greens(&common, out.as_deref(), component, stride, stdout, stderr),
    }
}

fn load(common: &Common) -> std::result::Result<Config, Failure> {
    let text = fs::read_to_string(&common.config).map_err(|e| {
        Failure::input(format!("cannot read {}: {e}", common.config.display()))
    })?;
    Ok(parse_config_with(
        &text,
        GridOverride {
            half_width: common.grid_l,
            points: common.grid_n,
        },
    )?)
}

fn write_file(path: &Path, contents: &str) -> std::result::Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure {
        code: EXIT_INPUT,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

/// Sends the report to the `--report` file and to `sink`.
fn emit_report(
    report: &Report,
    common: &Common,
    sink: &mut dyn Write,
) -> std::result::Result<(), Failure> {
    let text = report.to_string();
    if let Some(path) = &common.report {
        write_file(path, &text)?;
    }
    sink.write_all(text.as_bytes())
        .map_err(|e| Failure::input(format!("cannot write report: {e}")))
}

/// Writes CSV to `out`, or to stdout; returns where the report should go.
fn emit_csv<'a>(
    csv: &str,
    out: Option<&Path>,
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
) -> std::result::Result<&'a mut dyn Write, Failure> {
    match out {
        Some(path) => {
            write_file(path, csv)?;
            Ok(stdout)
        }
        None => {
            stdout
                .write_all(csv.as_bytes())
                .map_err(|e| Failure::input(format!("cannot write CSV: {e}")))?;
            Ok(stderr)
        }
    }
}

pub fn profile_csv(grid: &Grid, u: &WavePair) -> String {
    let mut s = String::from("x,u1,u2\n");
    for j in 0..grid.len() {
        s.push_str(&format!(
            "{},{},{}\n",
            format_float(grid.x(j)),
            format_float(u.u1[j]),
            format_float(u.u2[j])
        ));
    }
    s
}

fn grid_lines(report: &mut Report, p: &Problem) {
    report
        .float("grid.L", p.grid().half_width())
        .text("grid.N", p.grid().len())
        .text("nonlinearity", p.nonlinearity().name());
}

fn hypothesis_lines(report: &mut Report, h: &HypothesisReport) {
    for e in &h.entries {
        report
            .text(format!("hypothesis.{}", e.id), e.status)
            .text(format!("hypothesis.{}.detail", e.id), &e.detail);
        for (name, v) in &e.witnesses {
            report.float(format!("witness.{name}"), *v);
        }
    }
    if let Some(c) = &h.cone {
        report
            .float("cone.support_lo", c.support.0)
            .float("cone.support_hi", c.support.1);
        for i in 0..2 {
            report
                .float(format!("cone.m{}", i + 1), c.m[i])
                .float(format!("cone.p0_{}", i + 1), c.p0[i])
                .float(format!("cone.product{}", i + 1), c.product(i));
        }
    }
    if let Some(g) = &h.growth {
        report
            .float("growth.gamma", g.gamma)
            .float("growth.k", g.k)
            .float("growth.r0", g.r0)
            .float("growth.delta", g.delta)
            .float("growth.K", g.big_k)
            .float("growth.R0", g.big_r0);
    }
    if let Some(r) = &h.radii {
        report
            .float("annulus.B", r.b)
            .float("annulus.C_max", r.c_max)
            .float("annulus.C_min", r.c_min)
            .float("annulus.r", r.r)
            .float("annulus.R", r.big_r);
    }
    for (k, w) in h.warnings.iter().enumerate() {
        report.text(format!("warning.{k}"), w);
    }
    report.text(
        "hypotheses.required",
        if h.all_required_pass() { "pass" } else { "fail" },
    );
}

fn check(common: &Common, stdout: &mut dyn Write) -> Outcome {
    let cfg = load(common)?;
    let p = &cfg.problem;
    let domain = match cfg.solver.symmetry {
        Symmetry::None => Domain::FullLine,
        Symmetry::Odd => Domain::HalfLine,
    };
    let kernels = Kernels::new(p, domain)?;
    let h = check_all(p, &kernels);
    let mut report = Report::new();
    grid_lines(&mut report, p);
    report.text("domain", if domain == Domain::FullLine { "full-line" } else { "half-line" });
    hypothesis_lines(&mut report, &h);
    emit_report(&report, common, stdout)?;
    Ok(if h.all_required_pass() {
        EXIT_OK
    } else {
        EXIT_HYPOTHESIS
    })
}

fn solution_lines(report: &mut Report, s: &Solution) {
    let d = &s.diagnostics;
    let [n1, n2] = s.fixed_point.sup_norms();
    report
        .text("status", "ok")
        .text("method", d.method)
        .text("iterations", d.iterations)
        .text(
            "seed_level",
            d.seed_level.map_or("supplied".to_string(), |k| k.to_string()),
        )
        .float("norm", d.norm)
        .float("norm_u1", n1)
        .float("norm_u2", n2)
        .float("fixed_point_defect", d.fixed_point_defect)
        .float("residual", d.residual)
        .float("boundary", d.boundary)
        .float("discretization_gap", d.discretization_gap)
        .float("cone_gap_1", d.cone_gap[0])
        .float("cone_gap_2", d.cone_gap[1])
        .float("clipped", d.clipped)
        .float("min_value", s.wave.min_value())
        .float("r", d.r)
        .float("R", d.big_r);
}

fn solver_config(args: &SolveArgs, cfg: &Config, symmetry: Symmetry) -> SolverConfig {
    SolverConfig {
        symmetry,
        override_hypotheses: args.override_hypotheses,
        ..cfg.solver
    }
}

fn solve_cmd(
    args: &SolveArgs,
    symmetry: Symmetry,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Outcome {
    let cfg = load(&args.common)?;
    let scfg = solver_config(args, &cfg, symmetry);
    let mut report = Report::new();
    grid_lines(&mut report, &cfg.problem);
    report.text("symmetry", symmetry.as_str());
    match solve(&cfg.problem, &scfg) {
        Ok(s) => {
            solution_lines(&mut report, &s);
            let sink = emit_csv(&profile_csv(&s.grid, &s.wave), args.out.as_deref(), stdout, stderr)?;
            emit_report(&report, &args.common, sink)?;
            Ok(EXIT_OK)
        }
        Err(e) => {
            report.text("status", "error").text("error", &e);
            if let Some(path) = &args.common.report {
                write_file(path, &report.to_string())?;
            }
            Err(e.into())
        }
    }
}

pub fn branch_csv(points: &[cnls_core::continuation::BranchPoint]) -> String {
    let mut s = String::from("lambda,norm,r_lambda,R_lambda,converged\n");
    for p in points {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            format_float(p.lambda),
            p.norm().map_or("NaN".to_string(), format_float),
            format_float(p.r_lambda),
            format_float(p.big_r_lambda),
            p.converged()
        ));
    }
    s
}

fn branch(
    args: &SolveArgs,
    lambdas: &[f64],
    variant: &str,
    profiles: Option<&Path>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Outcome {
    let variant: Variant = variant.parse()?;
    let cfg = load(&args.common)?;
    let scfg = SolverConfig {
        override_hypotheses: args.override_hypotheses,
        ..cfg.solver
    };
    let points = trace_branch(&cfg.problem, lambdas, variant, &scfg)?;
    if let Some(dir) = profiles {
        fs::create_dir_all(dir)
            .map_err(|e| Failure::input(format!("cannot create {}: {e}", dir.display())))?;
        for (i, p) in points.iter().enumerate() {
            if let Some(s) = &p.solution {
                write_file(&dir.join(format!("point_{i}.csv")), &profile_csv(&s.grid, &s.wave))?;
            }
        }
    }
    let mut report = Report::new();
    grid_lines(&mut report, &cfg.problem);
    report
        .text("variant", variant.as_str())
        .text("symmetry", scfg.symmetry.as_str())
        .text("points", points.len());
    let converged = points.iter().filter(|p| p.converged()).count();
    report.text("converged", converged);
    for (i, p) in points.iter().enumerate() {
        if let Some(e) = &p.error {
            report.text(format!("point.{i}.error"), e);
        }
    }
    let sink = emit_csv(&branch_csv(&points), args.out.as_deref(), stdout, stderr)?;
    emit_report(&report, &args.common, sink)?;
    Ok(if converged == 0 && !points.is_empty() {
        EXIT_SOLVER
    } else {
        EXIT_OK
    })
}

/// Seed amplitudes for the stand-alone oracle run.
const ORACLE_LADDER: [f64; 6] = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0];

fn oracle(args: &SolveArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Outcome {
    let cfg = load(&args.common)?;
    let p = &cfg.problem;
    let (bc, grid) = match cfg.solver.symmetry {
        Symmetry::None => (Boundary::FullLine, *p.grid()),
        Symmetry::Odd => {
            if p.origin_in_support() {
                return Err(Error::SupportContainsOrigin.into());
            }
            (Boundary::HalfLine, p.grid().half_line())
        }
    };
    let support = p.coupling_support();
    let floor = p.a().infimum().min(p.d().infimum()).sqrt();
    let shape: Vec<f64> = (0..grid.len())
        .map(|j| {
            let x = grid.x(j);
            let dist = support
                .iter()
                .map(|&(lo, hi)| (lo - x).max(x - hi).max(0.0))
                .fold(f64::INFINITY, f64::min);
            (-floor * dist).exp()
        })
        .collect();
    let mut notes = Vec::new();
    for &t in &ORACLE_LADDER {
        let seed: Vec<f64> = shape.iter().map(|v| t * v).collect();
        match oracle_solve_with(p, &WavePair::new(seed.clone(), seed), bc, None, OracleOptions::default()) {
            Ok(o) if o.wave.norm() > 1e-6 => {
                let (wave, out_grid) = match bc {
                    Boundary::FullLine => (o.wave, grid),
                    Boundary::HalfLine => (o.wave.odd_extension(), *p.grid()),
                };
                let [n1, n2] = wave.sup_norms();
                let mut report = Report::new();
                grid_lines(&mut report, p);
                report
                    .text("status", "ok")
                    .text("method", "fd-newton")
                    .text("symmetry", cfg.solver.symmetry.as_str())
                    .float("seed_amplitude", t)
                    .text("iterations", o.iterations)
                    .float("norm", n1.max(n2))
                    .float("norm_u1", n1)
                    .float("norm_u2", n2)
                    .float("residual", o.residual)
                    .float("min_value", wave.min_value());
                let sink = emit_csv(&profile_csv(&out_grid, &wave), args.out.as_deref(), stdout, stderr)?;
                emit_report(&report, &args.common, sink)?;
                return Ok(EXIT_OK);
            }
            Ok(_) => notes.push(format!("amplitude {t}: converged to zero")),
            Err(e) => notes.push(format!("amplitude {t}: {e}")),
        }
    }
    Err(Error::NoNontrivialSolution(notes.join("; ")).into())
}

fn greens(
    common: &Common,
    out: Option<&Path>,
    component: usize,
    stride: Option<usize>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Outcome {
    if !(component == 1 || component == 2) {
        return Err(Failure::input("--component must be 1 or 2"));
    }
    let cfg = load(common)?;
    let p = &cfg.problem;
    let kernels = Kernels::full_line(p)?;
    let kernel = kernels.kernel(component - 1);
    let n = p.grid().len();
    let stride = stride.unwrap_or(n.div_ceil(101).max(1)).max(1);
    let nodes: Vec<usize> = (0..n).step_by(stride).collect();
    let mut csv = String::from("x,s,G\n");
    for &j in &nodes {
        for &k in &nodes {
            csv.push_str(&format!(
                "{},{},{}\n",
                format_float(p.grid().x(j)),
                format_float(p.grid().x(k)),
                format_float(kernel.at_nodes(j, k))
            ));
        }
    }
    let basis = kernel.basis();
    let cert = basis.certificate();
    let mut report = Report::new();
    grid_lines(&mut report, p);
    report
        .text("component", component)
        .text("stride", stride)
        .float("x0", basis.x0())
        .float("wronskian_raw", cert.raw_wronskian)
        .float("wronskian_drift", cert.wronskian_drift)
        .float("richardson_error", cert.richardson_error)
        .float("ode_residual", cert.ode_residual);
    let sink = emit_csv(&csv, out, stdout, stderr)?;
    emit_report(&report, common, sink)?;
    Ok(EXIT_OK)
}
