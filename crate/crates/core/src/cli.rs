//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for bad arguments, 2 when the solver or an
//! experiment fails (a JSON diagnostic is written to stdout).

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{check_theorem, compute_ball_bounds, residual_demo, TheoremCheck, J_CAP, SAMPLES_PER_CIRCLE};
use crate::error::{ArdcError, Result};
use crate::oracle::{airy_ref, legendre_ref, rk_reference};
use crate::problem::{BuiltinProblem, InitialValueProblem};
use crate::solver::{solve, SolveReport, SolverOptions};
use crate::StepKind;

/// Largest Bremer `lambda` checked against the Runge-Kutta reference.
const BREMER_ORACLE_MAX: f64 = 1e4;
/// Largest Legendre degree checked against the recurrence.
const LEGENDRE_ORACLE_MAX: u64 = 1_000_000;

#[derive(Debug, Parser)]
#[command(name = "ardc", version, about = "Adaptive Riccati defect-correction ODE solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one built-in problem.
    Solve(CommonArgs),
    /// Time a parameter sweep and compare against reference solutions.
    Benchmark(CommonArgs),
    /// Residual norm against iteration count on the Burst equation.
    ResidualDemo(CommonArgs),
    /// Achieved against requested accuracy on the Airy equation.
    Convergence(CommonArgs),
    /// Check the residual bound on complex balls.
    TheoremCheck(CommonArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemName {
    Airy,
    Bremer237,
    Legendre,
    Burst,
    Tone,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long, value_enum)]
    pub problem: Option<ProblemName>,
    /// Bremer frequency parameter.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Legendre degree.
    #[arg(long)]
    pub nu: Option<u64>,
    /// Burst parameter, `omega_max = sqrt(m^2 - 1)`.
    #[arg(long)]
    pub m: Option<f64>,
    /// Tone frequency.
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long = "eps-h")]
    pub eps_h: Option<f64>,
    #[arg(long = "n-ricc")]
    pub n_ricc: Option<usize>,
    #[arg(long = "n-spec")]
    pub n_spec: Option<usize>,
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long)]
    pub t1: Option<f64>,
    #[arg(long = "h-init")]
    pub h_init: Option<f64>,
    /// Dense output on `count` equispaced points of `[a, b]`, as `a:b:count`.
    #[arg(long, value_parser = parse_dense)]
    pub dense: Option<DenseSpec>,
    /// Sweep values (benchmark parameter, residual-demo peak frequencies,
    /// theorem-check `t:rho` centers).
    #[arg(long, value_delimiter = ',')]
    pub values: Option<Vec<String>>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Timed repetitions per benchmark row, after one discarded warm-up.
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseSpec {
    pub a: f64,
    pub b: f64,
    pub count: usize,
}

impl DenseSpec {
    pub fn points(&self) -> Vec<f64> {
        match self.count {
            0 => vec![],
            1 => vec![self.a],
            c => (0..c)
                .map(|i| self.a + (self.b - self.a) * i as f64 / (c - 1) as f64)
                .collect(),
        }
    }
}

fn parse_dense(s: &str) -> std::result::Result<DenseSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected a:b:count, got {s:?}"));
    }
    let a: f64 = parts[0].parse().map_err(|e| format!("bad start {:?}: {e}", parts[0]))?;
    let b: f64 = parts[1].parse().map_err(|e| format!("bad end {:?}: {e}", parts[1]))?;
    let count: usize = parts[2].parse().map_err(|e| format!("bad count {:?}: {e}", parts[2]))?;
    if !(a.is_finite() && b.is_finite() && a <= b) {
        return Err(format!("need finite a <= b, got {a}:{b}"));
    }
    Ok(DenseSpec { a, b, count })
}

/// Outcome of a subcommand before it is mapped to an exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Solver(ArdcError),
    Io(String),
}

impl From<ArdcError> for CliError {
    fn from(e: ArdcError) -> Self {
        match e {
            ArdcError::InvalidParameter(m) => CliError::Usage(m),
            other => CliError::Solver(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Benchmark(a) => cmd_benchmark(a),
        Command::ResidualDemo(a) => cmd_residual_demo(a),
        Command::Convergence(a) => cmd_convergence(a),
        Command::TheoremCheck(a) => cmd_theorem_check(a),
    };
    match result {
        Ok(()) => 0,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}\n\nRun with --help for usage.");
            1
        }
        Err(CliError::Solver(e)) => {
            let diag = json!({ "error": e.kind(), "message": e.to_string() });
            let text = serde_json::to_string_pretty(&diag).expect("diagnostic serializes");
            // a closed pipe must not turn a reported failure into a panic
            let _ = writeln!(std::io::stdout(), "{text}");
            2
        }
        Err(CliError::Io(m)) => {
            eprintln!("error: {m}");
            2
        }
    }
}

fn emit(args: &CommonArgs, body: &str) -> std::result::Result<(), CliError> {
    match &args.out {
        Some(p) => std::fs::write(p, body)?,
        None => std::io::stdout().write_all(body.as_bytes())?,
    }
    Ok(())
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_table(header: &[&str], rows: &[Vec<String>]) -> std::result::Result<String, CliError> {
    let mut w = csv::Writer::from_writer(vec![]);
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

fn builtin(args: &CommonArgs, default: ProblemName) -> std::result::Result<BuiltinProblem, CliError> {
    let p = args.problem.unwrap_or(default);
    Ok(match p {
        ProblemName::Airy => BuiltinProblem::Airy,
        ProblemName::Bremer237 => BuiltinProblem::Bremer237 {
            lambda: args.lambda.unwrap_or(1e5),
        },
        ProblemName::Legendre => BuiltinProblem::Legendre {
            nu: args.nu.unwrap_or(100),
        },
        ProblemName::Burst => BuiltinProblem::Burst {
            m: args.m.unwrap_or_else(|| (1e6f64 + 1.0).sqrt()),
        },
        ProblemName::Tone => BuiltinProblem::Tone {
            omega: args.omega.unwrap_or(1e3),
        },
    })
}

fn problem_ivp(args: &CommonArgs, p: &BuiltinProblem) -> Result<InitialValueProblem> {
    let mut ivp = p.ivp()?;
    if args.t0.is_some() || args.t1.is_some() {
        if args.t0.is_some_and(|t| t != ivp.t0) {
            return Err(ArdcError::InvalidParameter(
                "--t0 must equal the problem's start: initial data is only known there".into(),
            ));
        }
        let (t0, t1) = (ivp.t0, args.t1.unwrap_or(ivp.t1));
        ivp = ivp.with_interval(t0, t1)?;
    }
    if let Some(h) = args.h_init {
        if !(h > 0.0) {
            return Err(ArdcError::InvalidParameter(format!(
                "--h-init must be positive, got {h}"
            )));
        }
        ivp.h_init = h;
    }
    Ok(ivp)
}

fn solver_options(args: &CommonArgs) -> Result<SolverOptions> {
    let mut o = SolverOptions::default();
    if let Some(e) = args.eps {
        o = o.with_eps(e);
    }
    if let Some(e) = args.eps_h {
        o = o.with_eps_h(e);
    }
    if let Some(n) = args.n_ricc {
        o = o.with_n_ricc(n);
    }
    if let Some(n) = args.n_spec {
        o = o.with_n_spec(n);
    }
    if let Some(d) = &args.dense {
        o = o.with_dense(d.points());
    }
    o.validate()?;
    Ok(o)
}

fn problem_json(p: &BuiltinProblem, ivp: &InitialValueProblem) -> Value {
    let params = match *p {
        BuiltinProblem::Airy => json!({}),
        BuiltinProblem::Bremer237 { lambda } => json!({ "lambda": lambda }),
        BuiltinProblem::Legendre { nu } => json!({ "nu": nu }),
        BuiltinProblem::Burst { m } => json!({ "m": m }),
        BuiltinProblem::Tone { omega } => json!({ "omega": omega }),
    };
    json!({
        "name": p.name(),
        "params": params,
        "t0": ivp.t0,
        "t1": ivp.t1,
        "u0": ivp.u0,
        "du0": ivp.du0,
    })
}

/// The JSON document written by `solve`.
pub fn report_json(p: &BuiltinProblem, ivp: &InitialValueProblem, opts: &SolverOptions, r: &SolveReport) -> Value {
    let mut doc = json!({
        "problem": problem_json(p, ivp),
        "options": opts,
        "stats": r.stats,
        "steps": r.steps,
        "kappa": r.kappa,
        "eps_floor": r.eps_floor,
    });
    if let Some(d) = &r.dense {
        doc["dense"] = json!(d);
    }
    doc
}

fn complex_cells(z: Complex64) -> [String; 2] {
    [num(z.re), num(z.im)]
}

fn cmd_solve(args: &CommonArgs) -> std::result::Result<(), CliError> {
    let p = builtin(args, ProblemName::Airy)?;
    let ivp = problem_ivp(args, &p)?;
    let opts = solver_options(args)?;
    let r = solve(&ivp, &opts)?;
    let body = match args.format {
        Format::Json => to_json(&report_json(&p, &ivp, &opts, &r)),
        Format::Csv => match &r.dense {
            Some(d) => {
                let rows: Vec<Vec<String>> = d
                    .iter()
                    .map(|q| {
                        let mut row = vec![num(q.t)];
                        row.extend(complex_cells(q.u));
                        row.extend(complex_cells(q.du));
                        row
                    })
                    .collect();
                csv_table(&["t", "re_u", "im_u", "re_du", "im_du"], &rows)?
            }
            None => {
                let rows: Vec<Vec<String>> = r
                    .steps
                    .iter()
                    .map(|s| {
                        let mut row = vec![
                            kind_name(s.kind).to_string(),
                            num(s.t_i),
                            num(s.h),
                            s.accepted.to_string(),
                            s.iterations_or_halvings.to_string(),
                        ];
                        row.extend(complex_cells(s.u_end));
                        row.extend(complex_cells(s.du_end));
                        row.push(num(s.res_or_err));
                        row
                    })
                    .collect();
                csv_table(
                    &[
                        "kind",
                        "t_i",
                        "h",
                        "accepted",
                        "iterations_or_halvings",
                        "re_u",
                        "im_u",
                        "re_du",
                        "im_du",
                        "res_or_err",
                    ],
                    &rows,
                )?
            }
        },
    };
    emit(args, &body)
}

fn kind_name(k: StepKind) -> &'static str {
    match k {
        StepKind::Oscillatory => "oscillatory",
        StepKind::Spectral => "spectral",
    }
}

/// Error of a solve against the problem's reference, or `None` when the
/// reference is out of reach and only the `kappa * eps_mach` floor applies.
pub fn reference_error(p: &BuiltinProblem, ivp: &InitialValueProblem, r: &SolveReport) -> Result<Option<f64>> {
    let accepted: Vec<(f64, Complex64)> = r.t_grid.iter().copied().zip(r.u.iter().copied()).skip(1).collect();
    let rel = |got: Complex64, want: Complex64| (got - want).norm() / want.norm();
    match *p {
        BuiltinProblem::Airy => {
            let mut worst = 0.0f64;
            for &(t, u) in &accepted {
                worst = worst.max(rel(u, airy_ref(t)?.solution().0));
            }
            Ok(Some(worst))
        }
        BuiltinProblem::Legendre { nu } => {
            if nu > LEGENDRE_ORACLE_MAX {
                return Ok(None);
            }
            let mut worst = 0.0f64;
            for &(t, u) in &accepted {
                worst = worst.max(rel(u, Complex64::new(legendre_ref(nu, t)?.0, 0.0)));
            }
            Ok(Some(worst))
        }
        BuiltinProblem::Tone { omega } => {
            let mut worst = 0.0f64;
            for &(t, u) in &accepted {
                let want = Complex64::new((omega * (t - ivp.t0)).cos(), 0.0);
                worst = worst.max((u - want).norm());
            }
            Ok(Some(worst))
        }
        BuiltinProblem::Bremer237 { lambda } if lambda > BREMER_ORACLE_MAX => Ok(None),
        BuiltinProblem::Bremer237 { .. } | BuiltinProblem::Burst { .. } => {
            match rk_reference(ivp, &[ivp.t1], 1e-14, 1e-14) {
                Ok(o) => Ok(Some(rel(r.u_end(), o.u[0]))),
                Err(ArdcError::OracleRefusal(_)) => Ok(None),
                Err(e) => Err(e),
            }
        }
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn parse_values<T>(args: &CommonArgs, default: &[T]) -> std::result::Result<Vec<T>, CliError>
where
    T: std::str::FromStr + Clone,
    T::Err: std::fmt::Display,
{
    match &args.values {
        None => Ok(default.to_vec()),
        Some(v) => v
            .iter()
            .map(|s| {
                s.trim()
                    .parse::<T>()
                    .map_err(|e| CliError::Usage(format!("bad sweep value {s:?}: {e}")))
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Serialize)]
struct BenchRow {
    param: f64,
    error: Option<f64>,
    eps_floor: f64,
    t_solve: f64,
    stats: crate::solver::SolveStats,
}

fn cmd_benchmark(args: &CommonArgs) -> std::result::Result<(), CliError> {
    let name = args.problem.unwrap_or(ProblemName::Bremer237);
    let problems: Vec<(f64, BuiltinProblem)> = match name {
        ProblemName::Bremer237 => parse_values(args, &[1e1, 1e2, 1e3, 1e4, 1e5, 1e6, 1e7])?
            .into_iter()
            .map(|l| (l, BuiltinProblem::Bremer237 { lambda: l }))
            .collect(),
        ProblemName::Legendre => parse_values(args, &[10u64, 100, 1000, 10_000, 100_000, 1_000_000])?
            .into_iter()
            .map(|n| (n as f64, BuiltinProblem::Legendre { nu: n }))
            .collect(),
        ProblemName::Burst => parse_values(args, &[1e1, 1e2, 1e3, 1e4])?
            .into_iter()
            .map(|w| (w, BuiltinProblem::burst_with_peak(w)))
            .collect(),
        ProblemName::Tone => parse_values(args, &[1e1, 1e3, 1e5])?
            .into_iter()
            .map(|w| (w, BuiltinProblem::Tone { omega: w }))
            .collect(),
        ProblemName::Airy => parse_values(args, &[1e2, 1e4, 1e6, 1e8])?
            .into_iter()
            .map(|t1| (t1, BuiltinProblem::Airy))
            .collect(),
    };
    let mut opts = solver_options(args)?;
    if name == ProblemName::Bremer237 && args.n_ricc.is_none() {
        opts = opts.with_n_ricc(40);
    }
    let mut rows = Vec::with_capacity(problems.len());
    for (param, p) in problems {
        let mut ivp = problem_ivp(args, &p)?;
        if name == ProblemName::Airy {
            let t0 = ivp.t0;
            ivp = ivp.with_interval(t0, param)?;
        }
        let r = solve(&ivp, &opts)?;
        let mut times = Vec::with_capacity(args.reps);
        for _ in 0..args.reps {
            let start = Instant::now();
            let again = solve(&ivp, &opts)?;
            times.push(start.elapsed().as_secs_f64());
            std::hint::black_box(again);
        }
        rows.push(BenchRow {
            param,
            error: reference_error(&p, &ivp, &r)?,
            eps_floor: r.eps_floor,
            t_solve: median(times),
            stats: r.stats,
        });
    }
    let body = match args.format {
        Format::Json => to_json(&json!({ "problem": name, "options": opts, "rows": rows })),
        Format::Csv => {
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    let s = &r.stats;
                    vec![
                        num(r.param),
                        r.error.map(num).unwrap_or_else(|| format!("<= {}", num(r.eps_floor))),
                        num(r.t_solve),
                        s.n_s_osc.attempted.to_string(),
                        s.n_s_osc.accepted.to_string(),
                        s.n_s_slo.attempted.to_string(),
                        s.n_s_slo.accepted.to_string(),
                        s.n_s_tot.attempted.to_string(),
                        s.n_s_tot.accepted.to_string(),
                        s.n_f.to_string(),
                        s.n_ls.to_string(),
                    ]
                })
                .collect();
            csv_table(
                &[
                    "param",
                    "error",
                    "t_solve",
                    "n_s_osc_attempted",
                    "n_s_osc_accepted",
                    "n_s_slo_attempted",
                    "n_s_slo_accepted",
                    "n_s_tot_attempted",
                    "n_s_tot_accepted",
                    "n_f",
                    "n_ls",
                ],
                &cells,
            )?
        }
    };
    emit(args, &body)
}

fn cmd_residual_demo(args: &CommonArgs) -> std::result::Result<(), CliError> {
    let omega_max = parse_values(args, &[1e1, 1e2, 1e3, 1e4])?;
    let n = args.n_ricc.unwrap_or(16);
    let interval = (args.t0.unwrap_or(0.0), args.t1.unwrap_or(0.5));
    if !(interval.1 > interval.0) {
        return Err(CliError::Usage(format!("need t1 > t0, got {interval:?}")));
    }
    let series = residual_demo(&omega_max, n, interval, 12)?;
    let body = match args.format {
        Format::Json => to_json(&json!({ "n": n, "interval": [interval.0, interval.1], "series": series })),
        Format::Csv => {
            let mut rows = vec![];
            for s in &series {
                for (j, v) in s.res_norm.iter().enumerate() {
                    rows.push(vec![
                        if s.omega_const.is_some() { "model" } else { "burst" }.to_string(),
                        num(s.omega_max),
                        s.omega_const.map(num).unwrap_or_default(),
                        j.to_string(),
                        num(*v),
                    ]);
                }
            }
            csv_table(&["series", "omega_max", "omega_const", "j", "res_norm"], &rows)?
        }
    };
    emit(args, &body)
}

#[derive(Debug, Clone, Serialize)]
struct ConvergenceRow {
    t1: f64,
    eps: f64,
    achieved: f64,
    floor: f64,
    within: bool,
}

fn cmd_convergence(args: &CommonArgs) -> std::result::Result<(), CliError> {
    if args.problem.is_some_and(|p| p != ProblemName::Airy) {
        return Err(CliError::Usage("convergence runs on the Airy equation only".into()));
    }
    let t1s = match args.t1 {
        Some(t) => vec![t],
        None => vec![1e2, 1e4, 1e6, 1e8],
    };
    let epss: Vec<f64> = match args.eps {
        Some(e) => vec![e],
        None => (3..=13).map(|k| 10f64.powi(-k)).collect(),
    };
    let base = solver_options(&CommonArgs {
        eps: None,
        ..args.clone()
    })?;
    let mut rows = vec![];
    for &t1 in &t1s {
        let ivp = BuiltinProblem::Airy.ivp()?.with_interval(1.0, t1)?;
        let want = airy_ref(t1)?.solution().0;
        for &eps in &epss {
            let r = solve(&ivp, &base.clone().with_eps(eps))?;
            let achieved = (r.u_end() - want).norm() / want.norm();
            rows.push(ConvergenceRow {
                t1,
                eps,
                achieved,
                floor: r.eps_floor,
                within: achieved <= 10.0 * eps.max(r.eps_floor),
            });
        }
    }
    let body = match args.format {
        Format::Json => to_json(&json!({ "problem": "airy", "rows": rows })),
        Format::Csv => {
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        num(r.t1),
                        num(r.eps),
                        num(r.achieved),
                        num(r.floor),
                        r.within.to_string(),
                    ]
                })
                .collect();
            csv_table(&["t1", "eps", "achieved", "floor", "within"], &cells)?
        }
    };
    emit(args, &body)
}

fn cmd_theorem_check(args: &CommonArgs) -> std::result::Result<(), CliError> {
    let p = builtin(args, ProblemName::Burst)?;
    let pair = p.coefficients()?;
    let centers: Vec<(f64, f64)> = match &args.values {
        None => vec![(0.1, 0.1), (0.25, 0.2), (0.4, 0.3)],
        Some(v) => v
            .iter()
            .map(|s| {
                let (t, rho) = s
                    .split_once(':')
                    .ok_or_else(|| CliError::Usage(format!("expected t:rho, got {s:?}")))?;
                let parse = |x: &str| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|e| CliError::Usage(format!("bad number {x:?}: {e}")))
                };
                Ok((parse(t)?, parse(rho)?))
            })
            .collect::<std::result::Result<_, CliError>>()?,
    };
    let mut checks: Vec<(f64, f64, std::result::Result<TheoremCheck, String>)> = vec![];
    for (t, rho) in centers {
        let b = compute_ball_bounds(&pair, t, rho, SAMPLES_PER_CIRCLE)?;
        match check_theorem(&b, &pair, J_CAP) {
            Ok(c) => checks.push((t, rho, Ok(c))),
            Err(e @ ArdcError::NotApplicable(_)) => checks.push((t, rho, Err(e.to_string()))),
            Err(e) => return Err(e.into()),
        }
    }
    let body = match args.format {
        Format::Json => {
            let items: Vec<Value> = checks
                .iter()
                .map(|(t, rho, c)| match c {
                    Ok(c) => json!({ "t": t, "rho": rho, "status": "checked", "check": c }),
                    Err(m) => json!({ "t": t, "rho": rho, "status": "not_applicable", "reason": m }),
                })
                .collect();
            to_json(&json!({ "problem": p.name(), "checks": items }))
        }
        Format::Csv => {
            let mut rows = vec![];
            for (t, rho, c) in &checks {
                if let Ok(c) = c {
                    for r in &c.rows {
                        rows.push(vec![
                            num(*t),
                            num(*rho),
                            num(c.bounds.eta1),
                            num(c.bounds.eta2),
                            num(c.bounds.eta3),
                            num(c.bounds.eta4),
                            c.k_max.to_string(),
                            r.j.to_string(),
                            num(r.r),
                            num(r.bound),
                            num(r.observed),
                            r.holds.to_string(),
                        ]);
                    }
                }
            }
            csv_table(
                &[
                    "t", "rho", "eta1", "eta2", "eta3", "eta4", "k_max", "j", "r", "bound", "observed", "holds",
                ],
                &rows,
            )?
        }
    };
    emit(args, &body)
}

/// One-line summary of a report, for logs.
pub fn summary(r: &SolveReport) -> String {
    let mut s = String::new();
    let st = &r.stats;
    let _ = write!(
        s,
        "osc ({}, {}) slo ({}, {}) n_f {} n_ls {} kappa {:e}",
        st.n_s_osc.attempted, st.n_s_osc.accepted, st.n_s_slo.attempted, st.n_s_slo.accepted, st.n_f, st.n_ls, r.kappa
    );
    s
}
