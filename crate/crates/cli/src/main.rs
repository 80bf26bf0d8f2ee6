use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use cubicmin::classify::{classify_float, classify_rational, FloatTolerances};
use cubicmin::fixtures::replay;
use cubicmin::io::{cubic_to_json, parse_point, parse_point_exact, parse_polynomial, sparse_to_json};
use cubicmin::local_min::{build_complete_sdp, find_local_minimum, find_strict_local_minimum, has_second_order_point, solve_sos, SearchOptions};
use cubicmin::newton::{
    fractal_grid, run, run_multivariate, Method, MultiC3Function, NewtonOptions, Region, ScalarC3Function,
    UnivariatePolynomial,
};
use cubicmin::reductions::{
    brute_force_cuts, disk_pencil, doubling_pencil, irrational_pencil, maxcut_to_system, spectrahedron_to_cubic,
    system_to_cubic, system_to_quartic, verify_maxcut_reduction, MaxCutInstance, SpectrahedronDescription,
};
use cubicmin::sdp::SolverOptions;
use cubicmin::sdpa::export_sdpa;
use cubicmin::{CubicPolynomial, Error as CoreError};

#[derive(Parser)]
#[command(name = "cubicmin", version, about = "Local minima and second-order points of cubic polynomials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ClassifyTols {
    /// Gradient tolerance
    #[arg(long, default_value_t = 1e-8)]
    grad_tol: f64,
    /// Hessian semidefiniteness tolerance
    #[arg(long, default_value_t = 1e-8)]
    psd_tol: f64,
    /// Hessian definiteness tolerance
    #[arg(long, default_value_t = 1e-8)]
    pd_tol: f64,
    /// Null-space threshold relative to the largest singular value
    #[arg(long, default_value_t = 1e-8)]
    null_tol: f64,
    /// Third-order condition tolerance
    #[arg(long, default_value_t = 1e-8)]
    toc_tol: f64,
}

impl ClassifyTols {
    fn get(&self) -> FloatTolerances {
        FloatTolerances {
            grad: self.grad_tol,
            psd: self.psd_tol,
            pd: self.pd_tol,
            null: self.null_tol,
            toc: self.toc_tol,
        }
    }
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Solver tolerance (default: $CUBICMIN_SOLVER_TOL, else 1e-8)
    #[arg(long)]
    solver_tol: Option<f64>,
    #[arg(long, default_value_t = 500)]
    solver_max_iter: u32,
}

impl SolverArgs {
    fn get(&self) -> Result<SolverOptions> {
        let mut o = SolverOptions::from_env().map_err(usage)?;
        if let Some(t) = self.solver_tol {
            if !(t > 0.0 && t < 1.0) {
                return Err(usage(anyhow!("--solver-tol must lie in (0, 1)")));
            }
            o.tol = t;
        }
        o.max_iter = self.solver_max_iter;
        Ok(o)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Cubic,
    Quartic,
}

#[derive(Clone, Copy, ValueEnum)]
enum CliMethod {
    Classical,
    #[value(alias = "third_min")]
    ThirdMin,
    #[value(alias = "third_max")]
    ThirdMax,
    #[value(alias = "multivariate_third")]
    MultivariateThird,
}

impl From<CliMethod> for Method {
    fn from(m: CliMethod) -> Self {
        match m {
            CliMethod::Classical => Method::Classical,
            CliMethod::ThirdMin => Method::ThirdMin,
            CliMethod::ThirdMax => Method::ThirdMax,
            CliMethod::MultivariateThird => Method::MultivariateThird,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Classify a point as critical, second-order, local minimum
    CheckPoint {
        #[arg(long)]
        poly: PathBuf,
        /// Comma-separated coordinates, decimals or p/q
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Exact rational arithmetic
        #[arg(long)]
        exact: bool,
        #[command(flatten)]
        tols: ClassifyTols,
    },
    /// Search for a local minimum
    FindMin {
        #[arg(long)]
        poly: PathBuf,
        /// Require a strict local minimum
        #[arg(long)]
        strict: bool,
        /// Re-check the recovered point in exact arithmetic
        #[arg(long)]
        exact: bool,
        /// Write the second-order point program in SDPA format
        #[arg(long)]
        emit_sdp: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Decide whether a second-order point exists, with the sum-of-squares value
    FindSop {
        #[arg(long)]
        poly: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Encode "graph has a cut of size k" as a polynomial
    ReduceMaxcut {
        /// Edge list: one "u v" pair per line, optional "vertices N" line
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value = "cubic")]
        target: Target,
        /// Also write the polynomial to this file
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a cut reduction against brute force
    VerifyReduction {
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        k: usize,
    },
    /// Cubic whose second-order points project onto a spectrahedron
    SpectrahedronToCubic {
        /// JSON {"matrices": [A0, A1, ...]}, each a list of rows
        #[arg(long, conflicts_with = "builtin", required_unless_present = "builtin")]
        pencil: Option<PathBuf>,
        /// irrational, disk or doubling:N
        #[arg(long)]
        builtin: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classical or third-order Newton iterations
    Newton3 {
        /// builtin:arctan-test or poly:<expression in x>
        #[arg(long, default_value = "builtin:arctan-test")]
        func: String,
        /// Cubic polynomial file for multivariate_third
        #[arg(long)]
        poly: Option<PathBuf>,
        /// Start point; comma-separated for multivariate_third
        #[arg(long, allow_hyphen_values = true)]
        x0: String,
        #[arg(long, value_enum, default_value = "third-min")]
        method: CliMethod,
        #[arg(long, default_value_t = 100)]
        iters: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Basins of attraction of a univariate polynomial's critical points
    Fractal {
        #[arg(long, default_value = "x^5-5x")]
        poly: String,
        /// re_min,re_max,im_min,im_max
        #[arg(long, default_value = "-2,2,-2,2", allow_hyphen_values = true)]
        region: String,
        /// N or WxH
        #[arg(long, default_value = "400")]
        res: String,
        #[arg(long, value_enum, default_value = "classical")]
        method: CliMethod,
        #[arg(long, default_value_t = 100)]
        max_iter: usize,
        /// Output file; .csv for text labels, anything else for binary PGM
        #[arg(long)]
        out: PathBuf,
    },
    /// Replay every built-in fixture
    Examples {
        #[command(flatten)]
        solver: SolverArgs,
    },
}

#[derive(Debug)]
struct Usage(anyhow::Error);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(e: impl Into<anyhow::Error>) -> anyhow::Error {
    anyhow::Error::new(Usage(e.into()))
}

fn is_usage(e: &anyhow::Error) -> bool {
    if e.downcast_ref::<Usage>().is_some() {
        return true;
    }
    matches!(
        e.downcast_ref::<CoreError>(),
        Some(
            CoreError::DimensionMismatch { .. }
                | CoreError::DegreeTooHigh { .. }
                | CoreError::InvalidPolynomial(_)
                | CoreError::ParseNumber(_)
                | CoreError::SdpaParse { .. }
                | CoreError::InvalidInput(_)
                | CoreError::Json(_)
        )
    )
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(usage)
}

fn write(path: &Path, data: &[u8]) -> Result<()> {
    fs::write(path, data).with_context(|| format!("cannot write {}", path.display()))
}

fn load_poly(path: &Path) -> Result<(CubicPolynomial, cubicmin::RationalCubic)> {
    parse_polynomial(&read(path)?)
        .with_context(|| format!("in {}", path.display()))
        .map_err(usage)
}

fn parse_res(s: &str) -> Result<(usize, usize)> {
    let bad = || usage(anyhow!("--res {s:?}: expected N or WxH"));
    let (w, h) = match s.split_once(['x', 'X']) {
        Some((w, h)) => (w.trim().parse().map_err(|_| bad())?, h.trim().parse().map_err(|_| bad())?),
        None => {
            let n = s.trim().parse().map_err(|_| bad())?;
            (n, n)
        }
    };
    Ok((w, h))
}

fn load_pencil(pencil: Option<&Path>, builtin: Option<&str>) -> Result<SpectrahedronDescription> {
    if let Some(b) = builtin {
        return match b {
            "irrational" => Ok(irrational_pencil()),
            "disk" => Ok(disk_pencil()),
            _ => match b.strip_prefix("doubling:").map(str::parse::<usize>) {
                Some(Ok(n)) => doubling_pencil(n).map_err(usage),
                _ => Err(usage(anyhow!("unknown builtin pencil {b:?}"))),
            },
        };
    }
    let path = pencil.expect("clap requires --pencil or --builtin");
    let v: Value = serde_json::from_str(&read(path)?).map_err(usage)?;
    let mats: Vec<Vec<Vec<f64>>> = serde_json::from_value(v.get("matrices").cloned().unwrap_or(Value::Null))
        .map_err(|e| usage(anyhow!("{}: \"matrices\" must be a list of square matrices: {e}", path.display())))?;
    let mats = mats
        .into_iter()
        .map(|rows| {
            let m = rows.len();
            if rows.iter().any(|r| r.len() != m) {
                return Err(usage(anyhow!("{}: matrices must be square", path.display())));
            }
            Ok(nalgebra::DMatrix::from_fn(m, m, |i, j| rows[i][j]))
        })
        .collect::<Result<Vec<_>>>()?;
    SpectrahedronDescription::new(mats).map_err(usage)
}

fn search_options(solver: &SolverArgs, exact: bool) -> Result<SearchOptions> {
    Ok(SearchOptions {
        solver: solver.get()?,
        exact,
        ..SearchOptions::default()
    })
}

fn search_tolerances(o: &SearchOptions) -> Value {
    json!({"solver": o.solver, "epsilon_zero": o.epsilon_zero, "classification": o.tolerances})
}

/// Returns `(name, payload, tolerances, ok)`.
fn execute(cmd: Command) -> Result<(&'static str, Value, Value, bool)> {
    Ok(match cmd {
        Command::CheckPoint { poly, point, exact, tols } => {
            let (p, pe) = load_poly(&poly)?;
            let report = if exact {
                classify_rational(&pe, &parse_point_exact(&point).map_err(usage)?)?
            } else {
                classify_float(&p, &parse_point(&point).map_err(usage)?, &tols.get())?
            };
            let t = if exact { json!("exact") } else { json!(tols.get()) };
            ("check-point", serde_json::to_value(report)?, t, true)
        }
        Command::FindMin {
            poly,
            strict,
            exact,
            emit_sdp,
            solver,
        } => {
            let (p, _) = load_poly(&poly)?;
            let opts = search_options(&solver, exact)?;
            if let Some(path) = emit_sdp {
                write(&path, export_sdpa(&build_complete_sdp(&p).problem).as_bytes())?;
            }
            let r = if strict {
                find_strict_local_minimum(&p, &opts)?
            } else {
                find_local_minimum(&p, &opts)?
            };
            ("find-min", serde_json::to_value(r)?, search_tolerances(&opts), true)
        }
        Command::FindSop { poly, solver } => {
            let (p, _) = load_poly(&poly)?;
            let opts = search_options(&solver, false)?;
            let check = has_second_order_point(&p, &opts)?;
            let gamma = if check.exists {
                solve_sos(&p, &opts.solver)?.map(|c| c.gamma)
            } else {
                None
            };
            let mut payload = serde_json::to_value(check)?;
            payload["sos_value"] = json!(gamma);
            ("find-sop", payload, search_tolerances(&opts), true)
        }
        Command::ReduceMaxcut { edges, k, target, out } => {
            let inst = MaxCutInstance::parse_edge_list(&read(&edges)?, k).map_err(usage)?;
            let sys = maxcut_to_system(&inst);
            let poly = match target {
                Target::Cubic => cubic_to_json(&system_to_cubic(&sys)?),
                Target::Quartic => sparse_to_json(&system_to_quartic(&sys)?),
            };
            if let Some(path) = out {
                write(&path, serde_json::to_string_pretty(&poly)?.as_bytes())?;
            }
            ("reduce-maxcut", poly, json!(null), true)
        }
        Command::VerifyReduction { edges, k } => {
            let inst = MaxCutInstance::parse_edge_list(&read(&edges)?, k).map_err(usage)?;
            let report = verify_maxcut_reduction(&inst)?;
            let brute = !brute_force_cuts(&inst)?.is_empty();
            let ok = report.consistent() && brute == (report.solutions > 0);
            let mut payload = serde_json::to_value(&report)?;
            payload["brute_force_cut_exists"] = json!(brute);
            ("verify-reduction", payload, json!(null), ok)
        }
        Command::SpectrahedronToCubic { pencil, builtin, out } => {
            let desc = load_pencil(pencil.as_deref(), builtin.as_deref())?;
            let poly = cubic_to_json(&spectrahedron_to_cubic(&desc)?);
            if let Some(path) = out {
                write(&path, serde_json::to_string_pretty(&poly)?.as_bytes())?;
            }
            ("spectrahedron-to-cubic", poly, json!(null), true)
        }
        Command::Newton3 {
            func,
            poly,
            x0,
            method,
            iters,
            tol,
            solver,
        } => {
            let opts = NewtonOptions {
                tol,
                max_iter: iters,
                ..NewtonOptions::default()
            };
            let method = Method::from(method);
            let trace = if method == Method::MultivariateThird {
                let x0 = parse_point(&x0).map_err(usage)?;
                let f = match poly {
                    Some(path) => MultiC3Function::cubic(&load_poly(&path)?.0),
                    None => MultiC3Function::separable(&ScalarC3Function::parse(&func).map_err(usage)?, x0.len()),
                };
                run_multivariate(&f, &x0, &opts, &search_options(&solver, false)?)?
            } else {
                let f = ScalarC3Function::parse(&func).map_err(usage)?;
                let x0: f64 = cubicmin::parse_f64(&x0).map_err(usage)?;
                run(&f, x0, method, &opts)?
            };
            ("newton3", serde_json::to_value(trace)?, json!(opts), true)
        }
        Command::Fractal {
            poly,
            region,
            res,
            method,
            max_iter,
            out,
        } => {
            let p = UnivariatePolynomial::parse(&poly).map_err(usage)?;
            let region: Region = region.parse().map_err(usage)?;
            let (w, h) = parse_res(&res)?;
            let grid = fractal_grid(&p, &region, w, h, method.into(), max_iter).map_err(usage)?;
            let csv = out.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
            if csv {
                write(&out, grid.to_csv().as_bytes())?;
            } else {
                write(&out, &grid.to_pgm())?;
            }
            let mut counts = vec![0usize; grid.critical_points.len() + 1];
            for &l in &grid.labels {
                counts[if l < 0 { grid.critical_points.len() } else { l as usize }] += 1;
            }
            let payload = json!({
                "out": out.display().to_string(),
                "format": if csv { "csv" } else { "pgm" },
                "width": w,
                "height": h,
                "critical_points": grid.critical_points,
                "label_counts": &counts[..grid.critical_points.len()],
                "no_convergence": counts[grid.critical_points.len()],
            });
            ("fractal", payload, json!({"critical_point_tol": 1e-8, "max_iter": max_iter}), true)
        }
        Command::Examples { solver } => {
            let opts = search_options(&solver, false)?;
            let outcomes = replay(&opts);
            let ok = outcomes.iter().all(|o| o.passed);
            ("examples", serde_json::to_value(outcomes)?, search_tolerances(&opts), ok)
        }
    })
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::CheckPoint { .. } => "check-point",
        Command::FindMin { .. } => "find-min",
        Command::FindSop { .. } => "find-sop",
        Command::ReduceMaxcut { .. } => "reduce-maxcut",
        Command::VerifyReduction { .. } => "verify-reduction",
        Command::SpectrahedronToCubic { .. } => "spectrahedron-to-cubic",
        Command::Newton3 { .. } => "newton3",
        Command::Fractal { .. } => "fractal",
        Command::Examples { .. } => "examples",
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let name = command_name(&cli.command);
    let start = Instant::now();
    let result = execute(cli.command);
    let seconds = start.elapsed().as_secs_f64();
    let (out, code) = match result {
        Ok((name, payload, tolerances, ok)) => (
            json!({
                "command": name,
                "argv": argv,
                "status": if ok { "ok" } else { "error" },
                "error": if ok { Value::Null } else { json!("one or more checks failed") },
                "payload": payload,
                "timing": {"seconds": seconds},
                "tolerances": tolerances,
            }),
            if ok { 0 } else { 1 },
        ),
        Err(e) => (
            json!({
                "command": name,
                "argv": argv,
                "status": "error",
                "error": format!("{e:#}"),
                "payload": null,
                "timing": {"seconds": seconds},
                "tolerances": null,
            }),
            if is_usage(&e) { 2 } else { 1 },
        ),
    };
    let text = serde_json::to_string_pretty(&out).expect("JSON values serialize");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    if code != 0 {
        if let Some(msg) = out["error"].as_str() {
            eprintln!("error: {msg}");
        }
    }
    ExitCode::from(code)
}
