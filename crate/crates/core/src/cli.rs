//! Command-line front end: argument parsing, subcommand dispatch and
//! deterministic report serialization.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::{CorrectorChoice, MeshChoice, ProblemConfig, MAX_N, MIN_N};
use crate::error::{Error, Result};
use crate::problem::{CaputoProfile, Extension, Order};
use crate::sensitivity::ci_derivatives;
use crate::special::{mittag_leffler, MLParams};
use crate::verification::{
    appendix_example, ci_residual, fd_directional, free_term_limits, tol_solver, FdSchedule,
};
use crate::volterra::solve_nonlinear;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "FRAC_SENS_THREADS";

const SCHEMA_HELP: &str = "\
PROBLEM FILE (JSON object; unknown keys are rejected):
  alpha         number in (0, 1)            Caputo order
  T             number > 0                  horizon
  t             number in [0, T)            initial time
  w0            number                      w(0)
  lw            object, required iff t > 0  Caputo derivative of the history on [0, t]:
                  {\"kind\": \"expr\", \"expr\": \"<expression in xi>\", \"cells\": 256}
                  {\"kind\": \"piecewise\", \"breaks\": [0, .., t], \"values\": [..]}
                  (values[i] holds on (breaks[i], breaks[i+1]])
  f             string                      right-hand side, expression in tau and x
  growth_gamma  number >= 0                 constant of |f| <= growth_gamma (1 + |x|)
  N             integer                     cells, a power of two in [64, 65536]
  mesh          \"uniform\" | \"graded\"        default \"uniform\"
  grading       number >= 1                 graded-mesh exponent, default 2
  corrector     \"newton\" | \"fixed-point\"    default \"newton\"
  M_margin      number >= 0                 added to max |lw| for the bound M, default 0
  exact         string (optional)           exact solution in tau, used by `convergence`
  seed          integer (optional)          seed for sampled checks, default 0

Schema errors name the offending entry by JSON pointer, e.g. `/lw/breaks/2`.

EXIT STATUS: 0 success, 1 invalid input, 2 solver failure.
ENVIRONMENT: FRAC_SENS_THREADS caps the number of worker threads.";

#[derive(Debug, Parser)]
#[command(name = "fracsens", version, about = "Endpoint sensitivities of Caputo fractional Cauchy problems")]
#[command(after_long_help = SCHEMA_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the Cauchy problem; writes a CSV of (theta, tau, x).
    Solve(SolveArgs),
    /// Endpoint value and its ci-derivatives of order alpha.
    Sens(SensArgs),
    /// Finite-difference and expansion-residual checks along an extension.
    VerifyCi(VerifyCiArgs),
    /// Limits of the rescaled free term under extension.
    VerifyFreeterm(FreeTermArgs),
    /// Oscillating-history example: gaps of h and boundedness of the rescaled free term.
    Appendix(AppendixArgs),
    /// Evaluate the two-parameter Mittag-Leffler function.
    Ml(MlArgs),
    /// Convergence table against the exact solution given in the config.
    Convergence(ConvergenceArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MeshArg {
    Uniform,
    Graded,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CorrectorArg {
    Newton,
    FixedPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// Overrides of the run settings stored in the config.
#[derive(Debug, Args)]
struct RunArgs {
    /// Problem definition (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Number of cells (power of two in [64, 65536]).
    #[arg(long = "n")]
    n: Option<usize>,
    #[arg(long, value_enum)]
    mesh: Option<MeshArg>,
    /// Graded-mesh exponent (implies --mesh graded).
    #[arg(long)]
    grading: Option<f64>,
    #[arg(long, value_enum)]
    corrector: Option<CorrectorArg>,
    /// Seed for sampled checks.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Args)]
struct SensArgs {
    #[command(flatten)]
    run: RunArgs,
    /// JSON report (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional CSV of the p and q paths.
    #[arg(long)]
    paths: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyCiArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Constant Caputo derivative of the extension.
    #[arg(long, allow_hyphen_values = true)]
    ell: f64,
    /// Piecewise-constant extension derivative {"breaks": [t, ..], "values": [..]};
    /// used for the residual check instead of the constant `ell`.
    #[arg(long)]
    extension: Option<PathBuf>,
    /// Offsets are (T - t)/4 · 2^-k for k = kmin..=kmax.
    #[arg(long, default_value_t = 2)]
    kmin: i32,
    #[arg(long, default_value_t = 8)]
    kmax: i32,
    /// JSON report (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV of (offset, quotient, residual).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FreeTermArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, allow_hyphen_values = true)]
    ell: f64,
    /// Sample points theta in (0, 1]; defaults to 0.25, 0.5, 1.
    #[arg(long, value_delimiter = ',')]
    thetas: Vec<f64>,
    /// Additional sample points drawn uniformly from (0, 1] with the seed.
    #[arg(long, default_value_t = 0)]
    samples: usize,
    #[arg(long, default_value_t = 2)]
    kmin: i32,
    #[arg(long, default_value_t = 12)]
    kmax: i32,
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV of (offset, theta, pointwise, majorant, weighted, weighted_majorant, scaled_quotient).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AppendixArgs {
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 1)]
    imin: usize,
    /// Largest block index (at most 8).
    #[arg(long, default_value_t = 5)]
    imax: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV of (theta, scaled_pbar).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MlArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, allow_hyphen_values = true)]
    z: f64,
}

#[derive(Debug, Args)]
struct ConvergenceArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Number of successive mesh doublings, starting from N.
    #[arg(long, default_value_t = 5)]
    levels: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit status.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match configure_threads().and_then(|()| dispatch(cli.command)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                1
            } else {
                2
            }
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Invalid(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
    // A pool may already exist when `run` is called more than once in a
    // process; the first setting wins.
    if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
        log::debug!("global thread pool already initialised");
    }
    Ok(())
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Solve(a) => solve(a),
        Command::Sens(a) => sens(a),
        Command::VerifyCi(a) => verify_ci(a),
        Command::VerifyFreeterm(a) => verify_freeterm(a),
        Command::Appendix(a) => appendix(a),
        Command::Ml(a) => ml(a),
        Command::Convergence(a) => convergence(a),
    }
}

fn load(run: &RunArgs) -> Result<ProblemConfig> {
    let mut cfg = ProblemConfig::from_path(&run.config)?;
    if let Some(n) = run.n {
        if !n.is_power_of_two() || !(MIN_N..=MAX_N).contains(&n) {
            return Err(Error::Invalid(format!("--n must be a power of two in [{MIN_N}, {MAX_N}], got {n}")));
        }
        cfg.n = n;
    }
    match (run.mesh, run.grading) {
        (Some(MeshArg::Uniform), Some(_)) => {
            return Err(Error::Invalid("--grading requires a graded mesh".into()));
        }
        (Some(MeshArg::Uniform), None) => {
            cfg.mesh = MeshChoice::Uniform;
            cfg.grading = 1.0;
        }
        (Some(MeshArg::Graded), r) | (None, r @ Some(_)) => {
            if cfg.mesh != MeshChoice::Graded {
                cfg.grading = 2.0;
            }
            cfg.mesh = MeshChoice::Graded;
            if let Some(r) = r {
                if !(r >= 1.0 && r.is_finite()) {
                    return Err(Error::Invalid(format!("--grading must be >= 1, got {r}")));
                }
                cfg.grading = r;
            }
        }
        (None, None) => {}
    }
    if let Some(c) = run.corrector {
        cfg.corrector = match c {
            CorrectorArg::Newton => CorrectorChoice::Newton,
            CorrectorArg::FixedPoint => CorrectorChoice::FixedPoint,
        };
    }
    if let Some(s) = run.seed {
        cfg.seed = Some(s);
    }
    Ok(cfg)
}

/// Fixed scientific notation with 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_output(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, contents)?,
        None => {
            use std::io::Write;
            match std::io::stdout().lock().write_all(contents.as_bytes()) {
                // A closed pipe (e.g. `| head`) is not an error for report output.
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
                _ => {}
            }
        }
    }
    Ok(())
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports are always serializable");
    s.push('\n');
    s
}

fn header(cfg: &ProblemConfig) -> Value {
    json!({
        "config_hash": cfg.hash(),
        "alpha": cfg.alpha,
        "N": cfg.n,
        "mesh": cfg.mesh,
        "grading": cfg.grading,
        "corrector": cfg.corrector,
    })
}

fn merge(mut base: Value, extra: Value) -> Value {
    if let (Value::Object(b), Value::Object(e)) = (&mut base, extra) {
        b.extend(e);
    }
    base
}

fn solve(a: SolveArgs) -> Result<()> {
    let cfg = load(&a.run)?;
    let problem = cfg.problem()?;
    let history = cfg.history()?;
    let mesh = cfg.mesh()?;
    let sol = solve_nonlinear(&problem, &history, &mesh, &cfg.solver_options())?;
    let text = match a.format {
        Format::Csv => {
            let mut s = format!("# config_hash={}\ntheta,tau,x\n", cfg.hash());
            for ((th, tau), x) in mesh.nodes().iter().zip(&sol.path.taus).zip(&sol.path.values) {
                writeln!(s, "{},{},{}", num(*th), num(*tau), num(*x)).unwrap();
            }
            s
        }
        Format::Json => json_text(&merge(
            header(&cfg),
            json!({
                "theta": mesh.nodes(),
                "tau": sol.path.taus,
                "x": sol.path.values,
                "growth_violations": sol.diagnostics.growth_violations,
                "fallbacks": sol.diagnostics.fallbacks,
            }),
        )),
    };
    write_output(a.out.as_deref(), &text)
}

fn sens(a: SensArgs) -> Result<()> {
    let cfg = load(&a.run)?;
    let problem = cfg.problem()?;
    let history = cfg.history()?;
    let mesh = cfg.mesh()?;
    let r = ci_derivatives(&problem, &history, &mesh, &cfg.solver_options())?;
    let report = merge(
        header(&cfg),
        json!({
            "rho": r.rho,
            "dt_alpha_rho": r.p_t,
            "nabla_alpha_rho": r.q_t,
            "tol_solver": tol_solver(cfg.alpha, cfg.n),
            "growth_violations": r.x.diagnostics.growth_violations,
        }),
    );
    write_output(a.out.as_deref(), &json_text(&report))?;
    if let Some(p) = a.paths.as_deref() {
        let mut s = format!("# config_hash={}\ntheta,tau,x,p,q\n", cfg.hash());
        for j in 0..=mesh.n() {
            writeln!(
                s,
                "{},{},{},{},{}",
                num(mesh.nodes()[j]),
                num(r.x.path.taus[j]),
                num(r.x.path.values[j]),
                num(r.p_path.values[j]),
                num(r.q_path.values[j])
            )
            .unwrap();
        }
        write_output(Some(p), &s)?;
    }
    Ok(())
}

fn read_extension(path: &Path, t: f64, horizon: f64) -> Result<CaputoProfile> {
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path)?)
        .map_err(|e| Error::Config { pointer: String::new(), message: format!("malformed JSON: {e}") })?;
    // Reuse the history encoding: the breaks must start at t and end at or before T.
    let obj = v.as_object().ok_or_else(|| Error::Config { pointer: String::new(), message: "expected an object".into() })?;
    if let Some(k) = obj.keys().find(|k| !matches!(k.as_str(), "breaks" | "values")) {
        return Err(Error::Config { pointer: format!("/{k}"), message: format!("unknown key `{k}`") });
    }
    let arr = |key: &str| -> Result<Vec<f64>> {
        obj.get(key)
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Config { pointer: format!("/{key}"), message: "expected an array of numbers".into() })?
            .iter()
            .enumerate()
            .map(|(i, x)| {
                x.as_f64().ok_or_else(|| Error::Config { pointer: format!("/{key}/{i}"), message: "expected a number".into() })
            })
            .collect()
    };
    let (breaks, values) = (arr("breaks")?, arr("values")?);
    if breaks.first() != Some(&t) || breaks.last().is_some_and(|&b| b > horizon) {
        return Err(Error::Config { pointer: "/breaks".into(), message: format!("breaks must start at t = {t} and end by T = {horizon}") });
    }
    CaputoProfile::piecewise_constant(&breaks, &values)
}

fn verify_ci(a: VerifyCiArgs) -> Result<()> {
    let cfg = load(&a.run)?;
    let problem = cfg.problem()?;
    let history = cfg.history()?;
    let mesh = cfg.mesh()?;
    let opts = cfg.solver_options();
    let span = cfg.horizon - cfg.t;
    let schedule = FdSchedule::geometric(span, a.kmin, a.kmax, vec![a.ell])?;
    let extension = match &a.extension {
        Some(p) => Extension::new(history.clone(), read_extension(p, cfg.t, cfg.horizon)?)?,
        None => Extension::constant(history.clone(), a.ell, cfg.horizon)?,
    };
    let fd = fd_directional(&problem, &history, a.ell, &schedule, &mesh, &opts)?;
    let res = ci_residual(&problem, &history, &extension, &schedule, &mesh, &opts)?;
    let predicted = res.p_t + res.q_t * a.ell;
    let extrapolation = fd.extrapolation.as_ref().map(|e| json!({"limit": e.limit, "tol": e.tol}));
    let report = merge(
        header(&cfg),
        json!({
            "ell": a.ell,
            "extension": if a.extension.is_some() { "piecewise" } else { "constant" },
            "rho": res.base_rho,
            "dt_alpha_rho": res.p_t,
            "nabla_alpha_rho": res.q_t,
            "predicted_quotient": predicted,
            "tol_solver": tol_solver(cfg.alpha, cfg.n),
            "offsets": fd.offsets,
            "quotients": fd.quotients,
            "extrapolation": extrapolation,
            "residuals": res.residuals,
            "residual_ratios": res.ratios,
            "residual_slope": if res.slope.is_finite() { json!(res.slope) } else { Value::Null },
            "residual_exact": res.is_exact(),
            "residual_superlinear": res.is_superlinear(),
        }),
    );
    write_output(a.out.as_deref(), &json_text(&report))?;
    if let Some(p) = a.csv.as_deref() {
        let mut s = format!("# config_hash={}\noffset,quotient,residual\n", cfg.hash());
        for ((d, q), r) in fd.offsets.iter().zip(&fd.quotients).zip(&res.residuals) {
            writeln!(s, "{},{},{}", num(*d), num(*q), num(*r)).unwrap();
        }
        write_output(Some(p), &s)?;
    }
    Ok(())
}

fn verify_freeterm(a: FreeTermArgs) -> Result<()> {
    let cfg = load(&a.run)?;
    let problem = cfg.problem()?;
    let history = cfg.history()?;
    let span = cfg.horizon - cfg.t;
    let mut thetas = if a.thetas.is_empty() { vec![0.25, 0.5, 1.0] } else { a.thetas.clone() };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(0));
    thetas.extend((0..a.samples).map(|_| 1.0 - rng.gen_range(0.0..1.0)));
    let schedule = FdSchedule::geometric(span, a.kmin, a.kmax, vec![a.ell])?;
    let r = free_term_limits(&problem, &history, a.ell, &schedule, &thetas)?;
    let samples: Vec<Value> = r
        .samples
        .iter()
        .map(|s| {
            json!({
                "theta": s.theta,
                "pointwise": s.pointwise,
                "majorant": s.majorant,
                "weighted": s.weighted,
                "weighted_majorant": s.weighted_majorant,
                "scaled_quotient": s.scaled_quotient,
            })
        })
        .collect();
    let report = merge(
        header(&cfg),
        json!({
            "ell": a.ell,
            "offsets": r.offsets,
            "M": r.m_bound,
            "lipschitz_constant": r.lipschitz_constant,
            "majorants_hold": r.majorants_hold(),
            "lipschitz_holds": r.lipschitz_holds(),
            "samples": samples,
        }),
    );
    write_output(a.out.as_deref(), &json_text(&report))?;
    if let Some(p) = a.csv.as_deref() {
        let mut s = format!(
            "# config_hash={}\noffset,theta,pointwise,majorant,weighted,weighted_majorant,scaled_quotient\n",
            cfg.hash()
        );
        for smp in &r.samples {
            for (k, d) in r.offsets.iter().enumerate() {
                writeln!(
                    s,
                    "{},{},{},{},{},{},{}",
                    num(*d),
                    num(smp.theta),
                    num(smp.pointwise[k]),
                    num(smp.majorant[k]),
                    num(smp.weighted[k]),
                    num(smp.weighted_majorant[k]),
                    num(smp.scaled_quotient[k])
                )
                .unwrap();
            }
        }
        write_output(Some(p), &s)?;
    }
    Ok(())
}

/// Hash of the command-line parameters for subcommands without a config file.
fn args_hash(canonical: &Value) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(serde_json::to_string(canonical).expect("serializable").as_bytes()))
}

fn appendix(a: AppendixArgs) -> Result<()> {
    let order = Order::new(a.alpha)?;
    let r = appendix_example(&order, (a.imin, a.imax))?;
    let params = json!({"subcommand": "appendix", "alpha": a.alpha, "imin": a.imin, "imax": a.imax});
    let report = json!({
        "config_hash": args_hash(&params),
        "alpha": r.alpha,
        "theta_star": r.theta_star,
        "theta_star_threshold": r.threshold,
        "indices": r.indices,
        "gaps": r.gaps,
        "min_gap": r.min_gap(),
        "gap_lower_bounds": r.gap_bounds,
        "i_star": r.i_star,
        "eps_star": r.eps_star,
        "pbar_bound": r.pbar_bound,
        "pbar_bounded": r.pbar_bounded(),
        "scaled_pbar": r.scaled_pbar.iter().map(|(th, v)| json!([th, v])).collect::<Vec<_>>(),
    });
    write_output(a.out.as_deref(), &json_text(&report))?;
    if let Some(p) = a.csv.as_deref() {
        let mut s = format!("# config_hash={}\ntheta,scaled_pbar\n", args_hash(&params));
        for (th, v) in &r.scaled_pbar {
            writeln!(s, "{},{}", num(*th), num(*v)).unwrap();
        }
        write_output(Some(p), &s)?;
    }
    Ok(())
}

fn ml(a: MlArgs) -> Result<()> {
    let v = mittag_leffler(MLParams::new(a.alpha, a.beta)?, a.z)?;
    println!("{v:.14e}");
    Ok(())
}

fn convergence(a: ConvergenceArgs) -> Result<()> {
    let cfg = load(&a.run)?;
    let exact = cfg
        .exact_solution()?
        .ok_or_else(|| Error::Config { pointer: "/exact".into(), message: "convergence needs an exact solution".into() })?;
    if a.levels == 0 || cfg.n << (a.levels - 1) > MAX_N {
        return Err(Error::Invalid(format!("--levels must be in 1..; N·2^(levels−1) must not exceed {MAX_N}")));
    }
    let problem = cfg.problem()?;
    let history = cfg.history()?;
    let opts = cfg.solver_options();
    let mut rows: Vec<(usize, f64, Option<f64>)> = Vec::with_capacity(a.levels);
    for level in 0..a.levels {
        let n = cfg.n << level;
        let mesh = cfg.mesh_with(n)?;
        let sol = solve_nonlinear(&problem, &history, &mesh, &opts)?;
        let mut error = 0.0f64;
        for (tau, x) in sol.path.taus.iter().zip(&sol.path.values) {
            error = error.max((x - exact.eval(&[*tau])?).abs());
        }
        let order = rows.last().map(|&(_, prev, _)| (prev / error).log2());
        rows.push((n, error, order));
    }
    let text = match a.format {
        Format::Csv => {
            let mut s = format!("# config_hash={}\nN,error,order\n", cfg.hash());
            for (n, e, o) in &rows {
                writeln!(s, "{n},{},{}", num(*e), o.map(num).unwrap_or_default()).unwrap();
            }
            s
        }
        Format::Json => json_text(&merge(
            header(&cfg),
            json!({
                "rows": rows.iter().map(|(n, e, o)| json!({"N": n, "error": e, "order": o})).collect::<Vec<_>>(),
            }),
        )),
    };
    write_output(a.out.as_deref(), &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn help_and_bad_arguments_map_to_exit_codes() {
        assert_eq!(run(["fracsens", "--help"]), 0);
        assert_eq!(run(["fracsens", "frobnicate"]), 1);
        assert_eq!(run(["fracsens", "ml", "--alpha", "0.5"]), 1);
    }

    #[test]
    fn ml_subcommand_runs() {
        assert_eq!(run(["fracsens", "ml", "--alpha", "1", "--beta", "1", "--z", "-1"]), 0);
        assert_eq!(run(["fracsens", "ml", "--alpha", "3", "--z", "1"]), 1);
    }

    #[test]
    fn missing_config_is_a_validation_error() {
        assert_eq!(run(["fracsens", "solve", "--config", "/nonexistent/problem.json"]), 1);
    }

    #[test]
    fn numbers_use_seventeen_significant_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(0.1).parse::<f64>().unwrap(), 0.1);
    }
}
