//! Command-line front end for `divaudit`.
//!
//! Parsing produces a [`RunConfig`] that is fully validated before any
//! computation; [`run`] dispatches it and returns what to print plus the
//! artifacts to write.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use divaudit::asymptotics::{
    cauchy_h2_limit_on, cauchy_h_ratio_sweep, cauchy_tv_ratio_sweep, jsd_f, jsd_fg_sweep, jsd_g,
    two_g_prime_over_f_prime, LimitEstimate, DEFAULT_GRID,
};
use divaudit::audit::{
    amplify_certificate, find_cauchy_violation, find_jsd_violation, random_audit,
    verify_certificate, Family, SearchConfig, TriangleCertificate,
};
use divaudit::cauchy::{
    f_div_cauchy, f_div_cauchy_oracle, h, h_double_prime, h_prime, CauchyParams,
};
use divaudit::divergences::{f_divergence_discrete, jsd, kl, tvd, DivergenceValue};
use divaudit::generators::{generator_tv, Generator};
use divaudit::{LogBase, Multinomial};

pub const SCHEMA_VERSION: u32 = 1;
pub const OUTPUT_ENV: &str = "DIVAUDIT_OUTPUT";

/// Exit status for successful runs.
pub const EXIT_OK: i32 = 0;
/// Exit status for usage, I/O and numerical errors.
pub const EXIT_ERROR: i32 = 1;
/// Exit status when a search finds no violation or a limit check fails.
pub const EXIT_NOT_FOUND: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "divaudit",
    version,
    about = "Divergences, triangle certificates and limit checks"
)]
pub struct Cli {
    /// Directory for JSON/CSV artifacts.
    #[arg(long, global = true, env = OUTPUT_ENV)]
    pub output: Option<PathBuf>,

    /// Overrides the pass tolerance of `limits` and the margin floor of `audit find`.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a divergence between two distributions.
    Div(DivArgs),
    /// Search, amplify and randomly audit triangle-inequality violations.
    Audit {
        #[command(subcommand)]
        action: AuditCommand,
    },
    /// Sweep ratios toward t = 0 and extrapolate their limits.
    Limits(LimitsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Multinomial,
    Cauchy,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Multinomial => Family::Multinomial,
            FamilyArg::Cauchy => Family::Cauchy,
        }
    }
}

#[derive(Debug, Args)]
pub struct DivArgs {
    #[arg(long, value_enum, default_value = "multinomial")]
    pub family: FamilyArg,
    /// kl, jsd, tvd or f:<gen> (multinomial only).
    #[arg(long)]
    pub measure: Option<String>,
    /// First distribution as a JSON array.
    #[arg(long)]
    pub p: Option<String>,
    /// Second distribution as a JSON array.
    #[arg(long)]
    pub q: Option<String>,
    /// Generator id for the Cauchy family: js, kl or tv.
    #[arg(long = "gen")]
    pub generator: Option<String>,
    /// First Cauchy distribution as `mu,sigma`.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<String>,
    /// Second Cauchy distribution as `mu,sigma`.
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<String>,
    /// Use the real-line integral instead of the closed-form integral.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Debug, Subcommand)]
pub enum AuditCommand {
    /// Search for a certified violation of the triangle inequality.
    Find {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long)]
        alpha: f64,
        #[arg(long = "gen")]
        generator: Option<String>,
        /// Dimension of the multinomial certificate.
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long)]
        t_min: Option<f64>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        grid_size: Option<usize>,
        #[arg(long)]
        refine_tol: Option<f64>,
    },
    /// Count violations on seeded random triples of simplex points.
    Random {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// jsd or tvd.
        #[arg(long, default_value = "jsd")]
        measure: String,
    },
    /// Raise a certificate to the power beta >= 1.
    Amplify {
        #[arg(long)]
        cert: PathBuf,
        #[arg(long)]
        beta: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LimitTarget {
    Jsd,
    Cauchy,
    Tv,
}

#[derive(Debug, Args)]
pub struct LimitsArgs {
    #[arg(value_enum)]
    pub target: LimitTarget,
    #[arg(long = "gen")]
    pub generator: Option<String>,
    /// Comma-separated t values.
    #[arg(long)]
    pub grid: Option<String>,
}

/// Problems with the command line, detected before computing anything.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage<T>(msg: impl Into<String>) -> Result<T, UsageError> {
    Err(UsageError(msg.into()))
}

#[derive(Debug, Clone)]
pub enum Measure {
    Kl,
    Jsd,
    Tvd,
    F(Generator),
}

#[derive(Debug, Clone)]
pub enum Task {
    DivMultinomial {
        measure: Measure,
        p: Multinomial,
        q: Multinomial,
    },
    DivCauchy {
        generator: Generator,
        a: CauchyParams,
        b: CauchyParams,
        oracle: bool,
    },
    FindMultinomial {
        alpha: f64,
        n: usize,
        search: SearchConfig,
    },
    FindCauchy {
        generator: Generator,
        alpha: f64,
        search: SearchConfig,
    },
    Random {
        alpha: f64,
        trials: usize,
        seed: u64,
        n: usize,
        measure: Measure,
    },
    Amplify {
        cert_path: PathBuf,
        beta: f64,
    },
    Limits {
        target: LimitTarget,
        generator: Option<Generator>,
        grid: Vec<f64>,
    },
}

/// A validated command.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub task: Task,
    pub output: Option<PathBuf>,
    pub tolerance: Option<f64>,
}

fn parse_generator(id: &str) -> Result<Generator, UsageError> {
    Generator::by_id(id).map_err(|e| UsageError(e.to_string()))
}

fn parse_measure(s: &str) -> Result<Measure, UsageError> {
    match s {
        "kl" => Ok(Measure::Kl),
        "jsd" => Ok(Measure::Jsd),
        "tvd" => Ok(Measure::Tvd),
        other => match other.strip_prefix("f:") {
            Some(id) => Ok(Measure::F(parse_generator(id)?)),
            None => usage(format!(
                "unknown measure `{other}` (expected kl, jsd, tvd or f:<gen>)"
            )),
        },
    }
}

fn parse_multinomial(flag: &str, raw: Option<&str>) -> Result<Multinomial, UsageError> {
    let raw = raw.ok_or_else(|| UsageError(format!("--{flag} is required")))?;
    serde_json::from_str(raw).map_err(|e| UsageError(format!("--{flag}: {e}")))
}

fn parse_cauchy(flag: &str, raw: Option<&str>) -> Result<CauchyParams, UsageError> {
    let raw = raw.ok_or_else(|| UsageError(format!("--{flag} is required")))?;
    let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
    let [mu, sigma] = parts.as_slice() else {
        return usage(format!("--{flag} expects `mu,sigma`, got `{raw}`"));
    };
    let parse = |s: &str| {
        s.parse::<f64>()
            .map_err(|e| UsageError(format!("--{flag}: `{s}`: {e}")))
    };
    CauchyParams::new(parse(mu)?, parse(sigma)?).map_err(|e| UsageError(format!("--{flag}: {e}")))
}

fn parse_grid(raw: &str) -> Result<Vec<f64>, UsageError> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| UsageError(format!("--grid: `{s}`: {e}")))
        })
        .collect()
}

fn check_positive(name: &str, v: f64) -> Result<(), UsageError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        usage(format!("--{name} must be a positive number, got {v}"))
    }
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<RunConfig, UsageError> {
        if let Some(tol) = cli.tolerance {
            if !(tol >= 0.0) || !tol.is_finite() {
                return usage(format!("--tolerance must be >= 0, got {tol}"));
            }
        }
        let task = match cli.command {
            Command::Div(args) => div_task(args)?,
            Command::Audit { action } => audit_task(action, cli.tolerance)?,
            Command::Limits(args) => limits_task(args)?,
        };
        Ok(RunConfig {
            task,
            output: cli.output,
            tolerance: cli.tolerance,
        })
    }
}

fn div_task(args: DivArgs) -> Result<Task, UsageError> {
    match args.family {
        FamilyArg::Multinomial => {
            if args.a.is_some() || args.b.is_some() || args.oracle || args.generator.is_some() {
                return usage("--a, --b, --gen and --oracle apply to --family cauchy only");
            }
            let measure = parse_measure(args.measure.as_deref().unwrap_or("jsd"))?;
            let p = parse_multinomial("p", args.p.as_deref())?;
            let q = parse_multinomial("q", args.q.as_deref())?;
            if p.dim() != q.dim() {
                return usage(format!(
                    "--p has {} entries but --q has {}",
                    p.dim(),
                    q.dim()
                ));
            }
            Ok(Task::DivMultinomial { measure, p, q })
        }
        FamilyArg::Cauchy => {
            if let Some(m) = args.measure.as_deref() {
                return usage(format!(
                    "--measure {m} is for multinomials; the Cauchy family takes --gen {{js|kl|tv}} \
                     and reports natural-log values"
                ));
            }
            if args.p.is_some() || args.q.is_some() {
                return usage("--p and --q apply to --family multinomial only; use --a and --b");
            }
            let generator = parse_generator(args.generator.as_deref().unwrap_or("js"))?;
            Ok(Task::DivCauchy {
                generator,
                a: parse_cauchy("a", args.a.as_deref())?,
                b: parse_cauchy("b", args.b.as_deref())?,
                oracle: args.oracle,
            })
        }
    }
}

fn audit_task(action: AuditCommand, tolerance: Option<f64>) -> Result<Task, UsageError> {
    match action {
        AuditCommand::Find {
            family,
            alpha,
            generator,
            n,
            t_min,
            t_max,
            grid_size,
            refine_tol,
        } => {
            check_positive("alpha", alpha)?;
            let family = Family::from(family);
            let defaults = SearchConfig::for_family(family);
            let search = SearchConfig {
                t_min: t_min.unwrap_or(defaults.t_min),
                t_max: t_max.unwrap_or(defaults.t_max),
                grid_size: grid_size.unwrap_or(defaults.grid_size),
                refine_tol: refine_tol.unwrap_or(defaults.refine_tol),
                margin_floor: tolerance.unwrap_or(defaults.margin_floor),
            };
            search
                .validate(family)
                .map_err(|e| UsageError(e.to_string()))?;
            match family {
                Family::Multinomial => {
                    if generator.is_some() {
                        return usage(
                            "--gen applies to --family cauchy only (multinomial uses base-2 JSD)",
                        );
                    }
                    if n < 2 {
                        return usage(format!("--n must be >= 2, got {n}"));
                    }
                    Ok(Task::FindMultinomial { alpha, n, search })
                }
                Family::Cauchy => {
                    let id = generator.ok_or_else(|| {
                        UsageError("--gen is required for --family cauchy".into())
                    })?;
                    Ok(Task::FindCauchy {
                        generator: parse_generator(&id)?,
                        alpha,
                        search,
                    })
                }
            }
        }
        AuditCommand::Random {
            alpha,
            trials,
            seed,
            n,
            measure,
        } => {
            check_positive("alpha", alpha)?;
            if trials == 0 {
                return usage("--trials must be >= 1");
            }
            if n < 2 {
                return usage(format!("--n must be >= 2, got {n}"));
            }
            let measure = match parse_measure(&measure)? {
                m @ (Measure::Jsd | Measure::Tvd) => m,
                _ => return usage("audit random supports the symmetric measures jsd and tvd"),
            };
            Ok(Task::Random {
                alpha,
                trials,
                seed,
                n,
                measure,
            })
        }
        AuditCommand::Amplify { cert, beta } => {
            if !(beta >= 1.0) || !beta.is_finite() {
                return usage(format!("--beta must be >= 1, got {beta}"));
            }
            Ok(Task::Amplify {
                cert_path: cert,
                beta,
            })
        }
    }
}

fn limits_task(args: LimitsArgs) -> Result<Task, UsageError> {
    let grid = match args.grid.as_deref() {
        Some(raw) => parse_grid(raw)?,
        None => DEFAULT_GRID.to_vec(),
    };
    if grid.is_empty() || grid.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
        return usage("--grid values must be positive");
    }
    let generator = match args.target {
        LimitTarget::Jsd | LimitTarget::Tv => {
            if args.generator.is_some() {
                return usage("--gen applies to `limits cauchy` only");
            }
            if args.target == LimitTarget::Jsd && grid.iter().any(|&t| t >= 0.5) {
                return usage("--grid values for `limits jsd` must be below 1/2");
            }
            None
        }
        LimitTarget::Cauchy => {
            let g = parse_generator(args.generator.as_deref().unwrap_or("js"))?;
            if !g.smooth_at_1() {
                return usage(format!(
                    "generator `{}` is not smooth at 1; use `limits tv` for the total variation case",
                    g.name()
                ));
            }
            Some(g)
        }
    };
    Ok(Task::Limits {
        target: args.target,
        generator,
        grid,
    })
}

/// A file produced by a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub file_name: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
    pub artifacts: Vec<Artifact>,
}

impl Outcome {
    fn ok(stdout: String, artifacts: Vec<Artifact>) -> Self {
        Outcome {
            exit_code: EXIT_OK,
            stdout,
            stderr: String::new(),
            artifacts,
        }
    }
}

/// Formats a number with 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// Executes a validated command. Search failures and failed limit checks
/// are reported through [`Outcome::exit_code`]; other failures are errors.
pub fn run(config: &RunConfig) -> anyhow::Result<Outcome> {
    match &config.task {
        Task::DivMultinomial { measure, p, q } => run_div_multinomial(measure, p, q),
        Task::DivCauchy {
            generator,
            a,
            b,
            oracle,
        } => run_div_cauchy(generator, a, b, *oracle),
        Task::FindMultinomial { alpha, n, search } => {
            finish_search(find_jsd_violation(*alpha, search, *n))
        }
        Task::FindCauchy {
            generator,
            alpha,
            search,
        } => finish_search(find_cauchy_violation(generator, *alpha, search)),
        Task::Random {
            alpha,
            trials,
            seed,
            n,
            measure,
        } => run_random(*alpha, *trials, *seed, *n, measure),
        Task::Amplify { cert_path, beta } => run_amplify(cert_path, *beta),
        Task::Limits {
            target,
            generator,
            grid,
        } => run_limits(*target, generator.as_ref(), grid, config.tolerance),
    }
}

fn measure_name(m: &Measure) -> String {
    match m {
        Measure::Kl => "kl".into(),
        Measure::Jsd => "jsd".into(),
        Measure::Tvd => "tvd".into(),
        Measure::F(g) => format!("f:{}", g.name()),
    }
}

fn run_div_multinomial(
    measure: &Measure,
    p: &Multinomial,
    q: &Multinomial,
) -> anyhow::Result<Outcome> {
    let value: DivergenceValue = match measure {
        Measure::Kl => kl(p, q)?,
        Measure::Jsd => jsd(p, q)?,
        Measure::Tvd => tvd(p, q)?,
        Measure::F(g) => f_divergence_discrete(g, p, q)?,
    };
    let name = measure_name(measure);
    // Total variation has no logarithm.
    let base = match measure {
        Measure::Tvd => "none",
        _ => value.base.tag(),
    };
    let stdout = format!("{name} = {} (base {base})\n", fmt_num(value.value));
    let payload = json!({
        "schema": SCHEMA_VERSION,
        "family": "multinomial",
        "measure": name,
        "p": p,
        "q": q,
        "value": json_number(value.value),
        "base": base,
    });
    Ok(Outcome::ok(
        stdout,
        vec![Artifact {
            file_name: "div.json".into(),
            contents: to_json(&payload),
        }],
    ))
}

/// `+∞` is not representable in JSON; it is written as the string "inf".
fn json_number(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(format!("{x}"))
    }
}

fn run_div_cauchy(
    g: &Generator,
    a: &CauchyParams,
    b: &CauchyParams,
    oracle: bool,
) -> anyhow::Result<Outcome> {
    let value = if oracle {
        f_div_cauchy_oracle(g, a, b)?
    } else {
        f_div_cauchy(g, a, b)?
    };
    let zeta = divaudit::cauchy::zeta(a, b).value();
    let method = if oracle {
        "real-line"
    } else {
        "theta-integral"
    };
    let stdout = format!(
        "f:{} = {} (base {}, zeta = {}, {method})\n",
        g.name(),
        fmt_num(value),
        LogBase::E.tag(),
        fmt_num(zeta)
    );
    let payload = json!({
        "schema": SCHEMA_VERSION,
        "family": "cauchy",
        "generator": g.name(),
        "a": a,
        "b": b,
        "zeta": zeta,
        "value": value,
        "base": LogBase::E.tag(),
        "method": method,
    });
    Ok(Outcome::ok(
        stdout,
        vec![Artifact {
            file_name: "div.json".into(),
            contents: to_json(&payload),
        }],
    ))
}

fn finish_search(result: divaudit::Result<TriangleCertificate>) -> anyhow::Result<Outcome> {
    match result {
        Ok(cert) => {
            let check = verify_certificate(&cert)?;
            anyhow::ensure!(
                check.is_sound(),
                "emitted certificate failed re-verification: {check:?}"
            );
            let json = to_json(&cert);
            Ok(Outcome::ok(
                json.clone(),
                vec![Artifact {
                    file_name: "certificate.json".into(),
                    contents: json,
                }],
            ))
        }
        Err(divaudit::Error::SearchFailure {
            max_margin,
            t_at_max,
        }) => Ok(Outcome {
            exit_code: EXIT_NOT_FOUND,
            stdout: String::new(),
            stderr: format!(
                "no violation found: max F = {} at t = {}\n",
                fmt_num(max_margin),
                fmt_num(t_at_max)
            ),
            artifacts: vec![],
        }),
        Err(e) => Err(e.into()),
    }
}

fn run_random(
    alpha: f64,
    trials: usize,
    seed: u64,
    n: usize,
    measure: &Measure,
) -> anyhow::Result<Outcome> {
    let report = match measure {
        Measure::Tvd => random_audit(|p, q| Ok(tvd(p, q)?.value), alpha, trials, seed, n)?,
        _ => random_audit(|p, q| Ok(jsd(p, q)?.value), alpha, trials, seed, n)?,
    };
    let payload = json!({
        "schema": SCHEMA_VERSION,
        "measure": measure_name(measure),
        "report": report,
    });
    let json = to_json(&payload);
    Ok(Outcome::ok(
        json.clone(),
        vec![Artifact {
            file_name: "audit_random.json".into(),
            contents: json,
        }],
    ))
}

fn run_amplify(path: &Path, beta: f64) -> anyhow::Result<Outcome> {
    let raw = fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("reading certificate {}: {e}", path.display()))?;
    let cert = TriangleCertificate::from_json(&raw)
        .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
    let check = verify_certificate(&cert)?;
    anyhow::ensure!(
        check.is_sound(),
        "{} is not a sound certificate: {check:?}",
        path.display()
    );
    let amplified = amplify_certificate(&cert, beta)?;
    let json = to_json(&amplified);
    Ok(Outcome::ok(
        json.clone(),
        vec![Artifact {
            file_name: "certificate_amplified.json".into(),
            contents: json,
        }],
    ))
}

#[derive(Serialize)]
struct LimitSummary<'a> {
    name: &'a str,
    estimate: f64,
    error_bar: f64,
    expected: Option<f64>,
    tolerance: f64,
    pass: bool,
}

fn summarize<'a>(est: &'a LimitEstimate, tolerance: f64) -> LimitSummary<'a> {
    LimitSummary {
        name: &est.target_name,
        estimate: est.estimate,
        error_bar: est.error_bar,
        expected: est.expected,
        tolerance,
        pass: est.passes(tolerance),
    }
}

fn csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(
            &row.iter()
                .map(|&x| fmt_num(x))
                .collect::<Vec<_>>()
                .join(","),
        );
        out.push('\n');
    }
    out
}

fn run_limits(
    target: LimitTarget,
    generator: Option<&Generator>,
    grid: &[f64],
    tolerance: Option<f64>,
) -> anyhow::Result<Outcome> {
    let mut sorted = grid.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let (name, table, estimates): (&str, String, Vec<(LimitEstimate, f64)>) = match target {
        LimitTarget::Jsd => {
            let (gf, slope) = jsd_fg_sweep(&sorted)?;
            let rows = sorted
                .iter()
                .map(|&t| {
                    let (f, g) = (jsd_f(t, LogBase::Two)?, jsd_g(t, LogBase::Two)?);
                    Ok(vec![t, f, g, g / f, two_g_prime_over_f_prime(t)])
                })
                .collect::<divaudit::Result<Vec<_>>>()?;
            let table = csv(
                &["t", "f", "g", "g_over_f", "two_g_prime_over_f_prime"],
                &rows,
            );
            ("jsd", table, vec![(gf, 1e-3), (slope, 1e-3)])
        }
        LimitTarget::Cauchy => {
            let g = generator.expect("validated");
            let sweep = cauchy_h_ratio_sweep(g, &sorted)?;
            let h2 = cauchy_h2_limit_on(g, &sorted)?;
            let rows = sorted
                .iter()
                .map(|&t| {
                    let (v, d1, d2) = (h(g, t)?, h_prime(g, t)?, h_double_prime(g, t)?);
                    Ok(vec![
                        t,
                        v,
                        d1,
                        d2,
                        h(g, 2.0 * t)? / v,
                        2.0 * h_prime(g, 2.0 * t)? / d1,
                        4.0 * h_double_prime(g, 2.0 * t)? / d2,
                    ])
                })
                .collect::<divaudit::Result<Vec<_>>>()?;
            let table = csv(
                &[
                    "t",
                    "h",
                    "h_prime",
                    "h_double_prime",
                    "ratio_h",
                    "ratio_h_prime",
                    "ratio_h_double_prime",
                ],
                &rows,
            );
            let estimates = vec![
                (sweep.value, 1e-3),
                (sweep.first, 1e-3),
                (sweep.second, 1e-3),
                (h2, 1e-4),
            ];
            ("cauchy", table, estimates)
        }
        LimitTarget::Tv => {
            let (ratio, slope) = cauchy_tv_ratio_sweep(&sorted)?;
            let tv = generator_tv();
            let rows = sorted
                .iter()
                .map(|&t| {
                    let v = h(&tv, t)?;
                    Ok(vec![t, v, h_prime(&tv, t)?, h(&tv, 2.0 * t)? / v])
                })
                .collect::<divaudit::Result<Vec<_>>>()?;
            let table = csv(&["t", "h", "h_prime", "ratio_h"], &rows);
            ("tv", table, vec![(ratio, 1e-3), (slope, 1e-3)])
        }
    };

    let summaries: Vec<LimitSummary> = estimates
        .iter()
        .map(|(est, default_tol)| summarize(est, tolerance.unwrap_or(*default_tol)))
        .collect();
    let pass = summaries.iter().all(|s| s.pass);
    let payload = json!({
        "schema": SCHEMA_VERSION,
        "target": name,
        "generator": generator.map(|g| g.name()),
        "grid": sorted,
        "estimates": summaries,
        "pass": pass,
    });
    let summary = to_json(&payload);
    Ok(Outcome {
        exit_code: if pass { EXIT_OK } else { EXIT_NOT_FOUND },
        stdout: format!("{table}\n{summary}"),
        stderr: String::new(),
        artifacts: vec![
            Artifact {
                file_name: format!("limits_{name}.csv"),
                contents: table,
            },
            Artifact {
                file_name: format!("limits_{name}.json"),
                contents: summary,
            },
        ],
    })
}

/// Writes `contents` to `dir/file_name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, artifact: &Artifact) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| anyhow::anyhow!("creating {}: {e}", dir.display()))?;
    let target = dir.join(&artifact.file_name);
    let tmp = dir.join(format!(".{}.tmp", artifact.file_name));
    fs::write(&tmp, &artifact.contents)
        .map_err(|e| anyhow::anyhow!("writing {}: {e}", tmp.display()))?;
    fs::rename(&tmp, &target)
        .map_err(|e| anyhow::anyhow!("renaming {} to {}: {e}", tmp.display(), target.display()))?;
    Ok(target)
}
