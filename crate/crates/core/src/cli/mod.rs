//! `pgap` command-line front end.
//!
//! Every run echoes its resolved configuration in the output header; numbers
//! in CSV are printed with 17 significant digits. Exit codes: 0 success,
//! 2 usage or spec error, 3 numerical-consistency failure.

pub mod verify;

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::envelope::concave_envelope;
use crate::error::Error;
use crate::functions::FunctionSpec;
use crate::geometry::Domain;
use crate::integration::{
    integrate_function, integrate_power_domain_with, monte_carlo_integrate, IntegralResult,
    PowerRoute,
};
use crate::parallel::with_threads;
use crate::relaxation::{
    delta, delta_exp_box, delta_homogeneous, ratio_sweep, relaxation_report, MuKind,
};

pub use verify::{run_identity_suite, IdentityCheck};

/// Exit status for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit status for malformed flags or specs.
pub const EXIT_USAGE: i32 = 2;
/// Exit status when independent methods disagree.
pub const EXIT_INCONSISTENT: i32 = 3;

/// Methods must agree within this many Monte Carlo standard errors.
pub const MC_SIGMAS: f64 = 4.0;
/// Relative agreement required between closed forms.
pub const CLOSED_FORM_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "pgap", version, about = "Perspective versus naive relaxation volumes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Integrate,
    Volume,
    Delta,
    Sweep,
    Verify,
    EnvelopeExport,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate f over the domain by every applicable method plus Monte Carlo.
    Integrate(RunArgs),
    /// vol(P), vol(P⁰), Δ and the cut-off ratio.
    Volume(RunArgs),
    /// Δ by the generic route and by each applicable closed form.
    Delta(RunArgs),
    /// Ratio table over boxes v0 + u[0,1]^d for the listed u.
    Sweep(RunArgs),
    /// Run the built-in identity suite.
    Verify(RunArgs),
    /// Export the concave envelope pieces.
    EnvelopeExport(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MuArg {
    Constant,
    Envelope,
}

impl From<MuArg> for MuKind {
    fn from(m: MuArg) -> Self {
        match m {
            MuArg::Constant => MuKind::Constant,
            MuArg::Envelope => MuKind::ConcaveEnvelope,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Function spec: JSON file path or inline JSON.
    #[arg(long)]
    pub function: Option<String>,
    /// Domain spec: JSON file path or inline JSON.
    #[arg(long)]
    pub domain: Option<String>,
    #[arg(long, value_enum, default_value = "envelope")]
    pub mu: MuArg,
    /// Comma-separated box scales for `sweep`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub u: Vec<f64>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Fully resolved run configuration, echoed into every output.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunConfig {
    pub command: CommandKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub function_spec: Option<FunctionSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain_spec: Option<Domain>,
    pub mu_kind: MuKind,
    pub u_list: Vec<f64>,
    pub seed: u64,
    pub samples: usize,
    pub out_format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_path: Option<PathBuf>,
}

/// A failed run and its exit status.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Inconsistent(_) | Error::DegenerateVolume(_) | Error::Range { .. } => {
                EXIT_INCONSISTENT
            }
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

/// Output text plus exit status of a completed run.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub text: String,
}

fn load_json<T: serde::de::DeserializeOwned>(what: &str, arg: &str) -> Result<T, Failure> {
    let trimmed = arg.trim_start();
    let (source, text) = if trimmed.starts_with('{') {
        ("inline".to_string(), arg.to_string())
    } else {
        let text = std::fs::read_to_string(arg)
            .map_err(|e| Failure::usage(format!("cannot read {what} spec {arg}: {e}")))?;
        (arg.to_string(), text)
    };
    // serde_json's message already ends with "at line L column C"
    serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{what} spec ({source}): {e}")))
}

impl RunConfig {
    pub fn resolve(command: CommandKind, args: &RunArgs) -> Result<Self, Failure> {
        let function_spec = args
            .function
            .as_deref()
            .map(|s| load_json::<FunctionSpec>("function", s))
            .transpose()?;
        let domain_spec = args
            .domain
            .as_deref()
            .map(|s| load_json::<Domain>("domain", s))
            .transpose()?;
        Ok(Self {
            command,
            function_spec,
            domain_spec,
            mu_kind: args.mu.into(),
            u_list: args.u.clone(),
            seed: args.seed,
            samples: args.samples,
            out_format: args.format,
            out_path: args.out.clone(),
        })
    }

    fn function(&self) -> Result<&FunctionSpec, Failure> {
        self.function_spec
            .as_ref()
            .ok_or_else(|| Failure::usage("--function is required"))
    }

    fn domain(&self) -> Result<&Domain, Failure> {
        self.domain_spec
            .as_ref()
            .ok_or_else(|| Failure::usage("--domain is required"))
    }
}

/// Float cell with 17 significant digits.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

fn render(cfg: &RunConfig, table: Table, json: serde_json::Value, status: &str) -> String {
    match cfg.out_format {
        Format::Csv => {
            let mut s = String::new();
            let config = serde_json::to_string(cfg).expect("config serializes");
            writeln!(s, "# config {config}").unwrap();
            writeln!(s, "# status {status}").unwrap();
            writeln!(s, "{}", table.header.join(",")).unwrap();
            for row in table.rows {
                writeln!(s, "{}", row.join(",")).unwrap();
            }
            s
        }
        Format::Json => {
            let doc = serde_json::json!({
                "config": cfg,
                "status": status,
                "result": json,
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("result serializes");
            s.push('\n');
            s
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
struct MethodRow {
    method: String,
    value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    std_error: Option<f64>,
}

fn closed_forms(f: &FunctionSpec, dom: &Domain) -> Vec<(String, Result<IntegralResult, Error>)> {
    match (f, dom) {
        (FunctionSpec::Power(p), Domain::Box(_) | Domain::Zonotope(_)) => {
            let mut out = Vec::new();
            if p.integer_exponent().is_some() {
                out.push((
                    "multinomial".to_string(),
                    integrate_power_domain_with(p, dom, PowerRoute::Multinomial),
                ));
            }
            out.push((
                "triangulation".to_string(),
                integrate_power_domain_with(p, dom, PowerRoute::Triangulation),
            ));
            out
        }
        _ => {
            let r = integrate_function(f, dom);
            let name = r
                .as_ref()
                .map(|r| r.method.to_string())
                .unwrap_or_else(|_| "closed_form".into());
            vec![(name, r)]
        }
    }
}

fn cmd_integrate(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let f = cfg.function()?;
    let dom = cfg.domain()?;
    if f.dim() != dom.dim() {
        return Err(Error::DimensionMismatch {
            expected: dom.dim(),
            got: f.dim(),
        }
        .into());
    }
    let mut rows = Vec::new();
    for (name, r) in closed_forms(f, dom) {
        match r {
            Ok(r) => rows.push(MethodRow {
                method: name,
                value: r.value,
                std_error: r.error_estimate,
            }),
            // e.g. genericity failure of the triangulation route: skip the row
            Err(Error::NotGeneric { .. }) => {}
            Err(e) => return Err(e.into()),
        }
    }
    let mc = monte_carlo_integrate(f, dom, cfg.samples, cfg.seed)?;
    let se = mc.error_estimate.unwrap_or(f64::INFINITY);
    let mut consistent = true;
    for r in &rows {
        let slack = MC_SIGMAS * se + 1e-12 * r.value.abs().max(1.0);
        consistent &= (r.value - mc.value).abs() <= slack;
        let tol = CLOSED_FORM_TOL * r.value.abs().max(1e-300) + r.std_error.unwrap_or(0.0);
        consistent &= (r.value - rows[0].value).abs() <= tol;
    }
    rows.push(MethodRow {
        method: "monte_carlo".into(),
        value: mc.value,
        std_error: Some(se),
    });
    let status = if consistent { "consistent" } else { "inconsistent" };
    let table = Table {
        header: vec!["method", "value", "std_error"],
        rows: rows
            .iter()
            .map(|r| vec![r.method.clone(), fmt_num(r.value), fmt_opt(r.std_error)])
            .collect(),
    };
    let json = serde_json::to_value(&rows).expect("rows serialize");
    Ok(Outcome {
        code: if consistent { EXIT_OK } else { EXIT_INCONSISTENT },
        text: render(cfg, table, json, status),
    })
}

fn cmd_volume(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let f = cfg.function()?;
    let dom = cfg.domain()?;
    let r = relaxation_report(f, cfg.mu_kind, dom)?;
    let gap = r.vol_p0 - r.vol_p;
    let consistent = (gap - r.delta).abs() <= 1e-10 * r.delta.abs().max(r.vol_p0.abs() * 1e-6)
        && r.delta >= -1e-10;
    let status = if consistent { "consistent" } else { "inconsistent" };
    let table = Table {
        header: vec!["volP", "volP0", "delta", "ratio", "muKind", "formulaTrace"],
        rows: vec![vec![
            fmt_num(r.vol_p),
            fmt_num(r.vol_p0),
            fmt_num(r.delta),
            fmt_num(r.ratio),
            r.mu_kind.to_string(),
            r.formula_trace.join(";"),
        ]],
    };
    let json = serde_json::to_value(&r).expect("report serializes");
    Ok(Outcome {
        code: if consistent { EXIT_OK } else { EXIT_INCONSISTENT },
        text: render(cfg, table, json, status),
    })
}

fn cmd_delta(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let f = cfg.function()?;
    let dom = cfg.domain()?;
    let mut rows = vec![MethodRow {
        method: "generic".into(),
        value: delta(f, dom)?,
        std_error: None,
    }];
    match (f, dom) {
        (FunctionSpec::Power(_), _) => rows.push(MethodRow {
            method: "homogeneous".into(),
            value: delta_homogeneous(f, dom)?,
            std_error: None,
        }),
        (FunctionSpec::Exp(e), Domain::Box(b)) => rows.push(MethodRow {
            method: "exp_box_closed_form".into(),
            value: delta_exp_box(e, b)?,
            std_error: None,
        }),
        _ => {}
    }
    let base = rows[0].value;
    let consistent = rows
        .iter()
        .all(|r| (r.value - base).abs() <= CLOSED_FORM_TOL * base.abs().max(1e-300) + 1e-15);
    let status = if consistent { "consistent" } else { "inconsistent" };
    let table = Table {
        header: vec!["method", "delta"],
        rows: rows.iter().map(|r| vec![r.method.clone(), fmt_num(r.value)]).collect(),
    };
    let json = serde_json::to_value(&rows).expect("rows serialize");
    Ok(Outcome {
        code: if consistent { EXIT_OK } else { EXIT_INCONSISTENT },
        text: render(cfg, table, json, status),
    })
}

fn cmd_sweep(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let f = cfg.function()?;
    let dom = cfg.domain()?;
    if cfg.u_list.is_empty() {
        return Err(Failure::usage("--u needs at least one value"));
    }
    let b = dom
        .as_box()
        .ok_or_else(|| Failure::usage("sweep needs a box domain (its v0 is used)"))?;
    let rows = ratio_sweep(f, cfg.mu_kind, b.v0(), &cfg.u_list)?;
    let table = Table {
        header: vec![
            "u",
            "volP",
            "volP0",
            "delta",
            "ratio",
            "scaledRatio",
            "theoretical",
            "asymptotic",
        ],
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    fmt_num(r.u),
                    fmt_num(r.vol_p),
                    fmt_num(r.vol_p0),
                    fmt_num(r.delta),
                    fmt_num(r.ratio),
                    fmt_num(r.scaled_ratio),
                    fmt_opt(r.theoretical),
                    u8::from(r.asymptotic).to_string(),
                ]
            })
            .collect(),
    };
    let json = serde_json::to_value(&rows).expect("rows serialize");
    Ok(Outcome {
        code: EXIT_OK,
        text: render(cfg, table, json, "ok"),
    })
}

fn cmd_verify(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let checks = run_identity_suite(cfg.seed);
    let all = checks.iter().all(|c| c.passed);
    let table = Table {
        header: vec!["identity", "status", "cases", "max_error", "tolerance"],
        rows: checks
            .iter()
            .map(|c| {
                vec![
                    c.name.to_string(),
                    if c.passed { "PASS" } else { "FAIL" }.to_string(),
                    c.cases.to_string(),
                    fmt_num(c.max_error),
                    fmt_num(c.tolerance),
                ]
            })
            .collect(),
    };
    let json = serde_json::to_value(&checks).expect("checks serialize");
    let status = if all { "all identities pass" } else { "identity failure" };
    Ok(Outcome {
        code: if all { EXIT_OK } else { EXIT_INCONSISTENT },
        text: render(cfg, table, json, status),
    })
}

fn join_nums(v: &[f64]) -> String {
    v.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(" ")
}

fn cmd_envelope_export(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let f = cfg.function()?;
    let b = cfg
        .domain()?
        .as_box()
        .ok_or_else(|| Failure::usage("envelope-export needs a box domain"))?;
    let env = concave_envelope(f, b)?;
    let table = Table {
        header: vec!["permutation", "vertices", "gradient", "offset"],
        rows: env
            .pieces()
            .iter()
            .map(|p| {
                vec![
                    p.permutation.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" "),
                    p.vertices.iter().map(|v| join_nums(v)).collect::<Vec<_>>().join(";"),
                    join_nums(&p.gradient),
                    fmt_num(p.offset),
                ]
            })
            .collect(),
    };
    let json = serde_json::to_value(env.pieces()).expect("pieces serialize");
    Ok(Outcome {
        code: EXIT_OK,
        text: render(cfg, table, json, "ok"),
    })
}

/// Executes a resolved configuration.
pub fn execute(cfg: &RunConfig) -> Result<Outcome, Failure> {
    match cfg.command {
        CommandKind::Integrate => cmd_integrate(cfg),
        CommandKind::Volume => cmd_volume(cfg),
        CommandKind::Delta => cmd_delta(cfg),
        CommandKind::Sweep => cmd_sweep(cfg),
        CommandKind::Verify => cmd_verify(cfg),
        CommandKind::EnvelopeExport => cmd_envelope_export(cfg),
    }
}

fn split(command: &Command) -> (CommandKind, &RunArgs) {
    match command {
        Command::Integrate(a) => (CommandKind::Integrate, a),
        Command::Volume(a) => (CommandKind::Volume, a),
        Command::Delta(a) => (CommandKind::Delta, a),
        Command::Sweep(a) => (CommandKind::Sweep, a),
        Command::Verify(a) => (CommandKind::Verify, a),
        Command::EnvelopeExport(a) => (CommandKind::EnvelopeExport, a),
    }
}

fn threads_from_env() -> Option<usize> {
    std::env::var("PG_THREADS").ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Parses arguments, runs the command and writes its output; returns the
/// process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let (kind, args) = split(&cli.command);
    let outcome = RunConfig::resolve(kind, args).and_then(|cfg| {
        let result = match threads_from_env() {
            Some(n) => with_threads(n, || execute(&cfg)),
            None => execute(&cfg),
        };
        result.map(|o| (cfg, o))
    });
    match outcome {
        Ok((cfg, o)) => {
            let written = match &cfg.out_path {
                Some(path) => std::fs::write(path, &o.text),
                None => {
                    use std::io::Write;
                    std::io::stdout().write_all(o.text.as_bytes())
                }
            };
            if let Err(e) = written {
                eprintln!("pgap: cannot write output: {e}");
                return EXIT_USAGE;
            }
            if o.code != EXIT_OK {
                eprintln!("pgap: numerical consistency check failed");
            }
            o.code
        }
        Err(f) => {
            eprintln!("pgap: {}", f.message);
            f.code
        }
    }
}
