//! Command-line front end. Every computation is a call into the library.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 usage or domain
//! error, 3 I/O error.

mod config;

pub use config::{parse_pq, resolve_out_path, OutputFormat, RunConfig, OUT_DIR_ENV};

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::extremizer::sharpness_report_with;
use crate::scalars::{
    bellman_three_on_surface, bellman_two, beta_from_moments_with, h_p, omega, omega_with, solve_z,
    surface_p_moment, upper_bound_three, z_equation_residual, RootConfig,
};
use crate::svg::LogLogPlot;
use crate::verify::{run_plan, Inequality, TreeFamily, ValueLaw, VerificationPlan};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "dyadic-bellman",
    version,
    about = "Tree maximal operators and their Bellman functions"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// Write output here instead of standard output (relative paths resolve
    /// against $DYADIC_OUT_DIR when set).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// TOML file with flat `flag = value` entries; flags win over the file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Absolute tolerance for root finding.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate one scalar quantity.
    Eval(EvalArgs),
    /// Run the randomized inequality checks.
    Verify(VerifyArgs),
    /// Sweep the extremal family towards the Bellman value.
    Extremize(ExtremizeArgs),
    /// Sweep alpha -> 0 in the z(alpha, tau) equation against omega_q(tau).
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    /// omega_p(tau), needs --p --tau
    Omega,
    /// H_p(z), needs --p --z
    #[value(name = "H")]
    H,
    /// F omega_p(f^p/F)^p, needs --p --f --F
    Bellman2,
    /// omega_q(f^q/A)^p F(f,A), needs --p --q --f --A
    Bellman3,
    /// F(f,A) on the surface, needs --p --q --f --A
    #[value(name = "surfaceF")]
    SurfaceF,
    /// beta with 1/((beta+1)^(p-1)(1-beta(p-1))) = F/f^p, needs --p --f --F
    Beta,
    /// F h^-1(k(f,A,F))^p, needs --p --q --f --A --F
    Bound3,
}

impl Quantity {
    fn name(&self) -> &'static str {
        match self {
            Quantity::Omega => "omega",
            Quantity::H => "H",
            Quantity::Bellman2 => "bellman2",
            Quantity::Bellman3 => "bellman3",
            Quantity::SurfaceF => "surfaceF",
            Quantity::Beta => "beta",
            Quantity::Bound3 => "bound3",
        }
    }
}

#[derive(Args, Debug, Default)]
pub struct ParamArgs {
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub f: Option<f64>,
    #[arg(long = "A")]
    pub a: Option<f64>,
    #[arg(long = "F")]
    pub big_f: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub z: Option<f64>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(value_enum)]
    pub quantity: Quantity,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Args, Debug, Default)]
pub struct VerifyArgs {
    /// Samples per value law.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fixed tree depth (sets both depth bounds).
    #[arg(long)]
    pub depth: Option<u32>,
    #[arg(long)]
    pub min_depth: Option<u32>,
    #[arg(long)]
    pub max_depth: Option<u32>,
    /// Comma-separated beta grid.
    #[arg(long, value_delimiter = ',')]
    pub betas: Option<Vec<f64>>,
    /// binary, triadic, random or mixed.
    #[arg(long)]
    pub tree: Option<String>,
    /// Comma-separated value laws: uniform, log-normal, sparse-spikes, constant.
    #[arg(long, value_delimiter = ',')]
    pub laws: Option<Vec<String>>,
    /// Comma-separated p:q pairs.
    #[arg(long, value_delimiter = ',')]
    pub pq: Option<Vec<String>>,
    /// Comma-separated inequality names.
    #[arg(long, value_delimiter = ',')]
    pub inequalities: Option<Vec<String>>,
    /// Also write the per-inequality summary CSV here.
    #[arg(long)]
    pub summary_csv: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct ExtremizeArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Comma-separated k values; alpha = 1/k.
    #[arg(long, value_delimiter = ',')]
    pub ks: Option<Vec<usize>>,
    /// Truncation rank: `auto` or an integer.
    #[arg(long)]
    pub rank: Option<String>,
    /// Write a log-log plot of the error columns against k.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct SweepArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Comma-separated alpha values.
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
}

impl ParamArgs {
    fn config(&self) -> RunConfig {
        RunConfig {
            p: self.p,
            q: self.q,
            f: self.f,
            a: self.a,
            big_f: self.big_f,
            tau: self.tau,
            z: self.z,
            ..RunConfig::default()
        }
    }
}

impl Cli {
    /// Flags as a [`RunConfig`], before merging with a config file.
    pub fn flag_config(&self) -> RunConfig {
        let common = RunConfig {
            format: self.format,
            out: self.out.clone(),
            tol: self.tol,
            ..RunConfig::default()
        };
        let specific = match &self.command {
            Command::Eval(a) => a.params.config(),
            Command::Verify(a) => RunConfig {
                samples: a.samples,
                seed: a.seed,
                min_depth: a.min_depth.or(a.depth),
                max_depth: a.max_depth.or(a.depth),
                betas: a.betas.clone(),
                tree: a.tree.clone(),
                laws: a.laws.clone(),
                pq: a.pq.clone(),
                inequalities: a.inequalities.clone(),
                summary_csv: a.summary_csv.clone(),
                ..RunConfig::default()
            },
            Command::Extremize(a) => RunConfig {
                ks: a.ks.clone(),
                rank: a.rank.clone(),
                svg: a.svg.clone(),
                ..a.params.config()
            },
            Command::Sweep(a) => RunConfig {
                alphas: a.alphas.clone(),
                ..a.params.config()
            },
        };
        specific.overlay(common)
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) => EXIT_IO,
        Error::Csv(e) if e.is_io_error() => EXIT_IO,
        _ => EXIT_USAGE,
    }
}

/// Formats with 15 significant digits, then prints the shortest decimal
/// that reads back to the rounded value.
pub fn format_sig15(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.14e}").parse().expect("formatted float parses");
    let a = rounded.abs();
    if a != 0.0 && !(1e-5..1e16).contains(&a) {
        format!("{rounded:e}")
    } else {
        format!("{rounded}")
    }
}

fn sig15(x: f64) -> f64 {
    format_sig15(x).parse().unwrap_or(x)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let flags = cli.flag_config();
    let cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?.overlay(flags),
        None => flags,
    };
    let roots = match cfg.tol {
        Some(tol) => {
            let r = RootConfig::with_tol(tol);
            r.validate()?;
            r
        }
        None => RootConfig::default(),
    };
    let (body, code) = match &cli.command {
        Command::Eval(a) => (cmd_eval(a.quantity, &cfg, &roots)?, EXIT_OK),
        Command::Verify(_) => cmd_verify(&cfg, stderr)?,
        Command::Extremize(_) => (cmd_extremize(&cfg, &roots)?, EXIT_OK),
        Command::Sweep(_) => (cmd_sweep(&cfg, &roots)?, EXIT_OK),
    };
    emit(&cfg, &body, stdout)?;
    Ok(code)
}

fn emit(cfg: &RunConfig, body: &str, stdout: &mut dyn Write) -> Result<()> {
    match &cfg.out {
        Some(path) => write_file(&resolve_out_path(path), body)?,
        None => stdout.write_all(body.as_bytes())?,
    }
    Ok(())
}

fn write_file(path: &std::path::Path, body: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, body)?;
    Ok(())
}

#[derive(Serialize)]
struct EvalOutput {
    quantity: &'static str,
    inputs: std::collections::BTreeMap<&'static str, f64>,
    value: f64,
}

/// Evaluates one quantity; the body is CSV `quantity,value` or JSON.
pub fn cmd_eval(quantity: Quantity, cfg: &RunConfig, roots: &RootConfig) -> Result<String> {
    let need = |v: Option<f64>, flag: &str| RunConfig::require(v, flag);
    let (inputs, value): (Vec<(&'static str, f64)>, f64) = match quantity {
        Quantity::Omega => {
            let (p, tau) = (need(cfg.p, "p")?, need(cfg.tau, "tau")?);
            (vec![("p", p), ("tau", tau)], omega_with(p, tau, roots)?)
        }
        Quantity::H => {
            let (p, z) = (need(cfg.p, "p")?, need(cfg.z, "z")?);
            if !(p > 1.0) || !(z > 0.0) {
                return Err(Error::domain(format!(
                    "requires p > 1 and z > 0, got p = {p}, z = {z}"
                )));
            }
            (vec![("p", p), ("z", z)], h_p(p, z))
        }
        Quantity::Bellman2 => {
            let (p, f, big_f) = (need(cfg.p, "p")?, need(cfg.f, "f")?, need(cfg.big_f, "F")?);
            (
                vec![("p", p), ("f", f), ("F", big_f)],
                bellman_two(p, f, big_f)?,
            )
        }
        Quantity::Bellman3 => {
            let (p, q, f, a) = (
                need(cfg.p, "p")?,
                need(cfg.q, "q")?,
                need(cfg.f, "f")?,
                need(cfg.a, "A")?,
            );
            (
                vec![("p", p), ("q", q), ("f", f), ("A", a)],
                bellman_three_on_surface(p, q, f, a)?,
            )
        }
        Quantity::SurfaceF => {
            let (p, q, f, a) = (
                need(cfg.p, "p")?,
                need(cfg.q, "q")?,
                need(cfg.f, "f")?,
                need(cfg.a, "A")?,
            );
            (
                vec![("p", p), ("q", q), ("f", f), ("A", a)],
                surface_p_moment(p, q, f, a)?,
            )
        }
        Quantity::Beta => {
            let (p, f, big_f) = (need(cfg.p, "p")?, need(cfg.f, "f")?, need(cfg.big_f, "F")?);
            (
                vec![("p", p), ("f", f), ("F", big_f)],
                beta_from_moments_with(p, f, big_f, roots)?,
            )
        }
        Quantity::Bound3 => {
            let (p, q, f, a, big_f) = (
                need(cfg.p, "p")?,
                need(cfg.q, "q")?,
                need(cfg.f, "f")?,
                need(cfg.a, "A")?,
                need(cfg.big_f, "F")?,
            );
            (
                vec![("p", p), ("q", q), ("f", f), ("A", a), ("F", big_f)],
                upper_bound_three(p, q, f, a, big_f)?,
            )
        }
    };
    Ok(match cfg.format() {
        OutputFormat::Csv => format!(
            "quantity,value\n{},{}\n",
            quantity.name(),
            format_sig15(value)
        ),
        OutputFormat::Json => {
            let out = EvalOutput {
                quantity: quantity.name(),
                inputs: inputs.into_iter().collect(),
                value: sig15(value),
            };
            serde_json::to_string(&out)? + "\n"
        }
    })
}

fn parse_tree_family(name: &str) -> Result<TreeFamily> {
    Ok(match name {
        "binary" => TreeFamily::Kadic { k: 2 },
        "triadic" => TreeFamily::Kadic { k: 3 },
        "random" => TreeFamily::Random { max_children: 4 },
        "mixed" => TreeFamily::Mixed,
        other => {
            return Err(Error::argument(format!(
                "unknown tree family '{other}' (binary, triadic, random, mixed)"
            )))
        }
    })
}

fn parse_law(name: &str) -> Result<ValueLaw> {
    [
        ValueLaw::Uniform,
        ValueLaw::LogNormal,
        ValueLaw::SparseSpikes,
        ValueLaw::Constant,
    ]
    .into_iter()
    .find(|l| l.name() == name)
    .ok_or_else(|| Error::argument(format!("unknown value law '{name}'")))
}

/// The verification plan described by `cfg`, starting from the defaults.
pub fn plan_from_config(cfg: &RunConfig) -> Result<VerificationPlan> {
    let mut plan = VerificationPlan::default();
    if let Some(s) = cfg.seed {
        plan.seed = s;
    }
    if let Some(n) = cfg.samples {
        plan.samples = n;
    }
    if let Some(d) = cfg.min_depth {
        plan.min_depth = d;
    }
    if let Some(d) = cfg.max_depth {
        plan.max_depth = d;
    }
    if let Some(t) = &cfg.tree {
        plan.trees = parse_tree_family(t)?;
    }
    if let Some(b) = &cfg.betas {
        plan.betas = b.clone();
    }
    if let Some(laws) = &cfg.laws {
        plan.value_laws = laws.iter().map(|l| parse_law(l)).collect::<Result<_>>()?;
    }
    if let Some(pq) = &cfg.pq {
        plan.pq_grid = pq.iter().map(|s| parse_pq(s)).collect::<Result<_>>()?;
    }
    if let Some(names) = &cfg.inequalities {
        plan.inequalities = names
            .iter()
            .map(|n| Inequality::parse(n))
            .collect::<Result<_>>()?;
    }
    plan.validate()?;
    Ok(plan)
}

fn cmd_verify(cfg: &RunConfig, stderr: &mut dyn Write) -> Result<(String, i32)> {
    let plan = plan_from_config(cfg)?;
    let report = run_plan(&plan)?;
    if let Some(path) = &cfg.summary_csv {
        write_file(&resolve_out_path(path), &report.summary_csv_string()?)?;
    }
    let _ = writeln!(
        stderr,
        "{} checks, {} failures",
        report.total_checks(),
        report.total_failures()
    );
    let body = match cfg.format() {
        OutputFormat::Csv => report.summary_csv_string()?,
        OutputFormat::Json => report.to_json()? + "\n",
    };
    let code = if report.passed() {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    };
    Ok((body, code))
}

fn parse_rank(rank: Option<&str>) -> Result<Option<usize>> {
    match rank {
        None | Some("auto") => Ok(None),
        Some(s) => s
            .parse()
            .map(Some)
            .map_err(|_| Error::argument(format!("--rank takes 'auto' or an integer, got '{s}'"))),
    }
}

fn cmd_extremize(cfg: &RunConfig, roots: &RootConfig) -> Result<String> {
    let p = RunConfig::require(cfg.p, "p")?;
    let q = RunConfig::require(cfg.q, "q")?;
    let f = RunConfig::require(cfg.f, "f")?;
    let a = RunConfig::require(cfg.a, "A")?;
    let ks = cfg.ks.clone().unwrap_or_else(|| vec![4, 16, 64, 256]);
    let rank = parse_rank(cfg.rank.as_deref())?;
    let report = sharpness_report_with(p, q, f, a, &ks, rank, roots)?;
    if let Some(path) = &cfg.svg {
        let point = |err: f64, k: usize| (k as f64, err.max(f64::MIN_POSITIVE));
        let svg = LogLogPlot::new("Sharpness sweep", "k (alpha = 1/k)", "absolute error")
            .with_series(
                "abs_err_z",
                report
                    .rows
                    .iter()
                    .map(|r| point(r.abs_err_z, r.k))
                    .collect(),
            )
            .with_series(
                "abs_err_F",
                report
                    .rows
                    .iter()
                    .map(|r| point(r.abs_err_f, r.k))
                    .collect(),
            )
            .render()?;
        write_file(&resolve_out_path(path), &svg)?;
    }
    Ok(match cfg.format() {
        OutputFormat::Csv => report.to_csv_string()?,
        OutputFormat::Json => serde_json::to_string_pretty(&report)? + "\n",
    })
}

#[derive(Serialize)]
struct SweepRow {
    alpha: f64,
    z: f64,
    omega_q: f64,
    gap: f64,
    residual: f64,
}

fn cmd_sweep(cfg: &RunConfig, roots: &RootConfig) -> Result<String> {
    let q = RunConfig::require(cfg.q, "q")?;
    let tau = RunConfig::require(cfg.tau, "tau")?;
    let alphas = cfg
        .alphas
        .clone()
        .unwrap_or_else(|| vec![1e-1, 1e-2, 1e-3, 1e-4]);
    let limit = omega(q, tau)?;
    let rows = alphas
        .iter()
        .map(|&alpha| {
            let z = solve_z(q, alpha, tau, roots)?;
            Ok(SweepRow {
                alpha,
                z,
                omega_q: limit,
                gap: (z - limit).abs(),
                residual: z_equation_residual(q, alpha, tau, z),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(match cfg.format() {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in &rows {
                w.serialize(r)?;
            }
            String::from_utf8(w.into_inner().map_err(|e| e.into_error())?)
                .expect("csv output is utf-8")
        }
        OutputFormat::Json => serde_json::to_string_pretty(&rows)? + "\n",
    })
}
