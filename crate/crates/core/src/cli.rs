//! Command-line front end behind the `radau` binary.
//!
//! Four subcommands: `tables`, `solve`, `workprec` and `region`. Settings
//! come from flags, optionally layered over a TOML file given with
//! `--config`; flags win. CSV output starts with a `#`-prefixed metadata
//! block followed by a header row.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Deserialize;
use thiserror::Error;

use crate::analysis::{
    averaged_factors, convergence_region_scan, rho_star, rho_tilde, RegionGrid, RegionMeasure,
};
use crate::linalg::CroutFactors;
use crate::problems::lookup;
use crate::reference_values::{self, AVERAGED, CROUT_OF_A, LOW_RANK_SPLIT};
use crate::solver::{
    integrate_adaptive, mescd, AdaptiveOptions, Backend, InnerSweeps, NewtonConfig, RadauMethod,
    StepStats,
};
use crate::splitting::{aux_abscissae, build_split, crout_of_a, target_pivot};
use crate::tableau::build_collocation;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failure(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failure(_) | CliError::Io(_) => EXIT_FAILURE,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Pretty,
}

#[derive(Debug, Parser)]
#[command(
    name = "radau",
    version,
    about = "Radau IIA integration and splitting analysis"
)]
pub struct Cli {
    /// TOML file with default settings; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Auxiliary abscissae, pivots and amplification factors.
    Tables(TablesArgs),
    /// One adaptive integration.
    Solve(SolveArgs),
    /// Accuracy and cost over a tolerance ladder.
    Workprec(WorkprecArgs),
    /// Samples of the amplification measure over a grid in the q plane.
    Region(RegionArgs),
}

#[derive(Debug, Args)]
pub struct TablesArgs {
    /// Stage counts, e.g. `2..5`, `3` or `2,4`.
    #[arg(long)]
    pub stages: Option<String>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long)]
    pub stages: Option<usize>,
    /// full, split or crout-a.
    #[arg(long)]
    pub backend: Option<String>,
    /// Inner sweeps per Newton iteration.
    #[arg(long)]
    pub inner: Option<usize>,
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
    #[arg(long)]
    pub h0: Option<f64>,
}

#[derive(Debug, Args)]
pub struct WorkprecArgs {
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long)]
    pub stages: Option<usize>,
    /// Comma-separated backends.
    #[arg(long)]
    pub backend: Option<String>,
    /// Comma-separated inner sweep counts for the sweeping backends.
    #[arg(long)]
    pub inner: Option<String>,
    /// `base,step,count`: tolerances `10^(base − i·step)`, `i < count`.
    #[arg(long, allow_hyphen_values = true)]
    pub ladder: Option<String>,
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    #[arg(long)]
    pub stages: Option<usize>,
    /// split or crout-a.
    #[arg(long)]
    pub backend: Option<String>,
    /// Sample `‖M(q)^ν‖^{1/ν}` instead of the spectral radius.
    #[arg(long)]
    pub inner: Option<usize>,
    /// `re_min,re_max,im_min,im_max,n_re,n_im`.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
}

/// Settings read from `--config`. Every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub stages: Option<toml::Value>,
    pub backend: Option<String>,
    pub inner: Option<toml::Value>,
    pub problem: Option<String>,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub h0: Option<f64>,
    pub ladder: Option<String>,
    pub grid: Option<String>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| usage(format!("invalid config {}: {e}", path.display())))
    }

    fn text(value: &Option<toml::Value>) -> Option<String> {
        value.as_ref().map(|v| match v {
            toml::Value::String(s) => s.clone(),
            other => other.to_string(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ladder {
    pub base: f64,
    pub step: f64,
    pub count: usize,
}

impl Ladder {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        let bad = || usage(format!("ladder must be base,step,count, got '{text}'"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let base: f64 = parts[0].parse().map_err(|_| bad())?;
        let step: f64 = parts[1].parse().map_err(|_| bad())?;
        let count: usize = parts[2].parse().map_err(|_| bad())?;
        if count == 0 {
            return Err(usage("ladder is empty"));
        }
        if !(base.is_finite() && step.is_finite() && step >= 0.0) {
            return Err(bad());
        }
        Ok(Self { base, step, count })
    }

    pub fn tolerances(&self) -> Vec<f64> {
        (0..self.count)
            .map(|i| 10f64.powf(self.base - i as f64 * self.step))
            .collect()
    }
}

pub fn parse_grid(text: &str) -> Result<RegionGrid, CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let bad = || {
        usage(format!(
            "grid must be re_min,re_max,im_min,im_max,n_re,n_im, got '{text}'"
        ))
    };
    if parts.len() != 6 {
        return Err(bad());
    }
    let f = |k: usize| parts[k].parse::<f64>().map_err(|_| bad());
    let n = |k: usize| parts[k].parse::<usize>().map_err(|_| bad());
    let grid = RegionGrid {
        re_min: f(0)?,
        re_max: f(1)?,
        im_min: f(2)?,
        im_max: f(3)?,
        n_re: n(4)?,
        n_im: n(5)?,
    };
    let finite = [grid.re_min, grid.re_max, grid.im_min, grid.im_max]
        .iter()
        .all(|v| v.is_finite());
    if !finite || grid.re_min > grid.re_max || grid.im_min > grid.im_max {
        return Err(usage("grid bounds must be finite and ordered"));
    }
    if grid.n_re == 0 || grid.n_im == 0 || grid.n_re * grid.n_im > 4_000_000 {
        return Err(usage("grid must have between 1 and 4e6 points"));
    }
    Ok(grid)
}

/// `2..5`, `3` or `2,4`.
pub fn parse_stage_list(text: &str) -> Result<Vec<usize>, CliError> {
    let bad = || usage(format!("invalid stage list '{text}'"));
    let list: Vec<usize> = if let Some((a, b)) = text.split_once("..") {
        let lo: usize = a.trim().parse().map_err(|_| bad())?;
        let hi: usize = b
            .trim_start_matches('=')
            .trim()
            .parse()
            .map_err(|_| bad())?;
        (lo..=hi).collect()
    } else {
        text.split(',')
            .map(|p| p.trim().parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    if list.is_empty() || list.iter().any(|s| !(2..=5).contains(s)) {
        return Err(usage("tables covers s = 2..5"));
    }
    Ok(list)
}

fn parse_backend(text: &str) -> Result<Backend, CliError> {
    text.trim().parse().map_err(usage)
}

fn check_stages(s: usize) -> Result<usize, CliError> {
    if (2..=8).contains(&s) {
        Ok(s)
    } else {
        Err(usage(format!("stages must be in 2..=8, got {s}")))
    }
}

fn check_tol(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(usage(format!("{name} must be positive, got {v}")))
    }
}

fn method(s: usize) -> Result<RadauMethod, CliError> {
    RadauMethod::new(s).map_err(|e| CliError::Failure(e.to_string()))
}

/// Output sink plus the metadata echoed into CSV headers.
struct Report {
    format: Format,
    meta: Vec<(String, String)>,
    body: String,
}

impl Report {
    fn new(format: Format, command: &str) -> Self {
        Self {
            format,
            meta: vec![
                (
                    "tool".into(),
                    format!("radau {}", env!("CARGO_PKG_VERSION")),
                ),
                ("command".into(), command.into()),
            ],
            body: String::new(),
        }
    }

    fn meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.into(), value.to_string()));
    }

    fn line(&mut self, text: impl AsRef<str>) {
        self.body.push_str(text.as_ref());
        self.body.push('\n');
    }

    fn render(&self) -> String {
        match self.format {
            Format::Pretty => self.body.clone(),
            Format::Csv => {
                let mut out = String::new();
                for (k, v) in &self.meta {
                    let _ = writeln!(out, "# {k}: {v}");
                }
                out.push_str(&self.body);
                out
            }
        }
    }
}

fn tables(args: &TablesArgs, file: &FileConfig, format: Format) -> Result<Report, CliError> {
    let stages = match args
        .stages
        .clone()
        .or_else(|| FileConfig::text(&file.stages))
    {
        Some(text) => parse_stage_list(&text)?,
        None => (2..=5).collect(),
    };
    let mut r = Report::new(format, "tables");
    r.meta("stages", format!("{stages:?}"));
    let fail = |e: &dyn std::fmt::Display| CliError::Failure(e.to_string());

    struct Cell {
        table: &'static str,
        s: usize,
        quantity: String,
        value: f64,
        reference: Option<f64>,
    }
    let mut cells = Vec::new();
    for &s in &stages {
        let c_hat = aux_abscissae(s).map_err(|e| fail(&e))?;
        for (k, c) in c_hat.iter().enumerate().take(s - 1) {
            cells.push(Cell {
                table: "abscissae",
                s,
                quantity: format!("c_hat_{}", k + 1),
                value: *c,
                reference: None,
            });
        }
        cells.push(Cell {
            table: "abscissae",
            s,
            quantity: "d_s".into(),
            value: target_pivot(s),
            reference: reference_values::pivot(s),
        });
    }
    for &s in &stages {
        let tab = build_collocation(s).map_err(|e| fail(&e))?;
        let standard = crout_of_a(&tab).map_err(|e| fail(&e))?.crout;
        let split = build_split(s, &aux_abscissae(s).map_err(|e| fail(&e))?)
            .map_err(|e| fail(&e))?
            .crout;
        let refs =
            |rows: &[reference_values::FactorRow]| rows.iter().find(|row| row.s == s).copied();
        for (label, factors, row) in [
            ("crout-a", &standard, refs(&CROUT_OF_A)),
            ("split", &split, refs(&LOW_RANK_SPLIT)),
        ] {
            let tilde = rho_tilde(factors).map_err(|e| fail(&e))?;
            let (star, _) = rho_star(factors).map_err(|e| fail(&e))?;
            cells.push(Cell {
                table: "factors",
                s,
                quantity: format!("{label}.rho_tilde"),
                value: tilde,
                reference: row.map(|r| r.rho_tilde),
            });
            cells.push(Cell {
                table: "factors",
                s,
                quantity: format!("{label}.rho_star"),
                value: star,
                reference: row.map(|r| r.rho_star),
            });
        }
    }
    for &s in &stages {
        let split = build_split(s, &aux_abscissae(s).map_err(|e| fail(&e))?)
            .map_err(|e| fail(&e))?
            .crout;
        let row = AVERAGED.iter().find(|row| row.s == s);
        let avg_s = averaged_factors(&split, s).map_err(|e| fail(&e))?;
        let avg_1 = averaged_factors(&split, 1).map_err(|e| fail(&e))?;
        let entries = [
            ("rho_tilde_s", avg_s.rho_tilde, row.map(|r| r.rho_tilde_s)),
            ("rho_star_s", avg_s.rho_star, row.map(|r| r.rho_star_s)),
            ("rho_tilde_1", avg_1.rho_tilde, row.map(|r| r.rho_tilde_1)),
            ("rho_star_1", avg_1.rho_star, row.map(|r| r.rho_star_1)),
            ("rho_inf_1", avg_1.rho_inf, row.map(|r| r.rho_inf_1)),
        ];
        for (q, value, reference) in entries {
            cells.push(Cell {
                table: "averaged",
                s,
                quantity: q.into(),
                value,
                reference,
            });
        }
    }

    match format {
        Format::Csv => {
            r.line("table,s,quantity,value,reference,deviation");
            for c in &cells {
                let (reference, dev) = match c.reference {
                    Some(v) => (format!("{v}"), format!("{:.3e}", (c.value - v).abs())),
                    None => (String::new(), String::new()),
                };
                r.line(format!(
                    "{},{},{},{:.17e},{reference},{dev}",
                    c.table, c.s, c.quantity, c.value
                ));
            }
        }
        Format::Pretty => {
            let mut current = "";
            for c in &cells {
                if c.table != current {
                    current = c.table;
                    r.line(format!("\n== {current} =="));
                    r.line(format!(
                        "{:>3}  {:<18} {:>22}  {:>10}  {:>9}",
                        "s", "quantity", "value", "reference", "|dev|"
                    ));
                }
                let (reference, dev) = match c.reference {
                    Some(v) if c.table == "abscissae" => {
                        (format!("{v:.10}"), format!("{:.1e}", (c.value - v).abs()))
                    }
                    Some(v) => (format!("{v:.4}"), format!("{:.1e}", (c.value - v).abs())),
                    None => (String::new(), String::new()),
                };
                r.line(format!(
                    "{:>3}  {:<18} {:>22.16}  {reference:>10}  {dev:>9}",
                    c.s, c.quantity, c.value
                ));
            }
        }
    }
    Ok(r)
}

fn stats_line(stats: &StepStats) -> String {
    format!(
        "steps {} accept {} reject {} feval {} jeval {} LU {} (order {})",
        stats.steps,
        stats.accepted,
        stats.rejected,
        stats.f_evals,
        stats.jac_evals,
        stats.lu_factorizations,
        stats.lu_dimension
    )
}

fn solve(args: &SolveArgs, file: &FileConfig, format: Format) -> Result<Report, CliError> {
    let problem_name = args
        .problem
        .clone()
        .or_else(|| file.problem.clone())
        .unwrap_or_else(|| "van_der_pol".into());
    let spec = lookup(&problem_name).map_err(|e| usage(e.to_string()))?;
    let stages_file = FileConfig::text(&file.stages)
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| usage(format!("invalid stages '{t}'")))
        })
        .transpose()?;
    let s = check_stages(args.stages.or(stages_file).unwrap_or(3))?;
    let backend = parse_backend(
        args.backend
            .as_deref()
            .or(file.backend.as_deref())
            .unwrap_or("split"),
    )?;
    let inner_file = FileConfig::text(&file.inner)
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| usage(format!("invalid inner '{t}'")))
        })
        .transpose()?;
    let nu = args.inner.or(inner_file).unwrap_or(2);
    let rtol = check_tol("rtol", args.rtol.or(file.rtol).unwrap_or(1e-6))?;
    let atol = check_tol("atol", args.atol.or(file.atol).unwrap_or(rtol))?;
    let h0 = check_tol("h0", args.h0.or(file.h0).unwrap_or(spec.h0))?;
    let cfg = NewtonConfig::default()
        .with_backend(backend)
        .with_inner(InnerSweeps::Fixed(nu));
    cfg.validate().map_err(|e| usage(e.to_string()))?;

    let method = method(s)?;
    let start = Instant::now();
    let (y, stats) = integrate_adaptive(
        &spec.problem,
        &method,
        AdaptiveOptions::new(rtol, atol).with_h0(h0),
        &cfg,
    )
    .map_err(|e| CliError::Failure(format!("{}: {e}", spec.name)))?;
    let cpu = start.elapsed().as_secs_f64();
    let digits = spec.reference_at_end().map(|r| mescd(&y, &r));

    let mut r = Report::new(format, "solve");
    for (k, v) in [
        ("problem", problem_name.clone()),
        ("stages", s.to_string()),
        ("backend", backend.name().into()),
        ("inner", nu.to_string()),
        ("rtol", format!("{rtol:e}")),
        ("atol", format!("{atol:e}")),
        ("h0", format!("{h0:e}")),
    ] {
        r.meta(k, v);
    }
    match format {
        Format::Csv => {
            r.line("quantity,value");
            r.line(format!("t_end,{}", spec.problem.t_end));
            for (k, v) in y.iter().enumerate() {
                r.line(format!("y{k},{v:.17e}"));
            }
            r.line(format!(
                "mescd,{}",
                digits.map(|d| format!("{d:.4}")).unwrap_or_default()
            ));
            for (k, v) in [
                ("steps", stats.steps),
                ("accept", stats.accepted),
                ("reject", stats.rejected),
                ("feval", stats.f_evals),
                ("jeval", stats.jac_evals),
                ("lu", stats.lu_factorizations),
                ("lu_dim", stats.lu_dimension),
                ("inner_sweeps", stats.inner_sweeps_total),
            ] {
                r.line(format!("{k},{v}"));
            }
            r.line(format!("cpu_seconds,{cpu:.6}"));
        }
        Format::Pretty => {
            r.line(format!(
                "{} with s = {s}, backend {}, nu = {nu}, rtol = {rtol:e}, atol = {atol:e}",
                spec.name,
                backend.name()
            ));
            r.line(format!("y({}) = {y:?}", spec.problem.t_end));
            if let Some(d) = digits {
                r.line(format!("mescd {d:.2}"));
            }
            r.line(stats_line(&stats));
            r.line(format!("cpu {cpu:.3} s"));
        }
    }
    Ok(r)
}

fn workprec(args: &WorkprecArgs, file: &FileConfig, format: Format) -> Result<Report, CliError> {
    let problem_name = args
        .problem
        .clone()
        .or_else(|| file.problem.clone())
        .unwrap_or_else(|| "diffusion_chain:m=80".into());
    let spec = lookup(&problem_name).map_err(|e| usage(e.to_string()))?;
    let stages_file = FileConfig::text(&file.stages)
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| usage(format!("invalid stages '{t}'")))
        })
        .transpose()?;
    let s = check_stages(args.stages.or(stages_file).unwrap_or(3))?;
    let backends: Vec<Backend> = args
        .backend
        .as_deref()
        .or(file.backend.as_deref())
        .unwrap_or("full,split")
        .split(',')
        .map(parse_backend)
        .collect::<Result<_, _>>()?;
    let inner_text = args
        .inner
        .clone()
        .or_else(|| FileConfig::text(&file.inner))
        .unwrap_or_else(|| "1,2,3".into());
    let nus: Vec<usize> = inner_text
        .split(',')
        .map(|t| match t.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(usage(format!("invalid inner sweep list '{inner_text}'"))),
        })
        .collect::<Result<_, _>>()?;
    let ladder = Ladder::parse(
        args.ladder
            .as_deref()
            .or(file.ladder.as_deref())
            .unwrap_or("-4,0.25,17"),
    )?;
    let reference = spec
        .reference_at_end()
        .ok_or_else(|| usage(format!("{} has no reference solution", spec.name)))?;

    let method = method(s)?;
    let mut r = Report::new(format, "workprec");
    for (k, v) in [
        ("problem", problem_name.clone()),
        ("stages", s.to_string()),
        (
            "backends",
            backends
                .iter()
                .map(|b| b.name())
                .collect::<Vec<_>>()
                .join(";"),
        ),
        (
            "inner",
            nus.iter()
                .map(usize::to_string)
                .collect::<Vec<_>>()
                .join(";"),
        ),
        (
            "ladder",
            format!("{},{},{}", ladder.base, ladder.step, ladder.count),
        ),
    ] {
        r.meta(k, v);
    }
    match format {
        Format::Csv => {
            r.line("backend,nu,tol,mescd,cpu_seconds,steps,accept,feval,jeval,lu,status")
        }
        Format::Pretty => r.line(format!(
            "{:<8} {:>3} {:>9} {:>7} {:>9} {:>6} {:>6} {:>8} {:>6} {:>6}  status",
            "backend", "nu", "tol", "mescd", "cpu[s]", "steps", "accept", "feval", "jeval", "lu"
        )),
    }
    for &backend in &backends {
        let variants: Vec<Option<usize>> = match backend {
            Backend::FullLu => vec![None],
            _ => nus.iter().copied().map(Some).collect(),
        };
        for nu in variants {
            let cfg = NewtonConfig::default()
                .with_backend(backend)
                .with_inner(InnerSweeps::Fixed(nu.unwrap_or(1)));
            for tol in ladder.tolerances() {
                let opts = AdaptiveOptions::new(tol, tol).with_h0(tol);
                let start = Instant::now();
                let result = integrate_adaptive(&spec.problem, &method, opts, &cfg);
                let cpu = start.elapsed().as_secs_f64();
                let nu_text = nu.map(|n| n.to_string()).unwrap_or_else(|| "-".into());
                let (digits, stats, status) = match result {
                    Ok((y, stats)) => (
                        format!("{:.4}", mescd(&y, &reference)),
                        stats,
                        "ok".to_string(),
                    ),
                    Err(e) => (
                        String::new(),
                        StepStats::default(),
                        format!("failed: {e}").replace(',', ";"),
                    ),
                };
                let line = match format {
                    Format::Csv => format!(
                        "{},{nu_text},{tol:.6e},{digits},{cpu:.6},{},{},{},{},{},{status}",
                        backend.name(),
                        stats.steps,
                        stats.accepted,
                        stats.f_evals,
                        stats.jac_evals,
                        stats.lu_factorizations
                    ),
                    Format::Pretty => format!(
                        "{:<8} {nu_text:>3} {tol:>9.2e} {digits:>7} {cpu:>9.4} {:>6} {:>6} {:>8} {:>6} {:>6}  {status}",
                        backend.name(),
                        stats.steps,
                        stats.accepted,
                        stats.f_evals,
                        stats.jac_evals,
                        stats.lu_factorizations
                    ),
                };
                r.line(line);
            }
        }
    }
    Ok(r)
}

fn region(args: &RegionArgs, file: &FileConfig, format: Format) -> Result<Report, CliError> {
    let stages_file = FileConfig::text(&file.stages)
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| usage(format!("invalid stages '{t}'")))
        })
        .transpose()?;
    let s = check_stages(args.stages.or(stages_file).unwrap_or(3))?;
    let backend = parse_backend(
        args.backend
            .as_deref()
            .or(file.backend.as_deref())
            .unwrap_or("split"),
    )?;
    let inner_file = FileConfig::text(&file.inner)
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| usage(format!("invalid inner '{t}'")))
        })
        .transpose()?;
    let measure = match args.inner.or(inner_file) {
        Some(0) => return Err(usage("inner must be >= 1")),
        Some(nu) => RegionMeasure::Averaged(nu),
        None => RegionMeasure::SpectralRadius,
    };
    let grid = parse_grid(
        args.grid
            .as_deref()
            .or(file.grid.as_deref())
            .unwrap_or("-20,1,-20,20,100,100"),
    )?;

    let method = method(s)?;
    let factors: &CroutFactors = match backend {
        Backend::SplitLowRank => &method.split.crout,
        Backend::CroutOfA => &method.crout_a.crout,
        Backend::FullLu => return Err(usage("region needs a sweeping backend (split or crout-a)")),
    };
    let scan = convergence_region_scan(factors, &grid, measure);

    let mut r = Report::new(format, "region");
    r.meta("stages", s);
    r.meta("backend", backend.name());
    r.meta(
        "measure",
        match measure {
            RegionMeasure::SpectralRadius => "spectral radius".to_string(),
            RegionMeasure::Averaged(nu) => format!("averaged over {nu} sweeps"),
        },
    );
    r.meta(
        "grid",
        format!(
            "{},{},{},{},{},{}",
            grid.re_min, grid.re_max, grid.im_min, grid.im_max, grid.n_re, grid.n_im
        ),
    );
    match format {
        Format::Csv => {
            r.line("re,im,value");
            for sample in &scan.samples {
                r.line(format!(
                    "{},{},{:.10e}",
                    sample.q.re, sample.q.im, sample.value
                ));
            }
        }
        Format::Pretty => {
            let worst = scan
                .samples
                .iter()
                .filter(|x| x.q.re <= 0.0)
                .max_by(|a, b| a.value.total_cmp(&b.value));
            r.line(format!(
                "{} samples, s = {s}, backend {}",
                scan.samples.len(),
                backend.name()
            ));
            match worst {
                Some(w) => r.line(format!(
                    "max over Re q <= 0: {:.6} at q = {}",
                    w.value,
                    Complex64::new(w.q.re, w.q.im)
                )),
                None => r.line("no samples with Re q <= 0"),
            }
            let inside = scan.samples.iter().filter(|x| x.value < 1.0).count();
            r.line(format!(
                "{inside} of {} samples inside the convergence region",
                scan.samples.len()
            ));
        }
    }
    Ok(r)
}

fn dispatch(cli: &Cli) -> Result<(Report, Option<PathBuf>), CliError> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let format = cli.format.or(file.format).unwrap_or(Format::Pretty);
    let out = cli.out.clone().or_else(|| file.out.clone());
    let report = match &cli.command {
        Command::Tables(a) => tables(a, &file, format)?,
        Command::Solve(a) => solve(a, &file, format)?,
        Command::Workprec(a) => workprec(a, &file, format)?,
        Command::Region(a) => region(a, &file, format)?,
    };
    Ok((report, out))
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Normal output goes to `stdout` unless `--out` is given.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = dispatch(&cli).and_then(|(report, out)| {
        let text = report.render();
        match out {
            Some(path) => fs::write(&path, text)?,
            None => stdout.write_all(text.as_bytes())?,
        }
        Ok(())
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
