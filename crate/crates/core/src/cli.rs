//! `kratzer` command-line front end.
//!
//! Every subcommand renders into an in-memory [`Execution`] so the binary is a
//! thin wrapper and the whole surface is testable in-process.
//!
//! Exit codes: 0 success (including NO_BOUND cells and reference mismatches),
//! 1 for an unbound wavefunction selector or a failed validation gate, 2 for
//! usage errors, 3 for internal errors such as an unwritable output path.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::error::Error;
use crate::model::{PotentialParams, QuantumNumbers, SymmetrySector};
use crate::oracle::validate_level;
use crate::spectrum::{
    coulomb_energy, coulomb_series, nonrel_kratzer_energy, solve_energy, solve_energy_with_spin_orbit, EnergyLevel,
    Outcome, SeriesOrder, SolverConfig,
};
use crate::wavefun::{self, NormMode};

/// Reference energies, one row per published cell.
pub const REFERENCE_TABLE_CSV: &str = include_str!("../data/table1.csv");

const CAPTION_MASS: f64 = 5.0;
const CAPTION_DEPTH: f64 = 1.25;
const CAPTION_RANGE: f64 = 0.35;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FINDING: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INTERNAL: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "kratzer",
    version,
    about = "Dirac bound states of the Kratzer potential with tensor coupling"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve energy levels over a (sector, n, kappa, C) grid.
    Spectrum(SpectrumArgs),
    /// Compare solved levels with the embedded reference table.
    TableReport(TableReportArgs),
    /// Export sampled, normalized spinor components of one level.
    Wavefunction(WavefunctionArgs),
    /// Check solved levels against the finite-difference eigensolver.
    Validate(ValidateArgs),
    /// Evaluate the Coulomb and non-relativistic limit formulas.
    Limits(LimitsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    /// Human-readable table, 5 decimals.
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SectorChoice {
    Spin,
    #[value(alias = "pseudo-spin")]
    Pseudospin,
    Both,
}

impl SectorChoice {
    fn sectors(self) -> Vec<SymmetrySector> {
        match self {
            SectorChoice::Spin => vec![SymmetrySector::Spin],
            SectorChoice::Pseudospin => vec![SymmetrySector::PseudoSpin],
            SectorChoice::Both => SymmetrySector::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormChoice {
    Full,
    Solved,
}

#[derive(Debug, Clone, Args)]
pub struct WellArgs {
    /// Rest mass m0 (fm^-1).
    #[arg(long, default_value_t = CAPTION_MASS)]
    pub m0: f64,
    /// Well depth D (fm^-1).
    #[arg(long = "D", default_value_t = CAPTION_DEPTH)]
    pub depth: f64,
    /// Range parameter a.
    #[arg(long = "a", default_value_t = CAPTION_RANGE)]
    pub range: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Bisection tolerance on E (default 1e-12·m0).
    #[arg(long)]
    pub abs_tol: Option<f64>,
    #[arg(long, default_value_t = 200)]
    pub max_iter: u32,
    #[arg(long, default_value_t = 400)]
    pub bracket_samples: u32,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[command(flatten)]
    pub well: WellArgs,
    /// Tensor strengths C, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_values_t = [0.25, 0.5])]
    pub tensor: Vec<f64>,
    #[arg(long, value_enum, default_value_t = SectorChoice::Both)]
    pub symmetry: SectorChoice,
    /// Radial quantum numbers: list `0,1` or inclusive range `0..2`.
    /// Defaults: spin 0..1, pseudo-spin 1..2.
    #[arg(long, allow_hyphen_values = true)]
    pub n: Option<String>,
    /// Spin-orbit quantum numbers: list `-2,-3` or inclusive range `-5..-2`.
    /// Defaults: spin -5..-2, pseudo-spin -4..-1.
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: Option<String>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to PATH instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TableReportArgs {
    #[command(flatten)]
    pub well: WellArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct WavefunctionArgs {
    #[command(flatten)]
    pub well: WellArgs,
    #[arg(long, default_value_t = 0.25, allow_negative_numbers = true)]
    pub tensor: f64,
    #[arg(long, value_enum, default_value_t = SectorChoice::Spin)]
    pub symmetry: SectorChoice,
    #[arg(long, default_value_t = 0)]
    pub n: u32,
    #[arg(long, default_value_t = -2, allow_negative_numbers = true)]
    pub kappa: i32,
    /// Number of radial samples.
    #[arg(long, default_value_t = wavefun::DEFAULT_POINTS)]
    pub points: usize,
    /// Outer radius (default (n + c1 + 1)·10/ε).
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long, value_enum, default_value_t = NormChoice::Full)]
    pub norm: NormChoice,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Interior points of the finite-difference grid.
    #[arg(long = "grid", default_value_t = 4000)]
    pub grid_points: usize,
    /// Largest accepted relative eigenvalue error.
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct LimitsArgs {
    #[command(flatten)]
    pub well: WellArgs,
    /// Coulomb strength Ze² (default D·a).
    #[arg(long)]
    pub ze2: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub n: u32,
    #[arg(long, default_value_t = 0)]
    pub ell: u32,
    #[arg(long, default_value_t = 2)]
    pub order: u8,
    /// Also solve the relativistic equation in both limits.
    #[arg(long)]
    pub compare: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Rendered result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Execution {
    pub stdout: String,
    pub stderr: String,
    pub code: u8,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

/// Parses arguments (including the program name) and runs the command.
pub fn execute<I, T>(args: I) -> Execution
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                Execution {
                    stdout: text,
                    ..Default::default()
                }
            } else {
                Execution {
                    stderr: text,
                    code: EXIT_USAGE,
                    ..Default::default()
                }
            }
        }
    }
}

pub fn run(cli: Cli) -> Execution {
    let result = match &cli.command {
        Command::Spectrum(args) => cmd_spectrum(args),
        Command::TableReport(args) => cmd_table_report(args),
        Command::Wavefunction(args) => cmd_wavefunction(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Limits(args) => cmd_limits(args),
    };
    let output = match &cli.command {
        Command::Spectrum(a) => &a.output,
        Command::TableReport(a) => &a.output,
        Command::Wavefunction(a) => &a.output,
        Command::Validate(a) => &a.output,
        Command::Limits(a) => &a.output,
    };
    match result {
        Ok(mut exec) => {
            if let Some(path) = &output.out {
                if let Err(e) = std::fs::write(path, &exec.stdout) {
                    return Execution {
                        stderr: format!("error: cannot write {}: {e}\n", path.display()),
                        code: EXIT_INTERNAL,
                        ..Default::default()
                    };
                }
                exec.stdout.clear();
            }
            exec
        }
        Err(Failure::Usage(msg)) => Execution {
            stderr: format!("error: {msg}\n"),
            code: EXIT_USAGE,
            ..Default::default()
        },
        Err(Failure::Internal(msg)) => Execution {
            stderr: format!("error: {msg}\n"),
            code: EXIT_INTERNAL,
            ..Default::default()
        },
    }
}

/// One (sector, n, κ, C) cell of a batch run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub sector: SymmetrySector,
    pub n: u32,
    pub kappa: i32,
    pub tensor: f64,
}

/// Resolved batch configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mass: f64,
    pub depth: f64,
    pub range: f64,
    pub tensors: Vec<f64>,
    pub sectors: Vec<SymmetrySector>,
    pub n_values: Option<Vec<u32>>,
    pub kappas: Option<Vec<i32>>,
    pub solver: SolverConfig,
}

impl RunConfig {
    pub fn from_args(args: &GridArgs) -> Result<Self, Error> {
        let params = PotentialParams::new(args.well.depth, args.well.range, 0.0, args.well.m0)?;
        let n_values = args.n.as_deref().map(parse_int_list::<u32>).transpose()?;
        let kappas = args.kappa.as_deref().map(parse_int_list::<i32>).transpose()?;
        if args.tensor.is_empty()
            || n_values.as_ref().is_some_and(Vec::is_empty)
            || kappas.as_ref().is_some_and(Vec::is_empty)
        {
            return Err(Error::Config("tensor, n and kappa selections must be non-empty".into()));
        }
        if kappas.as_ref().is_some_and(|k| k.contains(&0)) {
            return Err(Error::Config("kappa must be nonzero".into()));
        }
        for c in &args.tensor {
            PotentialParams::new(params.depth(), params.range(), *c, params.mass())?;
        }
        Ok(Self {
            mass: params.mass(),
            depth: params.depth(),
            range: params.range(),
            tensors: args.tensor.clone(),
            sectors: args.symmetry.sectors(),
            n_values,
            kappas,
            solver: solver_config(&args.solver, &params)?,
        })
    }

    pub fn params(&self, tensor: f64) -> PotentialParams {
        PotentialParams::new(self.depth, self.range, tensor, self.mass).expect("validated in from_args")
    }

    /// Cells ordered by sector, then n, κ and C ascending.
    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &sector in &self.sectors {
            let (default_n, default_k): (Vec<u32>, Vec<i32>) = match sector {
                SymmetrySector::Spin => (vec![0, 1], (-5..=-2).collect()),
                SymmetrySector::PseudoSpin => (vec![1, 2], (-4..=-1).collect()),
            };
            let n_values = self.n_values.clone().unwrap_or(default_n);
            let kappas = self.kappas.clone().unwrap_or(default_k);
            for &n in &n_values {
                for &kappa in &kappas {
                    for &tensor in &self.tensors {
                        cells.push(Cell {
                            sector,
                            n,
                            kappa,
                            tensor,
                        });
                    }
                }
            }
        }
        cells.sort_by(|a, b| {
            (a.sector, a.n, a.kappa)
                .cmp(&(b.sector, b.n, b.kappa))
                .then(a.tensor.total_cmp(&b.tensor))
        });
        cells.dedup();
        cells
    }

    pub fn solve(&self, cell: &Cell) -> Result<EnergyLevel, Error> {
        let params = self.params(cell.tensor);
        solve_energy(
            &params,
            QuantumNumbers::new(cell.n, cell.kappa)?,
            cell.sector,
            &self.solver,
        )
    }
}

fn solver_config(args: &SolverArgs, params: &PotentialParams) -> Result<SolverConfig, Error> {
    let mut cfg = SolverConfig::for_params(params);
    if let Some(tol) = args.abs_tol {
        cfg.abs_tol = tol;
    }
    cfg.max_iter = args.max_iter;
    cfg.bracket_samples = args.bracket_samples;
    cfg.validate()?;
    Ok(cfg)
}

/// Parses `1,2,5` or an inclusive range `lo..hi`.
pub fn parse_int_list<T>(s: &str) -> Result<Vec<T>, Error>
where
    T: std::str::FromStr + Copy + Ord + TryFrom<i64>,
{
    let bad = || Error::Config(format!("cannot parse integer list '{s}'"));
    let parse_one = |t: &str| t.trim().parse::<T>().map_err(|_| bad());
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: i64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: i64 = hi.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if hi < lo {
            return Err(Error::Config(format!("empty range '{s}'")));
        }
        return (lo..=hi).map(|v| T::try_from(v).map_err(|_| bad())).collect();
    }
    s.split(',').filter(|t| !t.trim().is_empty()).map(parse_one).collect()
}

/// Rounds to 12 significant digits.
pub fn round_sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Machine representation: 12 significant digits, shortest round-trip form.
pub fn fmt12(x: f64) -> String {
    let y = round_sig12(x);
    if y != 0.0 && y.is_finite() && (y.abs() < 1e-4 || y.abs() >= 1e15) {
        format!("{y:e}")
    } else {
        format!("{y}")
    }
}

fn fmt5(x: f64) -> String {
    format!("{x:.5}")
}

fn status(level: &EnergyLevel) -> String {
    match &level.outcome {
        Outcome::Bound(_) => "BOUND".to_string(),
        Outcome::NoBoundState(reason) => format!("NO_BOUND({reason})"),
    }
}

fn well_metadata(out: &mut String, mass: f64, depth: f64, range: f64) {
    let _ = writeln!(out, "#m0={}", fmt12(mass));
    let _ = writeln!(out, "#D={}", fmt12(depth));
    let _ = writeln!(out, "#a={}", fmt12(range));
}

fn json_string(value: &serde_json::Value) -> Result<String, Failure> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| Failure::Internal(e.to_string()))
}

#[derive(Debug, Clone, Serialize)]
struct SpectrumRow {
    sector: SymmetrySector,
    n: u32,
    kappa: i32,
    #[serde(rename = "C")]
    tensor: f64,
    status: String,
    energy: Option<f64>,
    residual: Option<f64>,
}

fn cmd_spectrum(args: &SpectrumArgs) -> Result<Execution, Failure> {
    let config = RunConfig::from_args(&args.grid)?;
    let mut rows = Vec::new();
    for cell in config.cells() {
        let level = config.solve(&cell)?;
        let bound = level.bound().ok();
        rows.push(SpectrumRow {
            sector: cell.sector,
            n: cell.n,
            kappa: cell.kappa,
            tensor: cell.tensor,
            status: status(&level),
            energy: bound.map(|b| round_sig12(b.energy)),
            residual: bound.map(|b| round_sig12(b.residual)),
        });
    }
    let stdout = match args.output.format {
        Format::Csv => {
            let mut out = String::from("#command=spectrum\n");
            well_metadata(&mut out, config.mass, config.depth, config.range);
            out.push_str("sector,n,kappa,C,energy,residual\n");
            for r in &rows {
                let energy = r.energy.map(fmt12).unwrap_or_else(|| r.status.clone());
                let residual = r.residual.map(fmt12).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.sector,
                    r.n,
                    r.kappa,
                    fmt12(r.tensor),
                    energy,
                    residual
                );
            }
            out
        }
        Format::Json => json_string(&json!({
            "command": "spectrum",
            "m0": round_sig12(config.mass),
            "D": round_sig12(config.depth),
            "a": round_sig12(config.range),
            "rows": rows,
        }))?,
        Format::Text => {
            let mut out = format!(
                "{:<11} {:>3} {:>6} {:>6} {:>28}\n",
                "sector", "n", "kappa", "C", "energy"
            );
            for r in &rows {
                let energy = r.energy.map(fmt5).unwrap_or_else(|| r.status.clone());
                let _ = writeln!(
                    out,
                    "{:<11} {:>3} {:>6} {:>6.2} {:>28}",
                    r.sector, r.n, r.kappa, r.tensor, energy
                );
            }
            out
        }
    };
    Ok(Execution {
        stdout,
        ..Default::default()
    })
}

/// One published cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceCell {
    pub cell: Cell,
    pub paper_value: Option<f64>,
}

/// Parses the embedded reference table.
pub fn reference_table() -> Result<Vec<ReferenceCell>, Error> {
    parse_reference_table(REFERENCE_TABLE_CSV)
}

pub fn parse_reference_table(text: &str) -> Result<Vec<ReferenceCell>, Error> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| Error::Config("reference table is empty".into()))?;
    if header != "sector,n,kappa,C,paper_value" {
        return Err(Error::Config(format!("unexpected reference header '{header}'")));
    }
    lines
        .map(|line| {
            let bad = || Error::Config(format!("bad reference row '{line}'"));
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 5 {
                return Err(bad());
            }
            let paper_value = if fields[4].is_empty() {
                None
            } else {
                Some(fields[4].parse::<f64>().map_err(|_| bad())?)
            };
            Ok(ReferenceCell {
                cell: Cell {
                    sector: fields[0].parse()?,
                    n: fields[1].parse().map_err(|_| bad())?,
                    kappa: fields[2].parse().map_err(|_| bad())?,
                    tensor: fields[3].parse().map_err(|_| bad())?,
                },
                paper_value,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub sector: SymmetrySector,
    pub n: u32,
    pub kappa: i32,
    #[serde(rename = "C")]
    pub tensor: f64,
    pub paper_value: Option<f64>,
    pub status: String,
    pub computed_value: Option<f64>,
    pub delta: Option<f64>,
}

fn cmd_table_report(args: &TableReportArgs) -> Result<Execution, Failure> {
    let w = &args.well;
    if (w.m0, w.depth, w.range) != (CAPTION_MASS, CAPTION_DEPTH, CAPTION_RANGE) {
        return Err(Failure::Usage(format!(
            "table-report compares against values published for m0={CAPTION_MASS}, D={CAPTION_DEPTH}, \
             a={CAPTION_RANGE}; got m0={}, D={}, a={}",
            w.m0, w.depth, w.range
        )));
    }
    let mut reference = reference_table()?;
    reference.sort_by(|a, b| {
        (a.cell.sector, a.cell.n, a.cell.kappa)
            .cmp(&(b.cell.sector, b.cell.n, b.cell.kappa))
            .then(a.cell.tensor.total_cmp(&b.cell.tensor))
    });
    let base = PotentialParams::reference_table(0.0);
    let solver = solver_config(&args.solver, &base)?;
    let mut rows = Vec::new();
    for rc in &reference {
        let c = rc.cell;
        let level = solve_energy(
            &base.with_tensor(c.tensor),
            QuantumNumbers::new(c.n, c.kappa)?,
            c.sector,
            &solver,
        )?;
        let computed = level.energy().map(round_sig12);
        let delta = match (computed, rc.paper_value) {
            (Some(e), Some(p)) => Some(round_sig12(e - p)),
            _ => None,
        };
        rows.push(ReportRow {
            sector: c.sector,
            n: c.n,
            kappa: c.kappa,
            tensor: c.tensor,
            paper_value: rc.paper_value,
            status: status(&level),
            computed_value: computed,
            delta,
        });
    }
    let max_abs_delta = rows
        .iter()
        .filter_map(|r| r.delta)
        .fold(None, |m: Option<f64>, d| Some(m.map_or(d.abs(), |m| m.max(d.abs()))));
    let blank = rows.iter().filter(|r| r.paper_value.is_none()).count();
    let unbound = rows.iter().filter(|r| r.computed_value.is_none()).count();
    let compared = rows.iter().filter(|r| r.delta.is_some()).count();

    let stdout = match args.output.format {
        Format::Csv => {
            let mut out = String::from("#command=table-report\n");
            well_metadata(&mut out, CAPTION_MASS, CAPTION_DEPTH, CAPTION_RANGE);
            out.push_str("sector,n,kappa,C,paper_value,computed_value,delta\n");
            for r in &rows {
                let paper = r.paper_value.map(fmt12).unwrap_or_else(|| "BLANK".into());
                let computed = r.computed_value.map(fmt12).unwrap_or_else(|| r.status.clone());
                let delta = r.delta.map(fmt12).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{},{},{},{},{paper},{computed},{delta}",
                    r.sector,
                    r.n,
                    r.kappa,
                    fmt12(r.tensor)
                );
            }
            let _ = writeln!(
                out,
                "#cells={} blank={blank} no_bound={unbound} compared={compared} max_abs_delta={}",
                rows.len(),
                max_abs_delta.map(fmt12).unwrap_or_else(|| "NA".into())
            );
            out
        }
        Format::Json => json_string(&json!({
            "command": "table-report",
            "m0": CAPTION_MASS,
            "D": CAPTION_DEPTH,
            "a": CAPTION_RANGE,
            "rows": rows,
            "summary": {
                "cells": rows.len(),
                "blank": blank,
                "no_bound": unbound,
                "compared": compared,
                "max_abs_delta": max_abs_delta,
            },
        }))?,
        Format::Text => {
            let mut out = format!(
                "{:<11} {:>3} {:>6} {:>5} {:>10} {:>26} {:>10}\n",
                "sector", "n", "kappa", "C", "reference", "computed", "delta"
            );
            for r in &rows {
                let paper = r.paper_value.map(fmt5).unwrap_or_else(|| "-".into());
                let computed = r.computed_value.map(fmt5).unwrap_or_else(|| r.status.clone());
                let delta = r.delta.map(fmt5).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{:<11} {:>3} {:>6} {:>5.2} {:>10} {:>26} {:>10}",
                    r.sector, r.n, r.kappa, r.tensor, paper, computed, delta
                );
            }
            let _ = writeln!(
                out,
                "{} cells, {blank} blank, {unbound} without bound state, max |delta| = {}",
                rows.len(),
                max_abs_delta.map(fmt5).unwrap_or_else(|| "n/a".into())
            );
            out
        }
    };
    Ok(Execution {
        stdout,
        ..Default::default()
    })
}

fn cmd_wavefunction(args: &WavefunctionArgs) -> Result<Execution, Failure> {
    let sector = match args.symmetry {
        SectorChoice::Spin => SymmetrySector::Spin,
        SectorChoice::Pseudospin => SymmetrySector::PseudoSpin,
        SectorChoice::Both => return Err(Failure::Usage("wavefunction needs a single symmetry sector".into())),
    };
    let params = PotentialParams::new(args.well.depth, args.well.range, args.tensor, args.well.m0)?;
    let solver = solver_config(&args.solver, &params)?;
    let level = solve_energy(&params, QuantumNumbers::new(args.n, args.kappa)?, sector, &solver)?;
    let bound = match level.bound() {
        Ok(b) => b,
        Err(_) => {
            return Ok(Execution {
                stderr: format!(
                    "no bound state for {sector} n={} kappa={} C={}: {}\n",
                    args.n,
                    args.kappa,
                    args.tensor,
                    status(&level)
                ),
                code: EXIT_FINDING,
                ..Default::default()
            })
        }
    };
    let norm_mode = match args.norm {
        NormChoice::Full => NormMode::FullSpinor,
        NormChoice::Solved => NormMode::SolvedComponentOnly,
    };
    let r_max = match args.r_max {
        Some(r) => r,
        None => wavefun::default_r_max(&level)?,
    };
    let samples = wavefun::sample_and_normalize(&level, r_max, args.points, norm_mode)?;
    let nodes = wavefun::node_count(&samples, samples.solved);

    let stdout = match args.output.format {
        Format::Json => json_string(&json!({
            "command": "wavefunction",
            "energy": round_sig12(bound.energy),
            "sector": sector,
            "n": args.n,
            "kappa": args.kappa,
            "C": args.tensor,
            "norm_mode": norm_mode.as_str(),
            "norm_value": round_sig12(samples.norm_value),
            "nodes": nodes,
            "r": samples.grid.iter().map(|v| round_sig12(*v)).collect::<Vec<_>>(),
            "F": samples.upper.iter().map(|v| round_sig12(*v)).collect::<Vec<_>>(),
            "G": samples.lower.iter().map(|v| round_sig12(*v)).collect::<Vec<_>>(),
        }))?,
        Format::Csv | Format::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "#energy={}", fmt12(bound.energy));
            let _ = writeln!(out, "#sector={sector}");
            let _ = writeln!(out, "#norm_mode={}", norm_mode.as_str());
            let _ = writeln!(out, "#n={}", args.n);
            let _ = writeln!(out, "#kappa={}", args.kappa);
            let _ = writeln!(out, "#C={}", fmt12(args.tensor));
            let _ = writeln!(out, "#norm_value={}", fmt12(samples.norm_value));
            let _ = writeln!(out, "#nodes={nodes}");
            out.push_str("r,F,G\n");
            for ((r, f), g) in samples.grid.iter().zip(&samples.upper).zip(&samples.lower) {
                let _ = writeln!(out, "{},{},{}", fmt12(*r), fmt12(*f), fmt12(*g));
            }
            out
        }
    };
    Ok(Execution {
        stdout,
        ..Default::default()
    })
}

#[derive(Debug, Clone, Serialize)]
struct ValidationRow {
    sector: SymmetrySector,
    n: u32,
    kappa: i32,
    #[serde(rename = "C")]
    tensor: f64,
    energy: f64,
    eigenvalue: f64,
    target: f64,
    relative_error: f64,
    closed_form_relative_error: f64,
    sign_changes: usize,
    pass: bool,
}

fn cmd_validate(args: &ValidateArgs) -> Result<Execution, Failure> {
    let config = RunConfig::from_args(&args.grid)?;
    if args.grid_points < 3 {
        return Err(Failure::Usage("--grid needs at least 3 points".into()));
    }
    if !(args.tol > 0.0) {
        return Err(Failure::Usage("--tol must be positive".into()));
    }
    let mut rows = Vec::new();
    let mut skipped = 0;
    for cell in config.cells() {
        let level = config.solve(&cell)?;
        if !level.is_bound() {
            skipped += 1;
            continue;
        }
        let report = validate_level(&level, args.grid_points)?;
        rows.push(ValidationRow {
            sector: cell.sector,
            n: cell.n,
            kappa: cell.kappa,
            tensor: cell.tensor,
            energy: round_sig12(report.energy),
            eigenvalue: round_sig12(report.eigenvalue),
            target: round_sig12(report.target),
            relative_error: round_sig12(report.relative_error),
            closed_form_relative_error: round_sig12(report.closed_form_relative_error),
            sign_changes: report.eigenvector_sign_changes,
            pass: report.relative_error <= args.tol,
        });
    }
    let failed = rows.iter().filter(|r| !r.pass).count();
    let code = if failed > 0 { EXIT_FINDING } else { EXIT_OK };
    let mut stderr = String::new();
    if rows.is_empty() {
        stderr.push_str("no bound levels\n");
    } else if failed > 0 {
        let _ = writeln!(
            stderr,
            "{failed} of {} levels exceed relative error {}",
            rows.len(),
            args.tol
        );
    }

    let stdout = match args.output.format {
        Format::Json => json_string(&json!({
            "command": "validate",
            "grid_points": args.grid_points,
            "tol": args.tol,
            "skipped_unbound": skipped,
            "failed": failed,
            "rows": rows,
        }))?,
        Format::Csv => {
            let mut out = String::from("#command=validate\n");
            well_metadata(&mut out, config.mass, config.depth, config.range);
            let _ = writeln!(out, "#grid_points={}", args.grid_points);
            let _ = writeln!(out, "#tol={}", fmt12(args.tol));
            out.push_str(
                "sector,n,kappa,C,energy,eigenvalue,target,relative_error,closed_form_relative_error,sign_changes,status\n",
            );
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    r.sector,
                    r.n,
                    r.kappa,
                    fmt12(r.tensor),
                    fmt12(r.energy),
                    fmt12(r.eigenvalue),
                    fmt12(r.target),
                    fmt12(r.relative_error),
                    fmt12(r.closed_form_relative_error),
                    r.sign_changes,
                    if r.pass { "PASS" } else { "FAIL" }
                );
            }
            if rows.is_empty() {
                out.push_str("#no bound levels\n");
            }
            let _ = writeln!(out, "#skipped_unbound={skipped} failed={failed}");
            out
        }
        Format::Text => {
            let mut out = String::new();
            if rows.is_empty() {
                out.push_str("no bound levels\n");
            }
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{:<11} n={} kappa={:>3} C={:.2}  E={:.5}  rel.err={:.3e}  {}",
                    r.sector,
                    r.n,
                    r.kappa,
                    r.tensor,
                    r.energy,
                    r.relative_error,
                    if r.pass { "PASS" } else { "FAIL" }
                );
            }
            out
        }
    };
    Ok(Execution { stdout, stderr, code })
}

/// Range used when solving the relativistic equation toward the Coulomb limit.
pub const COULOMB_LIMIT_RANGE: f64 = 1e-6;

fn cmd_limits(args: &LimitsArgs) -> Result<Execution, Failure> {
    let w = &args.well;
    if !(w.m0 > 0.0) {
        return Err(Failure::Usage("m0 must be positive".into()));
    }
    let order = SeriesOrder::try_from(args.order)?;
    let ze2 = args.ze2.unwrap_or(w.depth * w.range);
    if !(ze2 >= 0.0) {
        return Err(Failure::Usage("ze2 must be non-negative".into()));
    }
    let mut values: Vec<(&str, f64)> = vec![
        ("ze2", ze2),
        ("coulomb_energy", coulomb_energy(w.m0, ze2, args.n, args.ell)),
        ("coulomb_series", coulomb_series(w.m0, ze2, args.n, args.ell, order)),
        (
            "nonrel_kratzer_energy",
            nonrel_kratzer_energy(w.m0, w.depth, w.range, args.n, args.ell),
        ),
    ];
    if args.compare {
        let ell = f64::from(args.ell);
        let coulomb = if ze2 > 0.0 {
            let p = PotentialParams::coulomb_limit(ze2, COULOMB_LIMIT_RANGE, w.m0)?;
            solve_energy_with_spin_orbit(&p, args.n, ell, SymmetrySector::Spin, &SolverConfig::for_params(&p))?.energy()
        } else {
            Some(w.m0)
        };
        let kratzer = PotentialParams::new(w.depth, w.range, 0.0, w.m0)?;
        let binding = solve_energy_with_spin_orbit(
            &kratzer,
            args.n,
            ell,
            SymmetrySector::Spin,
            &SolverConfig::for_params(&kratzer),
        )?
        .energy()
        .map(|e| e - w.m0);
        values.push(("solver_coulomb_limit_range", COULOMB_LIMIT_RANGE));
        values.push(("solver_coulomb_limit_energy", coulomb.unwrap_or(f64::NAN)));
        values.push(("solver_spin_binding_energy", binding.unwrap_or(f64::NAN)));
    }
    let stdout = match args.output.format {
        Format::Json => {
            let map: serde_json::Map<String, serde_json::Value> = values
                .iter()
                .map(|(k, v)| {
                    (
                        k.to_string(),
                        json!(if v.is_finite() { Some(round_sig12(*v)) } else { None }),
                    )
                })
                .collect();
            json_string(&serde_json::Value::Object(map))?
        }
        Format::Csv => {
            let mut out = String::from("#command=limits\n");
            let _ = writeln!(out, "#n={} ell={} order={}", args.n, args.ell, args.order);
            out.push_str("quantity,value\n");
            for (k, v) in &values {
                let _ = writeln!(out, "{k},{}", fmt12(*v));
            }
            out
        }
        Format::Text => {
            let mut out = String::new();
            for (k, v) in &values {
                let _ = writeln!(out, "{k:<30} {v:.5}");
            }
            out
        }
    };
    Ok(Execution {
        stdout,
        ..Default::default()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_lists() {
        assert_eq!(parse_int_list::<i32>("-5..-2").unwrap(), vec![-5, -4, -3, -2]);
        assert_eq!(parse_int_list::<i32>("-2,-3").unwrap(), vec![-2, -3]);
        assert_eq!(parse_int_list::<u32>("0..=2").unwrap(), vec![0, 1, 2]);
        assert!(parse_int_list::<u32>("-1").is_err());
        assert!(parse_int_list::<i32>("3..1").is_err());
        assert!(parse_int_list::<i32>("x").is_err());
    }

    #[test]
    fn twelve_digit_formatting() {
        assert_eq!(fmt12(3.965_279_652_164_756), "3.96527965216");
        assert_eq!(fmt12(5.0), "5");
        assert_eq!(fmt12(-1.234_567_890_123_4e-7), "-1.23456789012e-7");
        assert_eq!(fmt12(0.0), "0");
        assert_eq!(fmt12(f64::NAN), "NaN");
    }

    #[test]
    fn reference_table_shape() {
        let table = reference_table().unwrap();
        assert_eq!(table.len(), 32);
        assert_eq!(table.iter().filter(|c| c.paper_value.is_none()).count(), 2);
        assert!(parse_reference_table("sector,n\n").is_err());
        assert!(parse_reference_table("sector,n,kappa,C,paper_value\nspin,0,-2,0.25,abc\n").is_err());
    }

    #[test]
    fn default_cells_cover_reference_grid() {
        let cli = Cli::try_parse_from(["kratzer", "spectrum"]).unwrap();
        let Command::Spectrum(args) = cli.command else {
            unreachable!()
        };
        let cfg = RunConfig::from_args(&args.grid).unwrap();
        let cells = cfg.cells();
        assert_eq!(cells.len(), 32);
        assert_eq!(
            cells[0],
            Cell {
                sector: SymmetrySector::Spin,
                n: 0,
                kappa: -5,
                tensor: 0.25
            }
        );
        let mut from_table: Vec<Cell> = reference_table().unwrap().into_iter().map(|c| c.cell).collect();
        from_table.sort_by(|a, b| {
            (a.sector, a.n, a.kappa)
                .cmp(&(b.sector, b.n, b.kappa))
                .then(a.tensor.total_cmp(&b.tensor))
        });
        assert_eq!(cells, from_table);
    }

    #[test]
    fn zero_kappa_is_a_usage_error() {
        let exec = execute(["kratzer", "spectrum", "--kappa", "0"]);
        assert_eq!(exec.code, EXIT_USAGE);
        assert!(exec.stderr.contains("kappa"));
    }
}
