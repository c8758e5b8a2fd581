//! Command-line front end. `run` returns the process exit code.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::diagonal::box_dimension_diagonal;
use crate::error::Error;
use crate::general::box_dimension_general;
use crate::model::{check_rosc, validate_gifs, GifsModel, RawSystem};
use crate::oracles::{box_count_many, dyadic_deltas, gamma_pressure};
use crate::projection::tau_at;
use crate::spectrum::{gamma, q_grid, spectrum, spectrum_point, Engine};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_PARSE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "boxlike", version, about = "L^q-spectra of planar box-like graph-directed self-affine measures")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value = "csv", global = true)]
    pub format: Format,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Auto,
    Diagonal,
    General,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Auto => Engine::Auto,
            EngineArg::Diagonal => Engine::Diagonal,
            EngineArg::General => Engine::General,
        }
    }
}

#[derive(Debug, Clone, clap::Args)]
pub struct Grid {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub q_min: f64,
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    pub q_max: f64,
    #[arg(long, default_value_t = 0.25, allow_negative_numbers = true)]
    pub q_step: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a system file and report the rectangular open set condition.
    Validate { path: PathBuf },
    /// Projection spectra tau_A, tau_B and t over a q-grid.
    Tau {
        path: PathBuf,
        #[command(flatten)]
        grid: Grid,
    },
    /// Closed-form gamma(q) over a q-grid.
    Spectrum {
        path: PathBuf,
        #[command(flatten)]
        grid: Grid,
        #[arg(long, value_enum, default_value = "auto")]
        engine: EngineArg,
        /// On all-diagonal input, also run the general engine and require agreement.
        #[arg(long)]
        cross_check: bool,
    },
    /// Box dimension of the attractors.
    Boxdim {
        path: PathBuf,
        /// Compare with the pressure oracle at q = 0.
        #[arg(long)]
        verify: bool,
        #[arg(long, default_value_t = 16)]
        depth: usize,
        #[arg(long, default_value_t = 0.05)]
        tol: f64,
    },
    /// Run the pressure and box-counting oracles.
    Oracle {
        path: PathBuf,
        /// Comma-separated q values.
        #[arg(long, default_value = "0,2")]
        q: String,
        #[arg(long, default_value_t = 16)]
        depth: usize,
        /// Monte-Carlo samples; 0 skips box counting.
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        /// Dyadic exponents `j0..j1` for meshes 2^-j.
        #[arg(long, default_value = "4..10")]
        deltas: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Vertex label whose measure is sampled (default: first vertex).
        #[arg(long)]
        vertex: Option<String>,
    },
    /// Closed form against both oracles with tolerance gates.
    Compare {
        path: PathBuf,
        #[arg(long, default_value = "0,2")]
        q: String,
        #[arg(long, default_value_t = 20)]
        depth: usize,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value = "4..10")]
        deltas: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0.05)]
        pressure_tol: f64,
        #[arg(long, default_value_t = 0.1)]
        box_tol: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
enum Cell {
    Num(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Num(n as f64)
    }
}

/// Formats with 12 significant digits, trailing zeros trimmed.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let e = x.abs().log10().floor() as i32;
    if (-5..12).contains(&e) {
        let decimals = (11 - e).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.11e}")
    }
}

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(header: Vec<&'static str>) -> Self {
        Table { header, rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn render(&self, format: Format, out: &mut dyn Write) -> std::io::Result<()> {
        match format {
            Format::Csv => {
                writeln!(out, "{}", self.header.join(","))?;
                for r in &self.rows {
                    let cells: Vec<String> = r
                        .iter()
                        .map(|c| match c {
                            Cell::Num(x) => fmt_num(*x),
                            Cell::Text(s) if s.contains(',') || s.contains('"') => format!("\"{}\"", s.replace('"', "\"\"")),
                            Cell::Text(s) => s.clone(),
                            Cell::Bool(b) => b.to_string(),
                            Cell::Empty => String::new(),
                        })
                        .collect();
                    writeln!(out, "{}", cells.join(","))?;
                }
                Ok(())
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| {
                        let mut m = Map::new();
                        for (h, c) in self.header.iter().zip(r) {
                            let v = match c {
                                Cell::Num(x) => json!(x),
                                Cell::Text(s) => json!(s),
                                Cell::Bool(b) => json!(b),
                                Cell::Empty => Value::Null,
                            };
                            m.insert(h.to_string(), v);
                        }
                        Value::Object(m)
                    })
                    .collect();
                writeln!(out, "{}", serde_json::to_string_pretty(&rows).unwrap_or_default())
            }
        }
    }
}

enum Failure {
    Parse(String),
    Domain(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) => Failure::Parse(e.to_string()),
            _ => Failure::Domain(e.to_string()),
        }
    }
}

fn read_raw(path: &Path) -> Result<RawSystem, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
    Ok(RawSystem::from_json(&text)?)
}

fn load(path: &Path) -> Result<GifsModel, Failure> {
    Ok(validate_gifs(&read_raw(path)?)?)
}

fn parse_qs(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|t| {
            let q: f64 = t.trim().parse().map_err(|_| Failure::Domain(format!("bad q value {t:?}")))?;
            if q >= 0.0 {
                Ok(q)
            } else {
                Err(Failure::Domain(format!("q must be nonnegative, got {q}")))
            }
        })
        .collect()
}

fn parse_deltas(s: &str) -> Result<Vec<f64>, Failure> {
    let (a, b) = s.split_once("..").ok_or_else(|| Failure::Domain(format!("deltas must look like j0..j1, got {s:?}")))?;
    let j0: u32 = a.trim().parse().map_err(|_| Failure::Domain(format!("bad exponent {a:?}")))?;
    let j1: u32 = b.trim().parse().map_err(|_| Failure::Domain(format!("bad exponent {b:?}")))?;
    if j1 <= j0 || j1 > 30 {
        return Err(Failure::Domain(format!("need j0 < j1 <= 30, got {j0}..{j1}")));
    }
    Ok(dyadic_deltas(j0, j1))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_PARSE;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    if let Some(n) = cli.threads {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match dispatch(&cli, out, err) {
        Ok(code) => code,
        Err(Failure::Parse(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_PARSE
        }
        Err(Failure::Domain(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_DOMAIN
        }
    }
}

fn emit(t: &Table, format: Format, out: &mut dyn Write) -> Result<(), Failure> {
    t.render(format, out).map_err(|e| Failure::Parse(e.to_string()))
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let fmt = cli.format;
    match &cli.command {
        Command::Validate { path } => {
            let raw = read_raw(path)?;
            let model = match validate_gifs(&raw) {
                Ok(m) => m,
                Err(Error::Validation(vs)) => {
                    let mut t = Table::new(vec!["field", "value"]);
                    t.push(vec!["valid".into(), false.into()]);
                    for v in vs {
                        t.push(vec!["violation".into(), v.to_string().into()]);
                    }
                    emit(&t, fmt, out)?;
                    return Ok(EXIT_DOMAIN);
                }
                Err(e) => return Err(e.into()),
            };
            let rosc = check_rosc(&model);
            let mut t = Table::new(vec!["field", "value"]);
            t.push(vec!["valid".into(), true.into()]);
            t.push(vec!["vertices".into(), model.num_vertices().into()]);
            t.push(vec!["edges".into(), model.num_edges().into()]);
            t.push(vec!["all_diagonal".into(), model.all_diagonal().into()]);
            t.push(vec!["rosc".into(), if rosc.pass { "pass" } else { "fail" }.into()]);
            t.push(vec!["rosc_exact".into(), rosc.exact.into()]);
            for e in &rosc.containment_failures {
                t.push(vec!["rosc_outside".into(), e.clone().into()]);
            }
            for (a, b) in &rosc.overlaps {
                t.push(vec!["rosc_overlap".into(), format!("{a}|{b}").into()]);
            }
            t.push(vec!["alpha_star".into(), model.alpha_star.into()]);
            t.push(vec!["alpha_sup".into(), model.alpha_sup.into()]);
            t.push(vec!["p_star".into(), model.p_star.into()]);
            t.push(vec!["p_sup".into(), model.p_sup.into()]);
            emit(&t, fmt, out)?;
            if !rosc.pass {
                let _ = writeln!(err, "warning: ROSC fails; the closed form is not guaranteed for this system");
            }
            Ok(EXIT_OK)
        }
        Command::Tau { path, grid } => {
            let model = load(path)?;
            let qs = q_grid(grid.q_min, grid.q_max, grid.q_step)?;
            let mut t = Table::new(vec!["q", "tau_A", "tau_B", "t"]);
            for q in qs {
                let tau = tau_at(&model, q)?;
                t.push(vec![q.into(), tau.tau_a.into(), tau.tau_b.into(), tau.t.into()]);
            }
            emit(&t, fmt, out)?;
            Ok(EXIT_OK)
        }
        Command::Spectrum { path, grid, engine, cross_check } => {
            let model = load(path)?;
            let qs = q_grid(grid.q_min, grid.q_max, grid.q_step)?;
            let rows = spectrum(&model, &qs, (*engine).into())?;
            let mut t = Table::new(vec!["q", "tau_A", "tau_B", "t", "gamma_A", "gamma_B", "hat_gamma", "gamma", "branch", "rosc"]);
            for r in &rows {
                t.push(vec![
                    r.q.into(),
                    r.tau_a.into(),
                    r.tau_b.into(),
                    r.t.into(),
                    r.gamma_a.into(),
                    r.gamma_b.into(),
                    r.hat_gamma.into(),
                    r.gamma.into(),
                    r.branch.clone().into(),
                    r.rosc.into(),
                ]);
            }
            emit(&t, fmt, out)?;
            if !rows.first().is_none_or(|r| r.rosc) {
                let _ = writeln!(err, "warning: ROSC fails; the closed form is not guaranteed for this system");
            }
            if *cross_check && model.all_diagonal() {
                let mut worst = 0.0f64;
                for r in &rows {
                    let g = spectrum_point(&model, r.q, Engine::General, r.rosc)?.gamma;
                    worst = worst.max((g - r.gamma).abs());
                }
                let _ = writeln!(err, "cross-check: max |general - diagonal| = {}", fmt_num(worst));
                if worst > 1e-8 {
                    return Ok(EXIT_DOMAIN);
                }
            }
            Ok(EXIT_OK)
        }
        Command::Boxdim { path, verify, depth, tol } => {
            let model = load(path)?;
            let (dim, method) = if model.all_diagonal() {
                (box_dimension_diagonal(&model)?, "max(gamma_A(0),gamma_B(0))")
            } else {
                (box_dimension_general(&model)?, "hat_gamma(0)")
            };
            let mut t = Table::new(vec!["dim_B", "method", "oracle", "diff", "pass"]);
            let mut code = EXIT_OK;
            if *verify {
                let tau = tau_at(&model, 0.0)?;
                let est = gamma_pressure(&model, &tau, 0.0, *depth)?.estimate;
                let diff = (est - dim).abs();
                let pass = diff <= *tol;
                if !pass {
                    code = EXIT_DOMAIN;
                }
                t.push(vec![dim.into(), method.into(), est.into(), diff.into(), pass.into()]);
            } else {
                t.push(vec![dim.into(), method.into(), Cell::Empty, Cell::Empty, Cell::Empty]);
            }
            emit(&t, fmt, out)?;
            Ok(code)
        }
        Command::Oracle { path, q, depth, samples, deltas, seed, vertex } => {
            let model = load(path)?;
            let qs = parse_qs(q)?;
            let deltas = parse_deltas(deltas)?;
            let v = match vertex {
                Some(name) => model
                    .vertices
                    .iter()
                    .position(|x| x == name)
                    .ok_or_else(|| Failure::Domain(format!("unknown vertex {name}")))?,
                None => 0,
            };
            let boxes = if *samples > 0 { Some(box_count_many(&model, v, &qs, &deltas, *samples, *seed)?) } else { None };
            let mut t = Table::new(vec!["q", "pressure_estimate", "pressure_lower", "pressure_upper", "box_count", "box_per_delta"]);
            for (i, &qv) in qs.iter().enumerate() {
                let tau = tau_at(&model, qv)?;
                let pe = gamma_pressure(&model, &tau, qv, *depth)?;
                let (bc, per): (Cell, Cell) = match &boxes {
                    Some(b) => (
                        b[i].tau.into(),
                        b[i].per_delta
                            .iter()
                            .map(|(d, l)| format!("{}:{}", fmt_num(*d), fmt_num(*l)))
                            .collect::<Vec<_>>()
                            .join(";")
                            .into(),
                    ),
                    None => (Cell::Empty, Cell::Empty),
                };
                t.push(vec![qv.into(), pe.estimate.into(), pe.lower.into(), pe.upper.into(), bc, per]);
            }
            emit(&t, fmt, out)?;
            Ok(EXIT_OK)
        }
        Command::Compare { path, q, depth, samples, deltas, seed, pressure_tol, box_tol } => {
            let model = load(path)?;
            let qs = parse_qs(q)?;
            let deltas = parse_deltas(deltas)?;
            let boxes = if *samples > 0 { Some(box_count_many(&model, 0, &qs, &deltas, *samples, *seed)?) } else { None };
            let mut t = Table::new(vec!["q", "gamma_closed", "gamma_pressure", "box_count", "diff_pressure", "diff_box", "pass"]);
            let mut all = true;
            for (i, &qv) in qs.iter().enumerate() {
                let g = gamma(&model, qv)?;
                let tau = tau_at(&model, qv)?;
                let gp = gamma_pressure(&model, &tau, qv, *depth)?.estimate;
                let dp = (gp - g).abs();
                let (bc, db) = match &boxes {
                    Some(b) => (Some(b[i].tau), Some((b[i].tau - g).abs())),
                    None => (None, None),
                };
                let pass = dp <= *pressure_tol && db.is_none_or(|d| d <= *box_tol);
                all &= pass;
                t.push(vec![qv.into(), g.into(), gp.into(), bc.into(), dp.into(), db.into(), pass.into()]);
            }
            emit(&t, fmt, out)?;
            Ok(if all { EXIT_OK } else { EXIT_DOMAIN })
        }
    }
}
