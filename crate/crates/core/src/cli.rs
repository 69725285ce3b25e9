//! Command-line front end.
//!
//! Exit codes: 0 success, 1 input error, 2 capacity error, 3 oracle violation.
//! Column numbers on the command line and in reports are one-based.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use serde::Serialize;

use crate::catalog::{self, CatalogError, OctocopterParams};
use crate::ext::ExtReal;
use crate::model::{load_system, split, ActuatorSplit, Direction, IntegratorSystem, ModelError};
use crate::oracle::{self, OracleError, ScanReport};
use crate::reach::{nominal_reach_time_k, ratio_report, ReachError, ReachResult};
use crate::resilience::{controllability, quantitative_resilience, Controllability, ResilienceError, ResilienceReport};
use crate::sim::{self, ReachQuantity, SimError, SmoothRatio, Trajectory};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_CAPACITY: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "quantres", version, about = "Quantitative resilience of driftless integrators under actuator loss")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Debug, Args)]
struct Global {
    /// Model file (JSON) or catalog name, optionally prefixed with `catalog:`.
    #[arg(long, global = true)]
    model: Option<String>,
    /// Lost columns, one-based: `3`, `2,5` or `all`.
    #[arg(long, global = true)]
    lost: Option<String>,
    /// Shorthand for `--lost all`.
    #[arg(long, global = true)]
    all: bool,
    /// Integrator order k (defaults to the model's order).
    #[arg(long, global = true)]
    order: Option<u32>,
    /// Output path: a JSON report file, or a directory for `simulate`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Oracle violation tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Seed for sampled directions.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Print the JSON report on stdout instead of the table.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Controllability and quantitative resilience per lost column.
    Check(ModelArg),
    /// Nominal and malfunctioning reach times and their ratio.
    Ratio(DirectionArgs),
    /// Nominal reach time, plus malfunctioning times when `--lost` is given.
    Reach(DirectionArgs),
    /// Brute-force checks of the vertex, direction and homogeneity results.
    Oracle(OracleArgs),
    /// Trajectory tables and crossing times.
    Simulate(SimulateArgs),
    /// List the built-in models.
    CatalogList,
}

#[derive(Debug, Args)]
struct ModelArg {
    /// Model file or catalog name (alternative to `--model`).
    #[arg(id = "model_path", value_name = "MODEL")]
    model: Option<String>,
}

#[derive(Debug, Args)]
struct DirectionArgs {
    #[arg(id = "model_path", value_name = "MODEL")]
    model: Option<String>,
    /// Target direction, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    direction: String,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(id = "model_path", value_name = "MODEL")]
    model: Option<String>,
    /// Direction for the grid and homogeneity checks.
    #[arg(long, allow_hyphen_values = true)]
    direction: Option<String>,
    /// Grid points per axis of W_c.
    #[arg(long)]
    grid: Option<usize>,
    /// Sampled directions for the worst-direction scan.
    #[arg(long)]
    samples: Option<usize>,
    /// Multiplies the theoretical values before comparison (harness self-test).
    #[arg(long, hide = true)]
    theory_scale: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Scenario {
    OctoVerticalBang,
    OctoVerticalLag,
    /// Constant input on `--model`, given by `--input`.
    Constant,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Quantity {
    Velocity,
    Position,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Vertical {
    Up,
    Down,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    scenario: Scenario,
    /// Input time constant in seconds.
    #[arg(long, default_value_t = 0.1)]
    tau: f64,
    /// Target speed (m/s) or distance (m).
    #[arg(long, default_value_t = 1.0)]
    target: f64,
    #[arg(long, value_enum, default_value_t = Quantity::Velocity)]
    quantity: Quantity,
    #[arg(long, value_enum, default_value_t = Vertical::Down)]
    vertical: Vertical,
    /// Time step (defaults to τ/100, or horizon/1000 for `constant`).
    #[arg(long)]
    dt: Option<f64>,
    /// Constant input for the `constant` scenario, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    input: Option<String>,
    /// Horizon for the `constant` scenario.
    #[arg(long, default_value_t = 1.0)]
    horizon: f64,
}

#[derive(Debug)]
enum CliError {
    Input(String),
    Capacity(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Capacity(_) => EXIT_CAPACITY,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Capacity(m) => m,
        }
    }
}

fn input(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        input(e)
    }
}

impl From<CatalogError> for CliError {
    fn from(e: CatalogError) -> Self {
        input(e)
    }
}

impl From<ReachError> for CliError {
    fn from(e: ReachError) -> Self {
        match e {
            ReachError::Capacity { .. } => CliError::Capacity(e.to_string()),
            other => input(other),
        }
    }
}

impl From<ResilienceError> for CliError {
    fn from(e: ResilienceError) -> Self {
        match e {
            ResilienceError::Reach(r) => r.into(),
            other => input(other),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::GridTooLarge { .. } => CliError::Capacity(e.to_string()),
            OracleError::Reach(r) => r.into(),
            OracleError::Resilience(r) => r.into(),
            other => input(other),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Reach(r) => r.into(),
            other => input(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        input(e)
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let shown = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = if shown {
                write!(out, "{}", e.render())
            } else {
                write!(err, "{}", e.render())
            };
            return if shown { EXIT_OK } else { EXIT_INPUT };
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.code()
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Check(a) => cmd_check(g, a.model.as_deref(), out),
        Command::Ratio(a) => cmd_ratio(g, a, out),
        Command::Reach(a) => cmd_reach(g, a, out),
        Command::Oracle(a) => cmd_oracle(g, a, out),
        Command::Simulate(a) => cmd_simulate(g, a, out),
        Command::CatalogList => {
            for (name, description) in catalog::list() {
                writeln!(out, "{name:<28} {description}")?;
            }
            Ok(EXIT_OK)
        }
    }
}

/// `catalog:name` always means the catalog; otherwise an existing file wins.
fn load_model(source: &str) -> Result<IntegratorSystem, CliError> {
    if let Some(name) = source.strip_prefix("catalog:") {
        return Ok(catalog::resolve(name)?);
    }
    if Path::new(source).is_file() {
        return Ok(load_system(source)?);
    }
    catalog::resolve(source).map_err(|e| match e {
        CatalogError::Unknown(_) => input(format!("`{source}` is neither a model file nor a catalog name")),
        other => input(other),
    })
}

fn model_for(g: &Global, positional: Option<&str>) -> Result<IntegratorSystem, CliError> {
    let source = match (positional, g.model.as_deref()) {
        (Some(_), Some(_)) => return Err(input("give the model either positionally or with --model, not both")),
        (Some(s), None) | (None, Some(s)) => s,
        (None, None) => return Err(input("no model given (use --model <path|name>)")),
    };
    let sys = load_model(source)?;
    match g.order {
        Some(k) => Ok(sys.with_order(k)?),
        None => Ok(sys),
    }
}

enum LostSpec {
    All,
    Columns(Vec<usize>),
}

/// One-based list to zero-based indices.
fn parse_lost(g: &Global) -> Result<Option<LostSpec>, CliError> {
    let text = match (g.all, g.lost.as_deref()) {
        (true, Some(l)) if l != "all" => return Err(input("--all conflicts with --lost")),
        (true, _) => return Ok(Some(LostSpec::All)),
        (false, None) => return Ok(None),
        (false, Some(t)) => t,
    };
    if text.trim() == "all" {
        return Ok(Some(LostSpec::All));
    }
    let cols = text
        .split(',')
        .map(|s| match s.trim().parse::<usize>() {
            Ok(0) => Err(input("column numbers are one-based")),
            Ok(i) => Ok(i - 1),
            Err(_) => Err(input(format!("bad column number `{s}` in --lost"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Some(LostSpec::Columns(cols)))
}

fn parse_vector(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| input(format!("bad number `{s}` in {what}")))
        })
        .collect()
}

fn parse_direction(text: &str, sys: &IntegratorSystem) -> Result<Direction, CliError> {
    let v = parse_vector(text, "--direction")?;
    if v.len() != sys.states() {
        return Err(input(format!(
            "--direction has {} entries, the model has {} states",
            v.len(),
            sys.states()
        )));
    }
    Ok(Direction::from_slice(&v)?)
}

/// Splits to evaluate: each column alone for `all`, otherwise one joint loss.
fn joint_splits(sys: &IntegratorSystem, lost: LostSpec) -> Result<Vec<ActuatorSplit>, CliError> {
    match lost {
        LostSpec::All => (0..sys.inputs()).map(|j| Ok(split(sys, &[j])?)).collect(),
        LostSpec::Columns(c) => Ok(vec![split(sys, &c)?]),
    }
}

fn one_based(cols: &[usize]) -> Vec<usize> {
    cols.iter().map(|c| c + 1).collect()
}

fn emit<T: Serialize>(g: &Global, report: &T, out: &mut dyn Write, human: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(report).map_err(input)?;
    if let Some(path) = &g.out {
        std::fs::write(path, format!("{json}\n"))
            .map_err(|e| input(format!("cannot write {}: {e}", path.display())))?;
    }
    if g.json {
        writeln!(out, "{json}")?;
    } else {
        human(out)?;
    }
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.4}"))
}

#[derive(Serialize)]
struct CheckOutput {
    model: String,
    order: u32,
    controllability: Controllability,
    controllable: bool,
    reports: Vec<ResilienceReport>,
}

fn cmd_check(g: &Global, positional: Option<&str>, out: &mut dyn Write) -> Result<i32, CliError> {
    let sys = model_for(g, positional)?;
    let k = sys.order();
    let columns = match parse_lost(g)?.unwrap_or(LostSpec::All) {
        LostSpec::All => (0..sys.inputs()).collect(),
        LostSpec::Columns(c) => c,
    };
    let splits = columns
        .iter()
        .map(|&j| split(&sys, &[j]))
        .collect::<Result<Vec<_>, _>>()?;
    let reports = splits
        .iter()
        .map(|s| quantitative_resilience(s, k))
        .collect::<Result<Vec<_>, _>>()?;
    let ctrl = controllability(&sys);
    let report = CheckOutput {
        model: sys.name().to_string(),
        order: k,
        controllable: ctrl.controllable(),
        controllability: ctrl,
        reports,
    };
    emit(g, &report, out, |o| {
        let c = &report.controllability;
        writeln!(o, "model {} (n = {}, m = {}, order {k})", report.model, sys.states(), sys.inputs())?;
        writeln!(o, "rank {} of {}, zero interior to the input image: {}", c.rank, c.states, c.zero_in_interior)?;
        if !report.controllable {
            writeln!(o, "system is not controllable: not resilient to any loss")?;
        }
        writeln!(
            o,
            "{:>4} {:<10} {:>9} {:>9} {:>8} {:>8}  verdict",
            "col", "label", "r(C)", "r(-C)", "r_q", "r_kq"
        )?;
        for r in &report.reports {
            writeln!(
                o,
                "{:>4} {:<10} {:>9} {:>9} {:>8.4} {:>8.4}  {}",
                r.column,
                r.label,
                fmt_opt(r.r_plus),
                fmt_opt(r.r_minus),
                r.r_q,
                r.r_kq,
                if r.resilient { "resilient" } else { "not resilient" }
            )?;
        }
        Ok(())
    })?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct RatioEntry {
    lost: Vec<usize>,
    nominal: ReachResult,
    malfunctioning: ReachResult,
    ratio: ExtReal,
}

#[derive(Serialize)]
struct RatioOutput {
    model: String,
    order: u32,
    direction: Vec<f64>,
    entries: Vec<RatioEntry>,
}

fn ratio_entries(sys: &IntegratorSystem, lost: LostSpec, d: &Direction) -> Result<Vec<RatioEntry>, CliError> {
    joint_splits(sys, lost)?
        .iter()
        .map(|s| {
            let r = ratio_report(s, d, sys.order())?;
            Ok(RatioEntry {
                lost: one_based(s.lost_columns()),
                nominal: r.nominal,
                malfunctioning: r.malfunctioning,
                ratio: r.ratio,
            })
        })
        .collect()
}

fn write_ratio_table(o: &mut dyn Write, entries: &[RatioEntry]) -> std::io::Result<()> {
    writeln!(o, "{:<10} {:>14} {:>14} {:>12}", "lost", "T_N", "T_M", "t(d)")?;
    for e in entries {
        let lost: Vec<String> = e.lost.iter().map(ToString::to_string).collect();
        writeln!(
            o,
            "{:<10} {:>14} {:>14} {:>12}",
            lost.join(","),
            e.nominal.time.human(6),
            e.malfunctioning.time.human(6),
            e.ratio.human(4)
        )?;
    }
    Ok(())
}

fn cmd_ratio(g: &Global, a: &DirectionArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let sys = model_for(g, a.model.as_deref())?;
    let d = parse_direction(&a.direction, &sys)?;
    let lost = parse_lost(g)?.ok_or_else(|| input("ratio needs --lost"))?;
    let report = RatioOutput {
        model: sys.name().to_string(),
        order: sys.order(),
        direction: d.as_vector().iter().copied().collect(),
        entries: ratio_entries(&sys, lost, &d)?,
    };
    emit(g, &report, out, |o| write_ratio_table(o, &report.entries))?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ReachOutput {
    model: String,
    order: u32,
    direction: Vec<f64>,
    nominal: ReachResult,
    malfunctioning: Vec<RatioEntry>,
}

fn cmd_reach(g: &Global, a: &DirectionArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let sys = model_for(g, a.model.as_deref())?;
    let d = parse_direction(&a.direction, &sys)?;
    let nominal = nominal_reach_time_k(&sys, &d, sys.order())?;
    let malfunctioning = match parse_lost(g)? {
        Some(lost) => ratio_entries(&sys, lost, &d)?,
        None => Vec::new(),
    };
    let report = ReachOutput {
        model: sys.name().to_string(),
        order: sys.order(),
        direction: d.as_vector().iter().copied().collect(),
        nominal,
        malfunctioning,
    };
    emit(g, &report, out, |o| {
        writeln!(o, "nominal reach time T_N = {}", report.nominal.time.human(6))?;
        if let Some(u) = &report.nominal.optimizer_u {
            writeln!(o, "optimal constant input {u:?}")?;
        }
        if !report.malfunctioning.is_empty() {
            write_ratio_table(o, &report.malfunctioning)?;
        }
        Ok(())
    })?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct OracleEntry {
    lost: Vec<usize>,
    grid: Option<ScanReport>,
    direction_scan: Option<ScanReport>,
    /// Set when the scan was requested but the loss is not resilient.
    direction_scan_skipped: Option<String>,
    homogeneity_error: Option<f64>,
    violated: bool,
}

#[derive(Serialize)]
struct OracleOutput {
    model: String,
    tolerance: f64,
    seed: u64,
    entries: Vec<OracleEntry>,
    violated: bool,
}

fn cmd_oracle(g: &Global, a: &OracleArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let sys = model_for(g, a.model.as_deref())?;
    if sys.order() != 1 {
        return Err(input("the oracles work on the first-order system; omit --order"));
    }
    if !(g.tol.is_finite() && g.tol >= 0.0) {
        return Err(input("--tol must be a nonnegative number"));
    }
    let d = a.direction.as_deref().map(|t| parse_direction(t, &sys)).transpose()?;
    if d.is_none() && a.samples.is_none() {
        return Err(input("oracle needs --direction (grid and homogeneity) or --samples (direction scan)"));
    }
    if a.grid.is_some() && d.is_none() {
        return Err(input("--grid needs --direction"));
    }
    let lost = parse_lost(g)?.ok_or_else(|| input("oracle needs --lost"))?;
    let scale = a.theory_scale.unwrap_or(1.0);
    let adjust = |r: ScanReport| if scale == 1.0 { r } else { r.scale_theory(scale) };

    let mut entries = Vec::new();
    for s in joint_splits(&sys, lost)? {
        let grid = match (&d, a.grid) {
            (Some(d), Some(ppa)) => Some(adjust(oracle::grid_worst_w(&s, d, ppa)?)),
            _ => None,
        };
        let (direction_scan, direction_scan_skipped) = match a.samples {
            Some(n) => match oracle::direction_scan(&s, n, g.seed) {
                Ok(r) => (Some(adjust(r)), None),
                Err(OracleError::NotResilient) => (None, Some(OracleError::NotResilient.to_string())),
                Err(OracleError::Resilience(ResilienceError::UnsupportedLoss(p))) => {
                    (None, Some(format!("direction scan needs a single lost column, got {p}")))
                }
                Err(e) => return Err(e.into()),
            },
            None => (None, None),
        };
        let homogeneity_error = d
            .as_ref()
            .map(|d| oracle::homogeneity_probe(&s, d, &[0.5, 2.0, 10.0]))
            .transpose()?;
        let violated = grid.iter().chain(&direction_scan).any(|r| r.max_violation > g.tol)
            || homogeneity_error.is_some_and(|h| h > g.tol.max(1e-8));
        entries.push(OracleEntry {
            lost: one_based(s.lost_columns()),
            grid,
            direction_scan,
            direction_scan_skipped,
            homogeneity_error,
            violated,
        });
    }
    let violated = entries.iter().any(|e| e.violated);
    let report = OracleOutput {
        model: sys.name().to_string(),
        tolerance: g.tol,
        seed: g.seed,
        entries,
        violated,
    };
    emit(g, &report, out, |o| {
        for e in &report.entries {
            let lost: Vec<String> = e.lost.iter().map(ToString::to_string).collect();
            write!(o, "lost {:<8}", lost.join(","))?;
            for r in e.grid.iter().chain(&e.direction_scan) {
                write!(
                    o,
                    "  {} worst {} theory {} violation {:.3e} ({} evals)",
                    r.kind,
                    r.worst_value.human(6),
                    r.theory_value.human(6),
                    r.max_violation,
                    r.evaluations
                )?;
            }
            if let Some(s) = &e.direction_scan_skipped {
                write!(o, "  direction_scan skipped: {s}")?;
            }
            if let Some(h) = e.homogeneity_error {
                write!(o, "  homogeneity {h:.3e}")?;
            }
            writeln!(o, "{}", if e.violated { "  VIOLATION" } else { "" })?;
        }
        writeln!(o, "{}", if report.violated { "oracle violation" } else { "no violations" })
    })?;
    Ok(if report.violated { EXIT_VIOLATION } else { EXIT_OK })
}

#[derive(Serialize)]
struct ConstantOutput {
    model: String,
    order: u32,
    input: Vec<f64>,
    horizon: f64,
    dt: f64,
    samples: usize,
    final_state: Vec<f64>,
    file: Option<PathBuf>,
}

#[derive(Serialize)]
struct VerticalOutput {
    scenario: &'static str,
    summary: SmoothRatio,
    files: Vec<PathBuf>,
}

/// Largest trajectory table written by `simulate`.
pub const MAX_SAMPLES: f64 = 1e6;

fn check_samples(horizon: f64, dt: f64) -> Result<(), CliError> {
    if dt > 0.0 && horizon / dt > MAX_SAMPLES {
        return Err(CliError::Capacity(format!(
            "{:.3e} samples exceed the trajectory cap of {MAX_SAMPLES:e}; raise --dt or drop --out",
            horizon / dt
        )));
    }
    Ok(())
}

fn write_trajectories(dir: Option<&Path>, items: &[(&str, &Trajectory)]) -> Result<Vec<PathBuf>, CliError> {
    let Some(dir) = dir else { return Ok(Vec::new()) };
    std::fs::create_dir_all(dir).map_err(|e| input(format!("cannot create {}: {e}", dir.display())))?;
    items
        .iter()
        .map(|(name, t)| {
            let path = dir.join(format!("{name}.csv"));
            t.write_csv(&path)?;
            Ok(path)
        })
        .collect()
}

fn cmd_simulate(g: &Global, a: &SimulateArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let dir = g.out.as_deref();
    // `--out` names the trajectory directory here, so the JSON goes to stdout only.
    let g = Global { out: None, ..g.clone() };
    if let Scenario::Constant = a.scenario {
        let sys = model_for(&g, None)?;
        let u = DVector::from_vec(parse_vector(
            a.input.as_deref().ok_or_else(|| input("the constant scenario needs --input"))?,
            "--input",
        )?);
        let dt = a.dt.unwrap_or(a.horizon / 1000.0);
        check_samples(a.horizon, dt)?;
        let traj = sim::integrate_constant(&sys, &u, &DVector::zeros(sys.states()), a.horizon, dt)?;
        let files = write_trajectories(dir, &[("trajectory", &traj)])?;
        let report = ConstantOutput {
            model: sys.name().to_string(),
            order: sys.order(),
            input: u.iter().copied().collect(),
            horizon: a.horizon,
            dt,
            samples: traj.times.len(),
            final_state: traj.final_state().iter().copied().collect(),
            file: files.into_iter().next(),
        };
        emit(&g, &report, out, |o| {
            writeln!(o, "{} samples over {} s", report.samples, report.horizon)?;
            writeln!(o, "final state {:?}", report.final_state)?;
            if let Some(f) = &report.file {
                writeln!(o, "wrote {}", f.display())?;
            }
            Ok(())
        })?;
        return Ok(EXIT_OK);
    }

    if g.model.is_some() {
        return Err(input("the octocopter scenarios use the built-in model; drop --model"));
    }
    let params = OctocopterParams {
        tau: a.tau,
        ..OctocopterParams::default()
    };
    params.validate()?;
    let sign = match a.vertical {
        Vertical::Up => 1.0,
        Vertical::Down => -1.0,
    };
    let d = Direction::from_slice(&[0.0, 0.0, sign])?;
    let quantity = match a.quantity {
        Quantity::Velocity => ReachQuantity::Velocity,
        Quantity::Position => ReachQuantity::Position,
    };
    let dt = a.dt.unwrap_or(a.tau / 100.0);
    let summary = sim::smooth_reach_ratio(&params, &d, quantity, a.target, dt)?;
    let sc = sim::vertical_scenario(&params, &d, quantity)?;
    let x0 = DVector::zeros(sc.system.states());
    let hover = DVector::zeros(sc.system.inputs());
    let lag = matches!(a.scenario, Scenario::OctoVerticalLag);
    let (t_nom, t_mal) = if lag {
        (summary.nominal_smooth, summary.malfunction_smooth)
    } else {
        (summary.nominal_bang, summary.malfunction_bang)
    };
    let horizon = 1.2 * t_nom.max(t_mal);
    let traj = |cmd: &DVector<f64>| -> Result<Trajectory, SimError> {
        if lag {
            sim::integrate_with_lag(&sc.system, &vec![(0.0, cmd.clone())], &hover, &x0, a.tau, horizon, dt)
        } else {
            sim::integrate_constant(&sc.system, cmd, &x0, horizon, dt)
        }
    };
    let files = match dir {
        Some(_) => {
            check_samples(horizon, dt)?;
            let nominal = traj(&sc.nominal_command)?;
            let malfunctioning = traj(&sc.malfunction_command)?;
            write_trajectories(dir, &[("nominal", &nominal), ("malfunctioning", &malfunctioning)])?
        }
        None => Vec::new(),
    };
    let report = VerticalOutput {
        scenario: if lag { "octo-vertical-lag" } else { "octo-vertical-bang" },
        summary,
        files,
    };
    emit(&g, &report, out, |o| {
        let s = &report.summary;
        writeln!(o, "{} ({:?}, target {}, tau {})", report.scenario, s.quantity, s.target, s.tau)?;
        writeln!(o, "bang-bang crossing: nominal {:.6} s, malfunctioning {:.6} s", s.nominal_bang, s.malfunction_bang)?;
        if lag {
            writeln!(o, "lagged crossing:    nominal {:.6} s, malfunctioning {:.6} s", s.nominal_smooth, s.malfunction_smooth)?;
            writeln!(o, "ratio_bangbang {:.4}  ratio_smooth {:.4}", s.ratio_bangbang, s.ratio_smooth)?;
        } else {
            writeln!(o, "ratio {:.4}", s.ratio_bangbang)?;
        }
        for f in &report.files {
            writeln!(o, "wrote {}", f.display())?;
        }
        Ok(())
    })?;
    Ok(EXIT_OK)
}
