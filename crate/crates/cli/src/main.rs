//! Scenario-driven command line for the transient eddy-current solver.

mod output;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use pect_core::{
    pole_table, transient_voltage, transition_time, voltage_integral, voltage_sum,
    TruncatedDomain,
};
use scenario::{HeightSpec, ParseError, Scenario};

#[derive(Parser)]
#[command(name = "pect", version, about = "Transient eddy-current response of multilayer tubes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output CSV path (overrides the scenario's output.path).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Inversion method: stehfest|nilt|poles|hybrid.
    #[arg(long)]
    method: Option<String>,
    /// Number of eigenvalue terms M.
    #[arg(long)]
    modes: Option<usize>,
    /// Domain length in meters, or "auto".
    #[arg(long)]
    h: Option<String>,
    /// Poles retained per eigenvalue (pole/hybrid methods).
    #[arg(long)]
    poles_per_mode: Option<usize>,
    /// Stehfest term count (even, 2..=20).
    #[arg(long)]
    stehfest_n: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Step-response voltage V(t) for the selected method.
    Transient(Common),
    /// Per-mode pole/residue table.
    Poles(Common),
    /// Frequency-domain sweep V(j omega) on a log grid.
    FreqSweep(Common),
    /// Aligned Stehfest/NILT/pole columns with pairwise deviations.
    Compare(Common),
    /// Cross-check the eigenvalue sum against the spectral integral.
    Validate(Common),
}

// exit-code classes: 10-19 parse/validation, 20-29 computation, 30-39 I/O
const EXIT_MISSING: u8 = 10;
const EXIT_SYNTAX: u8 = 11;
const EXIT_INVARIANT: u8 = 12;
const EXIT_UNKNOWN_KEY: u8 = 13;
const EXIT_COMPUTE: u8 = 20;
const EXIT_IO: u8 = 30;

enum CliError {
    Parse(ParseError),
    Compute(pect_core::Error),
    Write(output::WriteError),
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::Parse(e)
    }
}

impl From<pect_core::Error> for CliError {
    fn from(e: pect_core::Error) -> Self {
        CliError::Compute(e)
    }
}

impl From<output::WriteError> for CliError {
    fn from(e: output::WriteError) -> Self {
        match e {
            // NaN in results is a computation failure, not an I/O one
            output::WriteError::NonFinite { .. } => {
                CliError::Compute(pect_core::Error::NonFinite(format!("{e}")))
            }
            io => CliError::Write(io),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(ParseError::Missing(_)) => EXIT_MISSING,
            CliError::Parse(ParseError::Syntax(_)) => EXIT_SYNTAX,
            CliError::Parse(ParseError::UnknownKey(_)) => EXIT_UNKNOWN_KEY,
            CliError::Parse(ParseError::Invariant(_)) => EXIT_INVARIANT,
            CliError::Compute(_) => EXIT_COMPUTE,
            CliError::Write(_) => EXIT_IO,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Parse(e) => format!("{e}"),
            CliError::Compute(e) => format!("computation failed: {e}"),
            CliError::Write(e) => format!("{e}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Transient(c) => run_transient(c),
        Command::Poles(c) => run_poles(c),
        Command::FreqSweep(c) => run_freq_sweep(c),
        Command::Compare(c) => run_compare(c),
        Command::Validate(c) => run_validate(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn load_scenario(common: &Common) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| ParseError::Missing(format!("{}: {e}", common.config.display())))?;
    let mut file: scenario::ScenarioFile = toml::from_str(&text).map_err(|e| {
        let msg = e.to_string();
        if msg.contains("unknown field") {
            ParseError::UnknownKey(msg)
        } else {
            ParseError::Syntax(msg)
        }
    })?;

    // flag overrides, applied in the file's unit system
    let scale = match file.units {
        scenario::Units::Meters => 1.0,
        scenario::Units::Millimeters => 1e-3,
    };
    if let Some(m) = common.modes {
        file.domain.modes = m;
    }
    if let Some(h) = &common.h {
        file.domain.h = if h == "auto" {
            HeightSpec::Auto("auto".into())
        } else {
            let meters: f64 = h.parse().map_err(|_| {
                ParseError::Invariant(format!("--h must be a length in meters or \"auto\", got \"{h}\""))
            })?;
            HeightSpec::Length(meters / scale)
        };
    }
    if let Some(k) = common.poles_per_mode {
        file.inversion.poles_per_mode = k;
    }
    if let Some(nn) = common.stehfest_n {
        file.inversion.stehfest_n = nn;
    }
    if let Some(m) = &common.method {
        file.inversion.method = m.clone();
    }
    Ok(scenario::build(file)?)
}

fn out_path(common: &Common, scenario: &Scenario, default_name: &str) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| scenario.output.path.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(default_name))
}

fn run_transient(common: &Common) -> Result<(), CliError> {
    let scenario = load_scenario(common)?;
    let times = scenario::time_grid(&scenario)?;
    let result = transient_voltage(
        &scenario.assembly,
        &scenario.stack,
        &scenario.domain,
        &times,
        scenario.method,
        &scenario.options,
    )?;
    let rows: Vec<Vec<f64>> = result
        .times
        .iter()
        .zip(&result.voltage)
        .map(|(t, v)| vec![*t, *v])
        .collect();
    let path = out_path(common, &scenario, "transient.csv");
    output::write_csv(&path, &["t_s", "V_volts"], &rows)?;
    if !result.metadata.empty_pole_modes.is_empty() {
        eprintln!(
            "note: {} mode(s) had no pole in the scan range and contribute zero",
            result.metadata.empty_pole_modes.len()
        );
    }
    println!("wrote {} ({} samples, method {})", path.display(), rows.len(), result.method);
    Ok(())
}

fn run_poles(common: &Common) -> Result<(), CliError> {
    let scenario = load_scenario(common)?;
    let tm = transition_time(&scenario.stack);
    let t_min = scenario
        .output
        .times
        .as_ref()
        .and_then(|v| v.first().copied())
        .or(scenario.output.t_start)
        .unwrap_or(if tm > 0.0 { tm / 100.0 } else { 1e-4 });
    let table = pole_table(
        &scenario.assembly,
        &scenario.stack,
        &scenario.domain,
        scenario.options.poles_per_mode,
        t_min,
    )?;
    let rows: Vec<Vec<f64>> = table
        .iter()
        .map(|(mode, q, pole, residue)| vec![*mode as f64, *q, *pole, *residue])
        .collect();
    let path = out_path(common, &scenario, "poles.csv");
    output::write_csv(&path, &["mode_i", "q_i_per_m", "pole_per_s", "residue"], &rows)?;
    println!("wrote {} ({} poles)", path.display(), rows.len());
    Ok(())
}

fn run_freq_sweep(common: &Common) -> Result<(), CliError> {
    let scenario = load_scenario(common)?;
    let f_lo = scenario.output.f_start.unwrap_or(10.0);
    let f_hi = scenario.output.f_end.unwrap_or(1000.0);
    if f_hi <= f_lo {
        return Err(ParseError::Invariant(format!("frequency range is empty: [{f_lo}, {f_hi}]")).into());
    }
    let ppd = scenario.output.f_points_per_decade.unwrap_or(20);
    let grid = scenario::log_grid(f_lo, f_hi, ppd);
    let mut rows = Vec::with_capacity(grid.len());
    for f in grid {
        let s = Complex64::new(0.0, 2.0 * std::f64::consts::PI * f);
        let v = voltage_sum(s, &scenario.assembly, &scenario.stack, &scenario.domain)?;
        rows.push(vec![f, v.re, v.im]);
    }
    let path = out_path(common, &scenario, "freq_sweep.csv");
    output::write_csv(&path, &["f_hz", "reV_volts", "imV_volts"], &rows)?;
    println!("wrote {} ({} frequencies)", path.display(), rows.len());
    Ok(())
}

fn run_compare(common: &Common) -> Result<(), CliError> {
    let scenario = load_scenario(common)?;
    let times = scenario::time_grid(&scenario)?;
    let mut by_method = Vec::new();
    for method in [
        pect_core::InversionMethod::Stehfest,
        pect_core::InversionMethod::Nilt,
        pect_core::InversionMethod::Poles,
    ] {
        let r = transient_voltage(
            &scenario.assembly,
            &scenario.stack,
            &scenario.domain,
            &times,
            method,
            &scenario.options,
        )?;
        by_method.push(r.voltage);
    }
    let rows: Vec<Vec<f64>> = times
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let (s, n, p) = (by_method[0][i], by_method[1][i], by_method[2][i]);
            let scale = n.abs().max(1e-300);
            vec![*t, s, n, p, (s - p).abs() / scale, (n - p).abs() / scale]
        })
        .collect();
    let path = out_path(common, &scenario, "compare.csv");
    output::write_csv(
        &path,
        &["t_s", "V_stehfest", "V_nilt", "V_poles", "dev_sp", "dev_np"],
        &rows,
    )?;
    println!("wrote {} ({} samples)", path.display(), rows.len());
    Ok(())
}

fn run_validate(common: &Common) -> Result<(), CliError> {
    let scenario = load_scenario(common)?;
    let modes = scenario.domain.n_modes.max(200);
    let domain = TruncatedDomain::new(scenario.domain.h, modes).map_err(CliError::Compute)?;
    let mut worst = 0.0f64;
    println!("eigenvalue sum (M = {modes}) vs spectral integral:");
    for f in [10.0, 100.0, 1000.0] {
        let omega = 2.0 * std::f64::consts::PI * f;
        let vs = voltage_sum(
            Complex64::new(0.0, omega),
            &scenario.assembly,
            &scenario.stack,
            &domain,
        )?;
        let vi = voltage_integral(omega, &scenario.assembly, &scenario.stack)?;
        let denom = vi.norm();
        let dev = if denom > 0.0 {
            (vs - vi).norm() / denom
        } else {
            (vs - vi).norm()
        };
        worst = worst.max(dev);
        println!(
            "  f = {f:7.1} Hz: sum = {:+.6e}{:+.6e}j  integral = {:+.6e}{:+.6e}j  rel dev = {dev:.3e}",
            vs.re, vs.im, vi.re, vi.im
        );
    }
    println!("worst relative deviation: {worst:.3e}");
    Ok(())
}
