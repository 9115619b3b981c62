//! Command-line front end.
//!
//! Configuration files hold one `key = value` pair per line; `#` starts a
//! comment. Every run writes `resolved_config.txt` listing each key with the
//! value actually used.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::dispatch::PlantConfig;
use crate::metrics::{
    classify_green, classify_hours, cumulative_series, levelised_cost, pareto_points, specific_emissions,
    sweep_runs, write_cumulative_csv, write_green_csv, write_pareto_csv, GreenRules, SweepError,
};
use crate::planner::PeriodKind;
use crate::simulator::{
    run_benchmark, run_day_to_day, run_trading_only, DeliveryContract, RunMode, SimError, SimulationReport,
};
use crate::timeseries::{load_scenario, DataError, ScenarioData};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_BREACH: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "h2plan", version, about = "Dispatch planning for grid-connected renewable hydrogen plants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Full-foresight optimisation of the whole horizon.
    Benchmark(RunArgs),
    /// Daily planning and operation.
    Day2day(RunArgs),
    /// Electricity trading with the electrolyser idle.
    TradingOnly(Common),
    /// One run per weight.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Hourly scenario CSV (optionally .gz).
    #[arg(long)]
    data: PathBuf,
    /// Key-value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Print LCOH and specific CO2 to standard output.
    #[arg(long)]
    summary: bool,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// day, week, month or year.
    #[arg(long, default_value = "year")]
    delivery: PeriodKind,
    /// Weight of emissions against cost, in [0, 1].
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "year")]
    delivery: PeriodKind,
    /// Comma-separated weights.
    #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1")]
    alphas: Vec<f64>,
    /// benchmark or day2day.
    #[arg(long, default_value = "benchmark", value_parser = parse_mode)]
    mode: RunMode,
}

fn parse_mode(s: &str) -> Result<RunMode, String> {
    match s {
        "benchmark" => Ok(RunMode::Benchmark),
        "day2day" => Ok(RunMode::DayToDay),
        other => Err(format!("unknown mode '{other}' (expected benchmark or day2day)")),
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error(transparent)]
    Metrics(#[from] crate::metrics::MetricsError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Sim(SimError::ContractBreach { .. })
            | CliError::Sweep(SweepError::Run { source: SimError::ContractBreach { .. }, .. }) => EXIT_BREACH,
            _ => EXIT_ERROR,
        }
    }
}

/// Everything a run needs besides the scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub plant: PlantConfig,
    pub green: GreenRules,
    /// Mass per delivery period; `None` uses the default for the period.
    pub target_kg: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { plant: PlantConfig::default(), green: GreenRules::default(), target_kg: None }
    }
}

fn numeric_keys(c: &mut RunConfig) -> Vec<(&'static str, &mut f64)> {
    let p = &mut c.plant;
    vec![
        ("solar_mw", &mut p.solar_mw),
        ("wind_mw", &mut p.wind_mw),
        ("inverter_mw", &mut p.inverter_mw),
        ("electrolyser_mw", &mut p.electrolyser_mw),
        ("grid_mw", &mut p.grid_mw),
        ("eta_inverter", &mut p.eta_inverter),
        ("eta_lhv", &mut p.eta_lhv),
        ("lhv_mj_per_kg", &mut p.lhv_mj_per_kg),
        ("ramp_up", &mut p.ramp_up),
        ("ramp_up_cold", &mut p.ramp_up_cold),
        ("ramp_down", &mut p.ramp_down),
        ("electrolyser_capex", &mut p.electrolyser_capex),
        ("fixed_om", &mut p.fixed_om),
        ("lifetime_years", &mut p.lifetime_years),
        ("discount_rate", &mut p.discount_rate),
        ("op_cost.solar", &mut p.op_cost.solar),
        ("op_cost.wind", &mut p.op_cost.wind),
        ("op_cost.inverter", &mut p.op_cost.inverter),
        ("op_cost.electrolyser", &mut p.op_cost.electrolyser),
        ("op_cost.grid", &mut p.op_cost.grid),
        ("co2_price", &mut p.co2_price),
        ("green.price_threshold", &mut c.green.price_threshold),
        ("green.intensity_threshold", &mut c.green.intensity_threshold),
        ("green.re_share_threshold", &mut c.green.re_share_threshold),
    ]
}

impl RunConfig {
    /// Applies `key = value` lines on top of the current values.
    pub fn apply(&mut self, text: &str) -> Result<(), CliError> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| CliError::Config(format!("config line {}: {msg}", lineno + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| bad(format!("expected key = value, got '{line}'")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "green.hourly_intensity_mode" => {
                    self.green.hourly_intensity_mode =
                        value.parse().map_err(|_| bad(format!("'{value}' is not true or false")))?;
                }
                "target_kg" => {
                    let v: f64 = value.parse().map_err(|_| bad(format!("'{value}' is not a number")))?;
                    if !(v.is_finite() && v >= 0.0) {
                        return Err(bad("target_kg must be non-negative".into()));
                    }
                    self.target_kg = Some(v);
                }
                _ => {
                    let mut keys = numeric_keys(self);
                    let slot = keys
                        .iter_mut()
                        .find(|(k, _)| *k == key)
                        .ok_or_else(|| bad(format!("unknown key '{key}'")))?;
                    *slot.1 = value.parse().map_err(|_| bad(format!("'{value}' is not a number")))?;
                }
            }
        }
        self.plant.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if [self.green.price_threshold, self.green.intensity_threshold, self.green.re_share_threshold]
            .iter()
            .any(|&v| !(v >= 0.0))
        {
            return Err(CliError::Config("green thresholds must be non-negative".into()));
        }
        Ok(())
    }

    pub fn contract(&self, kind: PeriodKind) -> DeliveryContract {
        match self.target_kg {
            Some(t) => DeliveryContract::new(kind, t),
            None => DeliveryContract::default_for(kind, &self.plant),
        }
    }

    /// Every key with its value, one per line, in a fixed order.
    pub fn resolved(&self, kind: Option<PeriodKind>) -> String {
        let mut c = self.clone();
        let mut s = String::new();
        for (k, v) in numeric_keys(&mut c) {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s.push_str(&format!("green.hourly_intensity_mode = {}\n", self.green.hourly_intensity_mode));
        if let Some(kind) = kind {
            s.push_str(&format!("target_kg = {}\n", self.contract(kind).target_kg));
        }
        s
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Benchmark(a) => single_run(a, RunMode::Benchmark),
        Command::Day2day(a) => single_run(a, RunMode::DayToDay),
        Command::TradingOnly(c) => trading_only(c),
        Command::Sweep(a) => sweep(a),
    }
}

struct Setup {
    scenario: ScenarioData,
    config: RunConfig,
    out: PathBuf,
}

fn setup(c: &Common) -> Result<Setup, CliError> {
    let mut config = RunConfig::default();
    if let Some(path) = &c.config {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
        config.apply(&text)?;
    }
    let scenario = load_scenario(&c.data)?;
    fs::create_dir_all(&c.out).map_err(|source| CliError::Io { path: c.out.clone(), source })?;
    Ok(Setup { scenario, config, out: c.out.clone() })
}

fn check_alpha(alpha: f64) -> Result<(), CliError> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(CliError::Config(format!("alpha {alpha} is outside [0, 1]")))
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    let path = dir.join(name);
    File::create(&path).map(BufWriter::new).map_err(|source| CliError::Io { path, source })
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|source| CliError::Io { path, source })
}

/// `benchmark_week_0.50.csv` and the like.
pub fn run_file_name(mode: RunMode, kind: PeriodKind, alpha: f64) -> String {
    format!("{mode}_{kind}_{alpha:.2}.csv")
}

fn single_run(a: RunArgs, mode: RunMode) -> Result<(), CliError> {
    check_alpha(a.alpha)?;
    let s = setup(&a.common)?;
    let contract = s.config.contract(a.delivery);
    let mut resolved = s.config.resolved(Some(a.delivery));
    resolved.push_str(&format!("mode = {mode}\ndelivery = {}\nalpha = {}\n", a.delivery, a.alpha));
    write_text(&s.out, "resolved_config.txt", &resolved)?;

    let plant = &s.config.plant;
    let report = match mode {
        RunMode::Benchmark => run_benchmark(&s.scenario, plant, &contract, a.alpha)?,
        RunMode::DayToDay => run_day_to_day(&s.scenario, plant, &contract, a.alpha)?,
    };
    let profit = run_trading_only(&s.scenario, plant)?;
    let name = run_file_name(mode, a.delivery, a.alpha);
    report.write_hourly_csv(&s.scenario, create(&s.out, &name)?)?;
    report.write_periods_csv(create(&s.out, &name.replace(".csv", "_periods.csv"))?)?;
    let hours = classify_hours(&report, &s.scenario, &s.config.green)?;
    write_green_csv(&hours, &s.scenario, create(&s.out, "green.csv")?)?;
    write_cumulative_csv(&cumulative_series(&report, &s.scenario, plant), create(&s.out, "cumulative.csv")?)?;
    write_summary(&s, &report, profit, create(&s.out, "summary.csv")?)?;
    if a.common.summary {
        print_summary(&report, profit)?;
    }
    Ok(())
}

fn write_summary(s: &Setup, report: &SimulationReport, profit: f64, out: impl Write) -> Result<(), CliError> {
    let green = classify_green(report, &s.scenario, &s.config.green, &s.config.plant)?;
    let lcoh = levelised_cost(report, profit).map_or("undefined".into(), |v| format!("{v:.6}"));
    let co2 = specific_emissions(report).map_or("undefined".into(), |v| format!("{v:.6}"));
    let c = &report.costs;
    let met = report.periods.iter().filter(|p| p.met).count();
    let rows: Vec<(&str, String)> = vec![
        ("mode", report.meta.mode.to_string()),
        ("delivery", report.meta.contract.kind.to_string()),
        ("alpha", report.meta.alpha.to_string()),
        ("total_h2_kg", format!("{:.6}", report.total_h2_kg)),
        ("c_e", format!("{:.6}", c.c_e)),
        ("c_o", format!("{:.6}", c.c_o)),
        ("c_c", format!("{:.6}", c.c_c)),
        ("co2_kg", format!("{:.6}", c.co2_kg)),
        ("c_alpha", format!("{:.6}", c.c_alpha)),
        ("trading_profit", format!("{profit:.6}")),
        ("lcoh", lcoh),
        ("specific_co2", co2),
        ("onsite_green_kg", format!("{:.6}", green.onsite_kg)),
        ("grid_green_kg", format!("{:.6}", green.grid_green_kg)),
        ("grid_green_hourly_kg", format!("{:.6}", green.grid_green_hourly_kg)),
        ("nongreen_kg", format!("{:.6}", green.nongreen_kg)),
        ("specific_co2_nongreen", format!("{:.6}", green.specific_co2_nongreen)),
        ("periods", report.periods.len().to_string()),
        ("periods_met", met.to_string()),
        ("config_hash", report.meta.config_hash.clone()),
    ];
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["key", "value"]).map_err(DataError::from)?;
    for (k, v) in rows {
        w.write_record([k, v.as_str()]).map_err(DataError::from)?;
    }
    w.flush().map_err(DataError::from)?;
    Ok(())
}

fn print_summary(report: &SimulationReport, profit: f64) -> Result<(), CliError> {
    println!("LCOH: {:.4} EUR/kg", levelised_cost(report, profit)?);
    println!("specific CO2: {:.4} kg/kg", specific_emissions(report)?);
    Ok(())
}

fn trading_only(c: Common) -> Result<(), CliError> {
    let s = setup(&c)?;
    write_text(&s.out, "resolved_config.txt", &format!("{}mode = trading-only\n", s.config.resolved(None)))?;
    let profit = run_trading_only(&s.scenario, &s.config.plant)?;
    write_text(&s.out, "trading-only.csv", &format!("key,value\ntrading_profit,{profit:.6}\n"))?;
    if c.summary {
        println!("trading profit: {profit:.2} EUR");
    }
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<(), CliError> {
    if a.alphas.is_empty() {
        return Err(CliError::Config("--alphas is empty".into()));
    }
    for &alpha in &a.alphas {
        check_alpha(alpha)?;
    }
    let s = setup(&a.common)?;
    let contract = s.config.contract(a.delivery);
    let alphas: Vec<String> = a.alphas.iter().map(|v| v.to_string()).collect();
    let mut resolved = s.config.resolved(Some(a.delivery));
    resolved.push_str(&format!("mode = {}\ndelivery = {}\nalphas = {}\n", a.mode, a.delivery, alphas.join(",")));
    write_text(&s.out, "resolved_config.txt", &resolved)?;

    let plant = &s.config.plant;
    let profit = run_trading_only(&s.scenario, plant)?;
    let reports = sweep_runs(&s.scenario, plant, &contract, &a.alphas, a.mode)?;
    for r in &reports {
        r.write_hourly_csv(&s.scenario, create(&s.out, &run_file_name(a.mode, a.delivery, r.meta.alpha))?)?;
    }
    let points = pareto_points(&reports, profit)?;
    write_pareto_csv(&points, create(&s.out, "pareto.csv")?)?;
    if a.common.summary {
        for (r, p) in reports.iter().zip(&points) {
            println!("alpha {:.2}", r.meta.alpha);
            println!("LCOH: {:.4} EUR/kg", p.lcoh);
            println!("specific CO2: {:.4} kg/kg", p.specific_co2);
        }
    }
    Ok(())
}
