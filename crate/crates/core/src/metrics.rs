//! Headline metrics, green-hydrogen accounting, weight sweeps and
//! cumulative diagnostics.

use std::io::Write;

use rayon::prelude::*;
use thiserror::Error;

use crate::dispatch::PlantConfig;
use crate::simulator::{run_benchmark, run_day_to_day, run_trading_only, DeliveryContract, RunMode, SimError, SimulationReport};
use crate::timeseries::{DataError, ScenarioData};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("no hydrogen was produced")]
    ZeroProduction,
    #[error("alpha {0} has no counterpart in the other sweep")]
    MismatchedAlphas(f64),
    #[error("report covers {report} hours but the scenario has {scenario}")]
    Misaligned { report: usize, scenario: usize },
}

/// Levelised cost of hydrogen from its parts, €/kg.
pub fn lcoh(c_c: f64, c_o: f64, c_e: f64, trading_profit: f64, h2_kg: f64) -> Result<f64, MetricsError> {
    if h2_kg <= 0.0 {
        return Err(MetricsError::ZeroProduction);
    }
    Ok((c_c + c_o + c_e + trading_profit) / h2_kg)
}

/// Electrolyser capital, operation and net electricity cost plus the
/// trading profit given up, per kg of hydrogen.
pub fn levelised_cost(report: &SimulationReport, trading_profit: f64) -> Result<f64, MetricsError> {
    let c = &report.costs;
    lcoh(c.c_c, c.c_o, c.c_e, trading_profit, report.total_h2_kg)
}

/// kg CO2 per kg H2.
pub fn specific_emissions(report: &SimulationReport) -> Result<f64, MetricsError> {
    if report.total_h2_kg <= 0.0 {
        return Err(MetricsError::ZeroProduction);
    }
    Ok(report.costs.co2_kg / report.total_h2_kg)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenRules {
    /// Grid power below this price counts as renewable, €/MWh.
    pub price_threshold: f64,
    /// Grid power below this intensity counts as renewable, kg/MWh.
    pub intensity_threshold: f64,
    /// Share of renewable input above which a whole grid counts as green.
    pub re_share_threshold: f64,
    /// Also apply the intensity rule hour by hour.
    pub hourly_intensity_mode: bool,
}

impl Default for GreenRules {
    fn default() -> Self {
        Self { price_threshold: 20.0, intensity_threshold: 64.8, re_share_threshold: 0.9, hourly_intensity_mode: false }
    }
}

/// Hydrogen split by origin. `onsite + grid_green + nongreen` is the total;
/// `grid_green_hourly` is a separate tally of grid hydrogen that passes the
/// hourly intensity rule.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GreenBreakdown {
    pub onsite_kg: f64,
    pub grid_green_kg: f64,
    pub grid_green_hourly_kg: f64,
    pub nongreen_kg: f64,
    /// Import emissions of the non-green hydrogen per kg of it.
    pub specific_co2_nongreen: f64,
}

impl GreenBreakdown {
    pub fn total_kg(&self) -> f64 {
        self.onsite_kg + self.grid_green_kg + self.nongreen_kg
    }

    pub fn green_share(&self) -> f64 {
        let t = self.total_kg();
        if t > 0.0 {
            (self.onsite_kg + self.grid_green_kg) / t
        } else {
            0.0
        }
    }
}

/// Classification of one hour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenHour {
    pub hour: usize,
    pub mass_kg: f64,
    /// Fraction of the hour's hydrogen made from imported power.
    pub grid_share: f64,
    pub price_green: bool,
    pub intensity_green: bool,
}

/// Imports feed the electrolyser before anything else, so the grid share of
/// an hour is `min(g5i, g4) / g4`.
pub fn classify_hours(
    report: &SimulationReport,
    scenario: &ScenarioData,
    rules: &GreenRules,
) -> Result<Vec<GreenHour>, MetricsError> {
    let r = &report.hourly;
    if r.n_hours() != scenario.n_hours() {
        return Err(MetricsError::Misaligned { report: r.n_hours(), scenario: scenario.n_hours() });
    }
    Ok((0..r.n_hours())
        .map(|t| {
            let g4 = r.g4[t];
            let grid_share = if g4 > 0.0 { r.g5i[t].min(g4) / g4 } else { 0.0 };
            GreenHour {
                hour: t,
                mass_kg: r.m[t],
                grid_share,
                price_green: scenario.price[t] < rules.price_threshold,
                intensity_green: scenario.co2_intensity[t] < rules.intensity_threshold,
            }
        })
        .collect())
}

pub fn classify_green(
    report: &SimulationReport,
    scenario: &ScenarioData,
    rules: &GreenRules,
    plant: &PlantConfig,
) -> Result<GreenBreakdown, MetricsError> {
    let hours = classify_hours(report, scenario, rules)?;
    let mut b = GreenBreakdown::default();
    let mut co2 = 0.0;
    for h in &hours {
        let grid = h.mass_kg * h.grid_share;
        b.onsite_kg += h.mass_kg - grid;
        if h.price_green {
            b.grid_green_kg += grid;
        } else {
            b.nongreen_kg += grid;
            let used = report.hourly.g5i[h.hour].min(report.hourly.g4[h.hour]);
            co2 += used * plant.delta_t * scenario.co2_intensity[h.hour];
        }
        if rules.hourly_intensity_mode && h.intensity_green {
            b.grid_green_hourly_kg += grid;
        }
    }
    b.specific_co2_nongreen = if b.nongreen_kg > 0.0 { co2 / b.nongreen_kg } else { 0.0 };
    Ok(b)
}

pub fn write_green_csv(hours: &[GreenHour], scenario: &ScenarioData, out: impl Write) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["hour", "price", "intensity", "mass_kg", "grid_share", "price_green", "intensity_green"])?;
    for h in hours {
        w.write_record([
            h.hour.to_string(),
            format!("{:.2}", scenario.price[h.hour]),
            format!("{:.2}", scenario.co2_intensity[h.hour]),
            format!("{:.6}", h.mass_kg),
            format!("{:.6}", h.grid_share),
            h.price_green.to_string(),
            h.intensity_green.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParetoPoint {
    pub alpha: f64,
    pub lcoh: f64,
    pub specific_co2: f64,
    pub total_h2_kg: f64,
    pub c_e: f64,
    pub c_o: f64,
    pub co2_kg: f64,
}

impl ParetoPoint {
    pub fn from_report(report: &SimulationReport, trading_profit: f64) -> Result<Self, MetricsError> {
        Ok(Self {
            alpha: report.meta.alpha,
            lcoh: levelised_cost(report, trading_profit)?,
            specific_co2: specific_emissions(report)?,
            total_h2_kg: report.total_h2_kg,
            c_e: report.costs.c_e,
            c_o: report.costs.c_o,
            co2_kg: report.costs.co2_kg,
        })
    }
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("alpha = {alpha}: {source}")]
    Run { alpha: f64, source: SimError },
    #[error(transparent)]
    Trading(SimError),
    #[error("alpha = {alpha}: {source}")]
    Metrics { alpha: f64, source: MetricsError },
}

/// Worker threads for sweeps: `H2PLAN_THREADS` if set to a positive number,
/// otherwise all cores.
pub fn sweep_threads() -> usize {
    std::env::var("H2PLAN_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs every weight in `alphas` concurrently. Results keep the order of
/// `alphas`.
pub fn sweep_runs(
    scenario: &ScenarioData,
    plant: &PlantConfig,
    contract: &DeliveryContract,
    alphas: &[f64],
    mode: RunMode,
) -> Result<Vec<SimulationReport>, SweepError> {
    let run = |&alpha: &f64| {
        let r = match mode {
            RunMode::Benchmark => run_benchmark(scenario, plant, contract, alpha),
            RunMode::DayToDay => run_day_to_day(scenario, plant, contract, alpha),
        };
        r.map_err(|source| SweepError::Run { alpha, source })
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(sweep_threads()).build();
    match pool {
        Ok(pool) => pool.install(|| alphas.par_iter().map(run).collect()),
        Err(_) => alphas.iter().map(run).collect(),
    }
}

pub fn pareto_sweep(
    scenario: &ScenarioData,
    plant: &PlantConfig,
    contract: &DeliveryContract,
    alphas: &[f64],
    mode: RunMode,
) -> Result<Vec<ParetoPoint>, SweepError> {
    let profit = run_trading_only(scenario, plant).map_err(SweepError::Trading)?;
    let reports = sweep_runs(scenario, plant, contract, alphas, mode)?;
    pareto_points(&reports, profit)
}

pub fn pareto_points(reports: &[SimulationReport], trading_profit: f64) -> Result<Vec<ParetoPoint>, SweepError> {
    reports
        .iter()
        .map(|r| {
            ParetoPoint::from_report(r, trading_profit).map_err(|source| SweepError::Metrics { alpha: r.meta.alpha, source })
        })
        .collect()
}

pub fn write_pareto_csv(points: &[ParetoPoint], out: impl Write) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["alpha", "lcoh", "specific_co2", "total_h2_kg", "c_e", "c_o", "co2_kg"])?;
    for p in points {
        w.write_record([
            format!("{:.4}", p.alpha),
            format!("{:.6}", p.lcoh),
            format!("{:.6}", p.specific_co2),
            format!("{:.6}", p.total_h2_kg),
            format!("{:.6}", p.c_e),
            format!("{:.6}", p.c_o),
            format!("{:.6}", p.co2_kg),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Day-to-day over benchmark at one weight. A ratio is `None` when the
/// benchmark value is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioPoint {
    pub alpha: f64,
    pub lcoh_ratio: Option<f64>,
    pub co2_ratio: Option<f64>,
}

pub fn normalized_comparison(
    day2day: &[ParetoPoint],
    benchmark: &[ParetoPoint],
) -> Result<Vec<RatioPoint>, MetricsError> {
    let ratio = |a: f64, b: f64| (b != 0.0).then(|| a / b);
    for b in benchmark {
        if !day2day.iter().any(|d| d.alpha == b.alpha) {
            return Err(MetricsError::MismatchedAlphas(b.alpha));
        }
    }
    day2day
        .iter()
        .map(|d| {
            let b = benchmark.iter().find(|b| b.alpha == d.alpha).ok_or(MetricsError::MismatchedAlphas(d.alpha))?;
            Ok(RatioPoint { alpha: d.alpha, lcoh_ratio: ratio(d.lcoh, b.lcoh), co2_ratio: ratio(d.specific_co2, b.specific_co2) })
        })
        .collect()
}

/// Running totals at the end of every day.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Cumulative {
    pub h2_kg: Vec<f64>,
    /// Export revenue minus import cost, €.
    pub net_revenue: Vec<f64>,
}

pub fn cumulative_series(report: &SimulationReport, scenario: &ScenarioData, plant: &PlantConfig) -> Cumulative {
    let r = &report.hourly;
    let mut c = Cumulative::default();
    let (mut h2, mut rev) = (0.0, 0.0);
    for t in 0..r.n_hours() {
        h2 += r.m[t];
        rev += plant.delta_t * (r.g5e[t] - r.g5i[t]) * scenario.price[t];
        if (t + 1) % 24 == 0 || t + 1 == r.n_hours() {
            c.h2_kg.push(h2);
            c.net_revenue.push(rev);
        }
    }
    c
}

pub fn write_cumulative_csv(c: &Cumulative, out: impl Write) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["day", "h2_kg", "net_revenue_eur"])?;
    for (d, (h, r)) in c.h2_kg.iter().zip(&c.net_revenue).enumerate() {
        w.write_record([d.to_string(), format!("{h:.6}"), format!("{r:.6}")])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispatch::{CostBreakdown, DispatchResult};
    use crate::planner::PeriodKind;
    use crate::simulator::RunMetadata;
    use chrono::NaiveDate;

    fn report_from(hourly: DispatchResult, costs: CostBreakdown) -> SimulationReport {
        SimulationReport {
            total_h2_kg: hourly.total_mass(),
            hourly,
            periods: vec![],
            costs,
            meta: RunMetadata {
                mode: RunMode::Benchmark,
                alpha: 0.0,
                contract: DeliveryContract::new(PeriodKind::Day, 0.0),
                config_hash: String::new(),
            },
        }
    }

    fn one_hour(g4: f64, g5i: f64, m: f64) -> DispatchResult {
        DispatchResult { g4: vec![g4], g5i: vec![g5i], g5e: vec![0.0], m: vec![m], ..DispatchResult::default() }
    }

    fn scenario(price: &[f64], co2: &[f64]) -> ScenarioData {
        let n = price.len();
        let mut p = price.to_vec();
        let mut c = co2.to_vec();
        p.resize(24, 0.0);
        c.resize(24, 0.0);
        let s = ScenarioData::new(
            NaiveDate::from_ymd_opt(2018, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap(),
            vec![0.0; 24],
            vec![0.0; 24],
            p,
            c,
        )
        .unwrap();
        ScenarioData { price: s.price[..n].to_vec(), co2_intensity: s.co2_intensity[..n].to_vec(), ..s }
    }

    #[test]
    fn lcoh_arithmetic() {
        let v = lcoh(99_662.0, 0.0, 10_000.0, 20_000.0, 108_000.0).unwrap();
        assert!((v - 129_662.0 / 108_000.0).abs() < 1e-12);
        assert!((v - 1.20).abs() < 0.005);
        assert_eq!(lcoh(0.0, 0.0, 0.0, 0.0, 10.0).unwrap(), 0.0);
        assert!((lcoh(1.0, 2.0, 3.0, 4.0, 20.0).unwrap() * 2.0 - lcoh(1.0, 2.0, 3.0, 4.0, 10.0).unwrap()).abs() < 1e-12);
        assert_eq!(lcoh(1.0, 0.0, 0.0, 0.0, 0.0), Err(MetricsError::ZeroProduction));
    }

    #[test]
    fn emissions_per_kg() {
        let costs = CostBreakdown { co2_kg: 120.0, ..CostBreakdown::default() };
        let r = report_from(one_hour(1.0, 1.0, 18.0), costs);
        assert!((specific_emissions(&r).unwrap() - 120.0 / 18.0).abs() < 1e-12);
        let r = report_from(one_hour(0.0, 0.0, 0.0), CostBreakdown::default());
        assert_eq!(specific_emissions(&r), Err(MetricsError::ZeroProduction));
    }

    #[test]
    fn green_thresholds_are_strict() {
        let plant = PlantConfig::default();
        let on = GreenRules { hourly_intensity_mode: true, ..GreenRules::default() };

        let onsite = report_from(one_hour(1.0, 0.0, 18.0), CostBreakdown::default());
        let b = classify_green(&onsite, &scenario(&[50.0], &[300.0]), &GreenRules::default(), &plant).unwrap();
        assert_eq!((b.onsite_kg, b.grid_green_kg, b.nongreen_kg), (18.0, 0.0, 0.0));

        let grid = report_from(one_hour(1.0, 1.0, 18.0), CostBreakdown::default());
        let b = classify_green(&grid, &scenario(&[19.9], &[300.0]), &GreenRules::default(), &plant).unwrap();
        assert_eq!((b.onsite_kg, b.grid_green_kg, b.nongreen_kg), (0.0, 18.0, 0.0));

        let b = classify_green(&grid, &scenario(&[20.0], &[60.0]), &on, &plant).unwrap();
        assert_eq!((b.grid_green_kg, b.grid_green_hourly_kg, b.nongreen_kg), (0.0, 18.0, 18.0));
        assert!((b.specific_co2_nongreen - 60.0 / 18.0).abs() < 1e-12);

        let b = classify_green(&grid, &scenario(&[20.0], &[64.8]), &on, &plant).unwrap();
        assert_eq!(b.grid_green_hourly_kg, 0.0);
    }

    #[test]
    fn partial_import_is_charged_to_the_electrolyser() {
        let plant = PlantConfig::default();
        let r = report_from(one_hour(1.0, 0.25, 18.0), CostBreakdown::default());
        let b = classify_green(&r, &scenario(&[30.0], &[100.0]), &GreenRules::default(), &plant).unwrap();
        assert!((b.onsite_kg - 13.5).abs() < 1e-12);
        assert!((b.nongreen_kg - 4.5).abs() < 1e-12);
        assert!((b.total_kg() - 18.0).abs() < 1e-12);
    }

    fn point(alpha: f64, lcoh: f64, co2: f64) -> ParetoPoint {
        ParetoPoint { alpha, lcoh, specific_co2: co2, total_h2_kg: 1.0, c_e: 0.0, c_o: 0.0, co2_kg: co2 }
    }

    #[test]
    fn ratios() {
        let b = [point(0.0, 2.0, 2.0), point(1.0, 3.0, 0.0)];
        let d = [point(0.0, 2.5, 3.2), point(1.0, 3.0, 0.5)];
        let r = normalized_comparison(&d, &b).unwrap();
        assert!((r[0].co2_ratio.unwrap() - 1.6).abs() < 1e-12);
        assert_eq!(r[0].lcoh_ratio, Some(1.25));
        assert_eq!(r[1].co2_ratio, None);
        let same = normalized_comparison(&b[..1], &b[..1]).unwrap();
        assert_eq!(same[0].lcoh_ratio, Some(1.0));
        assert_eq!(normalized_comparison(&d, &b[..1]), Err(MetricsError::MismatchedAlphas(1.0)));
    }

    #[test]
    fn cumulative_totals() {
        let plant = PlantConfig::default();
        let n = 48;
        let hourly = DispatchResult {
            g4: vec![1.0; n],
            g5i: vec![0.0; n],
            g5e: vec![0.5; n],
            m: vec![18.0; n],
            ..DispatchResult::default()
        };
        let s = ScenarioData::new(
            NaiveDate::from_ymd_opt(2018, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap(),
            vec![0.0; n],
            vec![0.0; n],
            vec![10.0; n],
            vec![0.0; n],
        )
        .unwrap();
        let c = cumulative_series(&report_from(hourly, CostBreakdown::default()), &s, &plant);
        assert_eq!(c.h2_kg, vec![432.0, 864.0]);
        assert_eq!(c.net_revenue, vec![120.0, 240.0]);
    }
}
