//! Simulation runs over a whole scenario.
//!
//! `run_day_to_day` reproduces the daily operation loop: plan the next day
//! from the long-term mass, follow the plan, carry the electrolyser state and
//! the delivered mass forward. `run_benchmark` solves the same horizon in one
//! problem with full foresight, and `run_trading_only` values the plant as a
//! pure electricity seller.

use std::fmt;
use std::io::Write;

use chrono::{Datelike, Timelike};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dispatch::{
    build_dispatch, cost_components, extract_flows, solve_dispatch, CostBreakdown, DispatchError, DispatchResult, MassSpec,
    PeriodTarget, PlantConfig,
};
use crate::lp::{Direction, Status};
use crate::planner::{
    daily_plan_with, feasible_daily_mass_bounds, filter_mass, long_term_plan_with, ContractState, DailyPlan, PeriodKind,
    PlannerError, PlannerMemory, DAY_HOURS, FORECAST_HOURS,
};
use crate::timeseries::{DataError, ScenarioData, ScenarioSlice};

/// Tolerance on delivered mass per period, kg.
pub const DELIVERY_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeliveryContract {
    pub kind: PeriodKind,
    /// Mass due in every period, kg.
    pub target_kg: f64,
}

impl DeliveryContract {
    pub fn new(kind: PeriodKind, target_kg: f64) -> Self {
        Self { kind, target_kg }
    }

    /// Default target scaled by electrolyser capacity.
    pub fn default_for(kind: PeriodKind, plant: &PlantConfig) -> Self {
        Self { kind, target_kg: kind.default_target_per_mw() * plant.electrolyser_mw }
    }
}

/// Hours `[start, end)` of one delivery period.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Period {
    pub start: usize,
    pub end: usize,
}

/// Splits the scenario into delivery periods. Weeks count from the first
/// hour; months and years follow the calendar. The scenario has to start and
/// end on period boundaries.
pub fn delivery_periods(scenario: &ScenarioData, kind: PeriodKind) -> Result<Vec<Period>, SimError> {
    let n = scenario.n_hours();
    if scenario.start_time.hour() != 0 || n % DAY_HOURS != 0 {
        return Err(SimError::Horizon("scenario must cover whole calendar days".into()));
    }
    let starts_period = |h: usize| {
        let d = scenario.timestamp(h).date();
        match kind {
            PeriodKind::Day => true,
            PeriodKind::Week => h % (7 * DAY_HOURS) == 0,
            PeriodKind::Month => d.day() == 1,
            PeriodKind::Year => d.ordinal() == 1,
        }
    };
    if !starts_period(0) {
        return Err(SimError::Horizon(format!("scenario does not start on a {kind} boundary")));
    }
    let mut periods = Vec::new();
    let mut start = 0;
    for h in (DAY_HOURS..n).step_by(DAY_HOURS) {
        if starts_period(h) {
            periods.push(Period { start, end: h });
            start = h;
        }
    }
    let last_complete = match kind {
        PeriodKind::Day => true,
        PeriodKind::Week => (n - start) == 7 * DAY_HOURS,
        _ => starts_period(n),
    };
    if !last_complete {
        return Err(SimError::Horizon(format!(
            "last {kind} starting at hour {start} is incomplete; trim the scenario to whole periods"
        )));
    }
    periods.push(Period { start, end: n });
    Ok(periods)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Benchmark,
    DayToDay,
}

impl RunMode {
    pub fn name(self) -> &'static str {
        match self {
            RunMode::Benchmark => "benchmark",
            RunMode::DayToDay => "day2day",
        }
    }
}

impl fmt::Display for RunMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodRecord {
    pub start_hour: usize,
    pub end_hour: usize,
    pub target_kg: f64,
    pub produced_kg: f64,
    pub met: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetadata {
    pub mode: RunMode,
    pub alpha: f64,
    pub contract: DeliveryContract,
    /// SHA-256 of the plant configuration, contract, weight and mode.
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub hourly: DispatchResult,
    pub periods: Vec<PeriodRecord>,
    pub costs: CostBreakdown,
    pub total_h2_kg: f64,
    pub meta: RunMetadata,
}

impl SimulationReport {
    /// Electrolyser load factor after every hour.
    pub fn f4(&self) -> &[f64] {
        &self.hourly.f4
    }

    pub fn all_periods_met(&self) -> bool {
        self.periods.iter().all(|p| p.met)
    }

    /// Per-hour flows with prices, intensities and emissions.
    pub fn write_hourly_csv(&self, scenario: &ScenarioData, out: impl Write) -> Result<(), DataError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "hour", "timestamp", "g1", "g1c", "g2", "g2c", "g3dc", "g3ac", "g4", "gh2", "g5i", "g5e", "m", "f4", "price",
            "intensity", "import_mwh", "export_mwh", "co2_kg",
        ])?;
        let r = &self.hourly;
        for t in 0..r.n_hours() {
            let flows = [
                r.g1[t], r.g1c[t], r.g2[t], r.g2c[t], r.g3dc[t], r.g3ac[t], r.g4[t], r.gh2[t], r.g5i[t], r.g5e[t], r.m[t],
                r.f4[t], scenario.price[t], scenario.co2_intensity[t], r.g5i[t], r.g5e[t],
                r.g5i[t] * scenario.co2_intensity[t],
            ];
            let mut rec = vec![t.to_string(), scenario.timestamp(t).format("%Y-%m-%dT%H:%M:%SZ").to_string()];
            rec.extend(flows.iter().map(|v| format!("{v:.6}")));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// One row per delivery period.
    pub fn write_periods_csv(&self, out: impl Write) -> Result<(), DataError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["start_hour", "end_hour", "target_kg", "produced_kg", "met"])?;
        for p in &self.periods {
            w.write_record([
                p.start_hour.to_string(),
                p.end_hour.to_string(),
                format!("{:.6}", p.target_kg),
                format!("{:.6}", p.produced_kg),
                p.met.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("delivery contract breached on day {day}: {reason}")]
    ContractBreach { day: usize, reason: String },
    #[error("delivery targets exceed what the plant can produce")]
    Infeasible,
    #[error("invalid horizon: {0}")]
    Horizon(String),
    #[error(transparent)]
    Planner(#[from] PlannerError),
    #[error(transparent)]
    Dispatch(#[from] DispatchError),
    #[error(transparent)]
    Data(#[from] DataError),
}

pub fn config_hash(plant: &PlantConfig, contract: &DeliveryContract, alpha: f64, mode: RunMode) -> String {
    let text = format!("{plant:?}\n{contract:?}\nalpha={alpha:?}\nmode={mode}\n");
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn period_records(hourly: &DispatchResult, periods: &[Period], target: f64) -> Vec<PeriodRecord> {
    periods
        .iter()
        .map(|p| {
            let produced: f64 = hourly.m[p.start..p.end].iter().sum();
            PeriodRecord {
                start_hour: p.start,
                end_hour: p.end,
                target_kg: target,
                produced_kg: produced,
                met: produced >= target - DELIVERY_TOLERANCE,
            }
        })
        .collect()
}

fn report(
    scenario: &ScenarioData,
    plant: &PlantConfig,
    contract: &DeliveryContract,
    alpha: f64,
    mode: RunMode,
    hourly: DispatchResult,
    periods: &[Period],
) -> SimulationReport {
    let costs = cost_components(&hourly, &scenario.full(), plant, alpha);
    SimulationReport {
        periods: period_records(&hourly, periods, contract.target_kg),
        total_h2_kg: hourly.total_mass(),
        costs,
        meta: RunMetadata { mode, alpha, contract: *contract, config_hash: config_hash(plant, contract, alpha, mode) },
        hourly,
    }
}

/// Follows `plan.committed` on the actual data of the day, choosing the
/// cheapest split between on-site power, imports, exports and curtailment.
pub fn execute_day(
    plan: &DailyPlan,
    actual: &ScenarioSlice,
    plant: &PlantConfig,
    f4_init: f64,
    alpha: f64,
) -> Result<DispatchResult, PlannerError> {
    let spec = MassSpec::PlanFollow(plan.committed.clone());
    match solve_dispatch(actual, plant, f4_init, alpha, &spec) {
        Ok(r) => Ok(r),
        Err(DispatchError::NotOptimal(_)) => Err(PlannerError::PlanInfeasible { mass: plan.committed.iter().sum() }),
        Err(e) => Err(e.into()),
    }
}

/// Day-to-day operation with a perfect day-ahead forecast. The first day is
/// planned before the horizon starts, with the electrolyser off.
pub fn run_day_to_day(
    scenario: &ScenarioData,
    plant: &PlantConfig,
    contract: &DeliveryContract,
    alpha: f64,
) -> Result<SimulationReport, SimError> {
    let periods = delivery_periods(scenario, contract.kind)?;
    let n = scenario.n_hours();
    let mut hourly = DispatchResult::default();
    let mut memory = PlannerMemory::default();
    let mut f4 = 0.0;
    for (k, period) in periods.iter().enumerate() {
        let mut produced = 0.0;
        for h in (period.start..period.end).step_by(DAY_HOURS) {
            let day = h / DAY_HOURS;
            let state = ContractState {
                kind: contract.kind,
                target_kg: contract.target_kg,
                produced_kg: produced,
                remaining_hours: period.end - h,
                day_index: (h - period.start) / DAY_HOURS,
            };
            let long_term = match long_term_plan_with(scenario, &state, plant, alpha, f4, h, &mut memory) {
                Ok(m) => m,
                Err(PlannerError::WindowInfeasible { target, hours }) => {
                    return Err(SimError::ContractBreach {
                        day,
                        reason: format!("{target:.3} kg cannot be produced in the remaining {hours} hours"),
                    })
                }
                Err(e) => return Err(e.into()),
            };
            let m_hat = filter_mass(long_term.mass, feasible_daily_mass_bounds(plant, f4)?);
            // The end level only belongs with the mass it was planned for.
            let end_level = long_term.end_level.filter(|_| m_hat == long_term.mass);
            let slice = scenario.window(h, FORECAST_HOURS.min(n - h))?;
            let plan = daily_plan_with(&slice, plant, f4, alpha, m_hat, end_level)?;
            let actual = scenario.window(h, DAY_HOURS)?;
            let result = execute_day(&plan, &actual, plant, f4, alpha)?;
            f4 = result.f4[DAY_HOURS - 1].clamp(0.0, 1.0);
            produced += result.total_mass();
            hourly.append(&result);
        }
        if produced < contract.target_kg - DELIVERY_TOLERANCE {
            return Err(SimError::ContractBreach {
                day: period.end / DAY_HOURS - 1,
                reason: format!("period {k} delivered {produced:.3} of {:.3} kg", contract.target_kg),
            });
        }
    }
    Ok(report(scenario, plant, contract, alpha, RunMode::DayToDay, hourly, &periods))
}

/// Full-foresight operation: one problem over the whole horizon with a
/// minimum delivery per period.
pub fn run_benchmark(
    scenario: &ScenarioData,
    plant: &PlantConfig,
    contract: &DeliveryContract,
    alpha: f64,
) -> Result<SimulationReport, SimError> {
    let periods = delivery_periods(scenario, contract.kind)?;
    let targets =
        periods.iter().map(|p| PeriodTarget { start: p.start, end: p.end, mass: contract.target_kg }).collect();
    let slice = scenario.full();
    let (p, v) = build_dispatch(&slice, plant, 0.0, alpha, &MassSpec::PeriodTargets(targets))?;
    let sol = p.solve();
    if sol.status == Status::Infeasible {
        return Err(SimError::Infeasible);
    }
    let hourly = extract_flows(&sol, &v, &slice, plant)?;
    Ok(report(scenario, plant, contract, alpha, RunMode::Benchmark, hourly, &periods))
}

/// Profit of selling all renewable output with the electrolyser idle, €.
pub fn run_trading_only(scenario: &ScenarioData, plant: &PlantConfig) -> Result<f64, SimError> {
    let slice = scenario.full();
    let (mut p, v) = build_dispatch(&slice, plant, 0.0, 0.0, &MassSpec::Free)?;
    for &g4 in &v.g4 {
        p.set_bounds(g4, 0.0, 0.0).map_err(DispatchError::from)?;
    }
    debug_assert_eq!(p.direction(), Direction::Minimize);
    let sol = p.solve();
    let flows = extract_flows(&sol, &v, &slice, plant)?;
    Ok(-cost_components(&flows, &slice, plant, 0.0).c_e)
}

/// Hours whose electrolyser power change breaks the ramp limits, checked
/// from the flows alone.
pub fn ramp_violations(hourly: &DispatchResult, plant: &PlantConfig, f4_init: f64) -> Vec<usize> {
    let tol = 1e-7 * plant.electrolyser_mw.max(1.0);
    let up = plant.ramp_up_limit();
    let down = plant.ramp_down_limit();
    let mut prev = f4_init * plant.electrolyser_mw;
    let mut bad = Vec::new();
    for (t, &g4) in hourly.g4.iter().enumerate() {
        if g4 - prev > up + tol || prev - g4 > down + tol {
            bad.push(t);
        }
        prev = g4;
    }
    bad
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::daily_plan;
    use crate::synthetic::{generate, SyntheticConfig};
    use chrono::NaiveDate;

    fn scenario(start: (i32, u32, u32), days: usize, seed: u64) -> ScenarioData {
        let (y, m, d) = start;
        generate(&SyntheticConfig::new(NaiveDate::from_ymd_opt(y, m, d).unwrap(), days, seed))
    }

    fn flat(days: usize, cf_wind: f64, price: f64) -> ScenarioData {
        let n = days * 24;
        ScenarioData::new(
            NaiveDate::from_ymd_opt(2018, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap(),
            vec![0.0; n],
            vec![cf_wind; n],
            vec![price; n],
            vec![100.0; n],
        )
        .unwrap()
    }

    #[test]
    fn calendar_periods() {
        let s = scenario((2018, 1, 1), 365, 1);
        assert_eq!(delivery_periods(&s, PeriodKind::Day).unwrap().len(), 365);
        assert_eq!(delivery_periods(&s, PeriodKind::Month).unwrap().len(), 12);
        assert_eq!(delivery_periods(&s, PeriodKind::Year).unwrap(), vec![Period { start: 0, end: 8760 }]);
        assert!(matches!(delivery_periods(&s, PeriodKind::Week), Err(SimError::Horizon(_))));
        let feb = delivery_periods(&scenario((2018, 2, 1), 28, 1), PeriodKind::Month).unwrap();
        assert_eq!(feb, vec![Period { start: 0, end: 672 }]);
        assert!(delivery_periods(&scenario((2018, 2, 2), 27, 1), PeriodKind::Month).is_err());
        assert_eq!(delivery_periods(&scenario((2018, 3, 5), 364, 1), PeriodKind::Week).unwrap().len(), 52);
    }

    #[test]
    fn daily_contract_is_met_exactly() {
        let s = scenario((2018, 3, 1), 7, 5);
        let plant = PlantConfig::default();
        let c = DeliveryContract::default_for(PeriodKind::Day, &plant);
        let r = run_day_to_day(&s, &plant, &c, 0.0).unwrap();
        assert_eq!(r.periods.len(), 7);
        for p in &r.periods {
            assert!((p.produced_kg - 296.0).abs() < 1e-3, "{p:?}");
        }
        assert!((r.total_h2_kg - r.hourly.m.iter().sum::<f64>()).abs() < 1e-9);
        assert!(ramp_violations(&r.hourly, &plant, 0.0).is_empty());

        let b = run_benchmark(&s, &plant, &c, 0.0).unwrap();
        assert!(b.all_periods_met());
        assert!(b.costs.c_alpha <= r.costs.c_alpha + 1e-6);
    }

    #[test]
    fn zero_target_means_no_flows() {
        let s = flat(3, 0.0, 40.0);
        let plant = PlantConfig::default();
        let r = run_day_to_day(&s, &plant, &DeliveryContract::new(PeriodKind::Day, 0.0), 0.0).unwrap();
        assert!(r.hourly.g4.iter().chain(&r.hourly.g5i).all(|&v| v.abs() < 1e-9));
        assert!(r.costs.c_e.abs() < 1e-9);
    }

    #[test]
    fn weekly_weight_lowers_emissions() {
        let s = scenario((2018, 4, 2), 14, 9);
        let plant = PlantConfig::default();
        let c = DeliveryContract::default_for(PeriodKind::Week, &plant);
        let cheap = run_day_to_day(&s, &plant, &c, 0.0).unwrap();
        let clean = run_day_to_day(&s, &plant, &c, 1.0).unwrap();
        assert!(cheap.all_periods_met() && clean.all_periods_met());
        assert!(clean.costs.co2_kg <= cheap.costs.co2_kg + 1e-6);
    }

    #[test]
    fn impossible_targets() {
        let s = flat(2, 0.0, 40.0);
        let plant = PlantConfig::default();
        let c = DeliveryContract::new(PeriodKind::Day, 1000.0);
        assert!(matches!(run_benchmark(&s, &plant, &c, 0.0), Err(SimError::Infeasible)));
        assert!(matches!(run_day_to_day(&s, &plant, &c, 0.0), Err(SimError::ContractBreach { day: 0, .. })));
    }

    #[test]
    fn trading_only_profit() {
        let plant = PlantConfig { wind_mw: 1.0, solar_mw: 0.0, ..PlantConfig::default() };
        let mut s = flat(1, 0.0, 50.0);
        s.cf_wind[..10].fill(1.0);
        assert!((run_trading_only(&s, &plant).unwrap() - 500.0).abs() < 1e-6);

        let plant = PlantConfig { wind_mw: 0.0, solar_mw: 1.0, inverter_mw: 1.0, eta_inverter: 0.9, ..PlantConfig::default() };
        let mut s = flat(1, 0.0, 100.0);
        s.cf_solar[12] = 1.0;
        assert!((run_trading_only(&s, &plant).unwrap() - 90.0).abs() < 1e-6);

        assert!(run_trading_only(&flat(1, 0.0, 30.0), &plant).unwrap().abs() < 1e-9);
    }

    #[test]
    fn execution_follows_the_plan() {
        let s = scenario((2018, 6, 1), 3, 2);
        let plant = PlantConfig::default();
        let plan = daily_plan(&s.window(0, 34).unwrap(), &plant, 0.0, 0.3, 250.0).unwrap();
        let r = execute_day(&plan, &s.window(0, 24).unwrap(), &plant, 0.0, 0.3).unwrap();
        for t in 0..24 {
            assert!((r.m[t] - plan.expected.m[t]).abs() < 1e-6);
            assert!((r.g5i[t] - plan.expected.g5i[t]).abs() < 1e-6);
        }

        let dark = flat(1, 0.0, 40.0);
        let full = DailyPlan { committed: vec![18.0; 24], advisory: vec![], f4_end: 1.0, expected: DispatchResult::default() };
        let r = execute_day(&full, &dark.full(), &plant, 1.0, 0.0).unwrap();
        assert!(r.g5i.iter().all(|&g| (g - 1.0).abs() < 1e-9));
    }

    #[test]
    fn hash_depends_on_inputs() {
        let plant = PlantConfig::default();
        let c = DeliveryContract::default_for(PeriodKind::Day, &plant);
        let a = config_hash(&plant, &c, 0.5, RunMode::Benchmark);
        assert_eq!(a.len(), 64);
        assert_eq!(a, config_hash(&plant, &c, 0.5, RunMode::Benchmark));
        assert_ne!(a, config_hash(&plant, &c, 0.5, RunMode::DayToDay));
    }
}
