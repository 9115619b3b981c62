//! Delivery planning.
//!
//! Every day the long-term planner solves the remaining part of the delivery
//! period over a window that shrinks by one day per day: true data for the
//! next 34 hours followed by recent history standing in for the unknown
//! future. The mass it assigns to the next day is clamped into what the
//! electrolyser can physically do, and the daily planner turns that mass into
//! an hourly plan over a 34-hour horizon (24 committed hours plus 10 advisory
//! hours that keep the end-of-day state sensible).

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::dispatch::{
    build_dispatch, extract_flows, transfer_basis, DispatchError, DispatchResult, MassSense, MassSpec, PlantConfig,
};
use crate::lp::{Basis, Direction, LpProblem, Sense, Simplex, Status, Var};
use crate::timeseries::{build_padded_planning_window, DataError, ScenarioData, ScenarioSlice, SliceOrigin};

pub const FORECAST_HOURS: usize = 34;
pub const DAY_HOURS: usize = 24;

/// Shortfall against a remaining target, in kg, that the long-term planner
/// accepts instead of declaring the window infeasible.
pub const SHORTFALL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PeriodKind {
    Day,
    Week,
    Month,
    Year,
}

impl PeriodKind {
    pub const ALL: [PeriodKind; 4] = [PeriodKind::Day, PeriodKind::Week, PeriodKind::Month, PeriodKind::Year];

    /// Default delivery target per MW of electrolyser, kg.
    pub fn default_target_per_mw(self) -> f64 {
        match self {
            PeriodKind::Day => 296.0,
            PeriodKind::Week => 2071.0,
            PeriodKind::Month => 8877.0,
            PeriodKind::Year => 108_000.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PeriodKind::Day => "day",
            PeriodKind::Week => "week",
            PeriodKind::Month => "month",
            PeriodKind::Year => "year",
        }
    }
}

impl fmt::Display for PeriodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PeriodKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "day" | "daily" => Ok(PeriodKind::Day),
            "week" | "weekly" => Ok(PeriodKind::Week),
            "month" | "monthly" => Ok(PeriodKind::Month),
            "year" | "yearly" => Ok(PeriodKind::Year),
            other => Err(format!("unknown delivery period '{other}' (expected day, week, month or year)")),
        }
    }
}

/// Progress through the current delivery period, as seen when planning the
/// next day.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractState {
    pub kind: PeriodKind,
    pub target_kg: f64,
    pub produced_kg: f64,
    /// Hours from the start of the day being planned to the end of the period.
    pub remaining_hours: usize,
    pub day_index: usize,
}

impl ContractState {
    pub fn remaining_target(&self) -> f64 {
        (self.target_kg - self.produced_kg).max(0.0)
    }
}

#[derive(Debug, Error)]
pub enum PlannerError {
    #[error("remaining target {target} kg cannot be produced in the {hours}-hour planning window")]
    WindowInfeasible { target: f64, hours: usize },
    #[error("remaining hours {0} is not a positive multiple of 24")]
    BadRemainingHours(usize),
    #[error("no feasible daily plan delivers {mass} kg")]
    PlanInfeasible { mass: f64 },
    #[error("auxiliary bound problem ended with status {0:?}")]
    BoundsFailed(Status),
    #[error(transparent)]
    Dispatch(#[from] DispatchError),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Smallest and largest hydrogen mass the electrolyser can produce over one
/// day starting from load factor `f4_init`, ramp limits included. The grid
/// connection is assumed large enough to feed the electrolyser on its own.
pub fn feasible_daily_mass_bounds(plant: &PlantConfig, f4_init: f64) -> Result<(f64, f64), PlannerError> {
    let mut aux = plant.clone();
    aux.grid_mw = aux.grid_mw.max(aux.electrolyser_mw);
    let (mut p, v) = build_dispatch(&quiet_slice(DAY_HOURS), &aux, f4_init, 0.0, &MassSpec::Free)?;
    let total: Vec<(Var, f64)> = v.m.iter().map(|&m| (m, 1.0)).collect();
    let lo = optimum(&mut p, &total, Direction::Minimize)?;
    let hi = optimum(&mut p, &total, Direction::Maximize)?;
    Ok((lo, hi))
}

fn optimum(p: &mut LpProblem, terms: &[(Var, f64)], direction: Direction) -> Result<f64, PlannerError> {
    p.set_objective(terms, direction).map_err(DispatchError::from)?;
    let sol = p.solve();
    if sol.status != Status::Optimal {
        return Err(PlannerError::BoundsFailed(sol.status));
    }
    Ok(sol.objective_value)
}

/// No renewables, zero prices and intensities.
fn quiet_slice(hours: usize) -> ScenarioSlice {
    ScenarioSlice {
        origin: SliceOrigin::Synthetic,
        cf_solar: vec![0.0; hours],
        cf_wind: vec![0.0; hours],
        price: vec![0.0; hours],
        co2_intensity: vec![0.0; hours],
    }
}

pub fn filter_mass(m_star: f64, bounds: (f64, f64)) -> f64 {
    m_star.clamp(bounds.0, bounds.1)
}

/// Basis of the previous long-term window, reused as a warm start.
#[derive(Debug, Clone, Default)]
pub struct PlannerMemory {
    last: Option<(Basis, Vec<usize>)>,
}

impl PlannerMemory {
    fn hint(&self, target: &LpProblem, sources: &[usize]) -> Option<Basis> {
        let (basis, old_sources) = self.last.as_ref()?;
        let lo = *old_sources.iter().min()?;
        let hi = *old_sources.iter().max()?;
        let mut where_old = vec![usize::MAX; hi - lo + 1];
        for (pos, &h) in old_sources.iter().enumerate() {
            where_old[h - lo] = pos;
        }
        let lookup = |t: usize| {
            let h = sources[t];
            (lo..=hi).contains(&h).then(|| where_old[h - lo]).filter(|&p| p != usize::MAX)
        };
        Some(transfer_basis(basis, old_sources.len(), target, sources.len(), lookup))
    }
}

/// Mass the long-term planner assigns to the day starting at hour
/// `next_day_start`.
pub fn long_term_mass(
    scenario: &ScenarioData,
    state: &ContractState,
    plant: &PlantConfig,
    alpha: f64,
    f4_init: f64,
    next_day_start: usize,
) -> Result<f64, PlannerError> {
    long_term_mass_with(scenario, state, plant, alpha, f4_init, next_day_start, &mut PlannerMemory::default())
}

/// [`long_term_mass`] that warm-starts from, and updates, `memory`.
pub fn long_term_mass_with(
    scenario: &ScenarioData,
    state: &ContractState,
    plant: &PlantConfig,
    alpha: f64,
    f4_init: f64,
    next_day_start: usize,
    memory: &mut PlannerMemory,
) -> Result<f64, PlannerError> {
    long_term_plan_with(scenario, state, plant, alpha, f4_init, next_day_start, memory).map(|p| p.mass)
}

/// First day of the long-term solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LongTermPlan {
    pub mass: f64,
    /// Electrolyser load factor the solution reaches at the end of the day;
    /// `None` when no window was solved.
    pub end_level: Option<f64>,
}

pub fn long_term_plan_with(
    scenario: &ScenarioData,
    state: &ContractState,
    plant: &PlantConfig,
    alpha: f64,
    f4_init: f64,
    next_day_start: usize,
    memory: &mut PlannerMemory,
) -> Result<LongTermPlan, PlannerError> {
    let remaining = state.remaining_hours;
    if remaining == 0 || remaining % DAY_HOURS != 0 {
        return Err(PlannerError::BadRemainingHours(remaining));
    }
    let target = state.remaining_target();
    if state.kind == PeriodKind::Day || remaining == DAY_HOURS {
        return Ok(LongTermPlan { mass: target, end_level: None });
    }
    let (window, sources) = if remaining <= 2 * DAY_HOURS {
        (scenario.window(next_day_start, remaining)?, (next_day_start..next_day_start + remaining).collect())
    } else {
        build_padded_planning_window(scenario, next_day_start, remaining, FORECAST_HOURS)?
    };
    let hours = window.n_hours();

    let solver = Simplex::default();
    let solve = |mass: f64, memory: &PlannerMemory| -> Result<_, PlannerError> {
        let spec = MassSpec::WindowTotal { mass, sense: MassSense::Eq };
        let (p, v) = build_dispatch(&window, plant, f4_init, alpha, &spec)?;
        let sol = match memory.hint(&p, &sources) {
            Some(h) => solver.solve_from(&p, &h),
            None => solver.solve(&p),
        };
        Ok((sol.status == Status::Optimal).then_some((sol, v)))
    };
    let mut outcome = solve(target, memory)?;
    if outcome.is_none() {
        // A target at the very edge of capacity can miss by rounding alone.
        let most = window_capacity(&window, plant, f4_init)?;
        if most >= target - SHORTFALL_TOLERANCE {
            outcome = solve(most - 0.1 * SHORTFALL_TOLERANCE, memory)?;
        }
    }
    let Some((sol, v)) = outcome else {
        return Err(PlannerError::WindowInfeasible { target, hours });
    };
    let flows = extract_flows(&sol, &v, &window, plant)?;
    memory.last = Some((sol.basis, sources));
    Ok(LongTermPlan { mass: flows.m[..DAY_HOURS].iter().sum(), end_level: Some(flows.f4[DAY_HOURS - 1]) })
}

/// Largest mass the electrolyser can produce over `window`.
fn window_capacity(window: &ScenarioSlice, plant: &PlantConfig, f4_init: f64) -> Result<f64, PlannerError> {
    let (mut p, v) = build_dispatch(window, plant, f4_init, 0.0, &MassSpec::Free)?;
    let total: Vec<(Var, f64)> = v.m.iter().map(|&m| (m, 1.0)).collect();
    optimum(&mut p, &total, Direction::Maximize)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DailyPlan {
    /// Hourly masses for the planned day, kg.
    pub committed: Vec<f64>,
    /// Hourly masses for the hours after the planned day, kg.
    pub advisory: Vec<f64>,
    /// Electrolyser load factor at the end of the planned day.
    pub f4_end: f64,
    /// Flows the planner expects over the whole horizon.
    pub expected: DispatchResult,
}

/// Hourly plan delivering `m_hat` over the first 24 hours of `slice`. The
/// hours after that receive the same hourly rate where the ramp limits allow.
pub fn daily_plan(
    slice: &ScenarioSlice,
    plant: &PlantConfig,
    f4_init: f64,
    alpha: f64,
    m_hat: f64,
) -> Result<DailyPlan, PlannerError> {
    daily_plan_with(slice, plant, f4_init, alpha, m_hat, None)
}

/// [`daily_plan`] that also keeps the load factor at the end of the day at
/// or above `min_end_level`, so the days after can still produce what the
/// long-term plan counted on.
pub fn daily_plan_with(
    slice: &ScenarioSlice,
    plant: &PlantConfig,
    f4_init: f64,
    alpha: f64,
    m_hat: f64,
    min_end_level: Option<f64>,
) -> Result<DailyPlan, PlannerError> {
    let n = slice.n_hours();
    let day = n.min(DAY_HOURS);
    let tail = n - day;
    let advisory = if tail == 0 {
        0.0
    } else {
        let (lo, hi) = advisory_bounds(slice, plant, f4_init, m_hat, min_end_level)?;
        (tail as f64 / DAY_HOURS as f64 * m_hat).clamp(lo, hi)
    };
    let spec = MassSpec::DailySum { committed: m_hat, advisory };
    let (mut p, v) = build_dispatch(slice, plant, f4_init, alpha, &spec)?;
    hold_end_level(&mut p, &v.g4[day - 1], plant, min_end_level)?;
    let sol = p.solve();
    if sol.status != Status::Optimal {
        return Err(PlannerError::PlanInfeasible { mass: m_hat });
    }
    let expected = extract_flows(&sol, &v, slice, plant)?;
    Ok(DailyPlan {
        committed: expected.m[..day].iter().map(|&m| m.max(0.0)).collect(),
        advisory: expected.m[day..].to_vec(),
        f4_end: expected.f4[day - 1].clamp(0.0, 1.0),
        expected,
    })
}

/// Range of mass the hours after the first day can carry once the first day
/// delivers exactly `m_hat`.
fn advisory_bounds(
    slice: &ScenarioSlice,
    plant: &PlantConfig,
    f4_init: f64,
    m_hat: f64,
    min_end_level: Option<f64>,
) -> Result<(f64, f64), PlannerError> {
    let (mut p, v) = build_dispatch(slice, plant, f4_init, 0.0, &MassSpec::Free)?;
    hold_end_level(&mut p, &v.g4[DAY_HOURS - 1], plant, min_end_level)?;
    let first: Vec<(Var, f64)> = v.m[..DAY_HOURS].iter().map(|&m| (m, 1.0)).collect();
    p.add_constraint(&first, Sense::Eq, m_hat).map_err(DispatchError::from)?;
    let rest: Vec<(Var, f64)> = v.m[DAY_HOURS..].iter().map(|&m| (m, 1.0)).collect();
    let bound = |p: &mut LpProblem, d| match optimum(p, &rest, d) {
        Err(PlannerError::BoundsFailed(Status::Infeasible)) => Err(PlannerError::PlanInfeasible { mass: m_hat }),
        other => other,
    };
    let lo = bound(&mut p, Direction::Minimize)?;
    let hi = bound(&mut p, Direction::Maximize)?;
    Ok((lo, hi.max(lo)))
}

fn hold_end_level(p: &mut LpProblem, g4: &Var, plant: &PlantConfig, level: Option<f64>) -> Result<(), PlannerError> {
    if let Some(level) = level {
        // Small slack so a level copied from another solve stays reachable.
        let floor = (level * plant.electrolyser_mw - 1e-9).max(0.0);
        p.add_constraint(&[(*g4, 1.0)], Sense::Ge, floor).map_err(DispatchError::from)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn flat_scenario(days: usize, price: impl Fn(usize) -> f64) -> ScenarioData {
        let n = days * 24;
        ScenarioData::new(
            NaiveDate::from_ymd_opt(2018, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap(),
            vec![0.0; n],
            vec![0.0; n],
            (0..n).map(price).collect(),
            vec![100.0; n],
        )
        .unwrap()
    }

    #[test]
    fn daily_bounds_from_full_and_cold_start() {
        let plant = PlantConfig::default();
        let (lo, hi) = feasible_daily_mass_bounds(&plant, 1.0).unwrap();
        assert!(lo.abs() < 1e-9);
        assert!((hi - 432.0).abs() < 1e-9);
        let (lo, hi) = feasible_daily_mass_bounds(&plant, 0.0).unwrap();
        assert!(lo.abs() < 1e-9);
        assert!((hi - 423.0).abs() < 1e-9);
    }

    #[test]
    fn filter_clamps() {
        assert_eq!(filter_mass(500.0, (0.0, 432.0)), 432.0);
        assert_eq!(filter_mass(296.0, (0.0, 432.0)), 296.0);
        assert_eq!(filter_mass(-5.0, (0.0, 432.0)), 0.0);
    }

    #[test]
    fn remainder_rules() {
        let s = flat_scenario(14, |_| 50.0);
        let plant = PlantConfig::default();
        let daily = ContractState { kind: PeriodKind::Day, target_kg: 296.0, produced_kg: 0.0, remaining_hours: 24, day_index: 0 };
        assert_eq!(long_term_mass(&s, &daily, &plant, 0.0, 0.0, 48).unwrap(), 296.0);
        let weekly =
            ContractState { kind: PeriodKind::Week, target_kg: 2071.0, produced_kg: 1800.0, remaining_hours: 24, day_index: 6 };
        assert_eq!(long_term_mass(&s, &weekly, &plant, 0.0, 0.0, 144).unwrap(), 271.0);
    }

    #[test]
    fn window_front_loads_cheap_day() {
        // Day 7 (the first day of the second week) is cheap, the rest expensive.
        let s = flat_scenario(21, |t| if (168..192).contains(&t) { 5.0 } else { 100.0 });
        let plant = PlantConfig::default();
        let state =
            ContractState { kind: PeriodKind::Week, target_kg: 2071.0, produced_kg: 0.0, remaining_hours: 168, day_index: 0 };
        let m = long_term_mass(&s, &state, &plant, 0.0, 0.0, 168).unwrap();
        let (_, hi) = feasible_daily_mass_bounds(&plant, 0.0).unwrap();
        assert!((m - hi.min(2071.0)).abs() < 1e-6, "got {m}");
    }

    #[test]
    fn impossible_window_is_reported() {
        let s = flat_scenario(14, |_| 50.0);
        let plant = PlantConfig::default();
        let state =
            ContractState { kind: PeriodKind::Week, target_kg: 5000.0, produced_kg: 0.0, remaining_hours: 72, day_index: 4 };
        assert!(matches!(
            long_term_mass(&s, &state, &plant, 0.0, 0.0, 7 * 24),
            Err(PlannerError::WindowInfeasible { .. })
        ));
    }

    #[test]
    fn daily_plan_shapes() {
        let plant = PlantConfig::default();
        let s = flat_scenario(3, |t| if t % 24 < 12 { 100.0 } else { 5.0 });
        let slice = s.window(0, 34).unwrap();

        let zero = daily_plan(&slice, &plant, 0.0, 0.0, 0.0).unwrap();
        assert!(zero.committed.iter().all(|&m| m.abs() < 1e-9));
        assert!(zero.f4_end.abs() < 1e-9);

        let full = daily_plan(&slice, &plant, 1.0, 0.0, 432.0).unwrap();
        assert!(full.committed.iter().all(|&m| (m - 18.0).abs() < 1e-6));

        let half = daily_plan(&s.window(0, 24).unwrap(), &plant, 0.0, 0.0, 216.0).unwrap();
        let sum: f64 = half.committed.iter().sum();
        assert!((sum - 216.0).abs() < 1e-6);
        // Ramping up at half load per hour leaves 4.5 kg in hour 11, the
        // cheapest way to reach full load by hour 13.
        let cheap: f64 = half.committed[12..].iter().sum();
        assert!((cheap - 211.5).abs() < 1e-6, "cheap hours carry {cheap}");
        assert!(half.committed[13..].iter().all(|&m| (m - 18.0).abs() < 1e-6));
    }

    #[test]
    fn advisory_mass_follows_daily_rate() {
        let plant = PlantConfig::default();
        let s = flat_scenario(3, |t| 20.0 + (t % 24) as f64);
        let plan = daily_plan(&s.window(0, 34).unwrap(), &plant, 0.0, 0.0, 240.0).unwrap();
        assert_eq!(plan.advisory.len(), 10);
        let adv: f64 = plan.advisory.iter().sum();
        assert!((adv - 100.0).abs() < 1e-6);
    }
}
