//! The long-term planner through one month: each day it re-solves the rest
//! of the month and commits to the first day of its answer.

use chrono::NaiveDate;
use h2plan::dispatch::{solve_dispatch, MassSpec, PlantConfig};
use h2plan::planner::{long_term_mass_with, ContractState, PeriodKind, PlannerMemory};
use h2plan::synthetic::{generate, SyntheticConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Two months so that the second one has history behind it.
    let scenario = generate(&SyntheticConfig::new(NaiveDate::from_ymd_opt(2018, 1, 1).unwrap(), 59, 5));
    let plant = PlantConfig::default();
    let (start, end) = (31 * 24, 59 * 24);
    let target = PeriodKind::Month.default_target_per_mw();
    let mut memory = PlannerMemory::default();
    let (mut produced, mut f4) = (0.0, 0.0);
    println!("day  remaining_h  remaining_kg  planned_kg");
    for h in (start..end).step_by(24) {
        let state = ContractState {
            kind: PeriodKind::Month,
            target_kg: target,
            produced_kg: produced,
            remaining_hours: end - h,
            day_index: (h - start) / 24,
        };
        let m = long_term_mass_with(&scenario, &state, &plant, 0.0, f4, h, &mut memory)?;
        println!("{:>3} {:>12} {:>13.1} {:>11.1}", state.day_index, state.remaining_hours, state.remaining_target(), m);
        // Deliver the planned mass at least cost.
        let day = solve_dispatch(&scenario.window(h, 24)?, &plant, f4, 0.0, &MassSpec::WindowTotal {
            mass: m,
            sense: h2plan::dispatch::MassSense::Eq,
        })?;
        produced += day.total_mass();
        f4 = day.f4[23];
    }
    println!("delivered {produced:.3} of {target} kg");
    Ok(())
}
