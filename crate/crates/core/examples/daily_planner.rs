//! Feasible daily mass range, filtering and the 34-hour daily plan.

use chrono::NaiveDate;
use h2plan::dispatch::PlantConfig;
use h2plan::planner::{daily_plan, feasible_daily_mass_bounds, filter_mass};
use h2plan::synthetic::{generate, SyntheticConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let plant = PlantConfig::default();
    for f4 in [0.0, 0.5, 1.0] {
        let (lo, hi) = feasible_daily_mass_bounds(&plant, f4)?;
        println!("starting at load {f4}: {lo:.1} to {hi:.1} kg per day");
    }

    let scenario = generate(&SyntheticConfig::new(NaiveDate::from_ymd_opt(2018, 3, 10).unwrap(), 3, 11));
    let slice = scenario.window(0, 34)?;
    let wanted = 500.0;
    let m_hat = filter_mass(wanted, feasible_daily_mass_bounds(&plant, 0.0)?);
    println!("\nlong-term planner asks {wanted} kg, filtered to {m_hat:.1} kg");

    let plan = daily_plan(&slice, &plant, 0.0, 0.5, m_hat)?;
    println!("committed: {}", fmt(&plan.committed));
    println!("advisory:  {}", fmt(&plan.advisory));
    println!("load at end of day {:.3}", plan.f4_end);
    Ok(())
}

fn fmt(v: &[f64]) -> String {
    v.iter().map(|m| format!("{m:.1}")).collect::<Vec<_>>().join(" ")
}
