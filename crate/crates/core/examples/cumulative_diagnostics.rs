//! Running hydrogen output and net electricity revenue, day by day, for a
//! yearly contract.

use chrono::NaiveDate;
use h2plan::dispatch::PlantConfig;
use h2plan::metrics::{cumulative_series, levelised_cost, specific_emissions};
use h2plan::planner::PeriodKind;
use h2plan::simulator::{run_benchmark, run_trading_only, DeliveryContract};
use h2plan::synthetic::{generate, SyntheticConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = generate(&SyntheticConfig::new(NaiveDate::from_ymd_opt(2018, 1, 1).unwrap(), 365, 12));
    let plant = PlantConfig::default();
    let contract = DeliveryContract::default_for(PeriodKind::Year, &plant);
    let report = run_benchmark(&scenario, &plant, &contract, 0.0)?;
    let profit = run_trading_only(&scenario, &plant)?;
    let c = cumulative_series(&report, &scenario, &plant);
    println!("day   h2_kg      net_revenue_eur");
    for d in (29..c.h2_kg.len()).step_by(30).chain([c.h2_kg.len() - 1]) {
        println!("{d:>3} {:>9.0} {:>14.0}", c.h2_kg[d], c.net_revenue[d]);
    }
    println!("trading only would earn {profit:.0} EUR");
    println!("LCOH {:.3} EUR/kg, {:.3} kg CO2/kg", levelised_cost(&report, profit)?, specific_emissions(&report)?);
    Ok(())
}
