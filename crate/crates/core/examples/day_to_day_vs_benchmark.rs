//! Day-to-day operation against the full-foresight benchmark for each
//! delivery period on four synthetic weeks.

use chrono::NaiveDate;
use h2plan::dispatch::PlantConfig;
use h2plan::planner::PeriodKind;
use h2plan::simulator::{ramp_violations, run_benchmark, run_day_to_day, DeliveryContract};
use h2plan::synthetic::{generate, SyntheticConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = generate(&SyntheticConfig::new(NaiveDate::from_ymd_opt(2018, 2, 1).unwrap(), 28, 21));
    let plant = PlantConfig::default();
    let alpha = 0.5;
    println!("period  d2d_cost  bench_cost  ratio  d2d_co2  bench_co2  met");
    for kind in [PeriodKind::Day, PeriodKind::Week, PeriodKind::Month] {
        let contract = DeliveryContract::default_for(kind, &plant);
        let d = run_day_to_day(&scenario, &plant, &contract, alpha)?;
        let b = run_benchmark(&scenario, &plant, &contract, alpha)?;
        assert!(ramp_violations(&d.hourly, &plant, 0.0).is_empty());
        println!(
            "{:<7} {:>9.1} {:>11.1} {:>6.3} {:>8.0} {:>10.0}  {}/{}",
            kind.name(),
            d.costs.c_alpha,
            b.costs.c_alpha,
            d.costs.c_alpha / b.costs.c_alpha,
            d.costs.co2_kg,
            b.costs.co2_kg,
            d.periods.iter().filter(|p| p.met).count(),
            d.periods.len()
        );
    }
    Ok(())
}
