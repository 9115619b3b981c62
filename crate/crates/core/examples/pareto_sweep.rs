//! Cost against emissions as the weight moves from cost to CO2, for the
//! benchmark and for day-to-day operation. Honours `H2PLAN_THREADS`.

use chrono::NaiveDate;
use h2plan::dispatch::PlantConfig;
use h2plan::metrics::{normalized_comparison, pareto_sweep, write_pareto_csv};
use h2plan::planner::PeriodKind;
use h2plan::simulator::{DeliveryContract, RunMode};
use h2plan::synthetic::{generate, SyntheticConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = generate(&SyntheticConfig::new(NaiveDate::from_ymd_opt(2018, 4, 2).unwrap(), 14, 4));
    let plant = PlantConfig::default();
    let contract = DeliveryContract::default_for(PeriodKind::Week, &plant);
    let alphas: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();

    let bench = pareto_sweep(&scenario, &plant, &contract, &alphas, RunMode::Benchmark)?;
    let d2d = pareto_sweep(&scenario, &plant, &contract, &alphas, RunMode::DayToDay)?;
    write_pareto_csv(&bench, std::io::stdout())?;

    println!("\nalpha  lcoh_ratio  co2_ratio");
    for r in normalized_comparison(&d2d, &bench)? {
        let show = |v: Option<f64>| v.map_or("undefined".to_string(), |v| format!("{v:.3}"));
        println!("{:>5.1} {:>11} {:>10}", r.alpha, show(r.lcoh_ratio), show(r.co2_ratio));
    }
    Ok(())
}
