//! How much of the hydrogen counts as green under the price rule and under
//! hourly intensity matching.

use chrono::NaiveDate;
use h2plan::dispatch::PlantConfig;
use h2plan::metrics::{classify_green, GreenRules};
use h2plan::planner::PeriodKind;
use h2plan::simulator::{run_benchmark, DeliveryContract};
use h2plan::synthetic::{generate, SyntheticConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = SyntheticConfig::new(NaiveDate::from_ymd_opt(2018, 5, 1).unwrap(), 31, 8);
    cfg.mean_price = 30.0;
    cfg.mean_intensity = 90.0;
    let scenario = generate(&cfg);
    let plant = PlantConfig::default();
    let rules = GreenRules { hourly_intensity_mode: true, ..GreenRules::default() };
    let contract = DeliveryContract::default_for(PeriodKind::Month, &plant);

    for alpha in [0.0, 1.0] {
        let r = run_benchmark(&scenario, &plant, &contract, alpha)?;
        let g = classify_green(&r, &scenario, &rules, &plant)?;
        let t = g.total_kg();
        println!("alpha = {alpha}");
        println!("  on-site renewable    {:>8.0} kg ({:.1} %)", g.onsite_kg, 100.0 * g.onsite_kg / t);
        println!("  cheap grid power     {:>8.0} kg ({:.1} %)", g.grid_green_kg, 100.0 * g.grid_green_kg / t);
        println!("  non-green            {:>8.0} kg ({:.1} %)", g.nongreen_kg, 100.0 * g.nongreen_kg / t);
        println!("  low-carbon grid      {:>8.0} kg (hourly rule)", g.grid_green_hourly_kg);
        println!("  non-green emissions  {:.2} kg CO2/kg", g.specific_co2_nongreen);
        println!("  green share {:.1} %, above {:.0} %: {}", 100.0 * g.green_share(), 100.0 * rules.re_share_threshold,
            g.green_share() > rules.re_share_threshold);
    }
    Ok(())
}
