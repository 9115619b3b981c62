//! One day of plant dispatch with a fixed daily hydrogen mass.

use chrono::NaiveDate;
use h2plan::dispatch::{cost_components, solve_dispatch, MassSpec, PlantConfig};
use h2plan::synthetic::{generate, SyntheticConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = generate(&SyntheticConfig::new(NaiveDate::from_ymd_opt(2018, 6, 1).unwrap(), 1, 3));
    let slice = scenario.full();
    let plant = PlantConfig::default();
    println!("{:.1} kg per MWh, {:.1} kg per full-load hour", plant.kg_per_mwh(), plant.max_step_mass());

    for alpha in [0.0, 1.0] {
        let r = solve_dispatch(&slice, &plant, 0.0, alpha, &MassSpec::WindowTotal {
            mass: 296.0,
            sense: h2plan::dispatch::MassSense::Eq,
        })?;
        r.verify(&slice, &plant)?;
        let c = cost_components(&r, &slice, &plant, alpha);
        println!("\nalpha = {alpha}: electricity {:.2} EUR, emissions {:.1} kg", c.c_e, c.co2_kg);
        println!("hour  price  co2    wind   g4     import export  m");
        for t in 0..24 {
            println!(
                "{t:>4} {:>6.1} {:>6.1} {:>6.3} {:>6.3} {:>6.3} {:>6.3} {:>6.2}",
                slice.price[t], slice.co2_intensity[t], slice.cf_wind[t], r.g4[t], r.g5i[t], r.g5e[t], r.m[t]
            );
        }
    }
    Ok(())
}
