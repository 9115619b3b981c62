//! Generates a synthetic year, writes it in the scenario CSV layout and reads
//! it back.
//!
//!     cargo run --example scenario_io -- [out.csv] [days] [seed]

use chrono::NaiveDate;
use h2plan::synthetic::{generate, SyntheticConfig};
use h2plan::timeseries::load_scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "synthetic_2018.csv".into());
    let days: usize = args.next().map_or(Ok(365), |s| s.parse())?;
    let seed: u64 = args.next().map_or(Ok(7), |s| s.parse())?;

    let start = NaiveDate::from_ymd_opt(2018, 1, 1).unwrap();
    let scenario = generate(&SyntheticConfig::new(start, days, seed));
    scenario.write_csv(std::fs::File::create(&path)?)?;

    let back = load_scenario(&path)?;
    assert_eq!(back, scenario);
    let n = back.n_hours() as f64;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n;
    println!("wrote {path}: {} hours from {}", back.n_hours(), back.start_time);
    println!("mean solar cf {:.3}, wind cf {:.3}", mean(&back.cf_solar), mean(&back.cf_wind));
    println!("mean price {:.2} EUR/MWh, intensity {:.1} kg/MWh", mean(&back.price), mean(&back.co2_intensity));
    let window = back.window(24, 34)?;
    println!("34-hour window from hour 24 starts at price {:.2}", window.price[0]);
    Ok(())
}
