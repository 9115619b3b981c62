//! Seeded synthetic scenarios with plausible diurnal and seasonal structure.
//!
//! Solar follows a clipped daylight sine scaled by season and daily cloud
//! cover; wind is a logistic transform of an AR(1) process; prices and CO2
//! intensity fall when renewables are plentiful and carry Gaussian noise.
//! The same configuration always yields the same series.

use std::f64::consts::PI;

use chrono::{Datelike, NaiveDate, NaiveDateTime};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::timeseries::ScenarioData;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub start: NaiveDate,
    pub days: usize,
    pub seed: u64,
    pub mean_price: f64,
    pub price_noise: f64,
    pub mean_intensity: f64,
}

impl SyntheticConfig {
    pub fn new(start: NaiveDate, days: usize, seed: u64) -> Self {
        Self { start, days, seed, mean_price: 45.0, price_noise: 8.0, mean_intensity: 180.0 }
    }
}

pub fn generate(cfg: &SyntheticConfig) -> ScenarioData {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let unit = Normal::new(0.0, 1.0).expect("valid normal");
    let n = cfg.days * 24;
    let mut solar = Vec::with_capacity(n);
    let mut wind = Vec::with_capacity(n);
    let mut price = Vec::with_capacity(n);
    let mut co2 = Vec::with_capacity(n);
    let mut z: f64 = unit.sample(&mut rng);
    for day in 0..cfg.days {
        let date = cfg.start + chrono::Duration::days(day as i64);
        let doy = date.ordinal0() as f64;
        let summer = 0.5 + 0.5 * (2.0 * PI * (doy - 172.0) / 365.0).cos();
        let daylight = 8.0 + 9.0 * summer;
        let sunrise = 12.5 - daylight / 2.0;
        let clear: f64 = rng.random_range(0.3..1.0);
        let peak = (0.35 + 0.45 * summer) * clear;
        let daily_level: f64 = unit.sample(&mut rng);
        for h in 0..24 {
            let hour = h as f64;
            let s = if hour >= sunrise && hour <= sunrise + daylight {
                (peak * (PI * (hour - sunrise) / daylight).sin()).clamp(0.0, 1.0)
            } else {
                0.0
            };
            z = 0.93 * z + 0.37 * unit.sample(&mut rng);
            let w = 1.0 / (1.0 + (-(1.1 * z - 0.5 + 0.6 * (1.0 - summer))).exp());
            let demand = 0.6 * (-((hour - 8.5) / 2.5).powi(2)).exp() + 0.8 * (-((hour - 18.5) / 2.5).powi(2)).exp()
                - 0.5 * (-((hour - 3.0) / 3.0).powi(2)).exp();
            let p = cfg.mean_price * (1.0 + 0.45 * demand - 0.9 * (w - 0.4) - 0.35 * s)
                + 6.0 * daily_level
                + cfg.price_noise * unit.sample(&mut rng);
            let i = cfg.mean_intensity * (1.0 + 0.4 * demand - 1.1 * (w - 0.4) - 0.5 * s)
                + 15.0 * unit.sample(&mut rng);
            solar.push(round4(s));
            wind.push(round4(w));
            price.push(round2(p));
            co2.push(round2(i.max(2.0)));
        }
    }
    let start: NaiveDateTime = cfg.start.and_hms_opt(0, 0, 0).expect("midnight exists");
    ScenarioData::new(start, solar, wind, price, co2).expect("generated series satisfy the invariants")
}

fn round4(v: f64) -> f64 {
    (v * 1e4).round() / 1e4
}

fn round2(v: f64) -> f64 {
    (v * 1e2).round() / 1e2
}
