//! Straight-line fit of hydrogen output against electrolyser load on the
//! bundled efficiency curve.

use h2plan::efficiency::{linearize_efficiency, load_efficiency_curve};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/electrolyser_efficiency.csv");
    let curve = load_efficiency_curve(path)?;
    let fit = linearize_efficiency(&curve)?;
    println!("{} points", curve.len());
    println!("f*eta = {:.4} f {:+.4}", fit.slope, fit.intercept);
    println!("p-values: slope {:.2e}, intercept {:.3}", fit.slope_p, fit.intercept_p);
    println!("R^2 {:.5}", fit.r_squared);
    println!("through the origin: slope {:.4}", fit.zero_intercept_slope);
    Ok(())
}
