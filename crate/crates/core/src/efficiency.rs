//! Linear fit of electrolyser output against load.
//!
//! Hydrogen power is `f·η(f)` for load factor `f`. Over the usual operating
//! range that product is close to a straight line through the origin, which
//! is what lets the dispatch model use one constant efficiency.

use std::path::Path;

use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FitError {
    #[error("at least 3 points are needed, got {0}")]
    TooFewPoints(usize),
    #[error("point {index}: capacity factor {value} is outside (0, 1]")]
    OutOfRange { index: usize, value: f64 },
    #[error("all capacity factors are equal")]
    DegenerateInput,
    #[error("cannot read curve: {0}")]
    Read(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyFit {
    pub slope: f64,
    pub intercept: f64,
    /// Two-sided p-value of the slope.
    pub slope_p: f64,
    /// Two-sided p-value of the intercept.
    pub intercept_p: f64,
    pub r_squared: f64,
    /// Slope of the least-squares line forced through the origin.
    pub zero_intercept_slope: f64,
}

/// Ordinary least squares of `f·η` on `f` for `(f, η)` pairs.
pub fn linearize_efficiency(curve: &[(f64, f64)]) -> Result<EfficiencyFit, FitError> {
    let n = curve.len();
    if n < 3 {
        return Err(FitError::TooFewPoints(n));
    }
    if let Some((index, &(value, _))) = curve.iter().enumerate().find(|(_, (f, _))| !(*f > 0.0 && *f <= 1.0)) {
        return Err(FitError::OutOfRange { index, value });
    }
    let xs: Vec<f64> = curve.iter().map(|&(f, _)| f).collect();
    let ys: Vec<f64> = curve.iter().map(|&(f, eta)| f * eta).collect();
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= f64::EPSILON * nf * mx * mx {
        return Err(FitError::DegenerateInput);
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let df = nf - 2.0;
    let s2 = sse / df;
    let se_slope = (s2 / sxx).sqrt();
    let se_intercept = (s2 * (1.0 / nf + mx * mx / sxx)).sqrt();
    let t = StudentsT::new(0.0, 1.0, df).expect("df is positive");
    let p = |est: f64, se: f64| {
        if se == 0.0 {
            if est == 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            2.0 * (1.0 - t.cdf((est / se).abs()))
        }
    };
    let sxx0: f64 = xs.iter().map(|x| x * x).sum();
    let sxy0: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    Ok(EfficiencyFit {
        slope,
        intercept,
        slope_p: p(slope, se_slope),
        intercept_p: p(intercept, se_intercept),
        r_squared: if syy > 0.0 { 1.0 - sse / syy } else { 1.0 },
        zero_intercept_slope: sxy0 / sxx0,
    })
}

/// Reads a `capacity_factor,efficiency` CSV.
pub fn load_efficiency_curve(path: impl AsRef<Path>) -> Result<Vec<(f64, f64)>, FitError> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(FitError::from)).collect()
}
