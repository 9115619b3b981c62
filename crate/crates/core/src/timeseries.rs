//! Hourly scenario data: loading, validation, slicing and planning windows.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use chrono::{DateTime, Duration, NaiveDateTime, Timelike};
use thiserror::Error;

pub const HEADER: [&str; 5] = ["timestamp", "cf_solar", "cf_wind", "price_eur_mwh", "co2_kg_mwh"];

/// Minimum number of hours a scenario must span.
pub const MIN_HOURS: usize = 24;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("data row {row}: cannot parse {column} value `{value}`")]
    Parse { row: usize, column: String, value: String },
    #[error("data row {row}: timestamp is not exactly one hour after the previous one")]
    NonHourlyStep { row: usize },
    #[error("data row {row}: timestamp is not on a whole hour")]
    NotHourAligned { row: usize },
    #[error("data row {row}: {column} = {value} is outside [0, 1]")]
    OutOfRangeCapacityFactor { row: usize, column: &'static str, value: f64 },
    #[error("data row {row}: negative CO2 intensity {value}")]
    NegativeIntensity { row: usize, value: f64 },
    #[error("data row {row}: {column} is not finite")]
    NonFinite { row: usize, column: &'static str },
    #[error("series lengths differ: {0:?}")]
    LengthMismatch([usize; 4]),
    #[error("scenario has {0} hours, at least {MIN_HOURS} are required")]
    TooShort(usize),
    #[error("window [{start}, {start}+{length}) exceeds {n_hours} hours")]
    OutOfBounds { start: usize, length: usize, n_hours: usize },
    #[error("planning window of {0} hours is shorter than one day")]
    WindowTooShort(usize),
    #[error("history of {needed} hours requested, only {available} whole-day hours exist")]
    InsufficientHistory { needed: usize, available: usize },
}

/// Validated hourly series starting at `start_time` (UTC).
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioData {
    pub start_time: NaiveDateTime,
    pub cf_solar: Vec<f64>,
    pub cf_wind: Vec<f64>,
    pub price: Vec<f64>,
    pub co2_intensity: Vec<f64>,
}

/// Where a slice came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceOrigin {
    /// Contiguous hours starting at this index of the parent scenario.
    Offset(usize),
    /// Composite of forecast and re-indexed history hours.
    Synthetic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSlice {
    pub origin: SliceOrigin,
    pub cf_solar: Vec<f64>,
    pub cf_wind: Vec<f64>,
    pub price: Vec<f64>,
    pub co2_intensity: Vec<f64>,
}

impl ScenarioSlice {
    pub fn n_hours(&self) -> usize {
        self.price.len()
    }

    fn empty(origin: SliceOrigin) -> Self {
        Self { origin, cf_solar: Vec::new(), cf_wind: Vec::new(), price: Vec::new(), co2_intensity: Vec::new() }
    }

    fn extend_from(&mut self, s: &ScenarioData, start: usize, len: usize) {
        let r = start..start + len;
        self.cf_solar.extend_from_slice(&s.cf_solar[r.clone()]);
        self.cf_wind.extend_from_slice(&s.cf_wind[r.clone()]);
        self.price.extend_from_slice(&s.price[r.clone()]);
        self.co2_intensity.extend_from_slice(&s.co2_intensity[r]);
    }

    /// Hours `[start, start + len)` of this slice.
    pub fn sub(&self, start: usize, len: usize) -> ScenarioSlice {
        let r = start..start + len;
        let origin = match self.origin {
            SliceOrigin::Offset(o) => SliceOrigin::Offset(o + start),
            SliceOrigin::Synthetic => SliceOrigin::Synthetic,
        };
        ScenarioSlice {
            origin,
            cf_solar: self.cf_solar[r.clone()].to_vec(),
            cf_wind: self.cf_wind[r.clone()].to_vec(),
            price: self.price[r.clone()].to_vec(),
            co2_intensity: self.co2_intensity[r].to_vec(),
        }
    }
}

impl ScenarioData {
    /// Builds a scenario from raw series, applying every invariant check.
    pub fn new(
        start_time: NaiveDateTime,
        cf_solar: Vec<f64>,
        cf_wind: Vec<f64>,
        price: Vec<f64>,
        co2_intensity: Vec<f64>,
    ) -> Result<Self, DataError> {
        let lens = [cf_solar.len(), cf_wind.len(), price.len(), co2_intensity.len()];
        if lens.iter().any(|&l| l != lens[0]) {
            return Err(DataError::LengthMismatch(lens));
        }
        if start_time.minute() != 0 || start_time.second() != 0 || start_time.nanosecond() != 0 {
            return Err(DataError::NotHourAligned { row: 0 });
        }
        for row in 0..lens[0] {
            check_row(row, cf_solar[row], cf_wind[row], price[row], co2_intensity[row])?;
        }
        if lens[0] < MIN_HOURS {
            return Err(DataError::TooShort(lens[0]));
        }
        Ok(Self { start_time, cf_solar, cf_wind, price, co2_intensity })
    }

    pub fn n_hours(&self) -> usize {
        self.price.len()
    }

    pub fn timestamp(&self, hour: usize) -> NaiveDateTime {
        self.start_time + Duration::hours(hour as i64)
    }

    /// Index of the first hour that starts a calendar day.
    pub fn first_midnight(&self) -> usize {
        (24 - self.start_time.hour() as usize) % 24
    }

    pub fn window(&self, start: usize, length: usize) -> Result<ScenarioSlice, DataError> {
        if start.checked_add(length).is_none_or(|end| end > self.n_hours()) {
            return Err(DataError::OutOfBounds { start, length, n_hours: self.n_hours() });
        }
        let mut s = ScenarioSlice::empty(SliceOrigin::Offset(start));
        s.extend_from(self, start, length);
        Ok(s)
    }

    pub fn full(&self) -> ScenarioSlice {
        self.window(0, self.n_hours()).expect("whole range is in bounds")
    }

    /// Hours of whole calendar days available strictly before `hour`.
    pub fn history_hours_before(&self, hour: usize) -> usize {
        let first = self.first_midnight();
        if hour < first {
            return 0;
        }
        (hour - first) / 24 * 24
    }

    /// Writes the scenario in the canonical CSV layout.
    pub fn write_csv(&self, out: impl Write) -> Result<(), DataError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(HEADER)?;
        for t in 0..self.n_hours() {
            w.write_record([
                self.timestamp(t).format("%Y-%m-%dT%H:%M:%SZ").to_string(),
                self.cf_solar[t].to_string(),
                self.cf_wind[t].to_string(),
                self.price[t].to_string(),
                self.co2_intensity[t].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_row(row: usize, solar: f64, wind: f64, price: f64, co2: f64) -> Result<(), DataError> {
    for (column, v) in [("cf_solar", solar), ("cf_wind", wind), ("price_eur_mwh", price), ("co2_kg_mwh", co2)] {
        if !v.is_finite() {
            return Err(DataError::NonFinite { row, column });
        }
    }
    for (column, v) in [("cf_solar", solar), ("cf_wind", wind)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(DataError::OutOfRangeCapacityFactor { row, column, value: v });
        }
    }
    if co2 < 0.0 {
        return Err(DataError::NegativeIntensity { row, value: co2 });
    }
    Ok(())
}

fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.naive_utc());
    }
    let s = s.strip_suffix('Z').unwrap_or(s);
    ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"]
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
}

/// Reads a scenario CSV (optionally gzip-compressed when the name ends in `.gz`).
pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioData, DataError> {
    let path = path.as_ref();
    let file = BufReader::new(File::open(path)?);
    let reader: Box<dyn Read> = if path.extension().is_some_and(|e| e == "gz") {
        Box::new(flate2::read::GzDecoder::new(file))
    } else {
        Box::new(file)
    };
    read_scenario(reader)
}

pub fn read_scenario(reader: impl Read) -> Result<ScenarioData, DataError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut idx = [0usize; 5];
    for (k, name) in HEADER.iter().enumerate() {
        idx[k] = headers.iter().position(|h| h == *name).ok_or_else(|| DataError::MissingColumn(name.to_string()))?;
    }
    let mut times: Vec<NaiveDateTime> = Vec::new();
    let mut cols: [Vec<f64>; 4] = Default::default();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |k: usize| rec.get(idx[k]).unwrap_or("");
        let ts = parse_timestamp(field(0)).ok_or_else(|| DataError::Parse {
            row,
            column: HEADER[0].to_string(),
            value: field(0).to_string(),
        })?;
        if ts.minute() != 0 || ts.second() != 0 {
            return Err(DataError::NotHourAligned { row });
        }
        if let Some(&prev) = times.last() {
            if ts - prev != Duration::hours(1) {
                return Err(DataError::NonHourlyStep { row });
            }
        }
        times.push(ts);
        let mut vals = [0.0; 4];
        for k in 0..4 {
            let raw = field(k + 1);
            vals[k] = raw.parse::<f64>().map_err(|_| DataError::Parse {
                row,
                column: HEADER[k + 1].to_string(),
                value: raw.to_string(),
            })?;
        }
        check_row(row, vals[0], vals[1], vals[2], vals[3])?;
        for k in 0..4 {
            cols[k].push(vals[k]);
        }
    }
    let Some(&start) = times.first() else { return Err(DataError::TooShort(0)) };
    let [solar, wind, price, co2] = cols;
    ScenarioData::new(start, solar, wind, price, co2)
}

/// Assembles a planning window of `remaining_hours`: true data for the first
/// `min(forecast_horizon, remaining_hours)` hours from `next_day_start`, then
/// the most recent whole days before `next_day_start` in calendar order,
/// truncated at the tail.
pub fn build_planning_window(
    scenario: &ScenarioData,
    next_day_start: usize,
    remaining_hours: usize,
    forecast_horizon: usize,
) -> Result<ScenarioSlice, DataError> {
    if remaining_hours < 24 {
        return Err(DataError::WindowTooShort(remaining_hours));
    }
    let fc = forecast_horizon.min(remaining_hours);
    let forecast = scenario.window(next_day_start, fc)?;
    let needed = remaining_hours - fc;
    if needed == 0 {
        return Ok(forecast);
    }
    let available = scenario.history_hours_before(next_day_start);
    let days = needed.div_ceil(24);
    if days * 24 > available {
        return Err(DataError::InsufficientHistory { needed, available });
    }
    let end = scenario.first_midnight() + available;
    let mut out = forecast;
    out.origin = SliceOrigin::Synthetic;
    out.extend_from(scenario, end - days * 24, needed);
    Ok(out)
}

/// Like [`build_planning_window`] but never short of history: when fewer
/// whole days exist before `next_day_start` than the window needs, the days
/// that do exist are repeated in order, and with no history at all the first
/// forecast day stands in. Also returns the scenario hour behind every
/// position of the slice.
pub fn build_padded_planning_window(
    scenario: &ScenarioData,
    next_day_start: usize,
    remaining_hours: usize,
    forecast_horizon: usize,
) -> Result<(ScenarioSlice, Vec<usize>), DataError> {
    if remaining_hours < 24 {
        return Err(DataError::WindowTooShort(remaining_hours));
    }
    let fc = forecast_horizon.min(remaining_hours);
    let mut out = scenario.window(next_day_start, fc)?;
    let mut sources: Vec<usize> = (next_day_start..next_day_start + fc).collect();
    let needed = remaining_hours - fc;
    if needed == 0 {
        return Ok((out, sources));
    }
    let available = scenario.history_hours_before(next_day_start);
    let days = needed.div_ceil(24);
    let pool: Vec<usize> = if available == 0 {
        vec![next_day_start]
    } else {
        let end = scenario.first_midnight() + available;
        let first = end - days.min(available / 24) * 24;
        (first..end).step_by(24).collect()
    };
    out.origin = SliceOrigin::Synthetic;
    for d in 0..days {
        let len = 24.min(needed - d * 24);
        let start = pool[d % pool.len()];
        out.extend_from(scenario, start, len);
        sources.extend(start..start + len);
    }
    Ok((out, sources))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn midnight() -> NaiveDateTime {
        NaiveDate::from_ymd_opt(2018, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap()
    }

    fn ramp(n: usize) -> ScenarioData {
        let v: Vec<f64> = (0..n).map(|t| t as f64).collect();
        ScenarioData::new(midnight(), vec![0.5; n], vec![0.25; n], v.clone(), v).unwrap()
    }

    fn csv_text(rows: &[(&str, &str)]) -> String {
        let mut s = String::from("timestamp,cf_solar,cf_wind,price_eur_mwh,co2_kg_mwh\n");
        for (ts, wind) in rows {
            s.push_str(&format!("{ts},0.1,{wind},30,100\n"));
        }
        s
    }

    fn hours(n: usize) -> Vec<String> {
        (0..n).map(|t| (midnight() + Duration::hours(t as i64)).format("%Y-%m-%dT%H:%M:%SZ").to_string()).collect()
    }

    #[test]
    fn reads_valid_rows() {
        let ts = hours(48);
        let rows: Vec<(&str, &str)> = ts.iter().map(|t| (t.as_str(), "0.5")).collect();
        let s = read_scenario(csv_text(&rows).as_bytes()).unwrap();
        assert_eq!(s.n_hours(), 48);
        assert_eq!(s.start_time, midnight());
    }

    #[test]
    fn rejects_capacity_factor_above_one() {
        let ts = hours(30);
        let mut rows: Vec<(&str, &str)> = ts.iter().map(|t| (t.as_str(), "0.5")).collect();
        rows[7].1 = "1.2";
        match read_scenario(csv_text(&rows).as_bytes()) {
            Err(DataError::OutOfRangeCapacityFactor { row: 7, column: "cf_wind", value }) => assert_eq!(value, 1.2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_duplicated_timestamp() {
        let mut ts = hours(48);
        ts[20] = ts[19].clone();
        let rows: Vec<(&str, &str)> = ts.iter().map(|t| (t.as_str(), "0.5")).collect();
        assert!(matches!(read_scenario(csv_text(&rows).as_bytes()), Err(DataError::NonHourlyStep { row: 20 })));
    }

    #[test]
    fn reports_missing_column_and_negative_intensity() {
        let text = "timestamp,cf_solar,price_eur_mwh,co2_kg_mwh\n";
        assert!(matches!(read_scenario(text.as_bytes()), Err(DataError::MissingColumn(c)) if c == "cf_wind"));
        let ts = hours(24);
        let rows: Vec<(&str, &str)> = ts.iter().map(|t| (t.as_str(), "0.5")).collect();
        let text = csv_text(&rows).replacen(",30,100\n", ",30,-1\n", 4);
        assert!(matches!(read_scenario(text.as_bytes()), Err(DataError::NegativeIntensity { row: 0, .. })));
    }

    #[test]
    fn window_bounds() {
        let s = ramp(8760);
        let w = s.window(0, 24).unwrap();
        assert_eq!(w.price, (0..24).map(|t| t as f64).collect::<Vec<_>>());
        assert!(matches!(s.window(8759, 2), Err(DataError::OutOfBounds { .. })));
        let w = s.window(24, 34).unwrap();
        assert_eq!(w.origin, SliceOrigin::Offset(24));
        assert_eq!(w.price[0], 24.0);
        assert_eq!(w.n_hours(), 34);
    }

    #[test]
    fn planning_window_week_example() {
        let s = ramp(24 * 40);
        let w = build_planning_window(&s, 720, 168, 34).unwrap();
        assert_eq!(w.n_hours(), 168);
        let expected: Vec<f64> = (720..754).chain(576..710).map(|t| t as f64).collect();
        assert_eq!(w.price, expected);
    }

    #[test]
    fn planning_window_short_cases_are_pure_forecast() {
        let s = ramp(24 * 10);
        for rem in [24, 34] {
            assert_eq!(build_planning_window(&s, 48, rem, 34).unwrap().price, s.window(48, rem).unwrap().price);
        }
        assert!(matches!(build_planning_window(&s, 48, 12, 34), Err(DataError::WindowTooShort(12))));
    }

    #[test]
    fn planning_window_needs_history() {
        let s = ramp(24 * 10);
        match build_planning_window(&s, 24, 168, 34) {
            Err(DataError::InsufficientHistory { needed: 134, available: 24 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn short_history_is_repeated() {
        let s = ramp(24 * 10);
        let (w, src) = build_padded_planning_window(&s, 48, 168, 34).unwrap();
        let expected: Vec<usize> = (48..82).chain((0..24).chain(24..48).cycle().take(134)).collect();
        assert_eq!(src, expected);
        assert_eq!(w.price, expected.iter().map(|&t| t as f64).collect::<Vec<_>>());
        let (_, src) = build_padded_planning_window(&s, 0, 96, 34).unwrap();
        assert_eq!(src, (0..34).chain(0..24).chain(0..24).chain(0..14).collect::<Vec<_>>());
        let (full, src) = build_padded_planning_window(&s, 168, 168, 34).unwrap();
        assert_eq!(full, build_planning_window(&s, 168, 168, 34).unwrap());
        assert_eq!(src, (168..202).chain(24..158).collect::<Vec<_>>());
    }

    #[test]
    fn history_respects_midnight_alignment() {
        // Scenario starting at 06:00: the first midnight is hour 18.
        let start = midnight() + Duration::hours(6);
        let n = 24 * 6;
        let v: Vec<f64> = (0..n).map(|t| t as f64).collect();
        let s = ScenarioData::new(start, vec![0.0; n], vec![0.0; n], v.clone(), v).unwrap();
        assert_eq!(s.first_midnight(), 18);
        assert_eq!(s.history_hours_before(90), 72);
        let w = build_planning_window(&s, 90, 58, 34).unwrap();
        assert_eq!(w.price[34], 66.0);
    }

    #[test]
    fn gzip_round_trip() {
        use flate2::{write::GzEncoder, Compression};
        let s = ramp(30);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv.gz");
        let mut enc = GzEncoder::new(File::create(&path).unwrap(), Compression::default());
        s.write_csv(&mut enc).unwrap();
        enc.finish().unwrap();
        assert_eq!(load_scenario(&path).unwrap(), s);
    }
}
