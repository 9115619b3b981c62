//! Plant model: hourly power flows of a PV + wind + grid hydrogen plant as an LP.
//!
//! Per hour `t` the columns are
//!
//! | column  | meaning                                  |
//! |---------|------------------------------------------|
//! | `g1`    | solar power into the DC bus               |
//! | `g1c`   | curtailed solar                           |
//! | `g2`    | wind power into the AC bus                |
//! | `g2c`   | curtailed wind                            |
//! | `g3dc`  | inverter input (DC side)                  |
//! | `g3ac`  | inverter output (AC side)                 |
//! | `g4`    | electrolyser input                        |
//! | `gh2`   | hydrogen power                            |
//! | `g5i`   | grid import                               |
//! | `g5e`   | grid export                               |
//! | `m`     | hydrogen mass (kg)                        |
//!
//! All powers are MW and all columns are non-negative.

use thiserror::Error;

use crate::lp::{Basis, BasisStatus, Direction, LpError, LpProblem, LpSolution, Sense, Status, Var};
use crate::timeseries::ScenarioSlice;

/// Operating cost per MWh for each technology.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OpCosts {
    pub solar: f64,
    pub wind: f64,
    pub inverter: f64,
    pub electrolyser: f64,
    pub grid: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantConfig {
    pub solar_mw: f64,
    pub wind_mw: f64,
    pub inverter_mw: f64,
    pub electrolyser_mw: f64,
    pub grid_mw: f64,
    pub eta_inverter: f64,
    /// Electrolyser efficiency on the lower heating value.
    pub eta_lhv: f64,
    /// Lower heating value of hydrogen, MJ/kg.
    pub lhv_mj_per_kg: f64,
    /// Ramp limits as a fraction of electrolyser capacity per hour.
    pub ramp_up: f64,
    pub ramp_up_cold: f64,
    pub ramp_down: f64,
    /// Electrolyser investment, €/MW.
    pub electrolyser_capex: f64,
    /// Fixed O&M, €/MW/year.
    pub fixed_om: f64,
    pub lifetime_years: f64,
    pub discount_rate: f64,
    pub op_cost: OpCosts,
    /// €/kg CO2, used only inside the weighted objective.
    pub co2_price: f64,
    /// Length of one step in hours.
    pub delta_t: f64,
}

impl Default for PlantConfig {
    fn default() -> Self {
        Self {
            solar_mw: 1.0,
            wind_mw: 1.0,
            inverter_mw: 1.0,
            electrolyser_mw: 1.0,
            grid_mw: 1.0,
            eta_inverter: 0.9,
            eta_lhv: 0.6,
            lhv_mj_per_kg: 120.0,
            ramp_up: 1.0,
            ramp_up_cold: 0.5,
            ramp_down: 1.0,
            electrolyser_capex: 700_000.0,
            fixed_om: 0.0,
            lifetime_years: 10.0,
            discount_rate: 0.07,
            op_cost: OpCosts::default(),
            co2_price: 1.0,
            delta_t: 1.0,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid plant parameter {name} = {value}: {rule}")]
pub struct ConfigError {
    pub name: &'static str,
    pub value: f64,
    pub rule: &'static str,
}

impl PlantConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let check = |name, value: f64, ok: bool, rule| if ok { Ok(()) } else { Err(ConfigError { name, value, rule }) };
        for (name, v) in [
            ("solar_mw", self.solar_mw),
            ("wind_mw", self.wind_mw),
            ("inverter_mw", self.inverter_mw),
            ("grid_mw", self.grid_mw),
        ] {
            check(name, v, v >= 0.0 && v.is_finite(), "must be non-negative")?;
        }
        for (name, v) in [
            ("electrolyser_mw", self.electrolyser_mw),
            ("lhv_mj_per_kg", self.lhv_mj_per_kg),
            ("delta_t", self.delta_t),
        ] {
            check(name, v, v > 0.0 && v.is_finite(), "must be positive")?;
        }
        for (name, v) in [("eta_inverter", self.eta_inverter), ("eta_lhv", self.eta_lhv)] {
            check(name, v, v > 0.0 && v <= 1.0, "must lie in (0, 1]")?;
        }
        for (name, v) in [("ramp_up", self.ramp_up), ("ramp_up_cold", self.ramp_up_cold), ("ramp_down", self.ramp_down)] {
            check(name, v, v > 0.0 && v <= 1.0, "must lie in (0, 1]")?;
        }
        check("lifetime_years", self.lifetime_years, self.lifetime_years >= 1.0, "must be at least 1")?;
        check("discount_rate", self.discount_rate, self.discount_rate >= 0.0, "must be non-negative")?;
        check("co2_price", self.co2_price, self.co2_price >= 0.0, "must be non-negative")?;
        for (name, v) in [
            ("electrolyser_capex", self.electrolyser_capex),
            ("fixed_om", self.fixed_om),
            ("op_cost.solar", self.op_cost.solar),
            ("op_cost.wind", self.op_cost.wind),
            ("op_cost.inverter", self.op_cost.inverter),
            ("op_cost.electrolyser", self.op_cost.electrolyser),
            ("op_cost.grid", self.op_cost.grid),
        ] {
            check(name, v, v.is_finite(), "must be finite")?;
        }
        Ok(())
    }

    /// kg of hydrogen per MWh of electrolyser input.
    pub fn kg_per_mwh(&self) -> f64 {
        3600.0 * self.eta_lhv / self.lhv_mj_per_kg
    }

    /// kg per MWh of hydrogen power (`m = factor · gH2 · Δt`).
    pub fn kg_per_mwh_h2(&self) -> f64 {
        3600.0 / self.lhv_mj_per_kg
    }

    /// Hydrogen mass of one step at full electrolyser load.
    pub fn max_step_mass(&self) -> f64 {
        self.electrolyser_mw * self.delta_t * self.kg_per_mwh()
    }

    /// Largest upward change of `g4` between consecutive steps (MW).
    pub fn ramp_up_limit(&self) -> f64 {
        self.electrolyser_mw * self.ramp_up.min(self.ramp_up_cold) * self.delta_t
    }

    pub fn ramp_down_limit(&self) -> f64 {
        self.electrolyser_mw * self.ramp_down * self.delta_t
    }

    /// Annualised cost per MW of electrolyser, €/MW/year.
    pub fn annuity_per_mw(&self) -> f64 {
        let d = self.discount_rate;
        let crf = if d == 0.0 { 1.0 / self.lifetime_years } else { d / (1.0 - (1.0 + d).powf(-self.lifetime_years)) };
        self.fixed_om + self.electrolyser_capex * crf
    }

    /// Electrolyser capital cost prorated to `hours`.
    pub fn capital_cost(&self, hours: f64) -> f64 {
        self.annuity_per_mw() * self.electrolyser_mw * hours / 8760.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MassSense {
    Eq,
    Ge,
}

/// Minimum mass to deliver over the hours `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodTarget {
    pub start: usize,
    pub end: usize,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MassSpec {
    /// Hourly masses fixed to the given plan (one entry per hour).
    PlanFollow(Vec<f64>),
    /// Mass over the first 24 hours equals `committed`; mass over the
    /// remaining hours equals `advisory`.
    DailySum { committed: f64, advisory: f64 },
    WindowTotal { mass: f64, sense: MassSense },
    PeriodTargets(Vec<PeriodTarget>),
    /// No mass requirement.
    Free,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DispatchError {
    #[error("empty horizon")]
    EmptyHorizon,
    #[error("initial electrolyser level {0} outside [0, 1]")]
    InvalidInitialLevel(f64),
    #[error("weight alpha = {0} outside [0, 1]")]
    InvalidAlpha(f64),
    #[error("mass specification does not fit a {hours}-hour horizon: {detail}")]
    SpecOutOfRange { hours: usize, detail: String },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("solution is not optimal ({0:?})")]
    NotOptimal(Status),
    #[error("hour {hour}: {what} violated by {residual:e}")]
    InternalConsistency { hour: usize, what: &'static str, residual: f64 },
}

/// Column handles of a dispatch problem, one entry per hour.
#[derive(Debug, Clone, Default)]
pub struct DispatchVars {
    pub g1: Vec<Var>,
    pub g1c: Vec<Var>,
    pub g2: Vec<Var>,
    pub g2c: Vec<Var>,
    pub g3dc: Vec<Var>,
    pub g3ac: Vec<Var>,
    pub g4: Vec<Var>,
    pub gh2: Vec<Var>,
    pub g5i: Vec<Var>,
    pub g5e: Vec<Var>,
    pub m: Vec<Var>,
}

impl DispatchVars {
    pub fn n_hours(&self) -> usize {
        self.g4.len()
    }
}

/// Objective coefficients of one hour, shared by the LP and the cost report.
struct HourCosts {
    g1: f64,
    g2: f64,
    g3ac: f64,
    g4: f64,
    g5i: f64,
    g5e: f64,
}

fn hour_costs(plant: &PlantConfig, alpha: f64, price: f64, intensity: f64) -> HourCosts {
    let dt = plant.delta_t;
    let w = 1.0 - alpha;
    let op = plant.op_cost;
    HourCosts {
        g1: w * dt * op.solar,
        g2: w * dt * op.wind,
        g3ac: w * dt * op.inverter,
        g4: w * dt * op.electrolyser,
        g5i: alpha * plant.co2_price * dt * intensity + w * dt * (price + op.grid),
        g5e: w * dt * (op.grid - price),
    }
}

/// Encodes the plant over `slice` as an LP minimising the `alpha`-weighted
/// sum of CO2 cost and electricity plus operating cost.
pub fn build_dispatch(
    slice: &ScenarioSlice,
    plant: &PlantConfig,
    f4_init: f64,
    alpha: f64,
    spec: &MassSpec,
) -> Result<(LpProblem, DispatchVars), DispatchError> {
    plant.validate()?;
    let n = slice.n_hours();
    if n == 0 {
        return Err(DispatchError::EmptyHorizon);
    }
    if !(0.0..=1.0).contains(&f4_init) {
        return Err(DispatchError::InvalidInitialLevel(f4_init));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(DispatchError::InvalidAlpha(alpha));
    }
    check_spec(spec, n)?;

    let inf = f64::INFINITY;
    let mut p = LpProblem::new();
    let mut v = DispatchVars::default();
    for t in 0..n {
        v.g1.push(p.add_named_variable(format!("g1_{t}"), 0.0, inf)?);
        v.g1c.push(p.add_named_variable(format!("g1c_{t}"), 0.0, inf)?);
        v.g2.push(p.add_named_variable(format!("g2_{t}"), 0.0, inf)?);
        v.g2c.push(p.add_named_variable(format!("g2c_{t}"), 0.0, inf)?);
        v.g3dc.push(p.add_named_variable(format!("g3dc_{t}"), 0.0, plant.inverter_mw / plant.eta_inverter)?);
        v.g3ac.push(p.add_named_variable(format!("g3ac_{t}"), 0.0, inf)?);
        v.g4.push(p.add_named_variable(format!("g4_{t}"), 0.0, plant.electrolyser_mw)?);
        v.gh2.push(p.add_named_variable(format!("gh2_{t}"), 0.0, inf)?);
        v.g5i.push(p.add_named_variable(format!("g5i_{t}"), 0.0, plant.grid_mw)?);
        v.g5e.push(p.add_named_variable(format!("g5e_{t}"), 0.0, plant.grid_mw)?);
        v.m.push(p.add_named_variable(format!("m_{t}"), 0.0, inf)?);
    }

    let mass_factor = plant.kg_per_mwh_h2() * plant.delta_t;
    let up = plant.ramp_up_limit();
    let down = plant.ramp_down_limit();
    let mut objective = Vec::with_capacity(6 * n);
    for t in 0..n {
        p.add_constraint(&[(v.g1[t], 1.0), (v.g1c[t], 1.0)], Sense::Eq, plant.solar_mw * slice.cf_solar[t])?;
        p.add_constraint(&[(v.g1[t], 1.0), (v.g3dc[t], -1.0)], Sense::Eq, 0.0)?;
        p.add_constraint(&[(v.g3ac[t], 1.0), (v.g3dc[t], -plant.eta_inverter)], Sense::Eq, 0.0)?;
        p.add_constraint(&[(v.g2[t], 1.0), (v.g2c[t], 1.0)], Sense::Eq, plant.wind_mw * slice.cf_wind[t])?;
        p.add_constraint(
            &[(v.g2[t], 1.0), (v.g3ac[t], 1.0), (v.g4[t], -1.0), (v.g5i[t], 1.0), (v.g5e[t], -1.0)],
            Sense::Eq,
            0.0,
        )?;
        p.add_constraint(&[(v.gh2[t], 1.0), (v.g4[t], -plant.eta_lhv)], Sense::Eq, 0.0)?;
        p.add_constraint(&[(v.m[t], 1.0), (v.gh2[t], -mass_factor)], Sense::Eq, 0.0)?;
        if t == 0 {
            let start = f4_init * plant.electrolyser_mw;
            p.add_constraint(&[(v.g4[0], 1.0)], Sense::Le, start + up)?;
            p.add_constraint(&[(v.g4[0], 1.0)], Sense::Ge, start - down)?;
        } else {
            p.add_constraint(&[(v.g4[t], 1.0), (v.g4[t - 1], -1.0)], Sense::Le, up)?;
            p.add_constraint(&[(v.g4[t - 1], 1.0), (v.g4[t], -1.0)], Sense::Le, down)?;
        }
        let c = hour_costs(plant, alpha, slice.price[t], slice.co2_intensity[t]);
        objective.extend([
            (v.g1[t], c.g1),
            (v.g2[t], c.g2),
            (v.g3ac[t], c.g3ac),
            (v.g4[t], c.g4),
            (v.g5i[t], c.g5i),
            (v.g5e[t], c.g5e),
        ]);
    }
    p.set_objective(&objective, Direction::Minimize)?;

    let sum = |range: std::ops::Range<usize>| -> Vec<(Var, f64)> { range.map(|t| (v.m[t], 1.0)).collect() };
    match spec {
        MassSpec::PlanFollow(plan) => {
            for (t, &mass) in plan.iter().enumerate() {
                p.add_constraint(&[(v.m[t], 1.0)], Sense::Eq, mass)?;
            }
        }
        MassSpec::DailySum { committed, advisory } => {
            let day = n.min(24);
            p.add_constraint(&sum(0..day), Sense::Eq, *committed)?;
            if n > day {
                p.add_constraint(&sum(day..n), Sense::Eq, *advisory)?;
            }
        }
        MassSpec::WindowTotal { mass, sense } => {
            let s = match sense {
                MassSense::Eq => Sense::Eq,
                MassSense::Ge => Sense::Ge,
            };
            p.add_constraint(&sum(0..n), s, *mass)?;
        }
        MassSpec::PeriodTargets(periods) => {
            for pt in periods {
                p.add_constraint(&sum(pt.start..pt.end), Sense::Ge, pt.mass)?;
            }
        }
        MassSpec::Free => {}
    }
    Ok((p, v))
}

fn check_spec(spec: &MassSpec, hours: usize) -> Result<(), DispatchError> {
    let bad = |detail: String| Err(DispatchError::SpecOutOfRange { hours, detail });
    let finite_nonneg = |m: f64| m.is_finite() && m >= 0.0;
    match spec {
        MassSpec::PlanFollow(plan) if plan.len() != hours => bad(format!("plan has {} entries", plan.len())),
        MassSpec::PlanFollow(plan) if !plan.iter().all(|&m| finite_nonneg(m)) => bad("negative plan mass".into()),
        MassSpec::DailySum { committed, advisory } if !finite_nonneg(*committed) || !finite_nonneg(*advisory) => {
            bad("negative daily mass".into())
        }
        MassSpec::DailySum { advisory, .. } if hours <= 24 && *advisory != 0.0 => {
            bad("advisory mass without advisory hours".into())
        }
        MassSpec::WindowTotal { mass, .. } if !finite_nonneg(*mass) => bad("negative window mass".into()),
        MassSpec::PeriodTargets(periods) => {
            for pt in periods {
                if pt.start >= pt.end || pt.end > hours || !finite_nonneg(pt.mass) {
                    return bad(format!("period [{}, {}) with mass {}", pt.start, pt.end, pt.mass));
                }
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

/// Hourly flows of a solved dispatch.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DispatchResult {
    pub g1: Vec<f64>,
    pub g1c: Vec<f64>,
    pub g2: Vec<f64>,
    pub g2c: Vec<f64>,
    pub g3dc: Vec<f64>,
    pub g3ac: Vec<f64>,
    pub g4: Vec<f64>,
    pub gh2: Vec<f64>,
    pub g5i: Vec<f64>,
    pub g5e: Vec<f64>,
    pub m: Vec<f64>,
    /// Electrolyser load factor `g4 / G4`.
    pub f4: Vec<f64>,
}

impl DispatchResult {
    pub fn n_hours(&self) -> usize {
        self.g4.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.m.iter().sum()
    }

    pub fn append(&mut self, other: &DispatchResult) {
        self.g1.extend_from_slice(&other.g1);
        self.g1c.extend_from_slice(&other.g1c);
        self.g2.extend_from_slice(&other.g2);
        self.g2c.extend_from_slice(&other.g2c);
        self.g3dc.extend_from_slice(&other.g3dc);
        self.g3ac.extend_from_slice(&other.g3ac);
        self.g4.extend_from_slice(&other.g4);
        self.gh2.extend_from_slice(&other.gh2);
        self.g5i.extend_from_slice(&other.g5i);
        self.g5e.extend_from_slice(&other.g5e);
        self.m.extend_from_slice(&other.m);
        self.f4.extend_from_slice(&other.f4);
    }

    /// Hours `[start, start + len)`.
    pub fn range(&self, start: usize, len: usize) -> DispatchResult {
        let r = start..start + len;
        DispatchResult {
            g1: self.g1[r.clone()].to_vec(),
            g1c: self.g1c[r.clone()].to_vec(),
            g2: self.g2[r.clone()].to_vec(),
            g2c: self.g2c[r.clone()].to_vec(),
            g3dc: self.g3dc[r.clone()].to_vec(),
            g3ac: self.g3ac[r.clone()].to_vec(),
            g4: self.g4[r.clone()].to_vec(),
            gh2: self.gh2[r.clone()].to_vec(),
            g5i: self.g5i[r.clone()].to_vec(),
            g5e: self.g5e[r.clone()].to_vec(),
            m: self.m[r.clone()].to_vec(),
            f4: self.f4[r].to_vec(),
        }
    }

    /// Re-checks every balance, bound and conversion of the plant model.
    pub fn verify(&self, slice: &ScenarioSlice, plant: &PlantConfig) -> Result<(), DispatchError> {
        let ptol = 1e-6 * plant.electrolyser_mw.max(1.0);
        let mtol = 1e-6 * plant.max_step_mass().max(1.0);
        let fail = |hour, what, residual: f64| Err(DispatchError::InternalConsistency { hour, what, residual });
        let mass_factor = plant.kg_per_mwh_h2() * plant.delta_t;
        for t in 0..self.n_hours() {
            let solar = plant.solar_mw * slice.cf_solar[t];
            let wind = plant.wind_mw * slice.cf_wind[t];
            let checks = [
                ("solar curtailment balance", self.g1[t] + self.g1c[t] - solar, ptol),
                ("DC bus balance", self.g1[t] - self.g3dc[t], ptol),
                ("inverter conversion", self.g3ac[t] - plant.eta_inverter * self.g3dc[t], ptol),
                ("wind curtailment balance", self.g2[t] + self.g2c[t] - wind, ptol),
                (
                    "AC bus balance",
                    self.g2[t] + self.g3ac[t] + self.g5i[t] - self.g4[t] - self.g5e[t],
                    ptol,
                ),
                ("electrolyser conversion", self.gh2[t] - plant.eta_lhv * self.g4[t], ptol),
                ("hydrogen mass", self.m[t] - mass_factor * self.gh2[t], mtol),
            ];
            for (what, r, tol) in checks {
                if r.abs() > tol {
                    return fail(t, what, r);
                }
            }
            let bounds = [
                ("g1 sign", -self.g1[t]),
                ("g1c range", (-self.g1c[t]).max(self.g1c[t] - solar)),
                ("g2 sign", -self.g2[t]),
                ("g2c range", (-self.g2c[t]).max(self.g2c[t] - wind)),
                ("inverter capacity", self.g3dc[t] - plant.inverter_mw / plant.eta_inverter),
                ("electrolyser capacity", (-self.g4[t]).max(self.g4[t] - plant.electrolyser_mw)),
                ("grid import limit", (-self.g5i[t]).max(self.g5i[t] - plant.grid_mw)),
                ("grid export limit", (-self.g5e[t]).max(self.g5e[t] - plant.grid_mw)),
            ];
            for (what, excess) in bounds {
                if excess > ptol {
                    return fail(t, what, excess);
                }
            }
        }
        Ok(())
    }
}

/// Decodes an optimal solution into hourly flows. Simultaneous import and
/// export in the same hour are netted against each other.
pub fn extract_flows(
    solution: &LpSolution,
    vars: &DispatchVars,
    slice: &ScenarioSlice,
    plant: &PlantConfig,
) -> Result<DispatchResult, DispatchError> {
    if solution.status != Status::Optimal {
        return Err(DispatchError::NotOptimal(solution.status));
    }
    let get = |vs: &[Var]| -> Vec<f64> { vs.iter().map(|&v| solution.value(v)).collect() };
    let mut r = DispatchResult {
        g1: get(&vars.g1),
        g1c: get(&vars.g1c),
        g2: get(&vars.g2),
        g2c: get(&vars.g2c),
        g3dc: get(&vars.g3dc),
        g3ac: get(&vars.g3ac),
        g4: get(&vars.g4),
        gh2: get(&vars.gh2),
        g5i: get(&vars.g5i),
        g5e: get(&vars.g5e),
        m: get(&vars.m),
        f4: Vec::new(),
    };
    for t in 0..r.n_hours() {
        let both = r.g5i[t].min(r.g5e[t]);
        if both > 0.0 {
            r.g5i[t] -= both;
            r.g5e[t] -= both;
        }
    }
    r.f4 = r.g4.iter().map(|g| g / plant.electrolyser_mw).collect();
    r.verify(slice, plant)?;
    Ok(r)
}

/// Cost and emission totals of a dispatch.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CostBreakdown {
    /// Net electricity cost (imports minus export revenue), €.
    pub c_e: f64,
    /// Operating cost, €.
    pub c_o: f64,
    /// Monetised emissions, €.
    pub c_co2_eur: f64,
    /// Import emissions, kg CO2.
    pub co2_kg: f64,
    /// Electrolyser capital cost prorated to the horizon, €.
    pub c_c: f64,
    /// Weighted objective `α·C_CO2 + (1-α)·(C_e + C_o)`, €.
    pub c_alpha: f64,
}

impl CostBreakdown {
    pub fn add(&mut self, o: &CostBreakdown) {
        self.c_e += o.c_e;
        self.c_o += o.c_o;
        self.c_co2_eur += o.c_co2_eur;
        self.co2_kg += o.co2_kg;
        self.c_c += o.c_c;
        self.c_alpha += o.c_alpha;
    }
}

pub fn cost_components(result: &DispatchResult, slice: &ScenarioSlice, plant: &PlantConfig, alpha: f64) -> CostBreakdown {
    let dt = plant.delta_t;
    let op = plant.op_cost;
    let mut c = CostBreakdown::default();
    for t in 0..result.n_hours() {
        c.c_e += dt * (result.g5i[t] - result.g5e[t]) * slice.price[t];
        c.co2_kg += dt * result.g5i[t] * slice.co2_intensity[t];
        c.c_o += dt
            * (op.solar * result.g1[t]
                + op.wind * result.g2[t]
                + op.inverter * result.g3ac[t]
                + op.electrolyser * result.g4[t]
                + op.grid * (result.g5i[t] + result.g5e[t]));
    }
    c.c_co2_eur = plant.co2_price * c.co2_kg;
    c.c_c = plant.capital_cost(result.n_hours() as f64 * dt);
    c.c_alpha = alpha * c.c_co2_eur + (1.0 - alpha) * (c.c_e + c.c_o);
    c
}

const COLS_PER_HOUR: usize = 11;
const ROWS_PER_HOUR: usize = 9;

/// Carries the final basis of one `build_dispatch` problem over to another,
/// for use with [`crate::lp::Simplex::solve_from`]. Hour `t` of the new
/// problem inherits the statuses of hour `source_hour(t)` of the solved one;
/// hours without a source start with every column at zero. Mass rows are
/// matched in order.
pub fn transfer_basis(
    solved: &Basis,
    solved_hours: usize,
    target: &LpProblem,
    target_hours: usize,
    source_hour: impl Fn(usize) -> Option<usize>,
) -> Basis {
    let mut out = Basis {
        columns: vec![BasisStatus::AtLower; target.num_vars()],
        rows: vec![BasisStatus::Basic; target.num_constraints()],
    };
    let solved_cols = solved_hours * COLS_PER_HOUR;
    let solved_rows = solved_hours * ROWS_PER_HOUR;
    if solved.columns.len() != solved_cols || solved.rows.len() < solved_rows {
        return out;
    }
    for t in 0..target_hours {
        let Some(o) = source_hour(t).filter(|&o| o < solved_hours) else { continue };
        out.columns[t * COLS_PER_HOUR..(t + 1) * COLS_PER_HOUR]
            .copy_from_slice(&solved.columns[o * COLS_PER_HOUR..(o + 1) * COLS_PER_HOUR]);
        out.rows[t * ROWS_PER_HOUR..(t + 1) * ROWS_PER_HOUR]
            .copy_from_slice(&solved.rows[o * ROWS_PER_HOUR..(o + 1) * ROWS_PER_HOUR]);
    }
    let extra = &solved.rows[solved_rows..];
    for (k, &st) in extra.iter().enumerate() {
        if let Some(r) = out.rows.get_mut(target_hours * ROWS_PER_HOUR + k) {
            *r = st;
        }
    }
    out
}

/// Builds, solves and decodes a dispatch in one call.
pub fn solve_dispatch(
    slice: &ScenarioSlice,
    plant: &PlantConfig,
    f4_init: f64,
    alpha: f64,
    spec: &MassSpec,
) -> Result<DispatchResult, DispatchError> {
    let (p, v) = build_dispatch(slice, plant, f4_init, alpha, spec)?;
    let sol = p.solve();
    extract_flows(&sol, &v, slice, plant)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeseries::SliceOrigin;

    fn slice(solar: &[f64], wind: &[f64], price: &[f64], co2: &[f64]) -> ScenarioSlice {
        ScenarioSlice {
            origin: SliceOrigin::Synthetic,
            cf_solar: solar.to_vec(),
            cf_wind: wind.to_vec(),
            price: price.to_vec(),
            co2_intensity: co2.to_vec(),
        }
    }

    fn flat(n: usize, price: f64) -> ScenarioSlice {
        slice(&vec![0.0; n], &vec![0.0; n], &vec![price; n], &vec![100.0; n])
    }

    #[test]
    fn full_load_hour_from_grid() {
        let plant = PlantConfig::default();
        let s = flat(1, 40.0);
        let r = solve_dispatch(&s, &plant, 1.0, 0.0, &MassSpec::PlanFollow(vec![18.0])).unwrap();
        assert!((r.g4[0] - 1.0).abs() < 1e-9);
        assert!((r.g5i[0] - 1.0).abs() < 1e-9);
        assert!((r.m[0] - 18.0).abs() < 1e-9);
    }

    #[test]
    fn cold_start_cannot_reach_full_load() {
        let plant = PlantConfig::default();
        let (p, _) = build_dispatch(&flat(1, 40.0), &plant, 0.0, 0.0, &MassSpec::PlanFollow(vec![18.0])).unwrap();
        assert_eq!(p.solve().status, Status::Infeasible);
    }

    #[test]
    fn null_operation_when_nothing_is_required() {
        let plant = PlantConfig::default();
        let s = flat(5, 30.0);
        let spec = MassSpec::WindowTotal { mass: 0.0, sense: MassSense::Ge };
        let (p, v) = build_dispatch(&s, &plant, 0.0, 0.0, &spec).unwrap();
        let sol = p.solve();
        assert_eq!(sol.objective_value, 0.0);
        let r = extract_flows(&sol, &v, &s, &plant).unwrap();
        assert!(r.g4.iter().chain(&r.g5i).chain(&r.g5e).chain(&r.m).all(|&x| x == 0.0));
    }

    #[test]
    fn tampered_balance_is_detected() {
        let plant = PlantConfig::default();
        let s = flat(2, 40.0);
        let (p, v) = build_dispatch(&s, &plant, 1.0, 0.0, &MassSpec::PlanFollow(vec![18.0, 18.0])).unwrap();
        let mut sol = p.solve();
        sol.values[v.g5i[1].index()] = 0.5;
        assert!(matches!(
            extract_flows(&sol, &v, &s, &plant),
            Err(DispatchError::InternalConsistency { hour: 1, what: "AC bus balance", .. })
        ));
        sol.status = Status::Infeasible;
        assert!(matches!(extract_flows(&sol, &v, &s, &plant), Err(DispatchError::NotOptimal(Status::Infeasible))));
    }

    #[test]
    fn objective_matches_cost_report() {
        let plant = PlantConfig {
            op_cost: OpCosts { solar: 1.0, wind: 2.0, inverter: 0.5, electrolyser: 3.0, grid: 0.25 },
            ..Default::default()
        };
        let s = slice(&[0.0, 0.3, 0.8, 0.2], &[0.5, 0.1, 0.9, 0.4], &[50.0, -5.0, 10.0, 80.0], &[300.0, 20.0, 90.0, 400.0]);
        for alpha in [0.0, 0.3, 1.0] {
            let spec = MassSpec::WindowTotal { mass: 40.0, sense: MassSense::Eq };
            let (p, v) = build_dispatch(&s, &plant, 0.0, alpha, &spec).unwrap();
            let sol = p.solve();
            let r = extract_flows(&sol, &v, &s, &plant).unwrap();
            let c = cost_components(&r, &s, &plant, alpha);
            assert!((c.c_alpha - sol.objective_value).abs() <= 1e-9 * c.c_alpha.abs().max(1.0), "{alpha}");
            assert!((r.total_mass() - 40.0).abs() < 1e-9);
        }
    }

    #[test]
    fn cost_examples() {
        let plant = PlantConfig::default();
        let s = flat(1, 50.0);
        let mut r = DispatchResult {
            g1: vec![0.0],
            g1c: vec![0.0],
            g2: vec![0.0],
            g2c: vec![0.0],
            g3dc: vec![0.0],
            g3ac: vec![0.0],
            g4: vec![0.0],
            gh2: vec![0.0],
            g5i: vec![1.0],
            g5e: vec![0.0],
            m: vec![0.0],
            f4: vec![0.0],
        };
        let c = cost_components(&r, &s, &plant, 0.5);
        assert_eq!((c.c_e, c.co2_kg, c.c_co2_eur), (50.0, 100.0, 100.0));
        r.g5i[0] = 0.0;
        r.g5e[0] = 1.0;
        let c = cost_components(&r, &s, &plant, 0.5);
        assert_eq!((c.c_e, c.co2_kg), (-50.0, 0.0));
    }

    #[test]
    fn annuity_of_default_electrolyser() {
        let plant = PlantConfig::default();
        let expected = 700_000.0 * 0.07 / (1.0 - 1.07f64.powf(-10.0));
        assert!((plant.capital_cost(8760.0) - expected).abs() < 1e-6);
        assert!((expected - 99_662.0).abs() < 5.0);
    }

    #[test]
    fn spec_outside_horizon_is_rejected() {
        let plant = PlantConfig::default();
        let spec = MassSpec::PeriodTargets(vec![PeriodTarget { start: 0, end: 30, mass: 1.0 }]);
        assert!(matches!(build_dispatch(&flat(24, 1.0), &plant, 0.0, 0.0, &spec), Err(DispatchError::SpecOutOfRange { .. })));
        assert!(matches!(
            build_dispatch(&flat(24, 1.0), &plant, 1.5, 0.0, &MassSpec::Free),
            Err(DispatchError::InvalidInitialLevel(_))
        ));
    }
}
