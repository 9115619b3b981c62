//! A small, deterministic linear-programming toolkit.
//!
//! Problems are built incrementally with [`LpProblem`] and solved with the
//! bundled bounded-variable revised simplex ([`Simplex`]). Any other solver can
//! be plugged in by implementing [`LpSolver`].
//!
//! Every problem is a minimisation (a maximisation objective is negated
//! internally and the reported objective value is given in the caller's sense).

mod format;
mod lu;
mod presolve;
mod simplex;

use std::fmt;

use thiserror::Error;

pub use simplex::{Pricing, Simplex, SimplexOptions};

/// Handle to a column of an [`LpProblem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub(crate) usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Handle to a row of an [`LpProblem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RowId(pub(crate) usize);

impl RowId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Direction {
    #[default]
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    /// The pivot budget was exhausted before optimality was proven.
    IterationLimit,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("invalid bounds: lower {lower} exceeds upper {upper}")]
    InvalidBounds { lower: f64, upper: f64 },
    #[error("unknown variable index {0}")]
    UnknownVariable(usize),
    #[error("non-finite coefficient {value} on variable {var}")]
    NonFinite { var: usize, value: f64 },
}

#[derive(Debug, Clone)]
pub(crate) struct Row {
    pub(crate) terms: Vec<(usize, f64)>,
    pub(crate) sense: Sense,
    pub(crate) rhs: f64,
}

/// A linear program `min c·x` subject to sparse rows and column bounds.
#[derive(Debug, Clone, Default)]
pub struct LpProblem {
    pub(crate) lower: Vec<f64>,
    pub(crate) upper: Vec<f64>,
    pub(crate) names: Vec<Option<String>>,
    pub(crate) rows: Vec<Row>,
    pub(crate) objective: Vec<f64>,
    pub(crate) direction: Direction,
}

impl LpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.lower.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.rows.len()
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Appends a column with the given bounds. Either bound may be infinite.
    pub fn add_variable(&mut self, lower: f64, upper: f64) -> Result<Var, LpError> {
        if lower.is_nan() || upper.is_nan() || lower > upper || lower == f64::INFINITY || upper == f64::NEG_INFINITY {
            return Err(LpError::InvalidBounds { lower, upper });
        }
        self.lower.push(lower);
        self.upper.push(upper);
        self.names.push(None);
        self.objective.push(0.0);
        Ok(Var(self.lower.len() - 1))
    }

    pub fn add_named_variable(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> Result<Var, LpError> {
        let v = self.add_variable(lower, upper)?;
        self.names[v.0] = Some(name.into());
        Ok(v)
    }

    pub fn var(&self, index: usize) -> Result<Var, LpError> {
        if index < self.num_vars() {
            Ok(Var(index))
        } else {
            Err(LpError::UnknownVariable(index))
        }
    }

    pub fn bounds(&self, var: Var) -> (f64, f64) {
        (self.lower[var.0], self.upper[var.0])
    }

    pub fn set_bounds(&mut self, var: Var, lower: f64, upper: f64) -> Result<(), LpError> {
        self.check_var(var.0)?;
        if lower.is_nan() || upper.is_nan() || lower > upper {
            return Err(LpError::InvalidBounds { lower, upper });
        }
        self.lower[var.0] = lower;
        self.upper[var.0] = upper;
        Ok(())
    }

    /// Appends the row `Σ coef·var (sense) rhs`. Repeated variables are summed.
    pub fn add_constraint(&mut self, terms: &[(Var, f64)], sense: Sense, rhs: f64) -> Result<RowId, LpError> {
        let terms = self.normalise_terms(terms)?;
        if !rhs.is_finite() {
            return Err(LpError::NonFinite { var: usize::MAX, value: rhs });
        }
        self.rows.push(Row { terms, sense, rhs });
        Ok(RowId(self.rows.len() - 1))
    }

    /// Replaces the objective. Variables not mentioned get a zero coefficient.
    pub fn set_objective(&mut self, terms: &[(Var, f64)], direction: Direction) -> Result<(), LpError> {
        let terms = self.normalise_terms(terms)?;
        self.objective.iter_mut().for_each(|c| *c = 0.0);
        for (j, c) in terms {
            self.objective[j] = c;
        }
        self.direction = direction;
        Ok(())
    }

    pub fn objective_coefficient(&self, var: Var) -> f64 {
        self.objective[var.0]
    }

    /// Evaluates the objective (in the problem's own direction) at `values`.
    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().zip(values).map(|(c, x)| c * x).sum()
    }

    /// Largest bound and row violations of a candidate point.
    pub fn violations(&self, values: &[f64]) -> Violations {
        let mut v = Violations::default();
        for (j, &x) in values.iter().enumerate() {
            let excess = (self.lower[j] - x).max(x - self.upper[j]).max(0.0);
            v.bound = v.bound.max(excess);
        }
        for row in &self.rows {
            let activity: f64 = row.terms.iter().map(|&(j, a)| a * values[j]).sum();
            let scale: f64 = row.terms.iter().map(|&(j, a)| (a * values[j]).abs()).fold(row.rhs.abs(), f64::max).max(1.0);
            let diff = match row.sense {
                Sense::Le => (activity - row.rhs).max(0.0),
                Sense::Ge => (row.rhs - activity).max(0.0),
                Sense::Eq => (activity - row.rhs).abs(),
            };
            v.row_absolute = v.row_absolute.max(diff);
            v.row_relative = v.row_relative.max(diff / scale);
        }
        v
    }

    /// Solves with the default [`Simplex`] configuration.
    pub fn solve(&self) -> LpSolution {
        Simplex::default().solve(self)
    }

    /// Writes the problem in CPLEX-style LP text. See [`LpProblem::to_lp_string`].
    pub fn write_lp(&self, out: &mut impl std::io::Write) -> std::io::Result<()> {
        out.write_all(self.to_lp_string().as_bytes())
    }

    fn check_var(&self, j: usize) -> Result<(), LpError> {
        if j < self.num_vars() {
            Ok(())
        } else {
            Err(LpError::UnknownVariable(j))
        }
    }

    fn normalise_terms(&self, terms: &[(Var, f64)]) -> Result<Vec<(usize, f64)>, LpError> {
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
        for &(v, c) in terms {
            self.check_var(v.0)?;
            if !c.is_finite() {
                return Err(LpError::NonFinite { var: v.0, value: c });
            }
            out.push((v.0, c));
        }
        out.sort_by_key(|t| t.0);
        out.dedup_by(|next, kept| {
            if next.0 == kept.0 {
                kept.1 += next.1;
                true
            } else {
                false
            }
        });
        out.retain(|t| t.1 != 0.0);
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Violations {
    pub bound: f64,
    pub row_absolute: f64,
    pub row_relative: f64,
}

/// Position of a column, or of a row's slack, relative to the basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisStatus {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable resting at zero.
    Zero,
}

/// Final basis of a solve, one status per column and per row.
///
/// Passing it (or an edited copy for a similar problem) to
/// [`Simplex::solve_from`] starts the simplex from that basis instead of the
/// default crash basis.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Basis {
    pub columns: Vec<BasisStatus>,
    pub rows: Vec<BasisStatus>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: Status,
    pub values: Vec<f64>,
    pub objective_value: f64,
    /// Simplex pivots (including bound flips) spent on the reduced problem.
    pub iterations: usize,
    pub basis: Basis,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    pub fn value(&self, var: Var) -> f64 {
        self.values[var.0]
    }
}

/// Seam for plugging in an alternative LP backend.
pub trait LpSolver {
    fn solve(&self, problem: &LpProblem) -> LpSolution;

    /// Warm-started solve; backends without warm starts just solve.
    fn solve_from(&self, problem: &LpProblem, hint: &Basis) -> LpSolution {
        let _ = hint;
        self.solve(problem)
    }
}

impl LpSolver for Simplex {
    fn solve(&self, problem: &LpProblem) -> LpSolution {
        Simplex::solve(self, problem)
    }

    fn solve_from(&self, problem: &LpProblem, hint: &Basis) -> LpSolution {
        Simplex::solve_from(self, problem, hint)
    }
}
