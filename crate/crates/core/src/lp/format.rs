//! CPLEX-style LP text output.
//!
//! Grammar of the emitted text (one item per line, `\` starts a comment):
//!
//! ```text
//! file      := comment* sense objective "Subject To" row* "Bounds" bound* "End"
//! sense     := "Minimize" | "Maximize"
//! objective := " obj:" terms
//! row       := " c<index>:" terms op number
//! bound     := " " number "<=" name "<=" number
//!            | " " name ">=" number | " " name "<=" number | " " name "free"
//!            | " " name "=" number
//! terms     := ( ("+" | "-") number name )*   (empty terms are written as "0 x0")
//! op        := "<=" | "=" | ">="
//! name      := variable name, or "x<index>" when unnamed
//! ```
//!
//! Numbers use Rust's shortest round-trip formatting, so values survive a
//! text round-trip exactly. Columns with bounds `[0, +inf)` are omitted from
//! the `Bounds` section, which matches the LP-format default.

use std::fmt::Write;

use super::{Direction, LpProblem};

impl LpProblem {
    fn column_name(&self, j: usize) -> String {
        match &self.names[j] {
            Some(n) => n.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '.' { c } else { '_' }).collect(),
            None => format!("x{j}"),
        }
    }

    fn write_terms(&self, out: &mut String, terms: impl Iterator<Item = (usize, f64)>) {
        let mut any = false;
        for (j, c) in terms {
            if c == 0.0 {
                continue;
            }
            let sign = if c < 0.0 { '-' } else { '+' };
            let _ = write!(out, " {sign} {} {}", c.abs(), self.column_name(j));
            any = true;
        }
        if !any {
            let _ = write!(out, " 0 x0");
        }
    }

    /// Renders the problem as LP text for cross-checking with external solvers.
    pub fn to_lp_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "\\ {} variables, {} constraints", self.num_vars(), self.num_constraints());
        out.push_str(match self.direction {
            Direction::Minimize => "Minimize\n",
            Direction::Maximize => "Maximize\n",
        });
        out.push_str(" obj:");
        self.write_terms(&mut out, self.objective.iter().copied().enumerate());
        out.push_str("\nSubject To\n");
        for (i, row) in self.rows.iter().enumerate() {
            let _ = write!(out, " c{i}:");
            self.write_terms(&mut out, row.terms.iter().copied());
            let _ = writeln!(out, " {} {}", row.sense, row.rhs);
        }
        out.push_str("Bounds\n");
        for j in 0..self.num_vars() {
            let (l, u) = (self.lower[j], self.upper[j]);
            let name = self.column_name(j);
            match (l.is_finite(), u.is_finite()) {
                (true, true) if l == u => {
                    let _ = writeln!(out, " {name} = {l}");
                }
                (true, true) => {
                    let _ = writeln!(out, " {l} <= {name} <= {u}");
                }
                (true, false) if l == 0.0 => {}
                (true, false) => {
                    let _ = writeln!(out, " {name} >= {l}");
                }
                (false, true) => {
                    let _ = writeln!(out, " -inf <= {name} <= {u}");
                }
                (false, false) => {
                    let _ = writeln!(out, " {name} free");
                }
            }
        }
        out.push_str("End\n");
        out
    }
}
