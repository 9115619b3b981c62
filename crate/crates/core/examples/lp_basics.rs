//! The bundled simplex on a small production problem, plus a warm restart.

use h2plan::lp::{Direction, LpProblem, Sense};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Two products sharing two machines.
    let mut p = LpProblem::new();
    let x = p.add_named_variable("x", 0.0, f64::INFINITY)?;
    let y = p.add_named_variable("y", 0.0, 3.0)?;
    p.add_constraint(&[(x, 1.0), (y, 1.0)], Sense::Le, 4.0)?;
    p.add_constraint(&[(x, 1.0), (y, 3.0)], Sense::Le, 6.0)?;
    p.set_objective(&[(x, 3.0), (y, 5.0)], Direction::Maximize)?;

    let sol = p.solve();
    println!("{:?}: x = {}, y = {}, objective {}", sol.status, sol.value(x), sol.value(y), sol.objective_value);
    println!("{} pivots", sol.iterations);

    let mut text = Vec::new();
    p.write_lp(&mut text)?;
    println!("{}", String::from_utf8(text)?);

    // Tighten a row and restart from the old basis.
    p.add_constraint(&[(x, 1.0)], Sense::Le, 2.5)?;
    let mut hint = sol.basis.clone();
    hint.rows.push(h2plan::lp::BasisStatus::Basic);
    let again = h2plan::lp::Simplex::default().solve_from(&p, &hint);
    println!("after x <= 2.5: objective {} in {} pivots", again.objective_value, again.iterations);
    Ok(())
}
