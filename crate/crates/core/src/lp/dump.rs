//! Plain-text program dump for cross-checking with external solvers.
//!
//! ```text
//! lp <label> <n> <rows_eq> <rows_ub>
//! min c_1 ... c_n
//! eq a_1 ... a_n = b
//! ub a_1 ... a_n <= b
//! bounds lo_1 hi_1 ... lo_n hi_n
//! ```
//!
//! Numbers use Rust's shortest round-trip formatting; infinite bounds print as `inf`/`-inf`.

use std::io::Write;

use super::LpProblem;
use crate::error::Result;

fn join(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(" ")
}

pub fn write_lp<W: Write>(problem: &LpProblem, mut w: W) -> Result<()> {
    writeln!(
        w,
        "lp {:?} {} {} {}",
        problem.label,
        problem.n(),
        problem.a_eq.len(),
        problem.a_ub.len()
    )?;
    writeln!(w, "min {}", join(&problem.c))?;
    for (row, b) in problem.a_eq.iter().zip(&problem.b_eq) {
        writeln!(w, "eq {} = {b:?}", join(row))?;
    }
    for (row, b) in problem.a_ub.iter().zip(&problem.b_ub) {
        writeln!(w, "ub {} <= {b:?}", join(row))?;
    }
    let bounds: Vec<f64> = problem.lo.iter().zip(&problem.hi).flat_map(|(l, h)| [*l, *h]).collect();
    writeln!(w, "bounds {}", join(&bounds))?;
    Ok(())
}
