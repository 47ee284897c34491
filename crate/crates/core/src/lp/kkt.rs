//! Optimality certificate checks for solved programs.

use super::{LpLabel, LpProblem, LpSolution};
use crate::error::{invalid, Result};

/// Max-norm KKT residuals of a primal/dual pair, plus the box-form diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct KktReport {
    pub stationarity_residual: f64,
    pub comp_slack_residual: f64,
    pub primal_infeas: f64,
    pub dual_infeas: f64,
    /// `(theta0, nu, theta1)` for box-form programs. `theta0` is the largest
    /// effective gradient over items with zero lower-bound multiplier,
    /// `theta1` the smallest over items with a positive one.
    pub nu_bracket: Option<(f64, f64, f64)>,
    /// Whether every defective has a positive upper-bound multiplier
    /// (box-form programs with ground truth only).
    pub prop1_condition: Option<bool>,
}

impl KktReport {
    pub fn max_residual(&self) -> f64 {
        self.stationarity_residual
            .max(self.comp_slack_residual)
            .max(self.primal_infeas)
            .max(self.dual_infeas)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual() <= tol
    }

    /// `theta0 - tol <= nu < theta1 + tol`; vacuous when not a box-form program.
    pub fn nu_bracket_holds(&self, tol: f64) -> bool {
        self.nu_bracket.is_none_or(|(t0, nu, t1)| t0 - tol <= nu && nu < t1 + tol)
    }
}

fn dot(a: &[f64], x: &[f64]) -> f64 {
    a.iter().zip(x).map(|(a, x)| a * x).sum()
}

/// Residuals of the KKT system of `problem` at `solution`. Multipliers below
/// `tol` count as zero when splitting items for the `nu` bracket.
pub fn kkt_check(
    problem: &LpProblem,
    solution: &LpSolution,
    defective_set: Option<&[usize]>,
    tol: f64,
) -> Result<KktReport> {
    if !solution.is_optimal() {
        return invalid("KKT check needs an optimal solution");
    }
    problem.validate()?;
    let n = problem.n();
    let (x, d) = (&solution.primal, &solution.duals);
    if x.len() != n
        || d.lower.len() != n
        || d.upper.len() != n
        || d.ub.len() != problem.a_ub.len()
        || d.eq.len() != problem.a_eq.len()
    {
        return invalid("solution dimensions do not match the problem");
    }

    let mut grad = problem.c.clone();
    for (row, w) in problem.a_ub.iter().zip(&d.ub).chain(problem.a_eq.iter().zip(&d.eq)) {
        for (g, a) in grad.iter_mut().zip(row) {
            *g += w * a;
        }
    }
    let stationarity = (0..n)
        .map(|j| (grad[j] - d.lower[j] + d.upper[j]).abs())
        .fold(0.0, f64::max);

    let mut primal_infeas = 0.0f64;
    let mut comp = 0.0f64;
    for j in 0..n {
        primal_infeas = primal_infeas.max(problem.lo[j] - x[j]).max(x[j] - problem.hi[j]);
        if problem.lo[j].is_finite() {
            comp = comp.max((d.lower[j] * (x[j] - problem.lo[j])).abs());
        } else {
            comp = comp.max(d.lower[j].abs());
        }
        if problem.hi[j].is_finite() {
            comp = comp.max((d.upper[j] * (problem.hi[j] - x[j])).abs());
        } else {
            comp = comp.max(d.upper[j].abs());
        }
    }
    for (row, (b, w)) in problem.a_ub.iter().zip(problem.b_ub.iter().zip(&d.ub)) {
        let slack = b - dot(row, x);
        primal_infeas = primal_infeas.max(-slack);
        comp = comp.max((w * slack).abs());
    }
    for (row, b) in problem.a_eq.iter().zip(&problem.b_eq) {
        primal_infeas = primal_infeas.max((dot(row, x) - b).abs());
    }
    let dual_infeas = d
        .ub
        .iter()
        .chain(&d.lower)
        .chain(&d.upper)
        .fold(0.0f64, |acc, v| acc.max(-v));

    let box_form = matches!(problem.label, LpLabel::Lp0a | LpLabel::Lp1 | LpLabel::Lp2);
    let (nu_bracket, prop1_condition) = if box_form && !d.ub.is_empty() {
        let nu = d.ub[0];
        // Effective gradient: objective plus covering-row terms, budget excluded.
        let g: Vec<f64> = (0..n).map(|j| grad[j] - nu * problem.a_ub[0][j]).collect();
        let mut theta0 = f64::NEG_INFINITY;
        let mut theta1 = f64::INFINITY;
        for j in 0..n {
            if d.lower[j] > tol {
                theta1 = theta1.min(g[j]);
            } else {
                theta0 = theta0.max(g[j]);
            }
        }
        let prop = defective_set.map(|sd| sd.iter().all(|&i| i < n && d.upper[i] > tol));
        (Some((theta0, nu, theta1)), prop)
    } else {
        (None, None)
    };

    Ok(KktReport {
        stationarity_residual: stationarity,
        comp_slack_residual: comp,
        primal_infeas: primal_infeas.max(0.0),
        dual_infeas: dual_infeas.max(0.0),
        nu_bracket,
        prop1_condition,
    })
}
