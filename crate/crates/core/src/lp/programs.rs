//! Program builders and the LP decoders.

use super::simplex::solve_lp;
use super::{LpDuals, LpLabel, LpProblem, LpSolution, LpStatus};
use crate::decoders::{design_stats, pool_counts, psi0_prime, select_indices, DecodeFlags, Keep, RecoveredSet, TieRule};
use crate::error::{invalid, Error, Result};
use crate::model::Instance;

/// Covering-row slack for the positive-pool program.
pub const DEFAULT_EPS0: f64 = 0.01;
/// Primal entries closer than this are tied for selection.
pub const PRIMAL_TIE_TOL: f64 = 1e-7;
const SOLVER_TOL: f64 = 1e-9;

fn check_l(instance: &Instance, l: usize) -> Result<()> {
    if l > instance.n() {
        return invalid(format!("L = {l} exceeds N = {}", instance.n()));
    }
    Ok(())
}

/// Box form over `z in [0, 1]^N` with budget row `-1^T z <= -(N - L)` and the given objective.
fn box_form(c: Vec<f64>, l: usize, label: LpLabel) -> LpProblem {
    let n = c.len();
    let mut p = LpProblem::unit_box(c, label);
    p.a_ub.push(vec![-1.0; n]);
    p.b_ub.push(-((n - l) as f64));
    p
}

/// Negative-pool program in its original form: variables `(z, eta)`, where
/// `z` is the confidence that an item is non-defective and `eta` holds the
/// per-pool mass `X_z (1 - z)`.
pub fn build_lp0(instance: &Instance, l: usize) -> Result<LpProblem> {
    check_l(instance, l)?;
    let n = instance.n();
    let x = instance.design.matrix();
    let negs: Vec<usize> = instance.negatives().ones().collect();
    let mz = negs.len();
    let mut c = vec![0.0; n + mz];
    c[n..].iter_mut().for_each(|v| *v = 1.0);
    let mut p = LpProblem::unit_box(c, LpLabel::Lp0);
    p.hi[n..].iter_mut().for_each(|v| *v = f64::INFINITY);
    for (k, &r) in negs.iter().enumerate() {
        // X_r z + eta_r = X_r 1
        let mut row = vec![0.0; n + mz];
        for i in x.row_support(r) {
            row[i] = 1.0;
        }
        row[n + k] = 1.0;
        p.a_eq.push(row);
        p.b_eq.push(x.row_weight(r) as f64);
    }
    let mut budget = vec![0.0; n + mz];
    budget[..n].iter_mut().for_each(|v| *v = 1.0);
    p.a_ub.push(budget);
    p.b_ub.push(l as f64);
    Ok(p)
}

/// Box form of the negative-pool program: minimize `1^T X_z z` with
/// `0 <= z <= 1`, `1^T z >= N - L`. Here `z` is the confidence that an item is defective.
pub fn build_lp0a(instance: &Instance, l: usize) -> Result<LpProblem> {
    check_l(instance, l)?;
    let c = pool_counts(instance).into_iter().map(|(neg, _)| neg as f64).collect();
    Ok(box_form(c, l, LpLabel::Lp0a))
}

/// Box form plus, for every positive pool with nonempty support, the row
/// `X_r z >= 1 - eps0`. Returns the program and the number of positive pools
/// dropped for having no items.
pub fn build_lp1(instance: &Instance, l: usize, eps0: f64) -> Result<(LpProblem, usize)> {
    if !(eps0 > 0.0 && eps0 < 1.0) {
        return invalid(format!("eps0 = {eps0} outside (0, 1)"));
    }
    let mut p = build_lp0a(instance, l)?;
    p.label = LpLabel::Lp1;
    let x = instance.design.matrix();
    let mut dropped = 0;
    for r in instance.positives().ones() {
        if x.row_weight(r) == 0 {
            dropped += 1;
            continue;
        }
        let mut row = vec![0.0; instance.n()];
        for i in x.row_support(r) {
            row[i] = -1.0;
        }
        p.a_ub.push(row);
        p.b_ub.push(-(1.0 - eps0));
    }
    Ok((p, dropped))
}

/// Box form with objective coefficient `negcount(i) - psi_lp * poscount(i)`.
pub fn build_lp2(instance: &Instance, l: usize, psi_lp: f64) -> Result<LpProblem> {
    check_l(instance, l)?;
    if !(psi_lp >= 0.0 && psi_lp.is_finite()) {
        return invalid(format!("psi_lp = {psi_lp} must be finite and >= 0"));
    }
    let c = pool_counts(instance)
        .into_iter()
        .map(|(neg, pos)| neg as f64 - psi_lp * pos as f64)
        .collect();
    Ok(box_form(c, l, LpLabel::Lp2))
}

/// A decoded set with the program and solution behind it.
#[derive(Clone, Debug)]
pub struct LpDecode {
    pub set: RecoveredSet,
    pub problem: LpProblem,
    pub solution: LpSolution,
}

fn require_optimal(sol: &LpSolution) -> Result<()> {
    if sol.is_optimal() {
        Ok(())
    } else {
        Err(Error::Numerical {
            reason: format!("box-form program reported {:?}", sol.status),
            iterations: sol.iterations,
            best_iterate: sol.primal.clone(),
        })
    }
}

/// The `l` smallest primal entries. An all-zero objective leaves the primal
/// arbitrary, so the choice then falls entirely to the tie rule.
fn select_smallest(
    instance: &Instance,
    problem: &LpProblem,
    solution: &LpSolution,
    l: usize,
    rule: TieRule,
    tie_seed: u64,
) -> Result<RecoveredSet> {
    let flat = problem.c.iter().all(|&c| c == 0.0);
    let items = if flat {
        select_indices(&vec![0.0; instance.n()], l, Keep::Smallest, 0.0, rule, tie_seed)?
    } else {
        select_indices(&solution.primal, l, Keep::Smallest, PRIMAL_TIE_TOL, rule, tie_seed)?
    };
    let flags = DecodeFlags {
        no_negatives: instance.negatives().count_ones() == 0,
        ..DecodeFlags::default()
    };
    Ok(RecoveredSet { items, flags })
}

fn solve_box(instance: &Instance, problem: LpProblem, l: usize, rule: TieRule, tie_seed: u64) -> Result<LpDecode> {
    let solution = solve_lp(&problem, SOLVER_TOL)?;
    require_optimal(&solution)?;
    let set = select_smallest(instance, &problem, &solution, l, rule, tie_seed)?;
    Ok(LpDecode { set, problem, solution })
}

pub fn lp_rolpal(instance: &Instance, l: usize, rule: TieRule, tie_seed: u64) -> Result<LpDecode> {
    solve_box(instance, build_lp0a(instance, l)?, l, rule, tie_seed)
}

pub fn decode_rolpal(instance: &Instance, l: usize, rule: TieRule, tie_seed: u64) -> Result<RecoveredSet> {
    lp_rolpal(instance, l, rule, tie_seed).map(|d| d.set)
}

/// Solve a covering program by adding violated rows to a working set until
/// the working optimum satisfies every row. Rows never added get zero
/// multipliers, so the result is an optimal primal/dual pair of `full`.
fn solve_by_row_generation(full: &LpProblem) -> Result<LpSolution> {
    let mut active: Vec<usize> = vec![0];
    let mut iterations = 0;
    loop {
        let mut sub = LpProblem { a_ub: Vec::new(), b_ub: Vec::new(), ..full.clone() };
        for &r in &active {
            sub.a_ub.push(full.a_ub[r].clone());
            sub.b_ub.push(full.b_ub[r]);
        }
        let mut sol = solve_lp(&sub, SOLVER_TOL)?;
        iterations += sol.iterations;
        sol.iterations = iterations;
        if !sol.is_optimal() {
            return Ok(sol);
        }
        let mut is_active = vec![false; full.a_ub.len()];
        active.iter().for_each(|&r| is_active[r] = true);
        let violated: Vec<usize> = (0..full.a_ub.len())
            .filter(|&r| {
                !is_active[r] && {
                    let lhs: f64 = full.a_ub[r].iter().zip(&sol.primal).map(|(a, x)| a * x).sum();
                    lhs > full.b_ub[r] + SOLVER_TOL
                }
            })
            .collect();
        if violated.is_empty() {
            let mut ub = vec![0.0; full.a_ub.len()];
            for (k, &r) in active.iter().enumerate() {
                ub[r] = sol.duals.ub[k];
            }
            sol.duals = LpDuals { ub, ..sol.duals };
            return Ok(sol);
        }
        active.extend(violated);
        active.sort_unstable();
    }
}

fn rolpalpp_from(instance: &Instance, problem: LpProblem, l: usize, rule: TieRule, tie_seed: u64) -> Result<LpDecode> {
    let solution = solve_by_row_generation(&problem)?;
    match solution.status {
        LpStatus::Optimal => {
            let set = select_smallest(instance, &problem, &solution, l, rule, tie_seed)?;
            Ok(LpDecode { set, problem, solution })
        }
        LpStatus::Infeasible => {
            log::debug!("covering program infeasible; falling back to the negative-pool program");
            let mut fallback = lp_rolpal(instance, l, rule, tie_seed)?;
            fallback.set.flags.lp_fallback = true;
            Ok(fallback)
        }
        LpStatus::Unbounded => require_optimal(&solution).map(|_| unreachable!()),
    }
}

pub fn lp_rolpalpp(instance: &Instance, l: usize, eps0: f64, rule: TieRule, tie_seed: u64) -> Result<LpDecode> {
    let (problem, dropped) = build_lp1(instance, l, eps0)?;
    if dropped > 0 {
        log::trace!("dropped {dropped} positive pools with empty support");
    }
    rolpalpp_from(instance, problem, l, rule, tie_seed)
}

pub fn decode_rolpalpp(
    instance: &Instance,
    l: usize,
    eps0: f64,
    rule: TieRule,
    tie_seed: u64,
) -> Result<RecoveredSet> {
    lp_rolpalpp(instance, l, eps0, rule, tie_seed).map(|d| d.set)
}

/// Column-weighted LP decoder. Without an explicit weight, uses `psi0_prime`
/// of the design's channel statistics with the instance's defective count.
pub fn lp_colpal(
    instance: &Instance,
    l: usize,
    psi_lp: Option<f64>,
    rule: TieRule,
    tie_seed: u64,
) -> Result<LpDecode> {
    let psi = match psi_lp {
        Some(psi) => psi,
        None => match design_stats(instance, instance.k())? {
            Some(stats) => psi0_prime(&stats)?,
            None => 0.0,
        },
    };
    solve_box(instance, build_lp2(instance, l, psi)?, l, rule, tie_seed)
}

pub fn decode_colpal(
    instance: &Instance,
    l: usize,
    psi_lp: Option<f64>,
    rule: TieRule,
    tie_seed: u64,
) -> Result<RecoveredSet> {
    lp_colpal(instance, l, psi_lp, rule, tie_seed).map(|d| d.set)
}
