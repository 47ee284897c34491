//! Linear programming relaxations of the selection problem.
//!
//! [`solve_lp`] is a dense bounded-variable primal simplex that reports dual
//! multipliers alongside the primal point. The builders transcribe the
//! negative-pool program (and its box-form equivalent), the variant with
//! positive-pool covering rows, and the column-weighted variant. The three LP
//! decoders select the `L` smallest entries of the box-form solution.

mod dump;
mod kkt;
mod programs;
mod simplex;

pub use dump::write_lp;
pub use kkt::{kkt_check, KktReport};
pub use programs::{
    build_lp0, build_lp0a, build_lp1, build_lp2, decode_colpal, decode_rolpal, decode_rolpalpp, lp_colpal,
    lp_rolpal, lp_rolpalpp, LpDecode, DEFAULT_EPS0, PRIMAL_TIE_TOL,
};
pub use simplex::{solve_lp, solve_lp_with, SolveOptions};

use crate::error::{invalid, Result};

/// Which program a [`LpProblem`] transcribes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LpLabel {
    /// Negative-pool program with slack variables `eta` (`z` = confidence non-defective).
    Lp0,
    /// Box form: `z` = confidence defective, budget row `1^T z >= N - L`.
    Lp0a,
    /// Box form plus one covering row per positive pool.
    Lp1,
    /// Box form with column-weighted objective.
    Lp2,
    Generic,
}

/// `minimize c^T x` subject to `A_eq x = b_eq`, `A_ub x <= b_ub`, `lo <= x <= hi`.
///
/// Bounds may be infinite (`lo = -inf`, `hi = +inf`).
#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem {
    pub c: Vec<f64>,
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
    pub a_ub: Vec<Vec<f64>>,
    pub b_ub: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub label: LpLabel,
}

impl LpProblem {
    /// Problem with `n` variables boxed in `[0, 1]` and no rows.
    pub fn unit_box(c: Vec<f64>, label: LpLabel) -> Self {
        let n = c.len();
        Self {
            c,
            a_eq: Vec::new(),
            b_eq: Vec::new(),
            a_ub: Vec::new(),
            b_ub: Vec::new(),
            lo: vec![0.0; n],
            hi: vec![1.0; n],
            label,
        }
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if self.lo.len() != n || self.hi.len() != n {
            return invalid(format!("bounds have lengths {}/{}, expected {n}", self.lo.len(), self.hi.len()));
        }
        if self.a_eq.len() != self.b_eq.len() || self.a_ub.len() != self.b_ub.len() {
            return invalid("constraint matrix and right-hand side disagree in row count");
        }
        if let Some(r) = self.a_eq.iter().chain(&self.a_ub).position(|row| row.len() != n) {
            return invalid(format!("constraint row {r} does not have {n} entries"));
        }
        let coeffs = self.c.iter().chain(self.b_eq.iter()).chain(self.b_ub.iter());
        if coeffs.chain(self.a_eq.iter().flatten()).chain(self.a_ub.iter().flatten()).any(|v| !v.is_finite()) {
            return invalid("non-finite coefficient");
        }
        for j in 0..n {
            let (lo, hi) = (self.lo[j], self.hi[j]);
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return invalid(format!("bad bounds [{lo}, {hi}] on variable {j}"));
            }
        }
        Ok(())
    }

    /// Largest absolute coefficient (objective, rows, right-hand sides, finite bounds).
    pub fn scale(&self) -> f64 {
        let rows = self.a_eq.iter().chain(&self.a_ub).flatten();
        let bounds = self.lo.iter().chain(&self.hi).filter(|v| v.is_finite());
        self.c
            .iter()
            .chain(&self.b_eq)
            .chain(&self.b_ub)
            .chain(rows)
            .chain(bounds)
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.c.iter().zip(x).map(|(c, x)| c * x).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Multipliers in the convention
/// `c + A_ub^T ub + A_eq^T eq - lower + upper = 0`, with `ub, lower, upper >= 0`.
///
/// For the box-form programs `ub[0]` is the budget multiplier `nu`, the
/// remaining `ub` entries are the covering-row multipliers `mu`, `lower` is
/// `lambda_1` and `upper` is `lambda_2`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LpDuals {
    pub eq: Vec<f64>,
    pub ub: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal: Vec<f64>,
    pub objective_value: f64,
    /// Empty unless `status` is optimal.
    pub duals: LpDuals,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// Budget multiplier of a box-form program.
    pub fn nu(&self) -> Option<f64> {
        self.duals.ub.first().copied()
    }
}
