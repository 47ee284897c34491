//! Dense bounded-variable primal simplex.
//!
//! Rows are brought to equality form with one slack per `<=` row. Phase 1
//! adds artificials only where the starting point violates a row and
//! minimizes their sum; phase 2 keeps them pinned at zero. Pricing is Dantzig
//! (largest reduced cost) and switches to Bland's rule after a run of
//! degenerate steps. The tableau is rebuilt from the original data every
//! [`REFACTOR_EVERY`] pivots and before optimality is declared, so reported
//! primal values and duals come from a fresh factorization.

use super::{LpDuals, LpProblem, LpSolution, LpStatus};
use crate::error::{invalid, Error, Result};

const REFACTOR_EVERY: usize = 50;
const BLAND_AFTER: usize = 40;
const PIVOT_TOL: f64 = 1e-9;
const STEP_TIE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    /// Optimality and feasibility tolerance, relative to `1 + problem scale`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 100_000 }
    }
}

pub fn solve_lp(problem: &LpProblem, tol: f64) -> Result<LpSolution> {
    solve_lp_with(problem, &SolveOptions { tol, ..SolveOptions::default() })
}

pub fn solve_lp_with(problem: &LpProblem, opts: &SolveOptions) -> Result<LpSolution> {
    if !(opts.tol > 0.0 && opts.tol < 1.0) {
        return invalid(format!("tolerance {} outside (0, 1)", opts.tol));
    }
    problem.validate()?;
    Tableau::new(problem, *opts).solve()
}

enum Outcome {
    Optimal,
    Unbounded,
}

struct Tableau<'a> {
    p: &'a LpProblem,
    opts: SolveOptions,
    m: usize,
    n: usize,
    n_ub: usize,
    ncol: usize,
    first_art: usize,
    /// Original constraint matrix, `m x ncol`, row-major.
    a: Vec<f64>,
    b: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cost: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    /// `B^{-1} A`, `m x ncol`.
    tab: Vec<f64>,
    /// `B^{-1}`, `m x m`, valid right after a refactor.
    binv: Vec<f64>,
    iterations: usize,
    since_refactor: usize,
    dtol: f64,
}

fn start_value(lo: f64, hi: f64) -> f64 {
    if lo.is_finite() {
        lo
    } else if hi.is_finite() {
        hi
    } else {
        0.0
    }
}

impl<'a> Tableau<'a> {
    fn new(p: &'a LpProblem, opts: SolveOptions) -> Self {
        let n = p.n();
        let n_ub = p.a_ub.len();
        let m = n_ub + p.a_eq.len();
        let row = |i: usize| if i < n_ub { (&p.a_ub[i], p.b_ub[i]) } else { (&p.a_eq[i - n_ub], p.b_eq[i - n_ub]) };

        let x0: Vec<f64> = (0..n).map(|j| start_value(p.lo[j], p.hi[j])).collect();
        let resid: Vec<f64> = (0..m)
            .map(|i| {
                let (ai, bi) = row(i);
                bi - ai.iter().zip(&x0).map(|(a, x)| a * x).sum::<f64>()
            })
            .collect();
        let needs_art: Vec<usize> = (0..m).filter(|&i| i >= n_ub || resid[i] < 0.0).collect();

        let first_art = n + n_ub;
        let ncol = first_art + needs_art.len();
        let mut a = vec![0.0; m * ncol];
        let mut b = vec![0.0; m];
        for i in 0..m {
            let (ai, bi) = row(i);
            a[i * ncol..i * ncol + n].copy_from_slice(ai);
            b[i] = bi;
            if i < n_ub {
                a[i * ncol + n + i] = 1.0;
            }
        }
        let mut lo = p.lo.clone();
        let mut hi = p.hi.clone();
        lo.extend(std::iter::repeat_n(0.0, ncol - n));
        hi.extend(std::iter::repeat_n(f64::INFINITY, ncol - n));
        let mut x = x0;
        x.extend(std::iter::repeat_n(0.0, ncol - n));

        let mut basis: Vec<usize> = (0..m).map(|i| n + i).collect();
        for (k, &i) in needs_art.iter().enumerate() {
            let col = first_art + k;
            a[i * ncol + col] = if resid[i] >= 0.0 { 1.0 } else { -1.0 };
            basis[i] = col;
        }
        for i in 0..m {
            x[basis[i]] = resid[i].abs();
        }
        let mut is_basic = vec![false; ncol];
        for &j in &basis {
            is_basic[j] = true;
        }
        let mut tab = vec![0.0; m * ncol];
        // The starting basis is a signed identity.
        for i in 0..m {
            let s = a[i * ncol + basis[i]];
            for j in 0..ncol {
                tab[i * ncol + j] = a[i * ncol + j] * s;
            }
        }
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            binv[i * m + i] = a[i * ncol + basis[i]];
        }

        let cscale = p.c.iter().fold(0.0f64, |acc, c| acc.max(c.abs()));
        Self {
            p,
            opts,
            m,
            n,
            n_ub,
            ncol,
            first_art,
            a,
            b,
            lo,
            hi,
            cost: vec![0.0; ncol],
            x,
            basis,
            is_basic,
            tab,
            binv,
            iterations: 0,
            since_refactor: 0,
            dtol: opts.tol * (1.0 + cscale),
        }
    }

    fn solve(mut self) -> Result<LpSolution> {
        if self.first_art < self.ncol {
            for j in self.first_art..self.ncol {
                self.cost[j] = 1.0;
            }
            let saved = self.dtol;
            self.dtol = self.opts.tol;
            if let Outcome::Unbounded = self.run()? {
                return Err(self.numerical("phase 1 reported an unbounded direction"));
            }
            self.dtol = saved;
            let bscale = self.b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            let infeas: f64 = (self.first_art..self.ncol).map(|j| self.x[j]).sum();
            if infeas > 100.0 * self.opts.tol * (1.0 + bscale) {
                return Ok(LpSolution {
                    status: LpStatus::Infeasible,
                    primal: self.x[..self.n].to_vec(),
                    objective_value: f64::NAN,
                    duals: LpDuals::default(),
                    iterations: self.iterations,
                });
            }
            for j in self.first_art..self.ncol {
                self.hi[j] = 0.0;
                self.cost[j] = 0.0;
                if !self.is_basic[j] {
                    self.x[j] = 0.0;
                }
            }
        }
        self.cost[..self.n].copy_from_slice(&self.p.c);
        match self.run()? {
            Outcome::Unbounded => Ok(LpSolution {
                status: LpStatus::Unbounded,
                primal: self.x[..self.n].to_vec(),
                objective_value: f64::NEG_INFINITY,
                duals: LpDuals::default(),
                iterations: self.iterations,
            }),
            Outcome::Optimal => Ok(self.finish()),
        }
    }

    fn numerical(&self, reason: &str) -> Error {
        Error::Numerical {
            reason: reason.to_string(),
            iterations: self.iterations,
            best_iterate: self.x[..self.n].to_vec(),
        }
    }

    fn run(&mut self) -> Result<Outcome> {
        let mut degenerate_run = 0usize;
        self.refactor()?;
        loop {
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
            let d = self.reduced_costs();
            let Some((j, dir)) = self.choose_entering(&d, degenerate_run > BLAND_AFTER) else {
                if self.since_refactor == 0 {
                    return Ok(Outcome::Optimal);
                }
                self.refactor()?;
                continue;
            };
            if self.iterations >= self.opts.max_iter {
                return Err(self.numerical("iteration cap reached"));
            }
            self.iterations += 1;

            let (t, leave) = self.ratio_test(j, dir, degenerate_run > BLAND_AFTER);
            if t.is_infinite() {
                return Ok(Outcome::Unbounded);
            }
            degenerate_run = if t <= STEP_TIE { degenerate_run + 1 } else { 0 };
            self.x[j] += dir * t;
            for i in 0..self.m {
                let alpha = self.tab[i * self.ncol + j];
                if alpha != 0.0 {
                    self.x[self.basis[i]] -= dir * alpha * t;
                }
            }
            match leave {
                None => {
                    // Bound flip: snap to the opposite bound.
                    self.x[j] = if dir > 0.0 { self.hi[j] } else { self.lo[j] };
                }
                Some((r, to_upper)) => {
                    let out = self.basis[r];
                    self.x[out] = if to_upper { self.hi[out] } else { self.lo[out] };
                    self.pivot(r, j);
                }
            }
        }
    }

    fn reduced_costs(&self) -> Vec<f64> {
        let mut d = self.cost.clone();
        for i in 0..self.m {
            let cb = self.cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.tab[i * self.ncol..(i + 1) * self.ncol];
                for (dj, t) in d.iter_mut().zip(row) {
                    *dj -= cb * t;
                }
            }
        }
        d
    }

    /// Entering column and direction (+1 increase, -1 decrease).
    fn choose_entering(&self, d: &[f64], bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.ncol {
            if self.is_basic[j] || self.lo[j] == self.hi[j] {
                continue;
            }
            let dir = if d[j] < -self.dtol && self.x[j] < self.hi[j] {
                1.0
            } else if d[j] > self.dtol && self.x[j] > self.lo[j] {
                -1.0
            } else {
                continue;
            };
            if bland {
                return Some((j, dir));
            }
            if best.is_none_or(|(_, _, score)| d[j].abs() > score) {
                best = Some((j, dir, d[j].abs()));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    /// Step length and the leaving row (with the bound it reaches), or `None`
    /// when the entering variable hits its own opposite bound first.
    fn ratio_test(&self, j: usize, dir: f64, bland: bool) -> (f64, Option<(usize, bool)>) {
        let mut t_best = self.hi[j] - self.lo[j];
        let mut leave: Option<(usize, bool)> = None;
        let mut best_alpha = 0.0;
        for i in 0..self.m {
            let alpha = self.tab[i * self.ncol + j];
            if alpha.abs() <= PIVOT_TOL {
                continue;
            }
            let bvar = self.basis[i];
            let rate = -dir * alpha;
            let (limit, to_upper) = if rate < 0.0 {
                if !self.lo[bvar].is_finite() {
                    continue;
                }
                ((self.x[bvar] - self.lo[bvar]) / -rate, false)
            } else {
                if !self.hi[bvar].is_finite() {
                    continue;
                }
                ((self.hi[bvar] - self.x[bvar]) / rate, true)
            };
            let limit = limit.max(0.0);
            let better = match leave {
                _ if limit < t_best - STEP_TIE => true,
                None => false,
                Some((r, _)) if limit <= t_best + STEP_TIE => {
                    if bland {
                        bvar < self.basis[r]
                    } else {
                        alpha.abs() > best_alpha
                    }
                }
                Some(_) => false,
            };
            if better {
                t_best = limit;
                leave = Some((i, to_upper));
                best_alpha = alpha.abs();
            }
        }
        (t_best, leave)
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let nc = self.ncol;
        let piv = self.tab[r * nc + j];
        for v in &mut self.tab[r * nc..(r + 1) * nc] {
            *v /= piv;
        }
        let (before, rest) = self.tab.split_at_mut(r * nc);
        let (prow, after) = rest.split_at_mut(nc);
        for row in before.chunks_exact_mut(nc).chain(after.chunks_exact_mut(nc)) {
            let f = row[j];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * pv;
                }
                row[j] = 0.0;
            }
        }
        self.is_basic[self.basis[r]] = false;
        self.is_basic[j] = true;
        self.basis[r] = j;
        self.since_refactor += 1;
    }

    /// Rebuild `B^{-1}`, the tableau and the basic values from the original data.
    fn refactor(&mut self) -> Result<()> {
        let (m, nc) = (self.m, self.ncol);
        self.since_refactor = 0;
        if m == 0 {
            return Ok(());
        }
        // Gauss-Jordan on [B | I] with partial pivoting.
        let w = 2 * m;
        let mut aug = vec![0.0; m * w];
        for i in 0..m {
            for (k, &col) in self.basis.iter().enumerate() {
                aug[i * w + k] = self.a[i * nc + col];
            }
            aug[i * w + m + i] = 1.0;
        }
        for k in 0..m {
            let piv_row = (k..m)
                .max_by(|&r1, &r2| aug[r1 * w + k].abs().total_cmp(&aug[r2 * w + k].abs()))
                .expect("non-empty range");
            if aug[piv_row * w + k].abs() < 1e-12 {
                return Err(self.numerical("singular basis"));
            }
            if piv_row != k {
                for c in 0..w {
                    aug.swap(k * w + c, piv_row * w + c);
                }
            }
            let piv = aug[k * w + k];
            for c in 0..w {
                aug[k * w + c] /= piv;
            }
            for r in 0..m {
                if r == k {
                    continue;
                }
                let f = aug[r * w + k];
                if f != 0.0 {
                    for c in 0..w {
                        aug[r * w + c] -= f * aug[k * w + c];
                    }
                }
            }
        }
        for i in 0..m {
            self.binv[i * m..(i + 1) * m].copy_from_slice(&aug[i * w + m..(i + 1) * w]);
        }

        self.tab.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..m {
            for k in 0..m {
                let f = self.binv[i * m + k];
                if f != 0.0 {
                    let src = &self.a[k * nc..(k + 1) * nc];
                    let dst = &mut self.tab[i * nc..(i + 1) * nc];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += f * s;
                    }
                }
            }
        }
        for (k, &col) in self.basis.iter().enumerate() {
            for i in 0..m {
                self.tab[i * nc + col] = if i == k { 1.0 } else { 0.0 };
            }
        }

        let mut rhs = self.b.clone();
        for j in 0..nc {
            if !self.is_basic[j] && self.x[j] != 0.0 {
                for (i, r) in rhs.iter_mut().enumerate() {
                    *r -= self.a[i * nc + j] * self.x[j];
                }
            }
        }
        for i in 0..m {
            let v: f64 = (0..m).map(|k| self.binv[i * m + k] * rhs[k]).sum();
            self.x[self.basis[i]] = v;
        }
        Ok(())
    }

    fn finish(self) -> LpSolution {
        let (m, n, nc) = (self.m, self.n, self.ncol);
        // y^T = c_B^T B^{-1}
        let mut y = vec![0.0; m];
        for i in 0..m {
            let cb = self.cost[self.basis[i]];
            if cb != 0.0 {
                for k in 0..m {
                    y[k] += cb * self.binv[i * m + k];
                }
            }
        }
        let mut lower = vec![0.0; n];
        let mut upper = vec![0.0; n];
        for j in 0..n {
            let d = self.cost[j] - (0..m).map(|i| y[i] * self.a[i * nc + j]).sum::<f64>();
            if self.lo[j].is_finite() {
                lower[j] = d.max(0.0);
            }
            if self.hi[j].is_finite() {
                upper[j] = (-d).max(0.0);
            }
        }
        let mut primal = self.x[..n].to_vec();
        // Basic values can sit a rounding error outside their box.
        for j in 0..n {
            primal[j] = primal[j].clamp(self.lo[j], self.hi[j]);
        }
        let duals = LpDuals {
            eq: y[self.n_ub..].iter().map(|v| -v).collect(),
            ub: y[..self.n_ub].iter().map(|v| -v).collect(),
            lower,
            upper,
        };
        LpSolution {
            status: LpStatus::Optimal,
            objective_value: self.p.objective(&primal),
            primal,
            duals,
            iterations: self.iterations,
        }
    }
}
