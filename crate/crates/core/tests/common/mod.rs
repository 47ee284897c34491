//! Independent oracles shared by the integration tests and the acceptance run.
#![allow(dead_code)]

use pooldecode_core::lp::{LpLabel, LpProblem};
use pooldecode_core::model::{gen_test_matrix, sample_defective_set, simulate_outcomes};
use pooldecode_core::seed::derive;
use pooldecode_core::{Instance, NoiseParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Solve the square system `a x = b` by Gaussian elimination with partial pivoting.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

fn dot(a: &[f64], x: &[f64]) -> f64 {
    a.iter().zip(x).map(|(a, x)| a * x).sum()
}

fn feasible(p: &LpProblem, x: &[f64], tol: f64) -> bool {
    (0..p.n()).all(|j| x[j] >= p.lo[j] - tol && x[j] <= p.hi[j] + tol)
        && p.a_ub.iter().zip(&p.b_ub).all(|(row, b)| dot(row, x) <= b + tol)
        && p.a_eq.iter().zip(&p.b_eq).all(|(row, b)| (dot(row, x) - b).abs() <= tol)
}

/// A maximal linearly independent subset of the equality rows. Dropped rows
/// are still enforced by the feasibility check.
fn independent_rows(a: &[Vec<f64>], b: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut kept = (Vec::new(), Vec::new());
    for (row, &rhs) in a.iter().zip(b) {
        let mut r = row.clone();
        for e in &basis {
            let lead = e.iter().position(|v| v.abs() > 1e-12).unwrap();
            let f = r[lead] / e[lead];
            r.iter_mut().zip(e).for_each(|(x, y)| *x -= f * y);
        }
        if r.iter().any(|v| v.abs() > 1e-9) {
            basis.push(r);
            kept.0.push(row.clone());
            kept.1.push(rhs);
        }
    }
    (kept.0, kept.1)
}

/// Minimum objective over all basic feasible points, or `None` when there is
/// none. Needs finite bounds, so a feasible program always attains its
/// minimum at a vertex.
///
/// A vertex is fixed by a set of active inequality rows plus a state per
/// variable (at its lower bound, at its upper bound, or free), with as many
/// free variables as active rows.
pub fn vertex_oracle(p: &LpProblem) -> Option<(f64, Vec<f64>)> {
    let n = p.n();
    assert!(p.lo.iter().chain(&p.hi).all(|v| v.is_finite()), "oracle needs a bounded box");
    let eq = independent_rows(&p.a_eq, &p.b_eq);
    if eq.0.len() > n {
        return None;
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    let m = p.a_ub.len();
    for mask in 0u32..(1 << m) {
        let rows: Vec<usize> = (0..m).filter(|r| mask >> r & 1 == 1).collect();
        let free = eq.0.len() + rows.len();
        if free > n {
            continue;
        }
        let mut state = vec![0u8; n]; // 0 lo, 1 hi, 2 free
        enumerate_states(0, free, &mut state, &mut |state| {
            let vars: Vec<usize> = (0..n).filter(|&j| state[j] == 2).collect();
            let mut x: Vec<f64> = (0..n).map(|j| if state[j] == 1 { p.hi[j] } else { p.lo[j] }).collect();
            if !vars.is_empty() {
                let mut a = Vec::with_capacity(free);
                let mut b = Vec::with_capacity(free);
                let sys = eq.0.iter().zip(&eq.1).chain(rows.iter().map(|&r| (&p.a_ub[r], &p.b_ub[r])));
                for (row, &rhs) in sys {
                    let fixed: f64 = (0..n).filter(|j| state[*j] != 2).map(|j| row[j] * x[j]).sum();
                    a.push(vars.iter().map(|&j| row[j]).collect());
                    b.push(rhs - fixed);
                }
                match solve_square(a, b) {
                    Some(sol) => vars.iter().zip(sol).for_each(|(&j, v)| x[j] = v),
                    None => return,
                }
            }
            if feasible(p, &x, 1e-9) {
                let v = dot(&p.c, &x);
                if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
                    best = Some((v, x));
                }
            }
        });
    }
    best
}

fn enumerate_states(j: usize, free_left: usize, state: &mut Vec<u8>, visit: &mut dyn FnMut(&[u8])) {
    if j == state.len() {
        if free_left == 0 {
            visit(state);
        }
        return;
    }
    if state.len() - j < free_left {
        return;
    }
    for s in 0..3u8 {
        if s == 2 && free_left == 0 {
            continue;
        }
        state[j] = s;
        enumerate_states(j + 1, free_left - usize::from(s == 2), state, visit);
    }
}

/// A random bounded LP with at most 6 variables and 6 rows and small integer
/// data. Most are feasible by construction around a point in the box; about
/// one in ten gets an arbitrary right-hand side.
pub fn random_lp(seed: u64) -> LpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=6usize);
    let m_eq = rng.random_range(0..=n.min(2));
    let m_ub = rng.random_range(0..=6 - m_eq);
    let c: Vec<f64> = (0..n).map(|_| rng.random_range(-5..=5) as f64).collect();
    let mut lo = Vec::with_capacity(n);
    let mut hi = Vec::with_capacity(n);
    for _ in 0..n {
        let l = rng.random_range(-3..=1) as f64;
        let w = if rng.random_bool(0.1) { 0.0 } else { rng.random_range(1..=4) as f64 };
        lo.push(l);
        hi.push(l + w);
    }
    let x0: Vec<f64> = (0..n).map(|j| lo[j] + 0.5 * rng.random_range(0..=(2.0 * (hi[j] - lo[j])) as i32) as f64).collect();
    let arbitrary = rng.random_bool(0.1);
    let row = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..n).map(|_| rng.random_range(-4..=4) as f64).collect() };
    let mut p = LpProblem { c, a_eq: vec![], b_eq: vec![], a_ub: vec![], b_ub: vec![], lo, hi, label: LpLabel::Generic };
    for _ in 0..m_eq {
        let a = row(&mut rng);
        let b = if arbitrary { rng.random_range(-6..=6) as f64 } else { dot(&a, &x0) };
        p.a_eq.push(a);
        p.b_eq.push(b);
    }
    for _ in 0..m_ub {
        let a = row(&mut rng);
        let b = if arbitrary {
            rng.random_range(-6..=6) as f64
        } else {
            dot(&a, &x0) + [0.0, 0.0, 1.0, 2.5][rng.random_range(0..4)]
        };
        p.a_ub.push(a);
        p.b_ub.push(b);
    }
    p
}

/// A simulated instance with the theorem design `p = 1/((1-u)K)` (or `1/2` when `K = 0`).
pub fn instance(n: usize, k: usize, m: usize, u: f64, q: f64, seed: u64) -> Instance {
    let noise = NoiseParams::new(u, q).unwrap();
    let p = if k == 0 { 0.5 } else { (1.0 / ((1.0 - u) * k as f64)).min(1.0) };
    let sd = sample_defective_set(n, k, derive(seed, "defectives", 0)).unwrap();
    let design = gen_test_matrix(m, n, p, derive(seed, "design", 0)).unwrap();
    simulate_outcomes(design, &sd, noise, derive(seed, "dilution", 0), derive(seed, "additive", 0)).unwrap()
}

/// Dense copy of the design.
pub fn dense(inst: &Instance) -> Vec<Vec<bool>> {
    let x = inst.design.matrix();
    (0..inst.m()).map(|r| (0..inst.n()).map(|c| x.get(r, c)).collect()).collect()
}

/// Row decoder written out directly: count negative tests per item, keep the
/// `l` largest counts, lowest index first among equals.
pub fn straight_roal(rows: &[Vec<bool>], y: &[bool], l: usize) -> Vec<usize> {
    straight_coal(rows, y, l, 0.0)
}

/// Column decoder written out directly, same tie convention.
pub fn straight_coal(rows: &[Vec<bool>], y: &[bool], l: usize, psi: f64) -> Vec<usize> {
    let n = rows.first().map_or(0, Vec::len);
    let (mut neg, mut posc) = (vec![0u32; n], vec![0u32; n]);
    for (row, &pos) in rows.iter().zip(y) {
        for (i, &hit) in row.iter().enumerate() {
            if hit {
                if pos {
                    posc[i] += 1;
                } else {
                    neg[i] += 1;
                }
            }
        }
    }
    let t: Vec<f64> = (0..n).map(|i| neg[i] as f64 - psi * posc[i] as f64).collect();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| t[b].total_cmp(&t[a]).then(a.cmp(&b)));
    let mut out = idx[..l].to_vec();
    out.sort_unstable();
    out
}

pub fn outcomes(inst: &Instance) -> Vec<bool> {
    (0..inst.m()).map(|r| inst.y.get(r)).collect()
}
