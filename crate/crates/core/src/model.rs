//! Random pooling designs and the noisy boolean-OR test channel.
//!
//! Each test `l` reads positive when at least one defective item placed in the
//! pool survives dilution (each defective drops out independently with
//! probability `u`), or when additive noise fires (probability `q`).

use std::io::{BufRead, Write};

use rand::seq::index;
use rand::Rng;

use crate::bitmatrix::{BitMatrix, BitVec};
use crate::error::{invalid, Error, Result};
use crate::seed;

/// Dilution (`u`) and additive (`q`) noise probabilities, each in `[0, 0.5)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseParams {
    u: f64,
    q: f64,
}

impl NoiseParams {
    pub fn new(u: f64, q: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&u) {
            return invalid(format!("dilution probability u = {u} outside [0, 0.5)"));
        }
        if !(0.0..0.5).contains(&q) {
            return invalid(format!("additive probability q = {q} outside [0, 0.5)"));
        }
        Ok(Self { u, q })
    }

    pub const fn noiseless() -> Self {
        Self { u: 0.0, q: 0.0 }
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn q(&self) -> f64 {
        self.q
    }
}

/// Bernoulli parameter for the pooling matrix.
///
/// With `u_known` this is `1 / ((1 - u) K)`; otherwise `1 / K`. Clamped to `(0, 1]`.
pub fn design_p(k: usize, u: f64, u_known: bool) -> Result<f64> {
    if k == 0 {
        return invalid("design_p needs K >= 1");
    }
    if !(0.0..0.5).contains(&u) {
        return invalid(format!("dilution probability u = {u} outside [0, 0.5)"));
    }
    let p = if u_known { 1.0 / ((1.0 - u) * k as f64) } else { 1.0 / k as f64 };
    Ok(p.min(1.0))
}

/// An `M x N` pooling matrix with the parameters that generated it.
#[derive(Clone, Debug, PartialEq)]
pub struct TestDesign {
    p: f64,
    seed: u64,
    x: BitMatrix,
}

impl TestDesign {
    /// Wrap an explicit matrix (hand-built instances, dumps).
    pub fn from_matrix(x: BitMatrix, p: f64, seed: u64) -> Self {
        Self { p, seed, x }
    }

    /// Build from a dense 0/1 row list. Rows must have equal length.
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return invalid("ragged matrix rows");
        }
        if rows.iter().flatten().any(|&b| b > 1) {
            return invalid("matrix entries must be 0 or 1");
        }
        let x = BitMatrix::from_fn(rows.len(), n, |r, c| rows[r][c] == 1);
        Ok(Self { p: f64::NAN, seed: 0, x })
    }

    pub fn m(&self) -> usize {
        self.x.rows()
    }

    pub fn n(&self) -> usize {
        self.x.cols()
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn matrix(&self) -> &BitMatrix {
        &self.x
    }

    /// Write the plain-text dump: `M N p seed`, then one `0/1` line per row.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {} {} {}", self.m(), self.n(), self.p, self.seed)?;
        let mut line = String::with_capacity(self.n() + 1);
        for r in 0..self.m() {
            line.clear();
            line.extend((0..self.n()).map(|c| if self.x.get(r, c) { '1' } else { '0' }));
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read_dump<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty matrix dump".into()))??;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::Parse(format!("bad dump header {header:?}")));
        }
        let bad = |what: &str| Error::Parse(format!("bad {what} in dump header {header:?}"));
        let m: usize = fields[0].parse().map_err(|_| bad("M"))?;
        let n: usize = fields[1].parse().map_err(|_| bad("N"))?;
        let p: f64 = fields[2].parse().map_err(|_| bad("p"))?;
        let seed: u64 = fields[3].parse().map_err(|_| bad("seed"))?;
        let mut rows = Vec::with_capacity(m);
        for line in lines.take(m) {
            let line = line?;
            let row: Vec<bool> = line
                .trim_end()
                .chars()
                .map(|ch| match ch {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    other => Err(Error::Parse(format!("unexpected {other:?} in matrix row"))),
                })
                .collect::<Result<_>>()?;
            if row.len() != n {
                return Err(Error::Parse(format!("row has {} entries, expected {n}", row.len())));
            }
            rows.push(row);
        }
        if rows.len() != m {
            return Err(Error::Parse(format!("dump has {} rows, expected {m}", rows.len())));
        }
        Ok(Self { p, seed, x: BitMatrix::from_fn(m, n, |r, c| rows[r][c]) })
    }
}

/// i.i.d. Bernoulli(`p`) pooling matrix, generated row by row from `seed`.
///
/// Rows are drawn in order, so the first `M'` rows of an `M`-row design with
/// the same seed equal the `M'`-row design.
pub fn gen_test_matrix(m: usize, n: usize, p: f64, seed: u64) -> Result<TestDesign> {
    if !(p > 0.0 && p <= 1.0) {
        return invalid(format!("Bernoulli parameter p = {p} outside (0, 1]"));
    }
    let mut rng = seed::rng(seed);
    let x = BitMatrix::from_fn(m, n, |_, _| rng.random_bool(p));
    Ok(TestDesign { p, seed, x })
}

/// One-item-per-test design: each row holds a single 1 at a uniformly chosen column.
pub fn gen_singleton_design(m: usize, n: usize, seed: u64) -> Result<TestDesign> {
    if n == 0 && m > 0 {
        return invalid("singleton design needs N >= 1");
    }
    let mut rng = seed::rng(seed);
    let picks: Vec<usize> = (0..m).map(|_| rng.random_range(0..n)).collect();
    let x = BitMatrix::from_fn(m, n, |r, c| picks[r] == c);
    let p = if n == 0 { 1.0 } else { 1.0 / n as f64 };
    Ok(TestDesign { p, seed, x })
}

/// Uniformly random `k`-subset of `0..n`, ascending.
pub fn sample_defective_set(n: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k > n {
        return invalid(format!("cannot draw {k} defectives from {n} items"));
    }
    let mut rng = seed::rng(seed);
    let mut set = index::sample(&mut rng, n, k).into_vec();
    set.sort_unstable();
    Ok(set)
}

/// A design together with its ground truth and realized outcomes.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub design: TestDesign,
    pub defective_set: Vec<usize>,
    pub noise: NoiseParams,
    pub y: BitVec,
    pub dilution_seed: u64,
    pub additive_seed: u64,
}

impl Instance {
    pub fn n(&self) -> usize {
        self.design.n()
    }

    pub fn m(&self) -> usize {
        self.design.m()
    }

    pub fn k(&self) -> usize {
        self.defective_set.len()
    }

    /// Indicator of negative-outcome tests (`y^c`).
    pub fn negatives(&self) -> BitVec {
        self.y.complement()
    }

    pub fn positives(&self) -> &BitVec {
        &self.y
    }

    /// Build an instance from an explicit outcome vector (no channel draws).
    pub fn with_outcomes(
        design: TestDesign,
        defective_set: Vec<usize>,
        noise: NoiseParams,
        y: BitVec,
    ) -> Result<Self> {
        if y.len() != design.m() {
            return invalid(format!("outcome length {} != M = {}", y.len(), design.m()));
        }
        check_subset(&defective_set, design.n())?;
        Ok(Self { design, defective_set, noise, y, dilution_seed: 0, additive_seed: 0 })
    }
}

fn check_subset(set: &[usize], n: usize) -> Result<()> {
    if let Some(&bad) = set.iter().find(|&&i| i >= n) {
        return invalid(format!("defective index {bad} outside population of {n}"));
    }
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != set.len() {
        return invalid("defective set has repeated items");
    }
    Ok(())
}

/// Run the test channel on `design`.
///
/// Dilution indicators are drawn for every (test, defective) pair in
/// test-major, defective-ascending order from `dilution_seed`; additive bits
/// are drawn once per test from `additive_seed`.
pub fn simulate_outcomes(
    design: TestDesign,
    defective_set: &[usize],
    noise: NoiseParams,
    dilution_seed: u64,
    additive_seed: u64,
) -> Result<Instance> {
    check_subset(defective_set, design.n())?;
    let mut defectives = defective_set.to_vec();
    defectives.sort_unstable();

    let keep = 1.0 - noise.u();
    let mut dilution = seed::rng(dilution_seed);
    let mut additive = seed::rng(additive_seed);
    let mut y = BitVec::zeros(design.m());
    for l in 0..design.m() {
        let mut fired = false;
        for &i in &defectives {
            let participates = dilution.random_bool(keep);
            fired |= participates && design.x.get(l, i);
        }
        fired |= additive.random_bool(noise.q());
        y.set(l, fired);
    }
    Ok(Instance { design, defective_set: defectives, noise, y, dilution_seed, additive_seed })
}

/// Closed-form outcome probabilities of the channel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelStats {
    /// `P(Y = 0) = (1 - q)(1 - (1 - u) p)^K`.
    pub gamma: f64,
    /// `u / (1 - (1 - u) p)`.
    pub gamma0: f64,
    /// `P(Y = 0 | X_li = 1)` for a defective `i`.
    pub p_neg_given_def1: f64,
    /// `P(Y = 0 | X_li = 0)` for a defective `i`.
    pub p_neg_given_def0: f64,
    /// `P(X_li = 1 | Y = 0)` for a defective `i`.
    pub p_def1_given_neg: f64,
}

pub fn channel_stats(p: f64, k: usize, noise: NoiseParams) -> Result<ChannelStats> {
    if !(p > 0.0 && p <= 1.0) {
        return invalid(format!("Bernoulli parameter p = {p} outside (0, 1]"));
    }
    if k == 0 {
        return invalid("channel statistics need K >= 1");
    }
    let (u, q) = (noise.u(), noise.q());
    let miss = 1.0 - (1.0 - u) * p;
    let gamma = (1.0 - q) * miss.powi(k as i32);
    let gamma0 = u / miss;
    Ok(ChannelStats {
        gamma,
        gamma0,
        p_neg_given_def1: gamma0 * gamma,
        p_neg_given_def0: gamma / miss,
        p_def1_given_neg: p * gamma0,
    })
}
