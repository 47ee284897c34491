//! Score-and-select decoders for non-defective subset recovery.
//!
//! The row decoder ranks items by how often they sit in negative pools; the
//! column decoder subtracts a weighted count of positive-pool appearances.
//! Both declare the `L` top-ranked items non-defective. Two baselines are
//! included for comparison: one-item-per-test screening and a
//! defective-first strategy that picks from the complement of an estimated
//! defective set.

use rand::seq::{index, SliceRandom};

use crate::error::{invalid, Result};
use crate::model::{channel_stats, ChannelStats, Instance};
use crate::seed;

/// How ties at the selection boundary are broken.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum TieRule {
    /// Uniformly random among tied items, keyed by the tie seed.
    #[default]
    SeededRandom,
    /// Lowest item index first.
    LowestIndex,
}

/// Which statistic a [`ScoreVector`] holds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScoreKind {
    /// Negative-pool counts `x_i^T y^c`.
    RowCount,
    /// `x_i^T y^c - psi_cb * x_i^T y`.
    Column { psi_cb: f64 },
    /// Negative counts from one-item-per-test screening.
    Singleton,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoreVector {
    pub scores: Vec<f64>,
    pub kind: ScoreKind,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecoderConfig {
    pub l: usize,
    /// Column-statistic weight. `None` selects the theorem default.
    pub psi_cb: Option<f64>,
    pub tie_rule: TieRule,
    pub tie_seed: u64,
}

impl DecoderConfig {
    pub fn new(l: usize) -> Self {
        Self { l, psi_cb: None, tie_rule: TieRule::default(), tie_seed: 0 }
    }

    pub fn with_psi(mut self, psi: f64) -> Self {
        self.psi_cb = Some(psi);
        self
    }

    pub fn with_ties(mut self, rule: TieRule, seed: u64) -> Self {
        self.tie_rule = rule;
        self.tie_seed = seed;
        self
    }
}

/// Conditions worth recording alongside a decode.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DecodeFlags {
    /// Fewer than `L` items had a positive score; the rest came from the tie rule.
    pub tie_fill: bool,
    /// The positive-pool LP was infeasible and the negative-pool LP was used.
    pub lp_fallback: bool,
    /// No negative tests: the ranking is decided entirely by ties.
    pub no_negatives: bool,
}

impl DecodeFlags {
    pub fn merge(self, other: Self) -> Self {
        Self {
            tie_fill: self.tie_fill | other.tie_fill,
            lp_fallback: self.lp_fallback | other.lp_fallback,
            no_negatives: self.no_negatives | other.no_negatives,
        }
    }
}

/// The items declared non-defective, ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecoveredSet {
    pub items: Vec<usize>,
    pub flags: DecodeFlags,
}

impl RecoveredSet {
    /// True when no declared item is defective.
    pub fn success_against(&self, defective_set: &[usize]) -> bool {
        // both ascending
        let (mut a, mut b) = (0, 0);
        while a < self.items.len() && b < defective_set.len() {
            match self.items[a].cmp(&defective_set[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }
}

/// Negative-pool counts, accumulated over the rows of negative tests.
pub fn roal_scores(instance: &Instance) -> ScoreVector {
    let x = instance.design.matrix();
    let mut z = vec![0.0; instance.n()];
    for l in instance.y.complement().ones() {
        for i in x.row_support(l) {
            z[i] += 1.0;
        }
    }
    ScoreVector { scores: z, kind: ScoreKind::RowCount }
}

/// Per-item (negative, positive) pool counts via column scans.
pub fn pool_counts(instance: &Instance) -> Vec<(usize, usize)> {
    let x = instance.design.matrix();
    let neg = instance.negatives();
    (0..instance.n())
        .map(|i| {
            let n = x.col_dot(i, &neg);
            (n, x.col_weight(i) - n)
        })
        .collect()
}

pub fn coal_scores(instance: &Instance, psi_cb: f64) -> Result<ScoreVector> {
    if !(psi_cb >= 0.0 && psi_cb.is_finite()) {
        return invalid(format!("psi_cb = {psi_cb} must be finite and >= 0"));
    }
    let scores = pool_counts(instance)
        .into_iter()
        .map(|(neg, pos)| neg as f64 - psi_cb * pos as f64)
        .collect();
    Ok(ScoreVector { scores, kind: ScoreKind::Column { psi_cb } })
}

/// Column weight for the score decoder: `g / (1 - g)` with `g = gamma0 * Gamma`.
pub fn psi0(stats: &ChannelStats) -> Result<f64> {
    let g = stats.gamma0 * stats.gamma;
    if g >= 1.0 {
        return invalid(format!("gamma0 * Gamma = {g} must be < 1"));
    }
    Ok(g / (1.0 - g))
}

/// Positive-pool weight for the LP decoder: `min(psi0, Gamma / (2 (1 - Gamma)))`.
pub fn psi0_prime(stats: &ChannelStats) -> Result<f64> {
    if stats.gamma >= 1.0 {
        return invalid(format!("Gamma = {} must be < 1", stats.gamma));
    }
    let first = psi0(stats)?;
    Ok(first.min(stats.gamma / (2.0 * (1.0 - stats.gamma))))
}

/// Theorem weights for a design with Bernoulli parameter `p` built for `k` defectives.
/// Zero when `k = 0`.
pub(crate) fn design_stats(instance: &Instance, k: usize) -> Result<Option<ChannelStats>> {
    if k == 0 {
        return Ok(None);
    }
    channel_stats(instance.design.p(), k, instance.noise).map(Some)
}

/// Which end of the ordering wins.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Keep {
    Largest,
    Smallest,
}

/// Choose `l` indices of `values` from the `keep` end. Values within `tol` of
/// the boundary value are tied and resolved by `rule`. Output is ascending.
pub(crate) fn select_indices(
    values: &[f64],
    l: usize,
    keep: Keep,
    tol: f64,
    rule: TieRule,
    tie_seed: u64,
) -> Result<Vec<usize>> {
    let n = values.len();
    if l == 0 || l > n {
        return invalid(format!("cannot select L = {l} of N = {n} items"));
    }
    if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
        return invalid(format!("score {bad} is not finite"));
    }
    let key = |i: usize| match keep {
        Keep::Largest => values[i],
        Keep::Smallest => -values[i],
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| key(b).total_cmp(&key(a)).then(a.cmp(&b)));
    let boundary = key(order[l - 1]);

    let mut chosen: Vec<usize> = order.iter().copied().filter(|&i| key(i) > boundary + tol).collect();
    let mut tied: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&i| (key(i) - boundary).abs() <= tol)
        .collect();
    let need = l - chosen.len();
    if tied.len() > need {
        match rule {
            TieRule::LowestIndex => tied.sort_unstable(),
            TieRule::SeededRandom => {
                tied.sort_unstable();
                tied.shuffle(&mut seed::rng(tie_seed));
            }
        }
    }
    chosen.extend_from_slice(&tied[..need]);
    chosen.sort_unstable();
    Ok(chosen)
}

/// The `l` highest scores, ties at the cut resolved by `rule`.
pub fn select_top_l(scores: &ScoreVector, l: usize, rule: TieRule, tie_seed: u64) -> Result<RecoveredSet> {
    let items = select_indices(&scores.scores, l, Keep::Largest, 0.0, rule, tie_seed)?;
    Ok(RecoveredSet { items, flags: DecodeFlags::default() })
}

fn no_negatives(instance: &Instance) -> bool {
    instance.y.count_ones() == instance.m()
}

pub fn decode_roal(instance: &Instance, config: &DecoderConfig) -> Result<RecoveredSet> {
    let mut set = select_top_l(&roal_scores(instance), config.l, config.tie_rule, config.tie_seed)?;
    set.flags.no_negatives = no_negatives(instance);
    Ok(set)
}

/// Column decoder. Without an explicit weight, uses `psi0` of the design's
/// channel statistics with the instance's defective count.
pub fn decode_coal(instance: &Instance, config: &DecoderConfig) -> Result<RecoveredSet> {
    let psi = match config.psi_cb {
        Some(psi) => psi,
        None => match design_stats(instance, instance.k())? {
            Some(stats) => psi0(&stats)?,
            None => 0.0,
        },
    };
    let scores = coal_scores(instance, psi)?;
    let mut set = select_top_l(&scores, config.l, config.tie_rule, config.tie_seed)?;
    set.flags.no_negatives = no_negatives(instance);
    Ok(set)
}

/// Negative counts under a one-item-per-test design.
pub fn singleton_scores(instance: &Instance) -> Result<ScoreVector> {
    let x = instance.design.matrix();
    if let Some(r) = (0..instance.m()).find(|&r| x.row_weight(r) != 1) {
        return invalid(format!("row {r} of a one-by-one design has weight {}", x.row_weight(r)));
    }
    let mut scores = roal_scores(instance);
    scores.kind = ScoreKind::Singleton;
    Ok(scores)
}

/// One-by-one screening baseline: top `l` items by negative singleton tests.
/// When fewer than `l` items ever tested negative, the remainder comes from
/// untested items first, then from items that only tested positive, and the
/// set is flagged `tie_fill`.
pub fn decode_na1by1(instance: &Instance, l: usize, rule: TieRule, tie_seed: u64) -> Result<RecoveredSet> {
    let scores = singleton_scores(instance)?;
    let x = instance.design.matrix();
    let ranked: Vec<f64> = (0..instance.n())
        .map(|i| match scores.scores[i] {
            s if s > 0.0 => s,
            _ if x.col_weight(i) == 0 => 0.0,
            _ => -0.5,
        })
        .collect();
    let items = select_indices(&ranked, l, Keep::Largest, 0.0, rule, tie_seed)?;
    let flags = DecodeFlags {
        tie_fill: scores.scores.iter().filter(|&&s| s > 0.0).count() < l,
        no_negatives: no_negatives(instance),
        ..Default::default()
    };
    Ok(RecoveredSet { items, flags })
}

/// Defective-first baseline: take the `k_hat` lowest column statistics (weight
/// `psi0` for a design built for `k_hat`) as the defective estimate, then draw
/// `l` items uniformly from the complement.
pub fn decode_indiral(instance: &Instance, l: usize, k_hat: usize, seed: u64) -> Result<RecoveredSet> {
    let n = instance.n();
    if k_hat == 0 {
        return invalid("InDirAl needs K_hat >= 1");
    }
    if k_hat > n || l > n - k_hat {
        return invalid(format!("cannot pick L = {l} from the complement of {k_hat} of {n} items"));
    }
    let psi = match design_stats(instance, k_hat)? {
        Some(stats) => psi0(&stats)?,
        None => 0.0,
    };
    let scores = coal_scores(instance, psi)?;
    let estimate = select_indices(
        &scores.scores,
        k_hat,
        Keep::Smallest,
        0.0,
        TieRule::SeededRandom,
        seed::derive(seed, "indiral-ties", 0),
    )?;
    let mut complement = Vec::with_capacity(n - k_hat);
    let mut est = estimate.iter().peekable();
    for i in 0..n {
        if est.peek() == Some(&&i) {
            est.next();
        } else {
            complement.push(i);
        }
    }
    let mut rng = seed::rng(seed::derive(seed, "indiral-pick", 0));
    let mut items: Vec<usize> = index::sample(&mut rng, complement.len(), l)
        .into_iter()
        .map(|j| complement[j])
        .collect();
    items.sort_unstable();
    let flags = DecodeFlags { no_negatives: no_negatives(instance), ..Default::default() };
    Ok(RecoveredSet { items, flags })
}
