//! Smallest `M` whose error rate reaches a target.
//!
//! A geometric grid over `[m_lo, m_hi]` locates the crossing, then bisection
//! narrows it to one test. Decisions use the isotonic (non-increasing) fit
//! of all probes so far, since raw Monte Carlo rates are not monotone in `M`.

use std::collections::BTreeMap;

use super::trial::{estimate_aper, AperEstimate};
use super::ExperimentSpec;
use crate::error::{invalid, Error, Result};
use crate::stats::{isotonic_nonincreasing, Z95};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchOptions {
    pub target: f64,
    pub m_lo: usize,
    pub m_hi: usize,
    pub probe_trials: usize,
    /// Trials for the reported estimate at the returned `M`.
    pub final_trials: usize,
    pub grid_points: usize,
}

impl SearchOptions {
    pub fn new(target: f64, m_lo: usize, m_hi: usize) -> Self {
        Self { target, m_lo, m_hi, probe_trials: 500, final_trials: 2000, grid_points: 12 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.target > 0.0 && self.target <= 1.0) {
            return invalid(format!("target {} outside (0, 1]", self.target));
        }
        if self.m_lo >= self.m_hi {
            return invalid(format!("need M_lo < M_hi, got {} and {}", self.m_lo, self.m_hi));
        }
        if self.probe_trials == 0 || self.final_trials == 0 || self.grid_points < 2 {
            return invalid("probe/final trials must be >= 1 and the grid needs >= 2 points");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Probe {
    pub m: usize,
    pub estimate: AperEstimate,
    /// Isotonic fit value at this `M` after the last probe.
    pub smoothed: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinTests {
    pub m: usize,
    /// Estimate at `m` with `final_trials` trials.
    pub estimate: AperEstimate,
    /// Where the fitted curve crosses `target` plus/minus the probe-level
    /// Wilson half-width.
    pub m_ci: (usize, usize),
    /// All probes, ascending in `M`.
    pub curve: Vec<Probe>,
    /// Total trials run, final estimate included.
    pub trials_spent: u64,
}

fn geometric_grid(lo: usize, hi: usize, points: usize) -> Vec<usize> {
    let (a, b) = (lo.max(1) as f64, hi as f64);
    let mut grid: Vec<usize> = (0..points)
        .map(|i| {
            let t = i as f64 / (points - 1) as f64;
            (a * (b / a).powf(t)).round() as usize
        })
        .collect();
    grid[0] = lo;
    grid[points - 1] = hi;
    grid.dedup();
    grid
}

struct Curve(BTreeMap<usize, AperEstimate>);

impl Curve {
    fn smoothed(&self) -> Vec<(usize, f64)> {
        let ms: Vec<usize> = self.0.keys().copied().collect();
        let rates: Vec<f64> = self.0.values().map(|e| e.error_rate).collect();
        let weights: Vec<f64> = self.0.values().map(|e| e.trials as f64).collect();
        ms.into_iter().zip(isotonic_nonincreasing(&rates, &weights)).collect()
    }

    fn smoothed_at(&self, m: usize) -> f64 {
        self.smoothed().into_iter().find(|&(x, _)| x == m).map_or(f64::NAN, |(_, v)| v)
    }

    fn probes(&self) -> Vec<Probe> {
        self.smoothed()
            .into_iter()
            .map(|(m, smoothed)| Probe { m, estimate: self.0[&m], smoothed })
            .collect()
    }
}

/// First `M` (linearly interpolated) at which the fitted curve drops to `level`.
fn crossing(fit: &[(usize, f64)], level: f64) -> f64 {
    match fit.iter().position(|&(_, v)| v <= level) {
        None => fit.last().map_or(f64::NAN, |&(m, _)| m as f64),
        Some(0) => fit[0].0 as f64,
        Some(i) => {
            let ((m0, v0), (m1, v1)) = (fit[i - 1], fit[i]);
            let w = if v0 > v1 { (v0 - level) / (v0 - v1) } else { 1.0 };
            m0 as f64 + w * (m1 as f64 - m0 as f64)
        }
    }
}

/// Minimal `M` for `spec` (its `m` and `trials` fields are ignored).
pub fn find_min_tests(spec: &ExperimentSpec, opts: &SearchOptions) -> Result<MinTests> {
    spec.validate()?;
    find_min_tests_with(
        |m, trials| {
            let mut s = *spec;
            s.m = m;
            s.trials = trials;
            estimate_aper(&s)
        },
        opts,
    )
}

/// [`find_min_tests`] over an arbitrary evaluator `eval(M, trials)`.
pub fn find_min_tests_with<F>(mut eval: F, opts: &SearchOptions) -> Result<MinTests>
where
    F: FnMut(usize, usize) -> Result<AperEstimate>,
{
    opts.validate()?;
    let mut spent = 0u64;
    let mut run = |m: usize, trials: usize, spent: &mut u64| {
        *spent += trials as u64;
        eval(m, trials)
    };

    if opts.target >= 1.0 {
        let estimate = run(opts.m_lo, opts.final_trials, &mut spent)?;
        let curve = vec![Probe { m: opts.m_lo, estimate, smoothed: estimate.error_rate }];
        return Ok(MinTests { m: opts.m_lo, estimate, m_ci: (opts.m_lo, opts.m_lo), curve, trials_spent: spent });
    }

    let mut curve = Curve(BTreeMap::new());
    let grid = geometric_grid(opts.m_lo, opts.m_hi, opts.grid_points);
    for &m in &grid {
        let est = run(m, opts.probe_trials, &mut spent)?;
        curve.0.insert(m, est);
    }
    let fit = curve.smoothed();
    let reached = fit.last().map_or(1.0, |&(_, v)| v);
    if reached > opts.target {
        return Err(Error::TargetUnreachable {
            target: opts.target,
            m_hi: opts.m_hi,
            reached,
            curve: curve.0.iter().map(|(&m, e)| (m, e.error_rate)).collect(),
        });
    }

    let first = fit.iter().position(|&(_, v)| v <= opts.target).expect("last point reaches target");
    let mut hi = fit[first].0;
    if first > 0 {
        let mut lo = fit[first - 1].0;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            let est = run(mid, opts.probe_trials, &mut spent)?;
            curve.0.insert(mid, est);
            if curve.smoothed_at(mid) <= opts.target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }

    let estimate = if opts.final_trials == opts.probe_trials {
        curve.0[&hi]
    } else {
        run(hi, opts.final_trials, &mut spent)?
    };
    let fit = curve.smoothed();
    let h = Z95 * (opts.target * (1.0 - opts.target) / opts.probe_trials as f64).sqrt();
    let low = (crossing(&fit, opts.target + h).floor() as usize).min(hi);
    let high = (crossing(&fit, opts.target - h).ceil() as usize).max(hi);
    Ok(MinTests { m: hi, estimate, m_ci: (low, high), curve: curve.probes(), trials_spent: spent })
}
