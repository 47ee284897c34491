//! Grid sweeps over `M`, `L`, the noise levels, and the assumed `K`.
//!
//! A failing grid point becomes a flagged row; the sweep moves on.

use super::csv_out::AperRow;
use super::search::{find_min_tests, SearchOptions};
use super::trial::estimate_aper;
use super::{DecoderId, ExperimentSpec};
use crate::error::{invalid, Result};
use crate::model::NoiseParams;

fn point(spec: &ExperimentSpec, sweep_id: &str) -> AperRow {
    match estimate_aper(spec) {
        Ok(est) => AperRow::from_estimate(spec, &est),
        Err(e) => {
            log::warn!("{} at M = {}: {e}", spec.decoder, spec.m);
            AperRow::failed(spec, &e.to_string())
        }
    }
    .with_sweep_id(sweep_id)
}

fn nonempty<T>(grid: &[T], what: &str) -> Result<()> {
    if grid.is_empty() {
        return invalid(format!("empty {what} grid"));
    }
    Ok(())
}

/// Error rate at each `M` for each decoder.
pub fn sweep_aper_vs_m(
    base: &ExperimentSpec,
    decoders: &[DecoderId],
    m_grid: &[usize],
    sweep_id: &str,
) -> Result<Vec<AperRow>> {
    nonempty(m_grid, "M")?;
    nonempty(decoders, "decoder")?;
    let mut rows = Vec::new();
    for &decoder in decoders {
        for &m in m_grid {
            rows.push(point(&ExperimentSpec { decoder, m, ..*base }, sweep_id));
        }
    }
    Ok(rows)
}

/// Minimal `M` at each `L`. Rows report `M*` in the `M` column, the final
/// estimate there, and the crossing interval as `m_ci:lo..hi` in `flags`.
pub fn sweep_m_vs_l(
    base: &ExperimentSpec,
    decoders: &[DecoderId],
    l_grid: &[usize],
    opts: &SearchOptions,
    sweep_id: &str,
) -> Result<Vec<AperRow>> {
    nonempty(l_grid, "L")?;
    nonempty(decoders, "decoder")?;
    let mut rows = Vec::new();
    for &decoder in decoders {
        for &l in l_grid {
            let spec = ExperimentSpec { decoder, l, ..*base };
            let row = match find_min_tests(&spec, opts) {
                Ok(found) => {
                    let at = ExperimentSpec { m: found.m, ..spec };
                    let mut row = AperRow::from_estimate(&at, &found.estimate);
                    row.flags.push_str(&format!(
                        ";m_ci:{}..{};probe_trials:{};trials_spent:{}",
                        found.m_ci.0, found.m_ci.1, opts.probe_trials, found.trials_spent
                    ));
                    row
                }
                Err(e) => {
                    log::warn!("{decoder} at L = {l}: {e}");
                    AperRow::failed(&ExperimentSpec { m: 0, ..spec }, &e.to_string())
                }
            };
            rows.push(row.with_sweep_id(sweep_id));
        }
    }
    Ok(rows)
}

/// Which noise level a sweep varies.
#[derive(Clone, Debug, PartialEq)]
pub enum NoiseAxis {
    Dilution(Vec<f64>),
    Additive(Vec<f64>),
}

/// Error rate at fixed `M` as one noise level varies.
pub fn sweep_noise(
    base: &ExperimentSpec,
    decoders: &[DecoderId],
    axis: &NoiseAxis,
    sweep_id: &str,
) -> Result<Vec<AperRow>> {
    nonempty(decoders, "decoder")?;
    let levels: Vec<NoiseParams> = match axis {
        NoiseAxis::Dilution(us) => {
            nonempty(us, "u")?;
            us.iter().map(|&u| NoiseParams::new(u, base.noise.q())).collect::<Result<_>>()?
        }
        NoiseAxis::Additive(qs) => {
            nonempty(qs, "q")?;
            qs.iter().map(|&q| NoiseParams::new(base.noise.u(), q)).collect::<Result<_>>()?
        }
    };
    let mut rows = Vec::new();
    for &decoder in decoders {
        for &noise in &levels {
            rows.push(point(&ExperimentSpec { decoder, noise, ..*base }, sweep_id));
        }
    }
    Ok(rows)
}

/// Test-count penalty for designing with `K_hat = delta_k * K_t`.
#[derive(Clone, Debug, PartialEq)]
pub struct RobustnessRow {
    pub decoder: DecoderId,
    pub n: usize,
    pub k_t: usize,
    pub k_hat: usize,
    pub delta_k: f64,
    pub l: usize,
    pub u: f64,
    pub q: f64,
    pub target: f64,
    pub m: usize,
    pub m_ref: usize,
    /// `M(K_hat, K_t) / M(K_t, K_t)`.
    pub delta_m: f64,
    pub m_ci: (usize, usize),
    pub trials: u64,
    pub seed: u64,
}

/// `M*` with a mis-specified design `K` relative to the correctly specified one.
/// Both searches share trial seeds, so `delta_k = 1` gives exactly 1.
pub fn robustness_table(
    base: &ExperimentSpec,
    decoders: &[DecoderId],
    delta_grid: &[f64],
    opts: &SearchOptions,
) -> Result<Vec<RobustnessRow>> {
    nonempty(delta_grid, "delta_k")?;
    nonempty(decoders, "decoder")?;
    if base.k == 0 {
        return invalid("robustness needs K_t >= 1");
    }
    let k_hats: Vec<usize> = delta_grid
        .iter()
        .map(|&d| {
            if !(d > 0.0 && d.is_finite()) {
                return invalid(format!("delta_k = {d} must be positive"));
            }
            Ok(((d * base.k as f64).round() as usize).max(1))
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for &decoder in decoders {
        let reference_spec = ExperimentSpec { decoder, k_hat: None, ..*base };
        let reference = find_min_tests(&reference_spec, opts)?;
        for (&delta_k, &k_hat) in delta_grid.iter().zip(&k_hats) {
            let found = if k_hat == base.k {
                reference.clone()
            } else {
                find_min_tests(&ExperimentSpec { k_hat: Some(k_hat), ..reference_spec }, opts)?
            };
            rows.push(RobustnessRow {
                decoder,
                n: base.n,
                k_t: base.k,
                k_hat,
                delta_k,
                l: base.l,
                u: base.noise.u(),
                q: base.noise.q(),
                target: opts.target,
                m: found.m,
                m_ref: reference.m,
                delta_m: found.m as f64 / reference.m as f64,
                m_ci: found.m_ci,
                trials: found.estimate.trials,
                seed: base.root_seed,
            });
        }
    }
    Ok(rows)
}
