//! CSV persistence. Metadata goes first as `#` comment lines.

use std::io::Write;

use super::sweep::RobustnessRow;
use super::trial::{AperEstimate, FlagCounts};
use super::{DecoderId, ExperimentSpec};
use crate::error::Result;

pub const INDIRAL_NOTE: &str =
    "InDirAl defective stage substituted: the K_hat items with the smallest column statistic";
pub const ORDER_LEVEL_NOTE: &str = "order-level, constants unknown";

const HEADER: [&str; 17] = [
    "decoder", "N", "K", "K_hat", "L", "M", "u", "q", "eps0", "psi", "trials", "failures", "aper", "ci_low", "ci_high",
    "flags", "seed",
];

/// One error-rate estimate in the output schema.
#[derive(Clone, Debug, PartialEq)]
pub struct AperRow {
    pub decoder: DecoderId,
    pub n: usize,
    pub k: usize,
    pub k_hat: usize,
    pub l: usize,
    pub m: usize,
    pub u: f64,
    pub q: f64,
    pub eps0: f64,
    pub psi: f64,
    pub trials: u64,
    pub failures: u64,
    pub aper: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub flags: String,
    pub seed: u64,
    pub sweep_id: Option<String>,
}

/// `tie_fill:a;lp_fallback:b;mz0:c;errors:d`.
pub fn format_flags(f: &FlagCounts) -> String {
    format!("tie_fill:{};lp_fallback:{};mz0:{};errors:{}", f.tie_fill, f.lp_fallback, f.no_negatives, f.errors)
}

impl AperRow {
    fn base(spec: &ExperimentSpec) -> Self {
        Self {
            decoder: spec.decoder,
            n: spec.n,
            k: spec.k,
            k_hat: spec.k_design(),
            l: spec.l,
            m: spec.m,
            u: spec.noise.u(),
            q: spec.noise.q(),
            eps0: spec.eps0,
            psi: spec.psi_used().unwrap_or(f64::NAN),
            trials: 0,
            failures: 0,
            aper: f64::NAN,
            ci_low: f64::NAN,
            ci_high: f64::NAN,
            flags: String::new(),
            seed: spec.root_seed,
            sweep_id: None,
        }
    }

    pub fn from_estimate(spec: &ExperimentSpec, est: &AperEstimate) -> Self {
        Self {
            trials: est.trials,
            failures: est.failures,
            aper: est.error_rate,
            ci_low: est.ci_low,
            ci_high: est.ci_high,
            flags: format_flags(&est.flags),
            ..Self::base(spec)
        }
    }

    /// A grid point that could not be evaluated.
    pub fn failed(spec: &ExperimentSpec, reason: &str) -> Self {
        Self { flags: format!("failed:{reason}"), ..Self::base(spec) }
    }

    pub fn with_sweep_id(mut self, id: &str) -> Self {
        self.sweep_id = Some(id.to_string());
        self
    }

    fn record(&self) -> Vec<String> {
        let mut r = vec![
            self.decoder.id().to_string(),
            self.n.to_string(),
            self.k.to_string(),
            self.k_hat.to_string(),
            self.l.to_string(),
            self.m.to_string(),
            self.u.to_string(),
            self.q.to_string(),
            self.eps0.to_string(),
            self.psi.to_string(),
            self.trials.to_string(),
            self.failures.to_string(),
            self.aper.to_string(),
            self.ci_low.to_string(),
            self.ci_high.to_string(),
            self.flags.clone(),
            self.seed.to_string(),
        ];
        if let Some(id) = &self.sweep_id {
            r.push(id.clone());
        }
        r
    }
}

fn write_metadata<W: Write>(w: &mut W, metadata: &[String]) -> Result<()> {
    for line in metadata {
        writeln!(w, "# {line}")?;
    }
    Ok(())
}

/// Metadata lines, then a header and one row per estimate. The `sweep_id`
/// column is present when any row carries one.
pub fn write_aper_csv<W: Write>(mut w: W, rows: &[AperRow], metadata: &[String]) -> Result<()> {
    write_metadata(&mut w, metadata)?;
    let with_id = rows.iter().any(|r| r.sweep_id.is_some());
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<&str> = HEADER.to_vec();
    if with_id {
        header.push("sweep_id");
    }
    out.write_record(&header)?;
    for row in rows {
        let mut rec = row.record();
        if with_id && row.sweep_id.is_none() {
            rec.push(String::new());
        }
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_robustness_csv<W: Write>(mut w: W, rows: &[RobustnessRow], metadata: &[String]) -> Result<()> {
    write_metadata(&mut w, metadata)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "decoder", "N", "K_t", "K_hat", "delta_k", "L", "u", "q", "target", "M", "M_ref", "delta_M", "m_ci_low",
        "m_ci_high", "trials", "seed",
    ])?;
    for r in rows {
        out.write_record([
            r.decoder.id().to_string(),
            r.n.to_string(),
            r.k_t.to_string(),
            r.k_hat.to_string(),
            r.delta_k.to_string(),
            r.l.to_string(),
            r.u.to_string(),
            r.q.to_string(),
            r.target.to_string(),
            r.m.to_string(),
            r.m_ref.to_string(),
            r.delta_m.to_string(),
            r.m_ci.0.to_string(),
            r.m_ci.1.to_string(),
            r.trials.to_string(),
            r.seed.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
