use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::{DecoderId, ExperimentSpec};
use crate::decoders::{decode_coal, decode_indiral, decode_na1by1, decode_roal, DecodeFlags, DecoderConfig, RecoveredSet};
use crate::error::Result;
use crate::lp::{decode_colpal, decode_rolpal, decode_rolpalpp};
use crate::model::{gen_singleton_design, gen_test_matrix, sample_defective_set, simulate_outcomes, Instance};
use crate::seed::derive;
use crate::stats::{wilson_interval, Z95};

/// Outcome of one trial.
#[derive(Clone, Debug)]
pub struct TrialRecord {
    pub spec: ExperimentSpec,
    pub trial: u64,
    pub success: bool,
    pub flags: DecodeFlags,
    /// Decoder error message; the trial then counts as a failure.
    pub error: Option<String>,
    pub decode_time: Duration,
}

impl TrialRecord {
    /// Equality ignoring wall time.
    pub fn same_outcome(&self, other: &Self) -> bool {
        self.spec == other.spec
            && self.trial == other.trial
            && self.success == other.success
            && self.flags == other.flags
            && self.error == other.error
    }
}

/// Run the spec's decoder on an instance. `seed` feeds tie breaking and any
/// decoder-internal sampling.
pub fn decode_instance(spec: &ExperimentSpec, instance: &Instance, seed: u64) -> Result<RecoveredSet> {
    let (l, rule) = (spec.l, spec.tie_rule);
    match spec.decoder {
        DecoderId::RoAl => decode_roal(instance, &DecoderConfig::new(l).with_ties(rule, seed)),
        DecoderId::CoAl => {
            let cfg = DecoderConfig::new(l).with_psi(spec.psi_used()?).with_ties(rule, seed);
            decode_coal(instance, &cfg)
        }
        DecoderId::RoLpAl => decode_rolpal(instance, l, rule, seed),
        DecoderId::RoLpAlPlusPlus => decode_rolpalpp(instance, l, spec.eps0, rule, seed),
        DecoderId::CoLpAl => decode_colpal(instance, l, Some(spec.psi_used()?), rule, seed),
        DecoderId::Na1by1 => decode_na1by1(instance, l, rule, seed),
        DecoderId::InDirAl => decode_indiral(instance, l, spec.k_design(), seed),
    }
}

fn build_instance(spec: &ExperimentSpec, trial: u64) -> Result<Instance> {
    let root = spec.root_seed;
    let defectives = sample_defective_set(spec.n, spec.k, derive(root, "defectives", trial))?;
    let design_seed = derive(root, "design", trial);
    let design = match spec.decoder {
        DecoderId::Na1by1 => gen_singleton_design(spec.m, spec.n, design_seed)?,
        _ => gen_test_matrix(spec.m, spec.n, spec.design_p()?, design_seed)?,
    };
    simulate_outcomes(
        design,
        &defectives,
        spec.noise,
        derive(root, "dilution", trial),
        derive(root, "additive", trial),
    )
}

/// Draw the defective set, design and outcomes for `trial`, decode, and
/// check the declared set against the defectives. Decoder errors are
/// recorded as failed trials.
pub fn run_trial(spec: &ExperimentSpec, trial: u64) -> Result<TrialRecord> {
    spec.validate()?;
    let instance = build_instance(spec, trial)?;
    let start = Instant::now();
    let decoded = decode_instance(spec, &instance, derive(spec.root_seed, "tie", trial));
    let decode_time = start.elapsed();
    Ok(match decoded {
        Ok(set) => TrialRecord {
            spec: *spec,
            trial,
            success: set.success_against(&instance.defective_set),
            flags: set.flags,
            error: None,
            decode_time,
        },
        Err(e) => {
            log::warn!("trial {trial} of {} failed to decode: {e}", spec.decoder);
            TrialRecord {
                spec: *spec,
                trial,
                success: false,
                flags: DecodeFlags::default(),
                error: Some(e.to_string()),
                decode_time,
            }
        }
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FlagCounts {
    pub tie_fill: u64,
    pub lp_fallback: u64,
    pub no_negatives: u64,
    pub errors: u64,
}

impl FlagCounts {
    fn add(mut self, rec: &TrialRecord) -> Self {
        self.tie_fill += u64::from(rec.flags.tie_fill);
        self.lp_fallback += u64::from(rec.flags.lp_fallback);
        self.no_negatives += u64::from(rec.flags.no_negatives);
        self.errors += u64::from(rec.error.is_some());
        self
    }

    fn merge(self, o: Self) -> Self {
        Self {
            tie_fill: self.tie_fill + o.tie_fill,
            lp_fallback: self.lp_fallback + o.lp_fallback,
            no_negatives: self.no_negatives + o.no_negatives,
            errors: self.errors + o.errors,
        }
    }
}

/// Empirical error rate with a 95% Wilson interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AperEstimate {
    pub trials: u64,
    pub failures: u64,
    pub error_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub flags: FlagCounts,
}

impl AperEstimate {
    pub fn from_counts(failures: u64, trials: u64, flags: FlagCounts) -> Self {
        let (ci_low, ci_high) = wilson_interval(failures, trials, Z95);
        let error_rate = if trials == 0 { 0.0 } else { failures as f64 / trials as f64 };
        Self { trials, failures, error_rate, ci_low, ci_high, flags }
    }
}

fn tally(records: &[TrialRecord]) -> AperEstimate {
    let (failures, flags) = records
        .iter()
        .fold((0u64, FlagCounts::default()), |(f, c), r| (f + u64::from(!r.success), c.add(r)));
    AperEstimate::from_counts(failures, records.len() as u64, flags)
}

/// Run `spec.trials` trials in parallel. The result does not depend on
/// scheduling.
pub fn estimate_aper(spec: &ExperimentSpec) -> Result<AperEstimate> {
    spec.validate()?;
    let (failures, flags) = (0..spec.trials as u64)
        .into_par_iter()
        .map(|t| run_trial(spec, t).map(|r| (u64::from(!r.success), FlagCounts::default().add(&r))))
        .try_reduce(|| (0, FlagCounts::default()), |a, b| Ok((a.0 + b.0, a.1.merge(b.1))))?;
    Ok(AperEstimate::from_counts(failures, spec.trials as u64, flags))
}

/// Single-threaded [`estimate_aper`].
pub fn estimate_aper_sequential(spec: &ExperimentSpec) -> Result<AperEstimate> {
    spec.validate()?;
    let records = (0..spec.trials as u64).map(|t| run_trial(spec, t)).collect::<Result<Vec<_>>>()?;
    Ok(tally(&records))
}
