//! Monte Carlo experiments: per-trial decoding, error-rate estimates,
//! minimal test-count search, parameter sweeps and CSV output.
//!
//! Every random draw of trial `t` is seeded from `(root_seed, label, t)`, so
//! a trial is reproducible from the spec and its index alone, and the same
//! trial index sees the same defective set, matrix rows and channel draws at
//! every `M` (common random numbers across a sweep).

mod csv_out;
mod search;
mod sweep;
mod trial;
mod validate;

use std::fmt;
use std::str::FromStr;

pub use csv_out::{format_flags, write_aper_csv, write_robustness_csv, AperRow, INDIRAL_NOTE, ORDER_LEVEL_NOTE};
pub use search::{find_min_tests, find_min_tests_with, MinTests, Probe, SearchOptions};
pub use sweep::{robustness_table, sweep_aper_vs_m, sweep_m_vs_l, sweep_noise, NoiseAxis, RobustnessRow};
pub use trial::{decode_instance, estimate_aper, estimate_aper_sequential, run_trial, AperEstimate, FlagCounts, TrialRecord};
pub use validate::{channel_checks, moment_checks, Check};

use crate::decoders::{psi0, psi0_prime, TieRule};
use crate::error::{invalid, Error, Result};
use crate::lp::DEFAULT_EPS0;
use crate::model::{channel_stats, design_p, NoiseParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DecoderId {
    RoAl,
    CoAl,
    RoLpAl,
    RoLpAlPlusPlus,
    CoLpAl,
    Na1by1,
    InDirAl,
}

impl DecoderId {
    pub const ALL: [DecoderId; 7] = [
        DecoderId::RoAl,
        DecoderId::CoAl,
        DecoderId::RoLpAl,
        DecoderId::RoLpAlPlusPlus,
        DecoderId::CoLpAl,
        DecoderId::Na1by1,
        DecoderId::InDirAl,
    ];

    /// The five pooled decoders (no baselines).
    pub const PROPOSED: [DecoderId; 5] = [
        DecoderId::RoAl,
        DecoderId::CoAl,
        DecoderId::RoLpAl,
        DecoderId::RoLpAlPlusPlus,
        DecoderId::CoLpAl,
    ];

    /// Command-line identifier.
    pub fn id(self) -> &'static str {
        match self {
            DecoderId::RoAl => "roal",
            DecoderId::CoAl => "coal",
            DecoderId::RoLpAl => "rolpal",
            DecoderId::RoLpAlPlusPlus => "rolpalpp",
            DecoderId::CoLpAl => "colpal",
            DecoderId::Na1by1 => "na1by1",
            DecoderId::InDirAl => "indiral",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            DecoderId::RoAl => "RoAl",
            DecoderId::CoAl => "CoAl",
            DecoderId::RoLpAl => "RoLpAl",
            DecoderId::RoLpAlPlusPlus => "RoLpAl++",
            DecoderId::CoLpAl => "CoLpAl",
            DecoderId::Na1by1 => "NA1by1",
            DecoderId::InDirAl => "InDirAl",
        }
    }
}

impl fmt::Display for DecoderId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for DecoderId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        DecoderId::ALL
            .into_iter()
            .find(|d| d.id() == lower || d.display_name().to_ascii_lowercase() == lower)
            .ok_or_else(|| Error::Parse(format!("unknown decoder {s:?}")))
    }
}

/// One experiment configuration at a single `M`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub n: usize,
    pub k: usize,
    pub l: usize,
    pub m: usize,
    pub noise: NoiseParams,
    pub decoder: DecoderId,
    pub trials: usize,
    pub root_seed: u64,
    /// Defective count assumed when building the design. Defaults to `k`.
    pub k_hat: Option<usize>,
    pub eps0: f64,
    /// Positive-pool weight override for the column decoders.
    pub psi: Option<f64>,
    pub tie_rule: TieRule,
    /// Design with `p = 1 / ((1 - u) K_hat)` instead of `1 / K_hat`.
    pub u_known: bool,
}

impl ExperimentSpec {
    pub fn new(n: usize, k: usize, l: usize, m: usize, noise: NoiseParams, decoder: DecoderId) -> Self {
        Self {
            n,
            k,
            l,
            m,
            noise,
            decoder,
            trials: 500,
            root_seed: 0,
            k_hat: None,
            eps0: DEFAULT_EPS0,
            psi: None,
            tie_rule: TieRule::SeededRandom,
            u_known: false,
        }
    }

    /// Defective count the design is built for (at least 1).
    pub fn k_design(&self) -> usize {
        self.k_hat.unwrap_or(self.k).max(1)
    }

    pub fn design_p(&self) -> Result<f64> {
        design_p(self.k_design(), self.noise.u(), self.u_known)
    }

    /// Positive-pool weight the decoder uses: the override if set, else the
    /// theorem default from the design's `p`, `K_hat` and the noise levels.
    pub fn psi_used(&self) -> Result<f64> {
        let stats = || channel_stats(self.design_p()?, self.k_design(), self.noise);
        match self.decoder {
            DecoderId::CoAl => self.psi.map_or_else(|| psi0(&stats()?), Ok),
            DecoderId::CoLpAl => self.psi.map_or_else(|| psi0_prime(&stats()?), Ok),
            DecoderId::InDirAl => psi0(&stats()?),
            _ => Ok(0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return invalid("N must be >= 1");
        }
        if self.k > self.n {
            return invalid(format!("K = {} exceeds N = {}", self.k, self.n));
        }
        if self.l == 0 || self.l > self.n {
            return invalid(format!("need 1 <= L <= N, got L = {}", self.l));
        }
        if self.trials == 0 {
            return invalid("trials must be >= 1");
        }
        if let Some(kh) = self.k_hat {
            if kh == 0 || kh > self.n {
                return invalid(format!("K_hat = {kh} outside 1..=N"));
            }
        }
        if !(self.eps0 > 0.0 && self.eps0 < 1.0) {
            return invalid(format!("eps0 = {} outside (0, 1)", self.eps0));
        }
        if let Some(psi) = self.psi {
            if !(psi >= 0.0 && psi.is_finite()) {
                return invalid(format!("psi = {psi} must be finite and >= 0"));
            }
        }
        if self.decoder == DecoderId::InDirAl && self.l + self.k_design() > self.n {
            return invalid("InDirAl needs L <= N - K_hat");
        }
        self.design_p()?;
        Ok(())
    }
}
