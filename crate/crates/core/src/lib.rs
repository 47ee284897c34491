//! Non-adaptive group testing for recovering a subset of non-defective items.
//!
//! Items are pooled by a random Bernoulli design and each pool is tested
//! through a noisy boolean-OR channel with dilution and additive noise. The
//! decoders here do not try to find the defectives; they return `L` items
//! that are all non-defective with high probability.
//!
//! - [`model`]: designs, the channel and its closed-form statistics.
//! - [`decoders`]: score-and-select decoders and the two baselines.
//! - [`lp`]: LP relaxations, a simplex solver with duals, KKT diagnostics.
//! - [`bounds`]: sufficient test counts, order-level lower bounds, moment formulas.
//! - [`harness`]: Monte Carlo trials, error-rate estimates, test-count search, sweeps.

pub mod bitmatrix;
pub mod bounds;
pub mod decoders;
pub mod error;
pub mod harness;
pub mod lp;
pub mod model;
pub mod seed;
pub mod stats;

pub use bitmatrix::{BitMatrix, BitVec};
pub use decoders::{DecodeFlags, DecoderConfig, RecoveredSet, ScoreKind, ScoreVector, TieRule};
pub use error::{Error, Result};
pub use harness::{DecoderId, ExperimentSpec};
pub use lp::{KktReport, LpLabel, LpProblem, LpSolution, LpStatus};
pub use model::{ChannelStats, Instance, NoiseParams, TestDesign};
