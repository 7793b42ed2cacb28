//! Choice-prediction toolkit.
//!
//! Generates two-option choice problems, predicts aggregate choice rates with
//! behavioral models (a BEAST-family simulator, cumulative prospect theory,
//! the priority heuristic and decision by sampling), turns those predictions
//! and hand-crafted behavioral insights into a design matrix, fits tree
//! ensembles on it, and scores the result with block-level MSE, equivalent
//! number of observations and bootstrap comparison intervals.
//!
//! The modules map onto the pipeline stages:
//!
//! - [`problems`]: lottery expansion, option distributions, correlated
//!   sampling, random problem generation and validation.
//! - [`models`]: CPT, priority heuristic, decision by sampling, grid fitting
//!   and the flat parameter-file format.
//! - [`beast`]: the Monte Carlo simulator used as the main foresight.
//! - [`features`]: objective, naive, psychological and foresight columns.
//! - [`learn`]: regression trees, random forests and second-order boosting.
//! - [`eval`]: scoring, ENO, bootstrap intervals and the ablation and
//!   comparison protocols.
//! - [`cli`]: data ingestion, artifacts and the `cpc` command front end.

pub mod beast;
pub mod cli;
pub mod error;
pub mod eval;
pub mod features;
pub mod kv;
pub mod learn;
pub mod models;
pub mod problems;
pub mod rng;

pub use error::{Error, Result};

/// Number of trials a decision maker plays per problem.
pub const TRIALS: usize = 25;
/// Number of five-trial blocks per problem.
pub const BLOCKS: usize = 5;
/// Trials per block.
pub const TRIALS_PER_BLOCK: usize = 5;

/// Per-block B-choice rates (block 1 first).
pub type BlockRates = [f64; BLOCKS];
