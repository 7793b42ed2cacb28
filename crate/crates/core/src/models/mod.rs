//! Classical behavioral models used as foresights and comparators.
//!
//! [`ModelSpec`] bundles a model with its parameters so the feature pipeline,
//! the grid fitter and the CLI can treat every model the same way.

pub mod cpt;
pub mod dbs;
pub mod fit;
pub mod params;
pub mod priority;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::beast::{self, BeastParams};
use crate::error::{Error, Result};
use crate::problems::{ChoiceProblem, OutcomeDistribution};
use crate::rng;
use crate::{BlockRates, BLOCKS};

pub use cpt::{cpt_predict, cpt_utility, cpt_weight, cpt_weighted_value, CptParams};
pub use dbs::{dbs_predict, DbsContext, DbsParams};
pub use fit::{fit_grid, grid_search, BlockScope, FitGrid, FitOutcome};
pub use priority::priority_heuristic_predict;

/// How the described-risk models treat an ambiguous option B.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AmbiguityPolicy {
    /// Reject ambiguous problems.
    #[default]
    Strict,
    /// Treat B's outcomes as equally likely.
    Permissive,
}

impl AmbiguityPolicy {
    pub fn name(self) -> &'static str {
        match self {
            AmbiguityPolicy::Strict => "strict",
            AmbiguityPolicy::Permissive => "permissive",
        }
    }
}

impl FromStr for AmbiguityPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(AmbiguityPolicy::Strict),
            "permissive" => Ok(AmbiguityPolicy::Permissive),
            _ => Err(Error::validation(format!("unknown ambiguity policy `{s}`"))),
        }
    }
}

/// Distributions a described-risk model evaluates.
pub(crate) fn effective_distributions(
    problem: &ChoiceProblem,
    policy: AmbiguityPolicy,
    model: &'static str,
) -> Result<(OutcomeDistribution, OutcomeDistribution)> {
    let (a, b) = problem.distributions()?;
    if !problem.amb {
        return Ok((a, b));
    }
    match policy {
        AmbiguityPolicy::Strict => Err(Error::Unsupported {
            model,
            reason: "option B is ambiguous".into(),
        }),
        AmbiguityPolicy::Permissive => {
            let b = OutcomeDistribution::uniform_over(&b.payoffs().collect::<Vec<_>>())?;
            Ok((a, b))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    Beast,
    CptStochastic,
    CptDeterministic,
    Dbs,
    PriorityHeuristic,
}

impl ModelKind {
    /// The comparison table's row order.
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Beast,
        ModelKind::CptStochastic,
        ModelKind::CptDeterministic,
        ModelKind::Dbs,
        ModelKind::PriorityHeuristic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Beast => "beast",
            ModelKind::CptStochastic => "cpt-stochastic",
            ModelKind::CptDeterministic => "cpt-deterministic",
            ModelKind::Dbs => "dbs",
            ModelKind::PriorityHeuristic => "priority-heuristic",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Beast => "BEAST",
            ModelKind::CptStochastic => "Stochastic CPT",
            ModelKind::CptDeterministic => "Deterministic CPT",
            ModelKind::Dbs => "Decision by Sampling",
            ModelKind::PriorityHeuristic => "Priority Heuristic",
        }
    }

    /// Shipped parameters for this kind.
    pub fn default_spec(self) -> ModelSpec {
        let policy = AmbiguityPolicy::Strict;
        match self {
            ModelKind::Beast => ModelSpec::Beast(BeastParams::default()),
            ModelKind::CptStochastic => ModelSpec::Cpt { params: CptParams::STOCHASTIC, policy },
            ModelKind::CptDeterministic => ModelSpec::Cpt { params: CptParams::DETERMINISTIC, policy },
            ModelKind::Dbs => ModelSpec::Dbs {
                params: DbsParams::fitted(),
                n_sim: 2000,
                policy,
            },
            ModelKind::PriorityHeuristic => ModelSpec::PriorityHeuristic { policy },
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::validation(format!("unknown model kind `{s}`")))
    }
}

/// A model together with everything needed to run it.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Beast(BeastParams),
    Cpt { params: CptParams, policy: AmbiguityPolicy },
    PriorityHeuristic { policy: AmbiguityPolicy },
    Dbs { params: DbsParams, n_sim: usize, policy: AmbiguityPolicy },
}

impl ModelSpec {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::Beast(_) => ModelKind::Beast,
            ModelSpec::Cpt { params, .. } if params.is_stochastic() => ModelKind::CptStochastic,
            ModelSpec::Cpt { .. } => ModelKind::CptDeterministic,
            ModelSpec::PriorityHeuristic { .. } => ModelKind::PriorityHeuristic,
            ModelSpec::Dbs { .. } => ModelKind::Dbs,
        }
    }

    /// Block rates for one problem. Simulation models key their randomness
    /// on `(seed, problem id)`, so the answer does not depend on which other
    /// problems are predicted alongside.
    pub fn predict(&self, problem: &ChoiceProblem, seed: u64) -> Result<BlockRates> {
        let constant = |p: f64| [p; BLOCKS];
        match self {
            ModelSpec::Beast(params) => {
                beast::beast_predict(problem, params, rng::derive_seed(seed, rng::key_of(&problem.id)))
            }
            ModelSpec::Cpt { params, policy } => cpt_predict(problem, params, *policy).map(constant),
            ModelSpec::PriorityHeuristic { policy } => priority_heuristic_predict(problem, *policy).map(constant),
            ModelSpec::Dbs { params, n_sim, policy } => dbs_predict(problem, params, seed, *n_sim, *policy).map(constant),
        }
    }

    /// Predictions for many problems, in input order.
    pub fn predict_all(&self, problems: &[ChoiceProblem], seed: u64) -> Result<Vec<BlockRates>> {
        problems
            .par_iter()
            .map(|p| self.predict(p, seed).map_err(|e| e.in_problem(&p.id)))
            .collect()
    }

    /// Set one named parameter; used by grid search and parameter files.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let unknown = |kind: ModelKind| Err(Error::validation(format!("{kind} has no parameter `{name}`")));
        let kind = self.kind();
        match self {
            ModelSpec::Beast(p) => match name {
                "sigma" => p.sigma = value,
                "kappa" => p.kappa = as_count(name, value)? as u32,
                "tool_unbiased" => p.tool_probs[0] = value,
                "tool_uniform" => p.tool_probs[1] = value,
                "tool_sign" => p.tool_probs[2] = value,
                "tool_pessimism" => p.tool_probs[3] = value,
                "w_amb" => p.w_amb = value,
                "t_learn" => p.t_learn = value,
                "t_learn_amb" => p.t_learn_amb = value,
                "psi_trivial" => p.psi_trivial = value,
                "psi_complex" => p.psi_complex = value,
                "n_agents" => p.n_agents = as_count(name, value)? as usize,
                _ => return unknown(kind),
            },
            ModelSpec::Cpt { params, .. } => match name {
                "alpha" => params.alpha = value,
                "gamma" => params.gamma = value,
                "delta" => params.delta = value,
                "lambda" => params.lambda = value,
                "mu" if params.is_stochastic() => params.mu = Some(value),
                _ => return unknown(kind),
            },
            ModelSpec::Dbs { params, n_sim, .. } => match name {
                "outcome_threshold" => params.outcome_threshold = value,
                "prob_threshold" => params.prob_threshold = value,
                "choice_threshold" => params.choice_threshold = as_count(name, value)? as u32,
                "n_sim" => *n_sim = as_count(name, value)? as usize,
                _ => return unknown(kind),
            },
            ModelSpec::PriorityHeuristic { .. } => return unknown(kind),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Beast(p) => p.validate(),
            ModelSpec::Cpt { params, .. } => params.validate(),
            ModelSpec::Dbs { params, n_sim, .. } => {
                if *n_sim < 1 {
                    return Err(Error::contract("n_sim must be at least 1"));
                }
                params.validate()
            }
            ModelSpec::PriorityHeuristic { .. } => Ok(()),
        }
    }

    pub fn with_policy(mut self, new: AmbiguityPolicy) -> Self {
        match &mut self {
            ModelSpec::Cpt { policy, .. }
            | ModelSpec::PriorityHeuristic { policy }
            | ModelSpec::Dbs { policy, .. } => *policy = new,
            ModelSpec::Beast(_) => {}
        }
        self
    }
}

fn as_count(name: &str, value: f64) -> Result<u64> {
    if value >= 0.0 && value.fract() == 0.0 && value.is_finite() {
        Ok(value as u64)
    } else {
        Err(Error::validation(format!("`{name}` needs a whole number, got {value}")))
    }
}
