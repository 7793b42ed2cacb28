//! Cumulative prospect theory with a shared curvature for gains and losses
//! and a two-parameter (sensitivity, elevation) weighting function.

use crate::error::{Error, Result};
use crate::problems::{ChoiceProblem, OutcomeDistribution};

use super::{effective_distributions, AmbiguityPolicy};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CptParams {
    /// Diminishing sensitivity.
    pub alpha: f64,
    /// Probability sensitivity.
    pub gamma: f64,
    /// Weighting elevation.
    pub delta: f64,
    /// Loss aversion.
    pub lambda: f64,
    /// Logit sensitivity; `None` selects the deterministic variant.
    pub mu: Option<f64>,
}

impl CptParams {
    /// Best-fitting deterministic parameters on the risk subset.
    pub const DETERMINISTIC: CptParams = CptParams {
        alpha: 0.88,
        gamma: 0.89,
        delta: 0.9,
        lambda: 1.2,
        mu: None,
    };

    /// Best-fitting stochastic parameters on the risk subset.
    pub const STOCHASTIC: CptParams = CptParams {
        alpha: 0.91,
        gamma: 0.84,
        delta: 0.83,
        lambda: 1.14,
        mu: Some(0.25),
    };

    pub fn is_stochastic(&self) -> bool {
        self.mu.is_some()
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [self.alpha, self.gamma, self.delta, self.lambda];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::contract(format!("CPT parameters must be positive: {self:?}")));
        }
        if let Some(mu) = self.mu {
            if !(mu >= 0.0 && mu.is_finite()) {
                return Err(Error::contract(format!("CPT mu {mu} must be non-negative")));
            }
        }
        Ok(())
    }
}

pub fn cpt_utility(x: f64, alpha: f64, lambda: f64) -> f64 {
    if x >= 0.0 {
        x.powf(alpha)
    } else {
        -lambda * (-x).powf(alpha)
    }
}

pub fn cpt_weight(p: f64, gamma: f64, delta: f64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    if p == 0.0 {
        return 0.0;
    }
    if p == 1.0 {
        return 1.0;
    }
    let num = delta * p.powf(gamma);
    num / (num + (1.0 - p).powf(gamma))
}

/// Rank-dependent decision weights, one per support point: cumulative from
/// the worst outcome for losses, decumulative from the best for gains.
pub fn decision_weights(prospect: &OutcomeDistribution, gamma: f64, delta: f64) -> Vec<f64> {
    let outcomes = prospect.support();
    let w = |p: f64| cpt_weight(p, gamma, delta);
    let mut weights = vec![0.0; outcomes.len()];
    let first_gain = outcomes.iter().position(|o| o.payoff >= 0.0).unwrap_or(outcomes.len());

    let mut below = 0.0;
    for (i, o) in outcomes[..first_gain].iter().enumerate() {
        let upto = below + o.prob;
        weights[i] = w(upto) - w(below);
        below = upto;
    }
    let mut above = 0.0;
    for j in (first_gain..outcomes.len()).rev() {
        // w is steep near 1, so the worst gain closes the total at exactly 1
        let from = if j == first_gain { 1.0 - below } else { above + outcomes[j].prob };
        weights[j] = w(from) - w(above);
        above = from;
    }
    weights
}

pub fn cpt_weighted_value(prospect: &OutcomeDistribution, params: &CptParams) -> f64 {
    decision_weights(prospect, params.gamma, params.delta)
        .iter()
        .zip(prospect.support())
        .map(|(pi, o)| pi * cpt_utility(o.payoff, params.alpha, params.lambda))
        .sum()
}

/// Choice probability of B from the two weighted values.
pub fn choice_from_values(wv_a: f64, wv_b: f64, mu: Option<f64>) -> f64 {
    let gap = wv_b - wv_a;
    match mu {
        None => {
            if gap > 0.0 {
                1.0
            } else if gap < 0.0 {
                0.0
            } else {
                0.5
            }
        }
        Some(mu) => 1.0 / (1.0 + (-mu * gap).exp()),
    }
}

/// P(B) under CPT; the same value applies to every block.
pub fn cpt_predict(problem: &ChoiceProblem, params: &CptParams, policy: AmbiguityPolicy) -> Result<f64> {
    params.validate()?;
    let (a, b) = effective_distributions(problem, policy, "cpt")?;
    Ok(choice_from_values(
        cpt_weighted_value(&a, params),
        cpt_weighted_value(&b, params),
        params.mu,
    ))
}
