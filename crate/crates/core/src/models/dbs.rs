//! Decision by sampling.
//!
//! Choice emerges from a sequence of ordinal comparisons. At each step a
//! target attribute (an amount or its probability) of a random option is
//! compared with the same attribute drawn either from the other option or
//! from long-term memory. A comparison the target wins by more than the
//! attribute's threshold adds one to that option's tally; the first option
//! whose net tally reaches the choice threshold is chosen.

use std::io::Read;

use rand::Rng;
use rand_distr::{Distribution, LogNormal};

use crate::error::{Error, Result};
use crate::problems::{ChoiceProblem, OutcomeDistribution};
use crate::rng::{self, Domain, SimRng};

use super::{effective_distributions, AmbiguityPolicy};

/// Shekels per pound, for converting pound-denominated context amounts.
pub const SHEKELS_PER_POUND: f64 = 4.5;

/// Comparisons allowed per simulated decision before the tally sign decides.
pub const MAX_COMPARISONS: usize = 10_000;

/// Long-term memory samples of amounts and probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct DbsContext {
    pub amounts: Vec<f64>,
    pub probabilities: Vec<f64>,
}

impl DbsContext {
    /// Synthetic context: log-normal gain amounts mirrored into losses, and a
    /// uniform probability grid 0.01, 0.02, ..., 0.99.
    pub fn synthetic() -> Self {
        let mut rng = rng::substream(0, Domain::Context, 0);
        let dist = LogNormal::new(20f64.ln(), 1.2).expect("valid log-normal");
        let mut amounts: Vec<f64> = (0..200)
            .map(|_| (dist.sample(&mut rng) * 100.0).round() / 100.0)
            .flat_map(|x: f64| [x, -x])
            .collect();
        amounts.sort_by(f64::total_cmp);
        let probabilities = (1..100).map(|i| i as f64 / 100.0).collect();
        DbsContext { amounts, probabilities }
    }

    /// Context from pound-denominated amounts.
    pub fn from_pounds(amounts_gbp: &[f64], probabilities: Vec<f64>) -> Result<Self> {
        DbsContext {
            amounts: amounts_gbp.iter().map(|x| x * SHEKELS_PER_POUND).collect(),
            probabilities,
        }
        .checked()
    }

    pub fn checked(self) -> Result<Self> {
        if self.amounts.is_empty() || self.probabilities.is_empty() {
            return Err(Error::contract("DbS context lists must be non-empty"));
        }
        if self.amounts.iter().chain(&self.probabilities).any(|v| !v.is_finite()) {
            return Err(Error::contract("DbS context values must be finite"));
        }
        Ok(self)
    }

    /// Read a one-column list of numbers (a header line is skipped if present).
    pub fn read_list<R: Read>(r: R) -> Result<Vec<f64>> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(r);
        let mut out = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let Some(raw) = rec.get(0) else { continue };
            match raw.parse::<f64>() {
                Ok(v) => out.push(v),
                Err(_) if i == 0 => {}
                Err(_) => return Err(Error::parse(i + 1, "value", format!("`{raw}` is not a number"))),
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DbsParams {
    pub outcome_threshold: f64,
    pub prob_threshold: f64,
    pub choice_threshold: u32,
    pub context: DbsContext,
}

impl DbsParams {
    /// Best-fitting thresholds on the risk subset, with the synthetic context.
    pub fn fitted() -> Self {
        DbsParams {
            outcome_threshold: 1.0,
            prob_threshold: 0.1,
            choice_threshold: 1,
            context: DbsContext::synthetic(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.outcome_threshold >= 0.0 && self.prob_threshold >= 0.0) {
            return Err(Error::contract("DbS thresholds must be non-negative"));
        }
        if self.choice_threshold < 1 {
            return Err(Error::contract("DbS choice threshold must be at least 1"));
        }
        if self.context.amounts.is_empty() || self.context.probabilities.is_empty() {
            return Err(Error::contract("DbS context lists must be non-empty"));
        }
        Ok(())
    }
}

fn pick<R: Rng + ?Sized>(values: &[f64], rng: &mut R) -> f64 {
    values[rng.random_range(0..values.len())]
}

/// Simulate one decision; returns `true` when B is chosen.
pub fn dbs_decide(a: &OutcomeDistribution, b: &OutcomeDistribution, params: &DbsParams, rng: &mut SimRng) -> bool {
    let options = [a, b];
    let mut net: i64 = 0; // B tallies minus A tallies
    let bound = params.choice_threshold as i64;
    for _ in 0..MAX_COMPARISONS {
        let target = rng.random_range(0..2usize);
        let own = options[target].support();
        let other = options[1 - target].support();
        let use_amount = rng.random_bool(0.5);
        let from_memory = rng.random_bool(0.5);
        let t = own[rng.random_range(0..own.len())];
        let (target_value, comparison, threshold) = if use_amount {
            let c = if from_memory {
                pick(&params.context.amounts, rng)
            } else {
                other[rng.random_range(0..other.len())].payoff
            };
            (t.payoff, c, params.outcome_threshold)
        } else {
            let c = if from_memory {
                pick(&params.context.probabilities, rng)
            } else {
                other[rng.random_range(0..other.len())].prob
            };
            (t.prob, c, params.prob_threshold)
        };
        if target_value - comparison > threshold {
            net += if target == 1 { 1 } else { -1 };
            if net >= bound {
                return true;
            }
            if net <= -bound {
                return false;
            }
        }
    }
    if net != 0 {
        net > 0
    } else {
        rng.random_bool(0.5)
    }
}

/// Monte Carlo estimate of P(B) over `n_sim` simulated decisions drawn from
/// the problem's own substream of `seed`.
pub fn dbs_predict(problem: &ChoiceProblem, params: &DbsParams, seed: u64, n_sim: usize, policy: AmbiguityPolicy) -> Result<f64> {
    if n_sim < 1 {
        return Err(Error::contract("n_sim must be at least 1"));
    }
    params.validate()?;
    let (a, b) = effective_distributions(problem, policy, "decision by sampling")?;
    let mut rng = rng::substream(seed, Domain::Dbs, rng::key_of(&problem.id));
    let wins = (0..n_sim).filter(|_| dbs_decide(&a, &b, params, &mut rng)).count();
    Ok(wins as f64 / n_sim as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::OptionSpec;

    #[test]
    fn identical_options_split_evenly() {
        let o = OptionSpec::binary(-5, 20, 0.5);
        let p = ChoiceProblem::new("same", o.clone(), o);
        let n = 10_000;
        let rate = dbs_predict(&p, &DbsParams::fitted(), 3, n, AmbiguityPolicy::Strict).unwrap();
        assert!((rate - 0.5).abs() < 3.0 * (0.25 / n as f64).sqrt(), "{rate}");
    }

    #[test]
    fn dominated_option_is_rarely_chosen() {
        // A is better on every amount and every probability by more than the thresholds
        let a = OutcomeDistribution::from_pairs([(100.0, 0.5), (120.0, 0.5)]).unwrap();
        let b = OutcomeDistribution::from_pairs([(0.0, 0.2), (1.0, 0.2), (2.0, 0.2), (3.0, 0.2), (4.0, 0.2)]).unwrap();
        let params = DbsParams::fitted();
        let mut rng = rng::substream(5, Domain::Dbs, 0);
        let n = 4000;
        let wins = (0..n).filter(|_| dbs_decide(&a, &b, &params, &mut rng)).count();
        assert!((wins as f64 / n as f64) < 0.25, "{wins}");
    }

    #[test]
    fn seeded_runs_repeat() {
        let p = ChoiceProblem::new("r", OptionSpec::binary(0, 20, 0.5), OptionSpec::sure(9));
        let params = DbsParams::fitted();
        let x = dbs_predict(&p, &params, 11, 500, AmbiguityPolicy::Strict).unwrap();
        let y = dbs_predict(&p, &params, 11, 500, AmbiguityPolicy::Strict).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn pound_context_is_converted() {
        let c = DbsContext::from_pounds(&[1.0, 10.0], vec![0.5]).unwrap();
        assert_eq!(c.amounts, vec![4.5, 45.0]);
        assert!(DbsContext::from_pounds(&[], vec![0.5]).is_err());
    }

    #[test]
    fn list_reader_skips_header() {
        let v = DbsContext::read_list("amount\n1.5\n2\n".as_bytes()).unwrap();
        assert_eq!(v, vec![1.5, 2.0]);
        assert!(DbsContext::read_list("1\nx\n".as_bytes()).is_err());
    }
}
