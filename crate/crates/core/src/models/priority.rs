//! Priority heuristic: lexicographic comparison of minimum outcomes, their
//! probabilities, maximum outcomes and their probabilities, screened by an
//! EV-ratio test.

use crate::error::Result;
use crate::problems::{ChoiceProblem, OutcomeDistribution};

use super::{effective_distributions, AmbiguityPolicy};

const PROB_ASPIRATION: f64 = 0.1;
const EV_RATIO_SCREEN: f64 = 2.0;
const TOL: f64 = 1e-12;

/// Round to the nearest number of the form {1, 2, 5} x 10^k; exact
/// midpoints round up.
pub fn prominent_round(x: f64) -> f64 {
    if !(x > 0.0) || !x.is_finite() {
        return 0.0;
    }
    let decade = 10f64.powi(x.log10().floor() as i32);
    let mut best = decade;
    for c in [1.0, 2.0, 5.0, 10.0].map(|m| m * decade) {
        let (dc, db) = ((c - x).abs(), (best - x).abs());
        if dc < db || (dc - db).abs() <= TOL * x && c > best {
            best = c;
        }
    }
    best
}

/// Outcome aspiration level: a tenth of the largest absolute payoff,
/// rounded to a prominent number.
pub fn aspiration_level(a: &OutcomeDistribution, b: &OutcomeDistribution) -> f64 {
    let top = a.payoffs().chain(b.payoffs()).fold(0.0f64, |m, x| m.max(x.abs()));
    prominent_round(top / 10.0)
}

/// P(B) in {0, 0.5, 1} from two distributions.
pub fn priority_choice(a: &OutcomeDistribution, b: &OutcomeDistribution) -> f64 {
    let pick = |b_wins: bool| if b_wins { 1.0 } else { 0.0 };
    let (ev_a, ev_b) = (a.mean(), b.mean());
    if ev_a != 0.0 && ev_b != 0.0 && ev_a.signum() == ev_b.signum() {
        let (lo, hi) = if ev_a.abs() < ev_b.abs() { (ev_a.abs(), ev_b.abs()) } else { (ev_b.abs(), ev_a.abs()) };
        if hi / lo > EV_RATIO_SCREEN {
            return pick(ev_b > ev_a);
        }
    }
    let aspiration = aspiration_level(a, b);
    let first = |d: &OutcomeDistribution| d.support()[0];
    let last = |d: &OutcomeDistribution| d.support()[d.len() - 1];

    let (min_a, min_b) = (first(a), first(b));
    if (min_a.payoff - min_b.payoff).abs() > aspiration + TOL {
        return pick(min_b.payoff > min_a.payoff);
    }
    if (min_a.prob - min_b.prob).abs() > PROB_ASPIRATION + TOL {
        return pick(min_b.prob < min_a.prob);
    }
    let (max_a, max_b) = (last(a), last(b));
    if (max_a.payoff - max_b.payoff).abs() > aspiration + TOL {
        return pick(max_b.payoff > max_a.payoff);
    }
    if (max_a.prob - max_b.prob).abs() > PROB_ASPIRATION + TOL {
        return pick(max_b.prob > max_a.prob);
    }
    0.5
}

pub fn priority_heuristic_predict(problem: &ChoiceProblem, policy: AmbiguityPolicy) -> Result<f64> {
    let (a, b) = effective_distributions(problem, policy, "priority heuristic")?;
    Ok(priority_choice(&a, &b))
}
