//! BEAST-family choice simulator.
//!
//! Each simulated agent values an option as its best-estimate EV, plus the
//! mean of a few mental draws made with one of four sampling tools, plus
//! Gaussian noise. Noise shrinks when the problem is subjectively trivial and
//! grows when it is complex. From trial 6 on, both payoffs are revealed and
//! unbiased draws increasingly come from the agent's own experience.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::problems::{ChoiceProblem, Coupling, JointSample, OutcomeDistribution};
use crate::rng::{self, Domain, SimRng};
use crate::{BlockRates, BLOCKS, TRIALS, TRIALS_PER_BLOCK};

/// First trial whose outcome is followed by feedback.
const FIRST_FEEDBACK_TRIAL: usize = TRIALS_PER_BLOCK + 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tool {
    Unbiased,
    Uniform,
    Sign,
    Pessimism,
}

impl Tool {
    pub const ALL: [Tool; 4] = [Tool::Unbiased, Tool::Uniform, Tool::Sign, Tool::Pessimism];
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeastParams {
    /// Scale of the EV-estimation noise, in payoff units.
    pub sigma: f64,
    /// Mental sample size.
    pub kappa: u32,
    /// Weights of the unbiased, uniform, sign and pessimism tools.
    pub tool_probs: [f64; 4],
    /// Weight the ambiguous-B prior puts on B's worst outcome.
    pub w_amb: f64,
    /// Trials after the first feedback until draws come only from experience.
    pub t_learn: f64,
    /// Same horizon for ambiguous problems.
    pub t_learn_amb: f64,
    /// Noise multiplier for subjectively dominated problems.
    pub psi_trivial: f64,
    /// Noise multiplier for complex problems.
    pub psi_complex: f64,
    pub n_agents: usize,
}

impl Default for BeastParams {
    fn default() -> Self {
        BeastParams {
            sigma: 2.0,
            kappa: 5,
            tool_probs: [0.4, 0.2, 0.2, 0.2],
            w_amb: 0.3,
            t_learn: 15.0,
            t_learn_amb: 8.0,
            psi_trivial: 0.25,
            psi_complex: 1.5,
            n_agents: 4000,
        }
    }
}

impl BeastParams {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::contract(format!("BEAST parameters: {m}")));
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return fail(format!("sigma {} must be finite and non-negative", self.sigma));
        }
        if self.kappa < 1 {
            return fail("kappa must be at least 1".into());
        }
        let total: f64 = self.tool_probs.iter().sum();
        if self.tool_probs.iter().any(|&p| !(p >= 0.0)) || (total - 1.0).abs() > 1e-12 {
            return fail(format!("tool probabilities {:?} do not form a simplex", self.tool_probs));
        }
        if !(0.0..=1.0).contains(&self.w_amb) {
            return fail(format!("w_amb {} outside [0, 1]", self.w_amb));
        }
        if !(self.t_learn >= 1.0 && self.t_learn_amb >= 1.0) {
            return fail("learning horizons must be at least 1".into());
        }
        if self.t_learn_amb > self.t_learn {
            return fail("t_learn_amb must not exceed t_learn".into());
        }
        if !(self.psi_trivial > 0.0 && self.psi_trivial <= 1.0) {
            return fail(format!("psi_trivial {} outside (0, 1]", self.psi_trivial));
        }
        if !(self.psi_complex >= 1.0 && self.psi_complex.is_finite()) {
            return fail(format!("psi_complex {} below 1", self.psi_complex));
        }
        if self.n_agents < 1 {
            return fail("n_agents must be at least 1".into());
        }
        Ok(())
    }

    fn pick_tool<R: Rng + ?Sized>(&self, rng: &mut R) -> Tool {
        let u: f64 = rng.random();
        let mut cum = 0.0;
        for (tool, p) in Tool::ALL.iter().zip(self.tool_probs) {
            cum += p;
            if u < cum {
                return *tool;
            }
        }
        // u landed in the rounding gap above the last cumulative weight
        Tool::ALL
            .iter()
            .zip(self.tool_probs)
            .rev()
            .find(|(_, p)| *p > 0.0)
            .map(|(t, _)| *t)
            .unwrap_or(Tool::Unbiased)
    }
}

/// Prior an agent holds over ambiguous option B: weight `w_amb` on B's worst
/// outcome, the rest spread evenly over B's listed outcomes.
pub fn ambiguous_prior(b: &OutcomeDistribution, w_amb: f64) -> OutcomeDistribution {
    let m = b.len() as f64;
    let worst = b.min();
    OutcomeDistribution::from_pairs(
        b.payoffs()
            .map(|x| (x, (1.0 - w_amb) / m + if x == worst { w_amb } else { 0.0 })),
    )
    .expect("prior mass sums to one")
}

/// Distributions as the decision maker sees them before feedback: B is
/// replaced by the ambiguity prior when its probabilities are hidden.
pub fn described_distributions(problem: &ChoiceProblem, w_amb: f64) -> Result<(OutcomeDistribution, OutcomeDistribution)> {
    let (a, b) = problem.distributions()?;
    let b = if problem.amb { ambiguous_prior(&b, w_amb) } else { b };
    Ok((a, b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dominance {
    A,
    B,
    None,
}

impl Dominance {
    /// +1 when B is favored, -1 when A is, 0 otherwise.
    pub fn signed(self) -> f64 {
        match self {
            Dominance::A => -1.0,
            Dominance::B => 1.0,
            Dominance::None => 0.0,
        }
    }
}

fn dominance_of(described: &Coupling) -> Dominance {
    let ev = described.b.mean() - described.a.mean();
    let uniform = described.b.uniform_mean() - described.a.uniform_mean();
    let favored = if ev > 0.0 && uniform > 0.0 {
        Dominance::B
    } else if ev < 0.0 && uniform < 0.0 {
        Dominance::A
    } else {
        return Dominance::None;
    };
    let no_regret = described.joint().iter().all(|&(a, b, _)| match favored {
        Dominance::B => b >= a,
        _ => a >= b,
    });
    if no_regret {
        favored
    } else {
        Dominance::None
    }
}

/// Option favored by both the EV rule and the equal-weighting rule, provided
/// choosing it never yields a lower payoff than the forgone one.
pub fn subjective_dominance(problem: &ChoiceProblem, w_amb: f64) -> Result<Dominance> {
    let (a, b) = described_distributions(problem, w_amb)?;
    Ok(dominance_of(&Coupling::new(a, b, problem.corr)?))
}

/// One option has at least two outcomes and the other at least three.
pub fn is_complex(problem: &ChoiceProblem) -> Result<bool> {
    let (a, b) = problem.distributions()?;
    Ok(complexity(a.len(), b.len()))
}

fn complexity(na: usize, nb: usize) -> bool {
    (na >= 2 && nb >= 3) || (na >= 3 && nb >= 2)
}

/// Everything about a problem the simulator needs, computed once.
#[derive(Debug, Clone)]
pub struct PreparedProblem {
    /// True payoff process, used for feedback.
    objective: Coupling,
    /// Payoffs as described (ambiguity prior for B).
    described: Coupling,
    /// Equal weight on every listed outcome.
    uniform: Coupling,
    bev: (f64, f64),
    worst: (f64, f64),
    /// Largest absolute payoff in the problem.
    scale: f64,
    pub dominance: Dominance,
    pub complex: bool,
    pub amb: bool,
}

impl PreparedProblem {
    pub fn new(problem: &ChoiceProblem, w_amb: f64) -> Result<Self> {
        let (a, b) = problem.distributions()?;
        let described_b = if problem.amb { ambiguous_prior(&b, w_amb) } else { b.clone() };
        let ua = uniform_of(&a);
        let ub = uniform_of(&b);
        let scale = a.payoffs().chain(b.payoffs()).fold(0.0f64, |m, x| m.max(x.abs()));
        let complex = complexity(a.len(), b.len());
        let described = Coupling::new(a.clone(), described_b, problem.corr)?;
        let dominance = dominance_of(&described);
        Ok(PreparedProblem {
            bev: (described.a.mean(), described.b.mean()),
            worst: (a.min(), b.min()),
            objective: Coupling::new(a, b, problem.corr)?,
            uniform: Coupling::new(ua, ub, problem.corr)?,
            described,
            scale,
            dominance,
            complex,
            amb: problem.amb,
        })
    }

    /// Noise multiplier for this problem.
    pub fn noise_scale(&self, params: &BeastParams) -> f64 {
        if self.dominance != Dominance::None {
            params.psi_trivial
        } else if self.complex {
            params.psi_complex
        } else {
            1.0
        }
    }

    /// Draw one realized payoff pair from the true process.
    pub fn feedback<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let s = self.objective.sample_with(rng);
        (s.payoff_a, s.payoff_b)
    }

    fn sign(&self, x: f64) -> f64 {
        if x > 0.0 {
            self.scale
        } else if x < 0.0 {
            -self.scale
        } else {
            0.0
        }
    }
}

fn uniform_of(d: &OutcomeDistribution) -> OutcomeDistribution {
    OutcomeDistribution::uniform_over(&d.payoffs().collect::<Vec<_>>()).expect("non-empty support")
}

/// Payoff pairs observed on feedback trials.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperienceBuffer {
    pairs: Vec<(f64, f64)>,
}

impl ExperienceBuffer {
    pub fn new() -> Self {
        ExperienceBuffer::default()
    }

    pub fn push(&mut self, pair: (f64, f64)) {
        self.pairs.push(pair);
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }
}

/// One mental draw for both options.
///
/// `from_experience` says whether an unbiased (or sign) draw should come
/// from the buffer; it is ignored while the buffer is empty.
pub fn mental_draw<R: Rng + ?Sized>(
    prepared: &PreparedProblem,
    tool: Tool,
    buffer: &ExperienceBuffer,
    from_experience: bool,
    rng: &mut R,
) -> (f64, f64) {
    let unbiased = |rng: &mut R| -> (f64, f64) {
        if from_experience && !buffer.is_empty() {
            buffer.pairs[rng.random_range(0..buffer.len())]
        } else {
            let JointSample { payoff_a, payoff_b } = prepared.described.sample_with(rng);
            (payoff_a, payoff_b)
        }
    };
    match tool {
        Tool::Unbiased => unbiased(rng),
        Tool::Uniform => {
            let s = prepared.uniform.sample_with(rng);
            (s.payoff_a, s.payoff_b)
        }
        Tool::Sign => {
            let (a, b) = unbiased(rng);
            (prepared.sign(a), prepared.sign(b))
        }
        Tool::Pessimism => prepared.worst,
    }
}

/// Probability that a draw on trial `trial` (1-based) uses experience.
pub fn experience_weight(trial: usize, horizon: f64) -> f64 {
    let since = trial.saturating_sub(TRIALS_PER_BLOCK) as f64;
    (since / horizon).clamp(0.0, 1.0)
}

/// Simulate one agent's 25 choices; `true` means option B.
pub fn simulate_agent(prepared: &PreparedProblem, params: &BeastParams, rng: &mut SimRng) -> [bool; TRIALS] {
    let horizon = if prepared.amb { params.t_learn_amb } else { params.t_learn };
    let noise = params.sigma * prepared.noise_scale(params);
    let mut buffer = ExperienceBuffer::new();
    let mut choices = [false; TRIALS];
    for (t, choice) in choices.iter_mut().enumerate() {
        let trial = t + 1;
        let theta = experience_weight(trial, horizon);
        let (mut sum_a, mut sum_b) = (0.0, 0.0);
        for _ in 0..params.kappa {
            let tool = params.pick_tool(rng);
            let from_experience = rng.random::<f64>() < theta;
            let (a, b) = mental_draw(prepared, tool, &buffer, from_experience, rng);
            sum_a += a;
            sum_b += b;
        }
        let k = params.kappa as f64;
        let na: f64 = rng.sample(StandardNormal);
        let nb: f64 = rng.sample(StandardNormal);
        let value_a = prepared.bev.0 + sum_a / k + noise * na;
        let value_b = prepared.bev.1 + sum_b / k + noise * nb;
        *choice = if value_b > value_a {
            true
        } else if value_b < value_a {
            false
        } else {
            rng.random_bool(0.5)
        };
        if trial >= FIRST_FEEDBACK_TRIAL {
            buffer.push(prepared.feedback(rng));
        }
    }
    choices
}

/// B-choice counts per block for one agent.
pub fn block_counts(choices: &[bool; TRIALS]) -> [u32; BLOCKS] {
    let mut counts = [0u32; BLOCKS];
    for (t, &c) in choices.iter().enumerate() {
        counts[t / TRIALS_PER_BLOCK] += c as u32;
    }
    counts
}

/// Mean per-block B-choice rate over `params.n_agents` simulated agents.
/// Agent `i` draws from substream `i` of `seed`.
pub fn beast_predict(problem: &ChoiceProblem, params: &BeastParams, seed: u64) -> Result<BlockRates> {
    params.validate()?;
    let prepared = PreparedProblem::new(problem, params.w_amb)?;
    let counts: Vec<[u32; BLOCKS]> = (0..params.n_agents)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::substream(seed, Domain::Beast, i as u64);
            block_counts(&simulate_agent(&prepared, params, &mut rng))
        })
        .collect();
    let mut totals = [0u64; BLOCKS];
    for c in &counts {
        for (t, &x) in totals.iter_mut().zip(c) {
            *t += x as u64;
        }
    }
    let denom = (params.n_agents * TRIALS_PER_BLOCK) as f64;
    Ok(totals.map(|t| t as f64 / denom))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{Correlation, LotShape, OptionSpec};

    fn quick(n_agents: usize) -> BeastParams {
        BeastParams { n_agents, ..Default::default() }
    }

    #[test]
    fn default_params_are_valid() {
        BeastParams::default().validate().unwrap();
        let bad = BeastParams { tool_probs: [0.5, 0.5, 0.5, 0.0], ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = BeastParams { t_learn_amb: 20.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn dominance_examples() {
        let p = ChoiceProblem::new("d", OptionSpec::sure(10), OptionSpec::sure(5));
        assert_eq!(subjective_dominance(&p, 0.3).unwrap(), Dominance::A);

        let p = ChoiceProblem::new("d", OptionSpec::binary(0, 20, 0.5), OptionSpec::sure(10));
        assert_eq!(subjective_dominance(&p, 0.3).unwrap(), Dominance::None);

        let o = OptionSpec::binary(0, 20, 0.5);
        let p = ChoiceProblem::new("d", o.clone(), o);
        assert_eq!(subjective_dominance(&p, 0.3).unwrap(), Dominance::None);

        // B better by EV and equal weighting, and never worse when comonotone
        let p = ChoiceProblem::new("d", OptionSpec::binary(0, 10, 0.5), OptionSpec::binary(1, 11, 0.5))
            .with_corr(Correlation::Positive);
        assert_eq!(subjective_dominance(&p, 0.3).unwrap(), Dominance::B);
        // independent payoffs can leave B behind (B = 1 while A = 10)
        let p = p.with_corr(Correlation::Independent);
        assert_eq!(subjective_dominance(&p, 0.3).unwrap(), Dominance::None);
    }

    #[test]
    fn complexity_examples() {
        let p = ChoiceProblem::new("c", OptionSpec::sure(1), OptionSpec::sure(2));
        assert!(!is_complex(&p).unwrap());
        let three = OptionSpec { low: 0, high: 10, p_high: 1.0, lot_num: 3, lot_shape: LotShape::Symm };
        let p = ChoiceProblem::new("c", OptionSpec::binary(0, 5, 0.5), three);
        assert!(is_complex(&p).unwrap());
        let p = ChoiceProblem::new("c", OptionSpec::binary(0, 5, 0.5), OptionSpec::binary(1, 3, 0.5));
        assert!(!is_complex(&p).unwrap());
    }

    #[test]
    fn pessimism_and_sign_tools() {
        let p = ChoiceProblem::new("t", OptionSpec::binary(0, 20, 0.5), OptionSpec::sure(10));
        let prep = PreparedProblem::new(&p, 0.3).unwrap();
        let mut rng = rng::substream(1, Domain::Beast, 0);
        let buf = ExperienceBuffer::new();
        assert_eq!(mental_draw(&prep, Tool::Pessimism, &buf, false, &mut rng), (0.0, 10.0));

        let p = ChoiceProblem::new("s", OptionSpec::binary(-5, 10, 0.5), OptionSpec::sure(0));
        let prep = PreparedProblem::new(&p, 0.3).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..200 {
            let (a, b) = mental_draw(&prep, Tool::Sign, &buf, false, &mut rng);
            assert_eq!(b, 0.0);
            seen.insert(a as i64);
        }
        assert_eq!(seen.into_iter().collect::<Vec<_>>(), vec![-10, 10]);
    }

    #[test]
    fn uniform_tool_ignores_probabilities() {
        let p = ChoiceProblem::new("u", OptionSpec::binary(0, 100, 0.1), OptionSpec::sure(5));
        let prep = PreparedProblem::new(&p, 0.3).unwrap();
        let mut rng = rng::substream(2, Domain::Beast, 0);
        let buf = ExperienceBuffer::new();
        let n = 20_000;
        let hits = (0..n)
            .filter(|_| mental_draw(&prep, Tool::Uniform, &buf, false, &mut rng).0 == 100.0)
            .count();
        let rate = hits as f64 / n as f64;
        assert!((rate - 0.5).abs() < 3.0 * (0.25f64 / n as f64).sqrt(), "{rate}");
    }

    #[test]
    fn unbiased_draws_use_experience_when_asked() {
        let p = ChoiceProblem::new("e", OptionSpec::binary(0, 20, 0.5), OptionSpec::sure(10));
        let prep = PreparedProblem::new(&p, 0.3).unwrap();
        let mut buf = ExperienceBuffer::new();
        buf.push((20.0, 10.0));
        let mut rng = rng::substream(3, Domain::Beast, 0);
        for _ in 0..50 {
            assert_eq!(mental_draw(&prep, Tool::Unbiased, &buf, true, &mut rng), (20.0, 10.0));
        }
    }

    #[test]
    fn ambiguous_prior_tilts_toward_worst() {
        let b = OutcomeDistribution::from_pairs([(0.0, 0.9), (10.0, 0.1)]).unwrap();
        let prior = ambiguous_prior(&b, 0.3);
        let probs: Vec<f64> = prior.support().iter().map(|o| o.prob).collect();
        assert!((probs[0] - 0.65).abs() < 1e-12 && (probs[1] - 0.35).abs() < 1e-12);
    }

    #[test]
    fn agent_is_deterministic_given_stream() {
        let p = ChoiceProblem::new("r", OptionSpec::binary(-20, 0, 0.9), OptionSpec::sure(-1));
        let prep = PreparedProblem::new(&p, 0.3).unwrap();
        let params = BeastParams::default();
        let a = simulate_agent(&prep, &params, &mut rng::substream(4, Domain::Beast, 9));
        let b = simulate_agent(&prep, &params, &mut rng::substream(4, Domain::Beast, 9));
        assert_eq!(a, b);
    }

    #[test]
    fn dominant_sure_option_is_chosen() {
        let p = ChoiceProblem::new("s", OptionSpec::sure(10), OptionSpec::sure(0));
        let params = BeastParams { sigma: 0.1, ..quick(500) };
        assert_eq!(beast_predict(&p, &params, 1).unwrap(), [0.0; 5]);
        let p = ChoiceProblem::new("s", OptionSpec::sure(-10), OptionSpec::sure(10));
        assert_eq!(beast_predict(&p, &BeastParams { sigma: 0.0, ..quick(1) }, 1).unwrap(), [1.0; 5]);
    }

    #[test]
    fn identical_options_are_a_coin_flip() {
        let o = OptionSpec::binary(0, 20, 0.5);
        let p = ChoiceProblem::new("i", o.clone(), o);
        let rates = beast_predict(&p, &quick(4000), 7).unwrap();
        let sd = (0.25f64 / (4000.0 * 5.0)).sqrt();
        for r in rates {
            // within-agent trials are correlated, so allow a wider band
            assert!((r - 0.5).abs() < 6.0 * sd, "{rates:?}");
        }
    }

    #[test]
    fn experience_weight_ramps() {
        assert_eq!(experience_weight(5, 10.0), 0.0);
        assert_eq!(experience_weight(6, 10.0), 0.1);
        assert_eq!(experience_weight(25, 10.0), 1.0);
    }
}
