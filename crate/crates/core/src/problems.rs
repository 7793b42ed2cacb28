//! Problem-space algebra.
//!
//! A choice problem pairs two options. Each option pays a lottery with
//! expected value `H` with probability `pH` and the sure amount `L`
//! otherwise; the lottery itself is a point mass, a binomial spread around
//! `H`, or a truncated geometric skew. Problems also carry an ambiguity flag
//! (B's probabilities hidden) and a payoff correlation in {-1, 0, +1}.

use std::fmt;
use std::io::{Read, Write};

use rand::Rng;
use rand_distr::{Distribution, Triangular};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{self, Domain};

/// Probability of the high branch, as drawn by the generator.
pub const PH_SET: [f64; 14] = [
    0.01, 0.05, 0.1, 0.2, 0.25, 0.4, 0.5, 0.6, 0.75, 0.8, 0.9, 0.95, 0.99, 1.0,
];

/// Signed lottery sizes for skewed lotteries: negative means L-skew.
const SKEW_SET: [i64; 13] = [-7, -6, -5, -4, -3, -2, 2, 3, 4, 5, 6, 7, 8];
const SYMM_SET: [u32; 4] = [3, 5, 7, 9];

pub const MIN_PAYOFF: f64 = -50.0;
pub const MAX_PAYOFF: f64 = 256.0;
pub const MAX_LOT_NUM: u32 = 10;

const PROB_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LotShape {
    None,
    Symm,
    RSkew,
    LSkew,
}

impl LotShape {
    pub const ALL: [LotShape; 4] = [LotShape::None, LotShape::Symm, LotShape::RSkew, LotShape::LSkew];

    /// The literal used in problem files.
    pub fn literal(self) -> &'static str {
        match self {
            LotShape::None => "-",
            LotShape::Symm => "Symm",
            LotShape::RSkew => "R-skew",
            LotShape::LSkew => "L-skew",
        }
    }

    pub fn from_literal(s: &str) -> Option<Self> {
        match s.trim() {
            "-" => Some(LotShape::None),
            "Symm" => Some(LotShape::Symm),
            "R-skew" => Some(LotShape::RSkew),
            "L-skew" => Some(LotShape::LSkew),
            _ => None,
        }
    }
}

impl fmt::Display for LotShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.literal())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Correlation {
    Negative,
    Independent,
    Positive,
}

impl Correlation {
    pub fn value(self) -> i8 {
        match self {
            Correlation::Negative => -1,
            Correlation::Independent => 0,
            Correlation::Positive => 1,
        }
    }

    pub fn from_value(v: i64) -> Option<Self> {
        match v {
            -1 => Some(Correlation::Negative),
            0 => Some(Correlation::Independent),
            1 => Some(Correlation::Positive),
            _ => None,
        }
    }
}

/// One option of a choice problem.
#[derive(Debug, Clone, PartialEq)]
pub struct OptionSpec {
    /// Sure payoff obtained when the lottery is not drawn.
    pub low: i64,
    /// Expected value of the lottery.
    pub high: i64,
    /// Probability that the lottery is drawn.
    pub p_high: f64,
    pub lot_num: u32,
    pub lot_shape: LotShape,
}

impl OptionSpec {
    /// A sure payoff.
    pub fn sure(x: i64) -> Self {
        OptionSpec {
            low: x,
            high: x,
            p_high: 1.0,
            lot_num: 1,
            lot_shape: LotShape::None,
        }
    }

    /// `high` with probability `p_high`, `low` otherwise, no lottery.
    pub fn binary(low: i64, high: i64, p_high: f64) -> Self {
        OptionSpec {
            low,
            high,
            p_high,
            lot_num: 1,
            lot_shape: LotShape::None,
        }
    }

    /// Expected value, computed from the parameters.
    pub fn expected_value(&self) -> f64 {
        self.p_high * self.high as f64 + (1.0 - self.p_high) * self.low as f64
    }

    fn check(&self) -> std::result::Result<(), String> {
        if !(self.p_high > 0.0 && self.p_high <= 1.0) {
            return Err(format!("pH {} outside (0, 1]", self.p_high));
        }
        check_lottery(self.lot_num, self.lot_shape)?;
        if self.lot_num > MAX_LOT_NUM {
            return Err(format!("LotNum {} above {}", self.lot_num, MAX_LOT_NUM));
        }
        Ok(())
    }
}

fn check_lottery(lot_num: u32, shape: LotShape) -> std::result::Result<(), String> {
    if lot_num == 0 {
        return Err("LotNum must be at least 1".into());
    }
    if (shape == LotShape::None) != (lot_num == 1) {
        return Err(format!(
            "LotShape `{}` is inconsistent with LotNum {}",
            shape, lot_num
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChoiceProblem {
    pub id: String,
    pub a: OptionSpec,
    pub b: OptionSpec,
    /// Option B's probabilities are hidden.
    pub amb: bool,
    pub corr: Correlation,
}

impl ChoiceProblem {
    pub fn new(id: impl Into<String>, a: OptionSpec, b: OptionSpec) -> Self {
        ChoiceProblem {
            id: id.into(),
            a,
            b,
            amb: false,
            corr: Correlation::Independent,
        }
    }

    pub fn with_corr(mut self, corr: Correlation) -> Self {
        self.corr = corr;
        self
    }

    pub fn with_amb(mut self, amb: bool) -> Self {
        self.amb = amb;
        self
    }

    /// Objective payoff distributions of options A and B.
    pub fn distributions(&self) -> Result<(OutcomeDistribution, OutcomeDistribution)> {
        Ok((option_distribution(&self.a)?, option_distribution(&self.b)?))
    }

    /// The same problem with the options exchanged. The coupling is
    /// symmetric in the two options, so `corr` carries over unchanged.
    pub fn swapped(&self) -> Self {
        ChoiceProblem {
            id: format!("{}~swap", self.id),
            a: self.b.clone(),
            b: self.a.clone(),
            amb: self.amb,
            corr: self.corr,
        }
    }
}

/// One support point of a distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub payoff: f64,
    pub prob: f64,
}

/// Finite distribution over payoffs, sorted ascending with distinct payoffs
/// and strictly positive masses.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    support: Vec<Outcome>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistStats {
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

impl OutcomeDistribution {
    /// Build from (payoff, probability) pairs in any order; equal payoffs
    /// are merged and zero masses dropped.
    pub fn from_pairs<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let mut raw: Vec<(f64, f64)> = pairs.into_iter().collect();
        for &(x, p) in &raw {
            if !x.is_finite() || !p.is_finite() || p < 0.0 {
                return Err(Error::contract(format!("invalid outcome ({x}, {p})")));
            }
        }
        raw.retain(|&(_, p)| p > 0.0);
        raw.sort_by(|l, r| l.0.total_cmp(&r.0));
        let mut support: Vec<Outcome> = Vec::with_capacity(raw.len());
        for (payoff, prob) in raw {
            match support.last_mut() {
                Some(last) if last.payoff == payoff => last.prob += prob,
                _ => support.push(Outcome { payoff, prob }),
            }
        }
        let total: f64 = support.iter().map(|o| o.prob).sum();
        if support.is_empty() || (total - 1.0).abs() > PROB_TOL {
            return Err(Error::contract(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(OutcomeDistribution { support })
    }

    pub fn degenerate(x: f64) -> Self {
        OutcomeDistribution {
            support: vec![Outcome { payoff: x, prob: 1.0 }],
        }
    }

    /// Equal mass on each distinct payoff.
    pub fn uniform_over(payoffs: &[f64]) -> Result<Self> {
        let mut xs = payoffs.to_vec();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        if xs.is_empty() {
            return Err(Error::contract("uniform distribution over no payoffs"));
        }
        let p = 1.0 / xs.len() as f64;
        Ok(OutcomeDistribution {
            support: xs.into_iter().map(|payoff| Outcome { payoff, prob: p }).collect(),
        })
    }

    pub fn support(&self) -> &[Outcome] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn is_degenerate(&self) -> bool {
        self.support.len() == 1
    }

    pub fn payoffs(&self) -> impl Iterator<Item = f64> + '_ {
        self.support.iter().map(|o| o.payoff)
    }

    pub fn total_prob(&self) -> f64 {
        self.support.iter().map(|o| o.prob).sum()
    }

    /// Expectation of `f(payoff)`.
    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.support.iter().map(|o| o.prob * f(o.payoff)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.expect(|x| x)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.expect(|x| (x - m) * (x - m)).max(0.0)
    }

    pub fn min(&self) -> f64 {
        self.support[0].payoff
    }

    pub fn max(&self) -> f64 {
        self.support[self.support.len() - 1].payoff
    }

    /// Mean of the listed payoffs, ignoring their probabilities.
    pub fn uniform_mean(&self) -> f64 {
        self.payoffs().sum::<f64>() / self.len() as f64
    }

    /// Total mass on payoffs satisfying `pred`.
    pub fn prob_where(&self, pred: impl Fn(f64) -> bool) -> f64 {
        self.support
            .iter()
            .filter(|o| pred(o.payoff))
            .map(|o| o.prob)
            .sum()
    }

    /// P(X <= x).
    pub fn cdf(&self, x: f64) -> f64 {
        self.prob_where(|y| y <= x)
    }

    /// Left-continuous inverse CDF: the smallest payoff whose cumulative
    /// mass reaches `u`.
    pub fn quantile(&self, u: f64) -> f64 {
        let mut cum = 0.0;
        for o in &self.support {
            cum += o.prob;
            if cum >= u {
                return o.payoff;
            }
        }
        self.max()
    }

    /// Index-level quantile, used by samplers that need the support index.
    pub fn quantile_index(&self, u: f64) -> usize {
        let mut cum = 0.0;
        for (i, o) in self.support.iter().enumerate() {
            cum += o.prob;
            if cum >= u {
                return i;
            }
        }
        self.support.len() - 1
    }

    /// Mass of the modal outcome; ties go to the smaller payoff.
    pub fn modal(&self) -> Outcome {
        let mut best = self.support[0];
        for o in &self.support[1..] {
            if o.prob > best.prob {
                best = *o;
            }
        }
        best
    }

    /// Same support and masses within `tol`.
    pub fn same_as(&self, other: &Self, tol: f64) -> bool {
        self.len() == other.len()
            && self
                .support
                .iter()
                .zip(&other.support)
                .all(|(l, r)| l.payoff == r.payoff && (l.prob - r.prob).abs() <= tol)
    }

    /// Apply `f` to every payoff, merging collisions.
    pub fn map_payoffs(&self, f: impl Fn(f64) -> f64) -> Self {
        OutcomeDistribution::from_pairs(self.support.iter().map(|o| (f(o.payoff), o.prob)))
            .expect("mapping preserves total mass")
    }

    /// First-order stochastic dominance of `self` over `other`: the CDF of
    /// `self` never exceeds that of `other` and the two differ somewhere.
    pub fn dominates(&self, other: &Self) -> bool {
        let mut strict = false;
        for x in self.payoffs().chain(other.payoffs()) {
            let (mine, theirs) = (self.cdf(x), other.cdf(x));
            if mine > theirs + 1e-12 {
                return false;
            }
            if mine < theirs - 1e-12 {
                strict = true;
            }
        }
        strict
    }
}

pub fn dist_stats(d: &OutcomeDistribution) -> DistStats {
    DistStats {
        mean: d.mean(),
        sd: d.variance().sqrt(),
        min: d.min(),
        max: d.max(),
    }
}

/// Distribution of a lottery with expected value `ev`.
pub fn expand_lottery(ev: f64, lot_num: u32, lot_shape: LotShape) -> Result<OutcomeDistribution> {
    check_lottery(lot_num, lot_shape).map_err(Error::Contract)?;
    if lot_num > 60 {
        return Err(Error::contract(format!("LotNum {lot_num} too large")));
    }
    let pairs: Vec<(f64, f64)> = match lot_shape {
        LotShape::None => vec![(ev, 1.0)],
        LotShape::Symm => {
            let k = lot_num - 1;
            let scale = 0.5f64.powi(k as i32);
            let mut binom = 1.0f64;
            (0..=k)
                .map(|j| {
                    let pair = (ev - k as f64 / 2.0 + j as f64, binom * scale);
                    binom = binom * (k - j) as f64 / (j + 1) as f64;
                    pair
                })
                .collect()
        }
        LotShape::RSkew | LotShape::LSkew => {
            let n = lot_num as i32;
            let sign = if lot_shape == LotShape::RSkew { 1.0 } else { -1.0 };
            let shift = -sign * (n as f64 + 1.0);
            (1..=n)
                .map(|i| {
                    let prob = if i < n { 0.5f64.powi(i) } else { 0.5f64.powi(n - 1) };
                    (ev + shift + sign * 2f64.powi(i), prob)
                })
                .collect()
        }
    };
    OutcomeDistribution::from_pairs(pairs)
}

/// Objective payoff distribution of an option.
pub fn option_distribution(opt: &OptionSpec) -> Result<OutcomeDistribution> {
    if !(opt.p_high > 0.0 && opt.p_high <= 1.0) {
        return Err(Error::contract(format!("pH {} outside (0, 1]", opt.p_high)));
    }
    let lottery = expand_lottery(opt.high as f64, opt.lot_num, opt.lot_shape)?;
    let mut pairs: Vec<(f64, f64)> = lottery
        .support()
        .iter()
        .map(|o| (o.payoff, o.prob * opt.p_high))
        .collect();
    if opt.p_high < 1.0 {
        pairs.push((opt.low as f64, 1.0 - opt.p_high));
    }
    OutcomeDistribution::from_pairs(pairs)
}

/// One realization of both options' payoffs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointSample {
    pub payoff_a: f64,
    pub payoff_b: f64,
}

/// Quantile coupling of two marginals.
///
/// `corr = +1` uses the same uniform for both options, `corr = -1` uses `u`
/// and `1 - u`, and `corr = 0` takes two independent uniforms.
#[derive(Debug, Clone)]
pub struct Coupling {
    pub a: OutcomeDistribution,
    pub b: OutcomeDistribution,
    pub corr: Correlation,
}

impl Coupling {
    pub fn new(a: OutcomeDistribution, b: OutcomeDistribution, corr: Correlation) -> Result<Self> {
        if corr != Correlation::Independent && (a.is_degenerate() || b.is_degenerate()) {
            return Err(Error::contract(
                "correlated payoffs require both options to have variance",
            ));
        }
        Ok(Coupling { a, b, corr })
    }

    /// Coupling of a problem's objective distributions.
    pub fn of_problem(problem: &ChoiceProblem) -> Result<Self> {
        let (a, b) = problem.distributions()?;
        Coupling::new(a, b, problem.corr)
    }

    /// Support indices for one draw; `u_b` is only consulted when independent.
    pub fn sample_indices(&self, u: f64, u_b: f64) -> (usize, usize) {
        let ib = match self.corr {
            Correlation::Positive => self.b.quantile_index(u),
            Correlation::Negative => self.b.quantile_index(1.0 - u),
            Correlation::Independent => self.b.quantile_index(u_b),
        };
        (self.a.quantile_index(u), ib)
    }

    pub fn sample(&self, u: f64, u_b: f64) -> JointSample {
        let (ia, ib) = self.sample_indices(u, u_b);
        JointSample {
            payoff_a: self.a.support()[ia].payoff,
            payoff_b: self.b.support()[ib].payoff,
        }
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R) -> JointSample {
        let u: f64 = rng.random();
        let u_b: f64 = if self.corr == Correlation::Independent {
            rng.random()
        } else {
            0.0
        };
        self.sample(u, u_b)
    }

    /// Exact joint distribution as (payoff_a, payoff_b, prob) triples.
    pub fn joint(&self) -> Vec<(f64, f64, f64)> {
        let mut cells: Vec<(f64, f64, f64)> = Vec::new();
        match self.corr {
            Correlation::Independent => {
                for oa in self.a.support() {
                    for ob in self.b.support() {
                        cells.push((oa.payoff, ob.payoff, oa.prob * ob.prob));
                    }
                }
            }
            Correlation::Positive | Correlation::Negative => {
                let negative = self.corr == Correlation::Negative;
                let mut cuts = vec![0.0, 1.0];
                let mut cum = 0.0;
                for o in self.a.support() {
                    cum += o.prob;
                    cuts.push(cum.min(1.0));
                }
                cum = 0.0;
                for o in self.b.support() {
                    cum += o.prob;
                    let c = cum.min(1.0);
                    cuts.push(if negative { 1.0 - c } else { c });
                }
                cuts.sort_by(f64::total_cmp);
                cuts.dedup_by(|next, prev| (*next - *prev).abs() < 1e-12);
                for w in cuts.windows(2) {
                    let mid = 0.5 * (w[0] + w[1]);
                    let s = self.sample(mid, 0.0);
                    cells.push((s.payoff_a, s.payoff_b, w[1] - w[0]));
                }
            }
        }
        cells.sort_by(|l, r| l.0.total_cmp(&r.0).then(l.1.total_cmp(&r.1)));
        let mut merged: Vec<(f64, f64, f64)> = Vec::with_capacity(cells.len());
        for c in cells {
            match merged.last_mut() {
                Some(m) if m.0 == c.0 && m.1 == c.1 => m.2 += c.2,
                _ => merged.push(c),
            }
        }
        merged
    }
}

/// Correlated draw from a problem with `corr != 0`.
pub fn sample_joint(problem: &ChoiceProblem, u: f64) -> Result<JointSample> {
    if problem.corr == Correlation::Independent {
        return Err(Error::contract(
            "independent options need two uniforms; use sample_joint_independent",
        ));
    }
    check_unit(u)?;
    Ok(Coupling::of_problem(problem)?.sample(u, 0.0))
}

/// Independent draw from a problem with `corr = 0`.
pub fn sample_joint_independent(problem: &ChoiceProblem, u_a: f64, u_b: f64) -> Result<JointSample> {
    if problem.corr != Correlation::Independent {
        return Err(Error::contract("correlated options take a single uniform"));
    }
    check_unit(u_a)?;
    check_unit(u_b)?;
    Ok(Coupling::of_problem(problem)?.sample(u_a, u_b))
}

fn check_unit(u: f64) -> Result<()> {
    if (0.0..1.0).contains(&u) {
        Ok(())
    } else {
        Err(Error::contract(format!("uniform {u} outside [0, 1)")))
    }
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Rule (a): a reachable payoff outside [-50, 256].
    PayoffOutOfRange { payoff: f64 },
    /// Rule (b): identical distributions without ambiguity.
    Indistinguishable,
    /// Rule (c): ambiguous problem whose option B has a single outcome.
    AmbiguousDegenerate,
    /// Rule (d): correlated payoffs while an option has no variance.
    CorrelatedWithoutVariance,
    /// A type invariant of an option failed.
    InvalidOption { option: char, reason: String },
}

impl Violation {
    /// Rejection-rule letter, or `'-'` for type invariants.
    pub fn rule(&self) -> char {
        match self {
            Violation::PayoffOutOfRange { .. } => 'a',
            Violation::Indistinguishable => 'b',
            Violation::AmbiguousDegenerate => 'c',
            Violation::CorrelatedWithoutVariance => 'd',
            Violation::InvalidOption { .. } => '-',
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::PayoffOutOfRange { payoff } => {
                write!(f, "(a) payoff {payoff} outside [-50, 256]")
            }
            Violation::Indistinguishable => f.write_str("(b) options identically distributed"),
            Violation::AmbiguousDegenerate => f.write_str("(c) ambiguous option B has one outcome"),
            Violation::CorrelatedWithoutVariance => {
                f.write_str("(d) correlated options with a zero-variance option")
            }
            Violation::InvalidOption { option, reason } => write!(f, "option {option}: {reason}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Verdict {
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violates(&self, rule: char) -> bool {
        self.violations.iter().any(|v| v.rule() == rule)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

/// Check type invariants and rejection rules (a)-(d).
pub fn validate_problem(problem: &ChoiceProblem) -> Verdict {
    let mut violations = Vec::new();
    for (name, opt) in [('A', &problem.a), ('B', &problem.b)] {
        if let Err(reason) = opt.check() {
            violations.push(Violation::InvalidOption { option: name, reason });
        }
    }
    if !violations.is_empty() {
        return Verdict { violations };
    }
    let (da, db) = match problem.distributions() {
        Ok(d) => d,
        Err(e) => {
            violations.push(Violation::InvalidOption {
                option: '-',
                reason: e.to_string(),
            });
            return Verdict { violations };
        }
    };
    if let Some(x) = da
        .payoffs()
        .chain(db.payoffs())
        .find(|&x| !(MIN_PAYOFF..=MAX_PAYOFF).contains(&x))
    {
        violations.push(Violation::PayoffOutOfRange { payoff: x });
    }
    if !problem.amb && da.same_as(&db, 1e-12) {
        violations.push(Violation::Indistinguishable);
    }
    if problem.amb && db.is_degenerate() {
        violations.push(Violation::AmbiguousDegenerate);
    }
    if problem.corr != Correlation::Independent && (da.is_degenerate() || db.is_degenerate()) {
        violations.push(Violation::CorrelatedWithoutVariance);
    }
    Verdict { violations }
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

/// Branch probabilities of the problem-selection algorithm.
#[derive(Debug, Clone)]
pub struct GeneratorConfig {
    /// Option A is a sure amount.
    pub p_a_sure: f64,
    /// Option A's lottery is degenerate / skewed; symmetric otherwise.
    pub p_a_lot_degenerate: f64,
    pub p_a_lot_skew: f64,
    /// Same for option B.
    pub p_b_lot_degenerate: f64,
    pub p_b_lot_skew: f64,
    /// Corr draw: P(0), P(+1); P(-1) is the rest.
    pub p_corr_zero: f64,
    pub p_corr_pos: f64,
    /// Amb draw.
    pub p_amb: f64,
    pub max_restarts: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            p_a_sure: 0.4,
            p_a_lot_degenerate: 0.6,
            p_a_lot_skew: 0.2,
            p_b_lot_degenerate: 0.5,
            p_b_lot_skew: 0.25,
            p_corr_zero: 0.8,
            p_corr_pos: 0.1,
            p_amb: 0.2,
            max_restarts: 10_000,
        }
    }
}

/// Tallies of the raw draws made while generating, including attempts that
/// were later rejected.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DrawLog {
    pub attempts: u64,
    pub restarts_low_ev: u64,
    pub rejections: [u64; 4],
    /// Counts of corr draws: [-1, 0, +1].
    pub corr: [u64; 3],
    /// Counts of amb draws: [0, 1].
    pub amb: [u64; 2],
    /// Counts over `PH_SET` for the pH_A and pH_B draws.
    pub ph_a: [u64; 14],
    pub ph_b: [u64; 14],
}

impl DrawLog {
    pub fn merge(&mut self, other: &DrawLog) {
        self.attempts += other.attempts;
        self.restarts_low_ev += other.restarts_low_ev;
        for i in 0..4 {
            self.rejections[i] += other.rejections[i];
        }
        for i in 0..3 {
            self.corr[i] += other.corr[i];
        }
        for i in 0..2 {
            self.amb[i] += other.amb[i];
        }
        for i in 0..14 {
            self.ph_a[i] += other.ph_a[i];
            self.ph_b[i] += other.ph_b[i];
        }
    }
}

fn round_money(x: f64) -> i64 {
    x.round_ties_even() as i64
}

/// Draw (L, H) around a target expected value.
fn draw_low_high<R: Rng + ?Sized>(rng: &mut R, ev: f64, ph: f64) -> Option<(i64, i64)> {
    let tri = Triangular::new(MIN_PAYOFF, 120.0, ev).ok()?;
    let temp = round_money(tri.sample(rng));
    let t = temp as f64;
    if t > ev {
        let high = temp;
        let low = round_money((ev - high as f64 * ph) / (1.0 - ph));
        Some((low, high))
    } else if t < ev {
        let low = temp;
        let high = round_money((ev - low as f64 * (1.0 - ph)) / ph);
        Some((low, high))
    } else {
        Some((temp, temp))
    }
}

fn draw_lottery<R: Rng + ?Sized>(rng: &mut R, p_degenerate: f64, p_skew: f64) -> (u32, LotShape) {
    let u: f64 = rng.random();
    if u < p_degenerate {
        (1, LotShape::None)
    } else if u < p_degenerate + p_skew {
        let t = SKEW_SET[rng.random_range(0..SKEW_SET.len())];
        if t > 0 {
            (t as u32, LotShape::RSkew)
        } else {
            ((-t) as u32, LotShape::LSkew)
        }
    } else {
        (SYMM_SET[rng.random_range(0..SYMM_SET.len())], LotShape::Symm)
    }
}

fn draw_ph<R: Rng + ?Sized>(rng: &mut R, counts: &mut [u64; 14]) -> f64 {
    let i = rng.random_range(0..PH_SET.len());
    counts[i] += 1;
    PH_SET[i]
}

/// One pass of the selection algorithm; `None` asks for a restart (B's
/// expected value below the payoff floor, or an unusable triangular mode).
fn attempt<R: Rng + ?Sized>(rng: &mut R, cfg: &GeneratorConfig, log: &mut DrawLog) -> Option<(OptionSpec, OptionSpec, Correlation, bool)> {
    let ev_a = rng.random_range(-10i64..=30);
    let a = if rng.random_bool(cfg.p_a_sure) {
        OptionSpec::sure(ev_a)
    } else {
        let ph = draw_ph(rng, &mut log.ph_a);
        let (low, high) = if ph == 1.0 {
            (ev_a, ev_a)
        } else {
            draw_low_high(rng, ev_a as f64, ph)?
        };
        let (lot_num, lot_shape) = draw_lottery(rng, cfg.p_a_lot_degenerate, cfg.p_a_lot_skew);
        OptionSpec { low, high, p_high: ph, lot_num, lot_shape }
    };

    let dev: f64 = (0..5).map(|_| rng.random_range(-20.0..=20.0)).sum::<f64>() / 5.0;
    let ev_b = a.expected_value() + dev;
    if ev_b < MIN_PAYOFF {
        log.restarts_low_ev += 1;
        return None;
    }

    let ph = draw_ph(rng, &mut log.ph_b);
    let (low, high) = if ph == 1.0 {
        let x = round_money(ev_b);
        (x, x)
    } else {
        draw_low_high(rng, ev_b, ph)?
    };
    let (lot_num, lot_shape) = draw_lottery(rng, cfg.p_b_lot_degenerate, cfg.p_b_lot_skew);
    let b = OptionSpec { low, high, p_high: ph, lot_num, lot_shape };

    let u: f64 = rng.random();
    let corr = if u < cfg.p_corr_zero {
        Correlation::Independent
    } else if u < cfg.p_corr_zero + cfg.p_corr_pos {
        Correlation::Positive
    } else {
        Correlation::Negative
    };
    log.corr[(corr.value() + 1) as usize] += 1;
    let amb = rng.random_bool(cfg.p_amb);
    log.amb[amb as usize] += 1;
    Some((a, b, corr, amb))
}

/// Draw one valid problem, restarting on a low EV_B or any rejection rule.
pub fn generate_problem<R: Rng + ?Sized>(rng: &mut R, cfg: &GeneratorConfig, id: &str) -> Result<ChoiceProblem> {
    let mut log = DrawLog::default();
    generate_problem_logged(rng, cfg, id, &mut log)
}

pub fn generate_problem_logged<R: Rng + ?Sized>(
    rng: &mut R,
    cfg: &GeneratorConfig,
    id: &str,
    log: &mut DrawLog,
) -> Result<ChoiceProblem> {
    for _ in 0..=cfg.max_restarts {
        log.attempts += 1;
        let Some((a, b, corr, amb)) = attempt(rng, cfg, log) else {
            continue;
        };
        let problem = ChoiceProblem { id: id.to_string(), a, b, amb, corr };
        let verdict = validate_problem(&problem);
        if verdict.is_ok() {
            return Ok(problem);
        }
        for v in &verdict.violations {
            if let Some(slot) = "abcd".find(v.rule()) {
                log.rejections[slot] += 1;
            }
        }
    }
    Err(Error::RestartCap(cfg.max_restarts))
}

/// Id assigned to the `index`-th generated problem.
pub fn generated_id(index: usize) -> String {
    format!("G{:06}", index + 1)
}

/// Generate `n` problems; problem `i` uses substream `i` of `master_seed`.
pub fn generate_problems(master_seed: u64, n: usize, cfg: &GeneratorConfig) -> Result<(Vec<ChoiceProblem>, DrawLog)> {
    let results: Vec<Result<(ChoiceProblem, DrawLog)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::substream(master_seed, Domain::Generate, i as u64);
            let mut log = DrawLog::default();
            let p = generate_problem_logged(&mut rng, cfg, &generated_id(i), &mut log)?;
            Ok((p, log))
        })
        .collect();
    let mut problems = Vec::with_capacity(n);
    let mut total = DrawLog::default();
    for r in results {
        let (p, log) = r?;
        total.merge(&log);
        problems.push(p);
    }
    Ok((problems, total))
}

// ---------------------------------------------------------------------------
// Problem CSV
// ---------------------------------------------------------------------------

pub const PROBLEM_HEADER: [&str; 13] = [
    "id", "LA", "HA", "pHA", "LotNumA", "LotShapeA", "LB", "HB", "pHB", "LotNumB", "LotShapeB",
    "Amb", "Corr",
];

/// The 12 static fields of a problem, in file order.
pub fn problem_fields(p: &ChoiceProblem) -> [String; 12] {
    [
        p.a.low.to_string(),
        p.a.high.to_string(),
        p.a.p_high.to_string(),
        p.a.lot_num.to_string(),
        p.a.lot_shape.literal().to_string(),
        p.b.low.to_string(),
        p.b.high.to_string(),
        p.b.p_high.to_string(),
        p.b.lot_num.to_string(),
        p.b.lot_shape.literal().to_string(),
        (p.amb as u8).to_string(),
        p.corr.value().to_string(),
    ]
}

pub fn write_problems_csv<W: Write>(w: W, problems: &[ChoiceProblem]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(PROBLEM_HEADER)?;
    for p in problems {
        let mut rec = vec![p.id.clone()];
        rec.extend(problem_fields(p));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

/// Parse a problem from named fields; `line` is used in error messages.
pub fn parse_problem(get: &dyn Fn(&str) -> Option<String>, id: String, line: usize) -> Result<ChoiceProblem> {
    let field = |name: &str| -> Result<String> {
        get(name).ok_or_else(|| Error::parse(line, name, "missing column"))
    };
    let int = |name: &str| -> Result<i64> {
        let raw = field(name)?;
        let v: f64 = raw
            .trim()
            .parse()
            .map_err(|_| Error::parse(line, name, format!("`{raw}` is not a number")))?;
        if v.fract() != 0.0 || !v.is_finite() {
            return Err(Error::parse(line, name, format!("`{raw}` is not an integer")));
        }
        Ok(v as i64)
    };
    let prob = |name: &str| -> Result<f64> {
        let raw = field(name)?;
        let v: f64 = raw
            .trim()
            .parse()
            .map_err(|_| Error::parse(line, name, format!("`{raw}` is not a number")))?;
        if !(v > 0.0 && v <= 1.0) {
            return Err(Error::parse(line, name, format!("probability {v} outside (0, 1]")));
        }
        Ok(v)
    };
    let shape = |name: &str| -> Result<LotShape> {
        let raw = field(name)?;
        LotShape::from_literal(&raw)
            .ok_or_else(|| Error::parse(line, name, format!("unknown LotShape `{raw}`")))
    };
    let lot_num = |name: &str| -> Result<u32> {
        let v = int(name)?;
        if v < 1 {
            return Err(Error::parse(line, name, "LotNum must be at least 1"));
        }
        Ok(v as u32)
    };
    let option = |suffix: &str| -> Result<OptionSpec> {
        Ok(OptionSpec {
            low: int(&format!("L{suffix}"))?,
            high: int(&format!("H{suffix}"))?,
            p_high: prob(&format!("pH{suffix}"))?,
            lot_num: lot_num(&format!("LotNum{suffix}"))?,
            lot_shape: shape(&format!("LotShape{suffix}"))?,
        })
    };
    let a = option("A")?;
    let b = option("B")?;
    let amb = match int("Amb")? {
        0 => false,
        1 => true,
        v => return Err(Error::parse(line, "Amb", format!("{v} is not 0 or 1"))),
    };
    let corr_v = int("Corr")?;
    let corr = Correlation::from_value(corr_v)
        .ok_or_else(|| Error::parse(line, "Corr", format!("{corr_v} is not -1, 0 or 1")))?;
    Ok(ChoiceProblem { id, a, b, amb, corr })
}

/// Read and validate a problem CSV.
pub fn read_problems_csv<R: Read>(r: R) -> Result<Vec<ChoiceProblem>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let headers = rdr.headers()?.clone();
    let mut problems = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let get = |name: &str| -> Option<String> {
            headers
                .iter()
                .position(|h| h == name)
                .and_then(|j| rec.get(j))
                .map(str::to_string)
        };
        let id = get("id").ok_or_else(|| Error::parse(line, "id", "missing column"))?;
        let p = parse_problem(&get, id, line)?;
        let verdict = validate_problem(&p);
        if !verdict.is_ok() {
            return Err(Error::validation(format!("line {line}, problem `{}`: {verdict}", p.id)));
        }
        problems.push(p);
    }
    Ok(problems)
}
