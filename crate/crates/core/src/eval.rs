//! Scoring and experiment protocols: block-level MSE, the equivalent number
//! of observations (ENO), bootstrap comparison intervals, the feature
//! ablation and the model comparison.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::{assemble, Ablation};
use crate::learn::{self, BoostConfig, ForestConfig};
use crate::models::{grid_search, BlockScope, FitGrid, ModelKind, ModelSpec};
use crate::problems::ChoiceProblem;
use crate::rng::{self, Domain};
use crate::{BlockRates, BLOCKS};

/// A problem with its observed (or simulated) block rates.
pub type Labeled = (ChoiceProblem, BlockRates);

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreReport {
    /// Mean squared error over each problem's scored blocks, sorted by id.
    pub per_problem: Vec<(String, f64)>,
    pub mse: f64,
    pub n_problems: usize,
}

impl ScoreReport {
    pub fn eno(&self, curve: &EnoCurve) -> Option<f64> {
        curve.eno(self.mse).ok()
    }

    pub fn errors(&self) -> Vec<f64> {
        self.per_problem.iter().map(|(_, e)| *e).collect()
    }
}

fn check_rates(id: &str, r: &BlockRates) -> Result<()> {
    if r.iter().all(|v| (0.0..=1.0).contains(v)) {
        Ok(())
    } else {
        Err(Error::validation(format!("rates for `{id}` outside [0, 1]: {r:?}")))
    }
}

/// Block-level squared error, matched by problem id.
pub fn score(predictions: &[(String, BlockRates)], observed: &[(String, BlockRates)]) -> Result<ScoreReport> {
    score_scoped(predictions, observed, BlockScope::All)
}

pub fn score_scoped(
    predictions: &[(String, BlockRates)],
    observed: &[(String, BlockRates)],
    scope: BlockScope,
) -> Result<ScoreReport> {
    if predictions.is_empty() {
        return Err(Error::contract("nothing to score"));
    }
    if predictions.len() != observed.len() {
        return Err(Error::validation(format!(
            "{} predicted problems, {} observed",
            predictions.len(),
            observed.len()
        )));
    }
    let obs: HashMap<&str, &BlockRates> = observed.iter().map(|(id, r)| (id.as_str(), r)).collect();
    let blocks = match scope {
        BlockScope::All => BLOCKS,
        BlockScope::First => 1,
    };
    let mut per_problem = Vec::with_capacity(predictions.len());
    for (id, pred) in predictions {
        let o = obs
            .get(id.as_str())
            .ok_or_else(|| Error::validation(format!("no observation for problem `{id}`")))?;
        check_rates(id, pred)?;
        check_rates(id, o)?;
        let se: f64 = (0..blocks).map(|b| (pred[b] - o[b]).powi(2)).sum();
        per_problem.push((id.clone(), se / blocks as f64));
    }
    per_problem.sort_by(|a, b| a.0.cmp(&b.0));
    if per_problem.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::validation("duplicate problem id in predictions"));
    }
    let mse = per_problem.iter().map(|(_, e)| e).sum::<f64>() / per_problem.len() as f64;
    Ok(ScoreReport { n_problems: per_problem.len(), per_problem, mse })
}

/// `MSE = a + b / ENO`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnoCurve {
    pub a: f64,
    pub b: f64,
}

impl EnoCurve {
    /// Curve through two reference points of the 2018 competition set,
    /// (0.00569, 23.7) and (0.00823, 15.4).
    pub fn competition() -> Self {
        fit_eno_curve(&[(0.00569, 23.7), (0.00823, 15.4)]).expect("distinct anchors")
    }

    pub fn eno(&self, mse: f64) -> Result<f64> {
        eno(mse, self)
    }
}

/// Least-squares fit of `MSE = a + b x` with `x = 1 / ENO`; exact for two
/// points.
pub fn fit_eno_curve(points: &[(f64, f64)]) -> Result<EnoCurve> {
    if points.len() < 2 {
        return Err(Error::contract("ENO curve needs at least two points"));
    }
    if points.iter().any(|&(m, e)| !(m.is_finite() && e > 0.0 && e.is_finite())) {
        return Err(Error::contract("ENO anchors need finite MSE and positive ENO"));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|&(_, e)| 1.0 / e).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = points.iter().map(|&(m, _)| m).sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(points).map(|(x, &(m, _))| (x - mx) * (m - my)).sum();
    let distinct = points.iter().any(|&(m, _)| m != points[0].0);
    if !distinct || sxx == 0.0 {
        return Err(Error::contract("ENO anchors must have distinct MSEs"));
    }
    let b = sxy / sxx;
    Ok(EnoCurve { a: my - b * mx, b })
}

pub fn eno(mse: f64, curve: &EnoCurve) -> Result<f64> {
    if mse <= curve.a {
        return Err(Error::EnoUndefined { mse, floor: curve.a });
    }
    Ok(curve.b / (mse - curve.a))
}

/// Percentile of sorted data at rank `(n + 1) q`, interpolating linearly and
/// clamping to the extremes.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let rank = ((n + 1) as f64 * q).clamp(1.0, n as f64);
    let lo = rank.floor() as usize;
    let frac = rank - lo as f64;
    if lo >= n {
        sorted[n - 1]
    } else {
        sorted[lo - 1] + frac * (sorted[lo] - sorted[lo - 1])
    }
}

/// Percentile interval for `MSE_b - MSE_a` over problems resampled with
/// replacement.
pub fn bootstrap_diff_ci(errors_a: &[f64], errors_b: &[f64], n_boot: usize, level: f64, seed: u64) -> Result<(f64, f64)> {
    if errors_a.is_empty() || errors_a.len() != errors_b.len() {
        return Err(Error::contract("bootstrap needs equal-length, non-empty error lists"));
    }
    if n_boot == 0 || !(level > 0.0 && level < 1.0) {
        return Err(Error::contract("bootstrap needs n_boot >= 1 and level in (0, 1)"));
    }
    let n = errors_a.len();
    let mut diffs: Vec<f64> = (0..n_boot)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng::substream(seed, Domain::Bootstrap, b as u64);
            let mut sum = 0.0;
            for _ in 0..n {
                let i = rng.random_range(0..n);
                sum += errors_b[i] - errors_a[i];
            }
            sum / n as f64
        })
        .collect();
    diffs.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    Ok((percentile(&diffs, tail), percentile(&diffs, 1.0 - tail)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Forest,
    Boosted,
}

impl Algorithm {
    pub const ALL: [Algorithm; 2] = [Algorithm::Forest, Algorithm::Boosted];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Forest => "forest",
            Algorithm::Boosted => "boosted",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::validation(format!("unknown algorithm `{s}`")))
    }
}

/// Learner settings shared by the experiment protocols. Seeds in the configs
/// are replaced by each experiment seed.
#[derive(Debug, Clone, PartialEq)]
pub struct Learners {
    pub forest: ForestConfig,
    /// Forests averaged per prediction.
    pub forest_runs: usize,
    pub boost: BoostConfig,
}

impl Default for Learners {
    fn default() -> Self {
        Learners { forest: ForestConfig::default(), forest_runs: 20, boost: BoostConfig::default() }
    }
}

/// A foresight model, optionally re-fit on the training problems.
#[derive(Debug, Clone)]
pub struct ForesightPlan {
    pub spec: ModelSpec,
    pub grid: Option<FitGrid>,
    pub scope: BlockScope,
    pub seed: u64,
}

impl ForesightPlan {
    pub fn fixed(spec: ModelSpec, seed: u64) -> Self {
        ForesightPlan { spec, grid: None, scope: BlockScope::All, seed }
    }

    /// The spec to use: grid-fit on `train` when a grid is given.
    pub fn resolve(&self, train: &[Labeled]) -> Result<ModelSpec> {
        match &self.grid {
            Some(grid) => Ok(grid_search(&self.spec, grid, train, self.scope, self.seed)?.spec),
            None => Ok(self.spec.clone()),
        }
    }
}

fn problems_of(data: &[Labeled]) -> Vec<ChoiceProblem> {
    data.iter().map(|(p, _)| p.clone()).collect()
}

fn rates_of(data: &[Labeled]) -> Vec<BlockRates> {
    data.iter().map(|(_, r)| *r).collect()
}

fn labelled_ids(data: &[Labeled], rates: &[BlockRates]) -> Vec<(String, BlockRates)> {
    data.iter().zip(rates).map(|((p, _), r)| (p.id.clone(), *r)).collect()
}

fn check_disjoint(train: &[Labeled], test: &[Labeled]) -> Result<()> {
    let ids: std::collections::HashSet<&str> = train.iter().map(|(p, _)| p.id.as_str()).collect();
    match test.iter().find(|(p, _)| ids.contains(p.id.as_str())) {
        Some((p, _)) => Err(Error::validation(format!("problem `{}` is in both train and test", p.id))),
        None => Ok(()),
    }
}

/// Train one learner on a condition and score it on the test problems.
#[allow(clippy::too_many_arguments)]
fn learner_mse(
    train: &[Labeled],
    test: &[Labeled],
    f_train: &[BlockRates],
    f_test: &[BlockRates],
    ablation: Ablation,
    algorithm: Algorithm,
    learners: &Learners,
    seed: u64,
    scope: BlockScope,
) -> Result<f64> {
    let train_m = assemble(&problems_of(train), Some(&rates_of(train)), Some(f_train), ablation)?;
    let test_m = assemble(&problems_of(test), None, Some(f_test), ablation)?;
    let model = match algorithm {
        Algorithm::Forest => learn::fit_forest_runs(
            &train_m,
            &ForestConfig { seed, ..learners.forest.clone() },
            learners.forest_runs,
        )?,
        Algorithm::Boosted => learn::fit_boosted(&train_m, &BoostConfig { seed, ..learners.boost.clone() })?,
    };
    let preds = learn::predict(&model, &test_m)?;
    let per_problem = test_m.per_problem(&preds);
    let observed: Vec<(String, BlockRates)> = test.iter().map(|(p, r)| (p.id.clone(), *r)).collect();
    Ok(score_scoped(&per_problem, &observed, scope)?.mse)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationCell {
    pub condition: Ablation,
    pub algorithm: Algorithm,
    /// Test MSE averaged over seeds.
    pub mse: f64,
    pub eno: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationTable {
    pub foresight: ModelSpec,
    /// Test MSE of the foresight model on its own.
    pub foresight_mse: f64,
    pub cells: Vec<AblationCell>,
}

impl AblationTable {
    pub fn mse(&self, condition: Ablation, algorithm: Algorithm) -> Option<f64> {
        self.cells
            .iter()
            .find(|c| c.condition == condition && c.algorithm == algorithm)
            .map(|c| c.mse)
    }
}

pub const ABLATION_CONDITIONS: [Ablation; 3] = [Ablation::Full, Ablation::InsightsOnly, Ablation::ForesightOnly];

/// Train each learner with and without each feature family and score on the
/// test problems.
pub fn run_ablation(
    train: &[Labeled],
    test: &[Labeled],
    foresight: &ForesightPlan,
    algorithms: &[Algorithm],
    learners: &Learners,
    seeds: &[u64],
    curve: &EnoCurve,
) -> Result<AblationTable> {
    check_disjoint(train, test)?;
    if seeds.is_empty() {
        return Err(Error::contract("ablation needs at least one seed"));
    }
    let spec = foresight.resolve(train)?;
    let f_train = spec.predict_all(&problems_of(train), foresight.seed)?;
    let f_test = spec.predict_all(&problems_of(test), foresight.seed)?;
    let foresight_mse = score(&labelled_ids(test, &f_test), &labelled_ids(test, &rates_of(test)))?.mse;
    let mut cells = Vec::new();
    for &algorithm in algorithms {
        for condition in ABLATION_CONDITIONS {
            let mut total = 0.0;
            for &seed in seeds {
                total += learner_mse(train, test, &f_train, &f_test, condition, algorithm, learners, seed, BlockScope::All)?;
            }
            let mse = total / seeds.len() as f64;
            cells.push(AblationCell { condition, algorithm, mse, eno: curve.eno(mse).ok() });
        }
    }
    Ok(AblationTable { foresight: spec, foresight_mse, cells })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub kind: ModelKind,
    pub spec: ModelSpec,
    pub raw_mse: f64,
    pub raw_eno: Option<f64>,
    pub foresight_mse: f64,
    pub foresight_eno: Option<f64>,
}

/// Each model scored on its own and as the foresight of a full-feature
/// learner. Ambiguous problems are dropped first, the comparison being about
/// decisions under risk.
#[allow(clippy::too_many_arguments)]
pub fn run_comparison(
    train: &[Labeled],
    test: &[Labeled],
    models: &[ForesightPlan],
    algorithm: Algorithm,
    learners: &Learners,
    seeds: &[u64],
    scope: BlockScope,
    curve: &EnoCurve,
) -> Result<Vec<ComparisonRow>> {
    check_disjoint(train, test)?;
    if seeds.is_empty() {
        return Err(Error::contract("comparison needs at least one seed"));
    }
    let train: Vec<Labeled> = train.iter().filter(|(p, _)| !p.amb).cloned().collect();
    let test: Vec<Labeled> = test.iter().filter(|(p, _)| !p.amb).cloned().collect();
    if train.is_empty() || test.is_empty() {
        return Err(Error::validation("no unambiguous problems to compare on"));
    }
    let observed = labelled_ids(&test, &rates_of(&test));
    let mut rows = Vec::new();
    for plan in models {
        let spec = plan.resolve(&train)?;
        let f_train = spec.predict_all(&problems_of(&train), plan.seed)?;
        let f_test = spec.predict_all(&problems_of(&test), plan.seed)?;
        let raw_mse = score_scoped(&labelled_ids(&test, &f_test), &observed, scope)?.mse;
        let mut total = 0.0;
        for &seed in seeds {
            total += learner_mse(&train, &test, &f_train, &f_test, Ablation::Full, algorithm, learners, seed, scope)?;
        }
        let foresight_mse = total / seeds.len() as f64;
        rows.push(ComparisonRow {
            kind: spec.kind(),
            spec,
            raw_mse,
            raw_eno: curve.eno(raw_mse).ok(),
            foresight_mse,
            foresight_eno: curve.eno(foresight_mse).ok(),
        });
    }
    Ok(rows)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

pub fn write_score_csv<W: Write>(w: W, report: &ScoreReport, curve: &EnoCurve) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["id", "mse"])?;
    for (id, e) in &report.per_problem {
        out.write_record([id.clone(), e.to_string()])?;
    }
    out.write_record(["ALL".to_string(), report.mse.to_string()])?;
    out.write_record(["ENO".to_string(), fmt_opt(report.eno(curve))])?;
    out.flush()?;
    Ok(())
}

pub fn write_ablation_csv<W: Write>(w: W, table: &AblationTable) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["condition", "algorithm", "mse", "eno"])?;
    for c in &table.cells {
        out.write_record([c.condition.name().to_string(), c.algorithm.name().to_string(), c.mse.to_string(), fmt_opt(c.eno)])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_comparison_csv<W: Write>(w: W, rows: &[ComparisonRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["model", "raw_mse", "raw_eno", "foresight_mse", "foresight_eno"])?;
    for r in rows {
        out.write_record([
            r.kind.label().to_string(),
            r.raw_mse.to_string(),
            fmt_opt(r.raw_eno),
            r.foresight_mse.to_string(),
            fmt_opt(r.foresight_eno),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapSummary {
    pub model: String,
    pub mse: f64,
    /// Interval for this model's MSE minus the reference model's.
    pub ci_low: f64,
    pub ci_high: f64,
}

pub fn write_bootstrap_csv<W: Write>(w: W, rows: &[BootstrapSummary]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["model", "mse", "ci_low", "ci_high"])?;
    for r in rows {
        out.write_record([r.model.clone(), r.mse.to_string(), r.ci_low.to_string(), r.ci_high.to_string()])?;
    }
    out.flush()?;
    Ok(())
}
