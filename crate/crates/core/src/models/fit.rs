//! Exhaustive grid search over model parameters, scored by training MSE.

use std::fmt;

use crate::error::{Error, Result};
use crate::problems::ChoiceProblem;
use crate::BlockRates;

use super::{ModelKind, ModelSpec};

/// Candidate values per named parameter. Points are visited in row-major
/// order: the last axis varies fastest.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FitGrid {
    axes: Vec<(String, Vec<f64>)>,
}

impl FitGrid {
    pub fn new() -> Self {
        FitGrid::default()
    }

    pub fn axis(mut self, name: &str, values: &[f64]) -> Self {
        self.axes.push((name.to_string(), values.to_vec()));
        self
    }

    pub fn axes(&self) -> &[(String, Vec<f64>)] {
        &self.axes
    }

    /// One `name=v1,v2,...` line per axis; `#` comments allowed.
    pub fn parse(text: &str) -> Result<Self> {
        let kv = crate::kv::KvFile::parse(text)?;
        let mut grid = FitGrid::new();
        for (name, list) in kv.entries() {
            let values = list
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::validation(format!("grid axis `{name}`: `{s}` is not a number")))
                })
                .collect::<Result<Vec<_>>>()?;
            grid = grid.axis(name, &values);
        }
        grid.check()?;
        Ok(grid)
    }

    pub fn check(&self) -> Result<()> {
        for (name, values) in &self.axes {
            if values.is_empty() {
                return Err(Error::contract(format!("grid axis `{name}` is empty")));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::contract(format!("grid axis `{name}` has a non-finite value")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|(_, v)| v.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The `index`-th grid point as (name, value) pairs.
    pub fn point(&self, mut index: usize) -> Vec<(&str, f64)> {
        let mut out = vec![("", 0.0); self.axes.len()];
        for (slot, (name, values)) in out.iter_mut().zip(&self.axes).rev() {
            *slot = (name.as_str(), values[index % values.len()]);
            index /= values.len();
        }
        out
    }
}

impl fmt::Display for FitGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, values) in &self.axes {
            let list: Vec<String> = values.iter().map(|v| v.to_string()).collect();
            writeln!(f, "{name}={}", list.join(","))?;
        }
        Ok(())
    }
}

/// Which blocks enter the training loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BlockScope {
    #[default]
    All,
    /// Block 1 only (no feedback yet).
    First,
}

impl BlockScope {
    fn blocks(self) -> std::ops::Range<usize> {
        match self {
            BlockScope::All => 0..crate::BLOCKS,
            BlockScope::First => 0..1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub spec: ModelSpec,
    pub mse: f64,
    /// MSE of every grid point, in grid order.
    pub trace: Vec<f64>,
}

pub fn training_mse(
    spec: &ModelSpec,
    train: &[(ChoiceProblem, BlockRates)],
    scope: BlockScope,
    seed: u64,
) -> Result<f64> {
    let problems: Vec<ChoiceProblem> = train.iter().map(|(p, _)| p.clone()).collect();
    let preds = spec.predict_all(&problems, seed)?;
    let mut sum = 0.0;
    let mut n = 0usize;
    for (pred, (_, obs)) in preds.iter().zip(train) {
        for b in scope.blocks() {
            sum += (pred[b] - obs[b]).powi(2);
            n += 1;
        }
    }
    Ok(sum / n as f64)
}

/// Evaluate every grid point on top of `base`; the lowest MSE wins and ties
/// go to the earliest point.
pub fn grid_search(
    base: &ModelSpec,
    grid: &FitGrid,
    train: &[(ChoiceProblem, BlockRates)],
    scope: BlockScope,
    seed: u64,
) -> Result<FitOutcome> {
    grid.check()?;
    if train.is_empty() {
        return Err(Error::contract("grid search needs at least one training problem"));
    }
    let mut best: Option<(ModelSpec, f64)> = None;
    let mut trace = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let mut spec = base.clone();
        for (name, value) in grid.point(i) {
            spec.set(name, value)?;
        }
        spec.validate()?;
        let mse = training_mse(&spec, train, scope, seed)?;
        trace.push(mse);
        if best.as_ref().is_none_or(|(_, m)| mse < *m) {
            best = Some((spec, mse));
        }
    }
    let (spec, mse) = best.expect("grid has at least one point");
    Ok(FitOutcome { spec, mse, trace })
}

/// Grid search starting from the kind's shipped parameters.
pub fn fit_grid(
    kind: ModelKind,
    grid: &FitGrid,
    train: &[(ChoiceProblem, BlockRates)],
    scope: BlockScope,
    seed: u64,
) -> Result<FitOutcome> {
    grid_search(&kind.default_spec(), grid, train, scope, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{AmbiguityPolicy, CptParams};
    use crate::problems::{generate_problems, GeneratorConfig};

    fn risk_problems(n: usize) -> Vec<ChoiceProblem> {
        let (ps, _) = generate_problems(11, n * 2, &GeneratorConfig::default()).unwrap();
        ps.into_iter().filter(|p| !p.amb).take(n).collect()
    }

    fn labelled(spec: &ModelSpec, problems: Vec<ChoiceProblem>) -> Vec<(ChoiceProblem, BlockRates)> {
        let preds = spec.predict_all(&problems, 0).unwrap();
        problems.into_iter().zip(preds).collect()
    }

    #[test]
    fn grid_points_are_row_major() {
        let g = FitGrid::new().axis("a", &[1.0, 2.0]).axis("b", &[10.0, 20.0, 30.0]);
        assert_eq!(g.len(), 6);
        assert_eq!(g.point(0), vec![("a", 1.0), ("b", 10.0)]);
        assert_eq!(g.point(1), vec![("a", 1.0), ("b", 20.0)]);
        assert_eq!(g.point(3), vec![("a", 2.0), ("b", 10.0)]);
        let parsed = FitGrid::parse(&g.to_string()).unwrap();
        assert_eq!(parsed, g);
        assert!(FitGrid::parse("a=\n").is_err());
    }

    #[test]
    fn single_point_grid_returns_that_point() {
        let train = labelled(&ModelKind::CptStochastic.default_spec(), risk_problems(10));
        let grid = FitGrid::new().axis("alpha", &[0.5]);
        let out = fit_grid(ModelKind::CptStochastic, &grid, &train, BlockScope::All, 0).unwrap();
        match out.spec {
            ModelSpec::Cpt { params, .. } => assert_eq!(params.alpha, 0.5),
            other => panic!("{other:?}"),
        }
        assert_eq!(out.trace.len(), 1);
    }

    #[test]
    fn recovers_generating_parameters() {
        let truth = CptParams { alpha: 0.7, gamma: 0.6, delta: 1.1, lambda: 1.5, mu: Some(0.4) };
        let spec = ModelSpec::Cpt { params: truth, policy: AmbiguityPolicy::Strict };
        let train = labelled(&spec, risk_problems(60));
        let grid = FitGrid::new()
            .axis("alpha", &[0.5, 0.7, 0.9])
            .axis("gamma", &[0.6, 0.8, 1.0])
            .axis("lambda", &[1.0, 1.5, 2.0]);
        let out = grid_search(&spec, &grid, &train, BlockScope::All, 0).unwrap();
        assert_eq!(out.spec, spec);
        assert_eq!(out.mse, 0.0);
    }

    #[test]
    fn stochastic_grid_settles_near_shipped_values() {
        let train = labelled(&ModelKind::CptStochastic.default_spec(), risk_problems(60));
        let grid = FitGrid::new()
            .axis("alpha", &[0.86, 0.91, 0.96])
            .axis("gamma", &[0.79, 0.84, 0.89])
            .axis("mu", &[0.2, 0.25, 0.3]);
        let out = fit_grid(ModelKind::CptStochastic, &grid, &train, BlockScope::First, 0).unwrap();
        assert_eq!(out.spec, ModelKind::CptStochastic.default_spec());
    }

    #[test]
    fn ties_go_to_the_earliest_point() {
        let train = labelled(&ModelKind::PriorityHeuristic.default_spec(), risk_problems(5));
        let grid = FitGrid::new().axis("alpha", &[0.5, 0.5]);
        let out = fit_grid(ModelKind::CptDeterministic, &grid, &train, BlockScope::All, 0).unwrap();
        assert_eq!(out.trace[0], out.trace[1]);
        assert_eq!(out.mse, out.trace[0]);
    }
}
