//! Regression-tree ensembles: CART trees, bagged random forests and
//! second-order gradient boosting with L1/L2-regularized leaves.
//!
//! Rows are processed in canonical order (sorted by their matrix row key), so
//! a model depends on the training rows but not on how they were listed.

use std::io::{BufRead, Write};

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::{DesignMatrix, FeatureSchema};
use crate::kv::KvFile;
use crate::rng::{self, Domain, SimRng};

pub const MODEL_FORMAT_VERSION: u64 = 1;

/// One tree node. Leaves have `feature == None`.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub feature: Option<usize>,
    pub threshold: f64,
    pub left: usize,
    pub right: usize,
    pub value: f64,
}

impl Node {
    fn leaf(value: f64) -> Self {
        Node { feature: None, threshold: 0.0, left: 0, right: 0, value }
    }
}

/// Nodes stored in pre-order; node 0 is the root. Rows with
/// `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn leaf(value: f64) -> Self {
        RegressionTree { nodes: vec![Node::leaf(value)] }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            let n = &self.nodes[i];
            match n.feature {
                None => return n.value,
                Some(f) => i = if row[f] <= n.threshold { n.left } else { n.right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &RegressionTree, i: usize) -> usize {
            let n = &t.nodes[i];
            match n.feature {
                None => 0,
                Some(_) => 1 + walk(t, n.left).max(walk(t, n.right)),
            }
        }
        walk(self, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.feature.is_none()).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitRule {
    /// Variance reduction; nodes holding `min_node_size` or fewer samples
    /// stay leaves. Zero-gain splits of impure nodes are allowed.
    Cart { min_node_size: usize },
    /// Second-order gain with soft-thresholded gradient sums; a split must
    /// have positive gain.
    SecondOrder { lambda: f64, alpha: f64, gamma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    pub rule: SplitRule,
    pub max_depth: Option<usize>,
    /// Features drawn per split; `None` uses every allowed feature.
    pub mtry: Option<usize>,
}

/// Soft threshold used by L1-regularized leaves.
pub fn soft_threshold(g: f64, alpha: f64) -> f64 {
    g.signum() * (g.abs() - alpha).max(0.0)
}

/// Optimal leaf weight for gradient sum `g` and hessian sum `h`.
pub fn leaf_weight(g: f64, h: f64, lambda: f64, alpha: f64) -> f64 {
    -soft_threshold(g, alpha) / (h + lambda)
}

fn newton_score(g: f64, h: f64, lambda: f64, alpha: f64) -> f64 {
    let t = soft_threshold(g, alpha);
    t * t / (h + lambda)
}

/// Second-order split gain.
pub fn split_gain(gl: f64, hl: f64, gr: f64, hr: f64, lambda: f64, alpha: f64, gamma: f64) -> f64 {
    0.5 * (newton_score(gl, hl, lambda, alpha) + newton_score(gr, hr, lambda, alpha)
        - newton_score(gl + gr, hl + hr, lambda, alpha))
        - gamma
}

/// Whether `gain` beats `best` by more than rounding noise.
fn improves(gain: f64, best: f64) -> bool {
    gain > best + 1e-10 * (1.0 + best.abs())
}

/// Midpoint split between consecutive distinct values.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = lo + (hi - lo) / 2.0;
    if m >= hi {
        lo
    } else {
        m
    }
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    /// Targets for CART, gradients for second-order trees.
    g: &'a [f64],
    h: &'a [f64],
    /// Multiplicity of each row (bootstrap counts or a 0/1 mask).
    w: &'a [f64],
    allowed: &'a [usize],
    params: TreeParams,
    nodes: Vec<Node>,
}

struct Sums {
    w: f64,
    g: f64,
    h: f64,
    gg: f64,
}

impl Builder<'_> {
    fn sums(&self, rows: &[usize]) -> Sums {
        let mut s = Sums { w: 0.0, g: 0.0, h: 0.0, gg: 0.0 };
        for &r in rows {
            let w = self.w[r];
            s.w += w;
            s.g += w * self.g[r];
            s.h += w * self.h[r];
            s.gg += w * self.g[r] * self.g[r];
        }
        s
    }

    fn leaf_value(&self, s: &Sums) -> f64 {
        match self.params.rule {
            SplitRule::Cart { .. } => s.g / s.w,
            SplitRule::SecondOrder { lambda, alpha, .. } => leaf_weight(s.g, s.h, lambda, alpha),
        }
    }

    fn can_split(&self, rows: &[usize], s: &Sums, depth: usize) -> bool {
        if self.params.max_depth.is_some_and(|d| depth >= d) || rows.len() < 2 {
            return false;
        }
        match self.params.rule {
            SplitRule::Cart { min_node_size } => {
                let first = self.g[rows[0]];
                s.w > min_node_size as f64 && rows.iter().any(|&r| self.g[r] != first)
            }
            SplitRule::SecondOrder { .. } => true,
        }
    }

    fn features_for_node<R: Rng>(&self, rng: &mut Option<&mut R>) -> Vec<usize> {
        match (self.params.mtry, rng.as_deref_mut()) {
            (Some(m), Some(rng)) if m < self.allowed.len() => {
                let mut picked: Vec<usize> = index::sample(rng, self.allowed.len(), m)
                    .into_iter()
                    .map(|i| self.allowed[i])
                    .collect();
                picked.sort_unstable();
                picked
            }
            _ => self.allowed.to_vec(),
        }
    }

    /// Best (gain, feature, threshold) over the given features.
    fn best_split(&self, rows: &[usize], s: &Sums, features: &[usize]) -> Option<(f64, usize, f64)> {
        let mut best: Option<(f64, usize, f64)> = None;
        let mut order: Vec<usize> = rows.to_vec();
        let parent_sse = s.gg - s.g * s.g / s.w;
        for &f in features {
            order.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]));
            let (mut wl, mut gl, mut hl, mut ggl) = (0.0, 0.0, 0.0, 0.0);
            for k in 0..order.len() - 1 {
                let r = order[k];
                let w = self.w[r];
                wl += w;
                gl += w * self.g[r];
                hl += w * self.h[r];
                ggl += w * self.g[r] * self.g[r];
                let (v, next) = (self.x[r][f], self.x[order[k + 1]][f]);
                if v == next {
                    continue;
                }
                let gain = match self.params.rule {
                    SplitRule::Cart { .. } => {
                        let (wr, gr, ggr) = (s.w - wl, s.g - gl, s.gg - ggl);
                        parent_sse - (ggl - gl * gl / wl) - (ggr - gr * gr / wr)
                    }
                    SplitRule::SecondOrder { lambda, alpha, gamma } => {
                        split_gain(gl, hl, s.g - gl, s.h - hl, lambda, alpha, gamma)
                    }
                };
                if best.is_none_or(|(b, _, _)| improves(gain, b)) {
                    best = Some((gain, f, midpoint(v, next)));
                }
            }
        }
        let floor = match self.params.rule {
            // Zero-gain splits count; tolerate rounding just below zero.
            SplitRule::Cart { .. } => -1e-9 * (1.0 + parent_sse.abs()),
            SplitRule::SecondOrder { .. } => 0.0,
        };
        best.filter(|&(gain, _, _)| gain > floor)
    }

    fn grow<R: Rng>(&mut self, rows: Vec<usize>, depth: usize, rng: &mut Option<&mut R>) -> usize {
        let id = self.nodes.len();
        let s = self.sums(&rows);
        self.nodes.push(Node::leaf(self.leaf_value(&s)));
        if !self.can_split(&rows, &s, depth) {
            return id;
        }
        let features = self.features_for_node(rng);
        let Some((_, f, thr)) = self.best_split(&rows, &s, &features) else {
            return id;
        };
        let (left, right): (Vec<usize>, Vec<usize>) = rows.into_iter().partition(|&r| self.x[r][f] <= thr);
        let l = self.grow(left, depth + 1, rng);
        let r = self.grow(right, depth + 1, rng);
        self.nodes[id] = Node { feature: Some(f), threshold: thr, left: l, right: r, value: 0.0 };
        id
    }
}

/// Fit one tree. `g` holds targets (CART) or gradients (second order), `h`
/// hessians (ignored by CART) and `w` row multiplicities; rows with zero
/// weight are ignored. `rng` drives per-split feature sampling.
pub fn fit_tree(
    x: &[Vec<f64>],
    g: &[f64],
    h: &[f64],
    w: &[f64],
    allowed: &[usize],
    params: &TreeParams,
    rng: Option<&mut SimRng>,
) -> Result<RegressionTree> {
    if x.len() != g.len() || x.len() != h.len() || x.len() != w.len() {
        return Err(Error::contract("tree inputs have different lengths"));
    }
    let rows: Vec<usize> = (0..x.len()).filter(|&r| w[r] > 0.0).collect();
    if rows.is_empty() {
        return Err(Error::contract("tree needs at least one weighted row"));
    }
    if rows.iter().any(|&r| x[r].iter().any(|v| !v.is_finite())) {
        return Err(Error::contract("tree features must be finite"));
    }
    let mut b = Builder { x, g, h, w, allowed, params: *params, nodes: Vec::new() };
    let mut rng = rng;
    b.grow(rows, 0, &mut rng);
    Ok(RegressionTree { nodes: b.nodes })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Features tried per split; `None` means `floor(p / 3)` (at least 1).
    pub mtry: Option<usize>,
    pub min_node_size: usize,
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig { n_trees: 500, mtry: None, min_node_size: 5, max_depth: None, bootstrap: true, seed: 0 }
    }
}

impl ForestConfig {
    pub fn mtry_for(&self, p: usize) -> usize {
        self.mtry.unwrap_or(p / 3).clamp(1, p.max(1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoostConfig {
    pub learning_rate: f64,
    pub max_depth: usize,
    pub n_estimators: usize,
    pub gamma_split: f64,
    pub l1_alpha: f64,
    pub l2_lambda: f64,
    pub colsample_bytree: f64,
    pub subsample: f64,
    /// `None` starts from the mean target.
    pub base_score: Option<f64>,
    pub seed: u64,
}

impl Default for BoostConfig {
    fn default() -> Self {
        BoostConfig {
            learning_rate: 0.01088,
            max_depth: 3,
            n_estimators: 978,
            gamma_split: 0.01224,
            l1_alpha: 0.04306,
            l2_lambda: 2.90538,
            colsample_bytree: 0.99120,
            subsample: 0.50796,
            base_score: None,
            seed: 0,
        }
    }
}

impl BoostConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.learning_rate > 0.0
            && self.gamma_split >= 0.0
            && self.l1_alpha >= 0.0
            && self.l2_lambda >= 0.0
            && self.colsample_bytree > 0.0
            && self.colsample_bytree <= 1.0
            && self.subsample > 0.0
            && self.subsample <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::contract(format!("invalid boosting configuration {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnsembleKind {
    Forest,
    Boosted,
}

impl EnsembleKind {
    pub fn name(self) -> &'static str {
        match self {
            EnsembleKind::Forest => "forest",
            EnsembleKind::Boosted => "boosted",
        }
    }
}

/// Output = `base + scale * sum(tree outputs)`, clipped to [0, 1] by
/// [`predict`].
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleModel {
    pub kind: EnsembleKind,
    pub schema: FeatureSchema,
    pub base: f64,
    pub scale: f64,
    pub trees: Vec<RegressionTree>,
    /// Training configuration, recorded in the model file.
    pub config: KvFile,
}

impl EnsembleModel {
    pub fn predict_raw_row(&self, row: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict_row(row)).sum();
        self.base + self.scale * sum
    }

    pub fn predict_raw(&self, x: &[Vec<f64>]) -> Vec<f64> {
        x.iter().map(|r| self.predict_raw_row(r)).collect()
    }
}

/// Row indices sorted by row key.
fn canonical_order(m: &DesignMatrix) -> Result<Vec<usize>> {
    let keys: Vec<String> = (0..m.n_rows()).map(|i| m.row_key(i)).collect();
    let mut order: Vec<usize> = (0..m.n_rows()).collect();
    order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    if order.windows(2).any(|w| keys[w[0]] == keys[w[1]]) {
        return Err(Error::validation("design matrix has duplicate (id, block) rows"));
    }
    Ok(order)
}

fn training_view(m: &DesignMatrix) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let y = m.require_targets()?;
    if m.n_rows() == 0 {
        return Err(Error::contract("cannot train on an empty matrix"));
    }
    let order = canonical_order(m)?;
    Ok((order.iter().map(|&i| m.rows[i].clone()).collect(), order.iter().map(|&i| y[i]).collect()))
}

/// One forest's trees on rows already in canonical order.
pub fn forest_trees(x: &[Vec<f64>], y: &[f64], config: &ForestConfig) -> Result<Vec<RegressionTree>> {
    let n = x.len();
    let p = x.first().map_or(0, Vec::len);
    let params = TreeParams {
        rule: SplitRule::Cart { min_node_size: config.min_node_size },
        max_depth: config.max_depth,
        mtry: Some(config.mtry_for(p)),
    };
    let allowed: Vec<usize> = (0..p).collect();
    let ones = vec![1.0; n];
    (0..config.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng::substream(config.seed, Domain::Forest, t as u64);
            let mut w = vec![0.0; n];
            if config.bootstrap {
                for _ in 0..n {
                    w[rng.random_range(0..n)] += 1.0;
                }
            } else {
                w.fill(1.0);
            }
            fit_tree(x, y, &ones, &w, &allowed, &params, Some(&mut rng))
        })
        .collect()
}

fn forest_config_kv(config: &ForestConfig, runs: usize, p: usize) -> KvFile {
    let mut kv = KvFile::new();
    kv.set("n_trees", config.n_trees);
    kv.set("runs", runs);
    kv.set("mtry", config.mtry_for(p));
    kv.set("min_node_size", config.min_node_size);
    kv.set("max_depth", config.max_depth.map_or("none".to_string(), |d| d.to_string()));
    kv.set("bootstrap", config.bootstrap);
    kv.set("seed", config.seed);
    kv
}

pub fn fit_forest(m: &DesignMatrix, config: &ForestConfig) -> Result<EnsembleModel> {
    fit_forest_runs(m, config, 1)
}

/// Average of `runs` independently seeded forests, stored as one ensemble.
/// Run `r` uses seed `derive_seed(config.seed, r)`; a single run uses the
/// seed as given.
pub fn fit_forest_runs(m: &DesignMatrix, config: &ForestConfig, runs: usize) -> Result<EnsembleModel> {
    if runs == 0 || config.n_trees == 0 {
        return Err(Error::contract("forest needs at least one run and one tree"));
    }
    let (x, y) = training_view(m)?;
    let mut trees = Vec::with_capacity(runs * config.n_trees);
    for r in 0..runs {
        let seed = if runs == 1 { config.seed } else { rng::derive_seed(config.seed, r as u64) };
        trees.extend(forest_trees(&x, &y, &ForestConfig { seed, ..config.clone() })?);
    }
    Ok(EnsembleModel {
        kind: EnsembleKind::Forest,
        schema: m.schema.clone(),
        base: 0.0,
        scale: 1.0 / trees.len() as f64,
        trees,
        config: forest_config_kv(config, runs, m.n_cols()),
    })
}

/// Boosted trees on rows in canonical order. Returns the trees, the base
/// score and the mean squared training loss after each round.
pub fn boosted_trees(x: &[Vec<f64>], y: &[f64], config: &BoostConfig) -> Result<(Vec<RegressionTree>, f64, Vec<f64>)> {
    config.validate()?;
    let n = x.len();
    if n == 0 {
        return Err(Error::contract("cannot boost on zero rows"));
    }
    let p = x[0].len();
    let base = config.base_score.unwrap_or_else(|| y.iter().sum::<f64>() / n as f64);
    let params = TreeParams {
        rule: SplitRule::SecondOrder {
            lambda: config.l2_lambda,
            alpha: config.l1_alpha,
            gamma: config.gamma_split,
        },
        max_depth: Some(config.max_depth),
        mtry: None,
    };
    let n_cols = ((config.colsample_bytree * p as f64).round() as usize).clamp(1, p.max(1));
    let mut pred = vec![base; n];
    let hess = vec![1.0; n];
    let mut trees = Vec::with_capacity(config.n_estimators);
    let mut trace = Vec::with_capacity(config.n_estimators);
    for round in 0..config.n_estimators {
        let mut rng = rng::substream(config.seed, Domain::Boost, round as u64);
        let mut w: Vec<f64> = if config.subsample < 1.0 {
            (0..n).map(|_| if rng.random_bool(config.subsample) { 1.0 } else { 0.0 }).collect()
        } else {
            vec![1.0; n]
        };
        if w.iter().all(|&v| v == 0.0) {
            w[rng.random_range(0..n)] = 1.0;
        }
        let allowed: Vec<usize> = if n_cols < p {
            let mut cols = index::sample(&mut rng, p, n_cols).into_vec();
            cols.sort_unstable();
            cols
        } else {
            (0..p).collect()
        };
        let grad: Vec<f64> = pred.iter().zip(y).map(|(f, t)| f - t).collect();
        let tree = fit_tree(x, &grad, &hess, &w, &allowed, &params, None)?;
        for (f, row) in pred.iter_mut().zip(x) {
            *f += config.learning_rate * tree.predict_row(row);
        }
        trace.push(pred.iter().zip(y).map(|(f, t)| (f - t) * (f - t)).sum::<f64>() / n as f64);
        trees.push(tree);
    }
    Ok((trees, base, trace))
}

fn boost_config_kv(config: &BoostConfig, base: f64) -> KvFile {
    let mut kv = KvFile::new();
    kv.set("learning_rate", config.learning_rate);
    kv.set("max_depth", config.max_depth);
    kv.set("n_estimators", config.n_estimators);
    kv.set("gamma_split", config.gamma_split);
    kv.set("l1_alpha", config.l1_alpha);
    kv.set("l2_lambda", config.l2_lambda);
    kv.set("colsample_bytree", config.colsample_bytree);
    kv.set("subsample", config.subsample);
    kv.set("base_score", base);
    kv.set("seed", config.seed);
    kv
}

pub fn fit_boosted(m: &DesignMatrix, config: &BoostConfig) -> Result<EnsembleModel> {
    fit_boosted_traced(m, config).map(|(model, _)| model)
}

/// Like [`fit_boosted`], also returning the training loss after each round.
pub fn fit_boosted_traced(m: &DesignMatrix, config: &BoostConfig) -> Result<(EnsembleModel, Vec<f64>)> {
    let (x, y) = training_view(m)?;
    let (trees, base, trace) = boosted_trees(&x, &y, config)?;
    let model = EnsembleModel {
        kind: EnsembleKind::Boosted,
        schema: m.schema.clone(),
        base,
        scale: config.learning_rate,
        trees,
        config: boost_config_kv(config, base),
    };
    Ok((model, trace))
}

fn check_schema(model: &EnsembleModel, m: &DesignMatrix) -> Result<()> {
    if model.schema != m.schema {
        return Err(Error::Schema {
            expected: model.schema.version.clone(),
            found: m.schema.version.clone(),
        });
    }
    Ok(())
}

/// Predictions for every matrix row, clipped to [0, 1].
pub fn predict(model: &EnsembleModel, m: &DesignMatrix) -> Result<Vec<f64>> {
    check_schema(model, m)?;
    Ok(m.rows.iter().map(|r| model.predict_raw_row(r).clamp(0.0, 1.0)).collect())
}

const TREES_MARKER: &str = "[trees]";
const NODE_HEADER: &str = "tree,node_id,feature,threshold,left,right,leaf_value";

/// Text model file: a `key=value` header, then one CSV record per node in
/// pre-order.
pub fn write_model<W: Write>(mut w: W, model: &EnsembleModel) -> Result<()> {
    let mut kv = KvFile::new();
    kv.set("format_version", MODEL_FORMAT_VERSION);
    kv.set("kind", model.kind.name());
    kv.set("schema_version", &model.schema.version);
    kv.set("schema_columns", model.schema.columns.join(";"));
    kv.set("base", model.base);
    kv.set("scale", model.scale);
    kv.set("n_trees_total", model.trees.len());
    for (k, v) in model.config.entries() {
        kv.set(&format!("config.{k}"), v);
    }
    w.write_all(kv.render(Some("choice-predict tree ensemble")).as_bytes())?;
    writeln!(w, "{TREES_MARKER}")?;
    writeln!(w, "{NODE_HEADER}")?;
    for (t, tree) in model.trees.iter().enumerate() {
        for (i, n) in tree.nodes.iter().enumerate() {
            match n.feature {
                Some(f) => writeln!(w, "{t},{i},{f},{},{},{},", n.threshold, n.left, n.right)?,
                None => writeln!(w, "{t},{i},,,,,{}", n.value)?,
            }
        }
    }
    Ok(())
}

pub fn read_model<R: BufRead>(r: R) -> Result<EnsembleModel> {
    let mut header = String::new();
    let mut lines = r.lines().enumerate();
    for (_, line) in lines.by_ref() {
        let line = line?;
        if line.trim() == TREES_MARKER {
            break;
        }
        header.push_str(&line);
        header.push('\n');
    }
    let kv = KvFile::parse(&header)?;
    let version = kv.parse_u64("format_version")?;
    if version != MODEL_FORMAT_VERSION {
        return Err(Error::Schema {
            expected: format!("model v{MODEL_FORMAT_VERSION}"),
            found: format!("model v{version}"),
        });
    }
    let kind = match kv.require("kind")? {
        "forest" => EnsembleKind::Forest,
        "boosted" => EnsembleKind::Boosted,
        other => return Err(Error::validation(format!("unknown ensemble kind `{other}`"))),
    };
    let schema = FeatureSchema {
        version: kv.require("schema_version")?.to_string(),
        columns: kv.require("schema_columns")?.split(';').map(str::to_string).collect(),
    };
    let mut config = KvFile::new();
    for (k, v) in kv.entries() {
        if let Some(name) = k.strip_prefix("config.") {
            config.set(name, v);
        }
    }
    let n_total = kv.parse_u64("n_trees_total")? as usize;
    let mut trees: Vec<RegressionTree> = Vec::with_capacity(n_total);
    for (n, line) in lines {
        let line = line?;
        let lineno = n + 1;
        if line == NODE_HEADER || line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(Error::parse(lineno, "node", "expected 7 fields"));
        }
        let int = |k: usize, name: &str| -> Result<usize> {
            f[k].parse().map_err(|_| Error::parse(lineno, name, format!("`{}` is not an index", f[k])))
        };
        let num = |k: usize, name: &str| -> Result<f64> {
            f[k].parse().map_err(|_| Error::parse(lineno, name, format!("`{}` is not a number", f[k])))
        };
        let (t, id) = (int(0, "tree")?, int(1, "node_id")?);
        if t == trees.len() {
            trees.push(RegressionTree { nodes: Vec::new() });
        }
        let tree = trees
            .get_mut(t)
            .filter(|tree| tree.nodes.len() == id)
            .ok_or_else(|| Error::parse(lineno, "node_id", "nodes out of pre-order"))?;
        let node = if f[2].is_empty() {
            Node::leaf(num(6, "leaf_value")?)
        } else {
            Node {
                feature: Some(int(2, "feature")?),
                threshold: num(3, "threshold")?,
                left: int(4, "left")?,
                right: int(5, "right")?,
                value: 0.0,
            }
        };
        tree.nodes.push(node);
    }
    if trees.len() != n_total {
        return Err(Error::validation(format!("model file lists {} trees, header says {n_total}", trees.len())));
    }
    for tree in &trees {
        let len = tree.nodes.len();
        if tree.nodes.iter().any(|n| n.feature.is_some_and(|f| f >= schema.columns.len() || n.left >= len || n.right >= len)) {
            return Err(Error::validation("model file has a dangling node reference"));
        }
    }
    Ok(EnsembleModel {
        kind,
        schema,
        base: kv.parse_f64("base")?,
        scale: kv.parse_f64("scale")?,
        trees,
        config,
    })
}
