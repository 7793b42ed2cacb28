//! Data ingestion, run manifests and the `cpc` command front end.
//!
//! Every command honors `--seed`, writes its outputs plus a manifest
//! (`<out>.manifest` unless `--manifest` is given) and exits with 0 on
//! success, 1 on usage errors, 2 on invalid input and 3 on internal failures.
//! An optional `--config` file supplies `flag=value` defaults; flags given on
//! the command line win.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufReader, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use crate::beast::BeastParams;
use crate::error::{Error, Result};
use crate::eval::{self, Algorithm, BootstrapSummary, EnoCurve, ForesightPlan, Labeled, Learners};
use crate::features::{self, Ablation};
use crate::kv::KvFile;
use crate::learn::{self, BoostConfig, ForestConfig};
use crate::models::params::{parse_params, render_params};
use crate::models::{fit_grid, BlockScope, FitGrid, ModelKind, ModelSpec};
use crate::problems::{self, parse_problem, problem_fields, validate_problem, ChoiceProblem, GeneratorConfig, PROBLEM_HEADER};
use crate::{BlockRates, BLOCKS, TRIALS, TRIALS_PER_BLOCK};

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

// ---------------------------------------------------------------------------
// Aggregate and raw-trial data
// ---------------------------------------------------------------------------

pub const AGGREGATE_EXTRA: [&str; 4] = ["Block", "Feedback", "BRate", "NSubjects"];

/// Problems with their per-block B rates and subject counts.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AggregateData {
    pub problems: Vec<ChoiceProblem>,
    pub rates: Vec<BlockRates>,
    pub n_subjects: Vec<u32>,
}

impl AggregateData {
    pub fn len(&self) -> usize {
        self.problems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.problems.is_empty()
    }

    pub fn labeled(&self) -> Vec<Labeled> {
        self.problems.iter().cloned().zip(self.rates.iter().copied()).collect()
    }

    /// One record per (problem, block).
    pub fn n_records(&self) -> usize {
        self.len() * BLOCKS
    }
}

pub fn write_aggregate_csv<W: Write>(w: W, data: &AggregateData) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let header: Vec<&str> = PROBLEM_HEADER.iter().chain(&AGGREGATE_EXTRA).copied().collect();
    out.write_record(&header)?;
    for ((p, rates), n) in data.problems.iter().zip(&data.rates).zip(&data.n_subjects) {
        let fields = problem_fields(p);
        for (b, rate) in rates.iter().enumerate() {
            let mut rec = vec![p.id.clone()];
            rec.extend(fields.iter().cloned());
            rec.push((b + 1).to_string());
            rec.push(u8::from(b > 0).to_string());
            rec.push(rate.to_string());
            rec.push(n.to_string());
            out.write_record(&rec)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Read aggregate records, grouping them by problem in order of first
/// appearance. Each problem needs all five blocks with consistent
/// dimensions.
pub fn read_aggregate_csv<R: Read>(r: R) -> Result<AggregateData> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let headers = rdr.headers()?.clone();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut data = AggregateData::default();
    let mut seen: Vec<[bool; BLOCKS]> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let get = |name: &str| -> Option<String> {
            headers.iter().position(|h| h == name).and_then(|j| rec.get(j)).map(str::to_string)
        };
        let need = |name: &str| get(name).ok_or_else(|| Error::parse(line, name, "missing column"));
        let id = need("id")?;
        let p = parse_problem(&get, id.clone(), line)?;
        let block: usize = need("Block")?
            .parse()
            .ok()
            .filter(|b| (1..=BLOCKS).contains(b))
            .ok_or_else(|| Error::parse(line, "Block", "expected 1..5"))?;
        let feedback = need("Feedback")?;
        if feedback != if block == 1 { "0" } else { "1" } {
            return Err(Error::parse(line, "Feedback", format!("`{feedback}` is inconsistent with block {block}")));
        }
        let raw_rate = need("BRate")?;
        let rate: f64 = raw_rate
            .parse()
            .ok()
            .filter(|r| (0.0..=1.0).contains(r))
            .ok_or_else(|| Error::parse(line, "BRate", format!("`{raw_rate}` is not a rate in [0, 1]")))?;
        let n: u32 = match get("NSubjects") {
            Some(s) => s.parse().map_err(|_| Error::parse(line, "NSubjects", format!("`{s}` is not a count")))?,
            None => 0,
        };
        let k = match index.get(&id) {
            Some(&k) => {
                if data.problems[k] != p {
                    return Err(Error::parse(line, "id", format!("problem `{id}` has inconsistent dimensions")));
                }
                if data.n_subjects[k] != n {
                    return Err(Error::parse(line, "NSubjects", format!("problem `{id}` has inconsistent counts")));
                }
                k
            }
            None => {
                let verdict = validate_problem(&p);
                if !verdict.is_ok() {
                    return Err(Error::validation(format!("line {line}, problem `{id}`: {verdict}")));
                }
                index.insert(id.clone(), data.len());
                data.problems.push(p);
                data.rates.push([0.0; BLOCKS]);
                data.n_subjects.push(n);
                seen.push([false; BLOCKS]);
                data.len() - 1
            }
        };
        if seen[k][block - 1] {
            return Err(Error::parse(line, "Block", format!("duplicate block {block} for `{id}`")));
        }
        seen[k][block - 1] = true;
        data.rates[k][block - 1] = rate;
    }
    for (k, s) in seen.iter().enumerate() {
        if s.iter().any(|b| !b) {
            return Err(Error::validation(format!("problem `{}` lacks some of its 5 blocks", data.problems[k].id)));
        }
    }
    Ok(data)
}

/// Canonical raw-trial columns.
pub const RAW_COLUMNS: [&str; 4] = ["subject_id", "problem_id", "trial", "choice_B"];

/// Maps canonical raw-trial column names to the names used in a file. The
/// side file holds `canonical=actual` lines.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ColumnMapping {
    names: HashMap<String, String>,
}

impl ColumnMapping {
    pub fn parse(text: &str) -> Result<Self> {
        let kv = KvFile::parse(text)?;
        let mut names = HashMap::new();
        for (k, v) in kv.entries() {
            if !RAW_COLUMNS.contains(&k.as_str()) {
                return Err(Error::validation(format!("mapping names unknown column `{k}`")));
            }
            names.insert(k.clone(), v.clone());
        }
        Ok(ColumnMapping { names })
    }

    pub fn actual<'a>(&'a self, canonical: &'a str) -> &'a str {
        self.names.get(canonical).map_or(canonical, String::as_str)
    }
}

/// Aggregate raw trials (one row per subject, problem and trial) into block
/// rates: the mean B choice over subjects and trials within each block.
/// Problems come from `problems`; those without trials are skipped.
pub fn read_raw_trials<R: Read>(r: R, problems: &[ChoiceProblem], mapping: &ColumnMapping) -> Result<AggregateData> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        let actual = mapping.actual(name);
        headers
            .iter()
            .position(|h| h == actual)
            .ok_or_else(|| Error::parse(1, actual, "missing column"))
    };
    let (c_subject, c_problem, c_trial, c_choice) = (col("subject_id")?, col("problem_id")?, col("trial")?, col("choice_B")?);
    let index: HashMap<&str, usize> = problems.iter().enumerate().map(|(i, p)| (p.id.as_str(), i)).collect();
    let mut sums = vec![[0u64; BLOCKS]; problems.len()];
    let mut counts = vec![[0u64; BLOCKS]; problems.len()];
    let mut subjects: Vec<std::collections::BTreeSet<String>> = vec![Default::default(); problems.len()];
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let pid = &rec[c_problem];
        let k = *index
            .get(pid)
            .ok_or_else(|| Error::parse(line, mapping.actual("problem_id"), format!("unknown problem `{pid}`")))?;
        let trial: usize = rec[c_trial]
            .parse()
            .ok()
            .filter(|t| (1..=TRIALS).contains(t))
            .ok_or_else(|| Error::parse(line, mapping.actual("trial"), "expected 1..25"))?;
        let choice: u64 = match &rec[c_choice] {
            "0" => 0,
            "1" => 1,
            other => return Err(Error::parse(line, mapping.actual("choice_B"), format!("`{other}` is not 0 or 1"))),
        };
        let b = (trial - 1) / TRIALS_PER_BLOCK;
        sums[k][b] += choice;
        counts[k][b] += 1;
        subjects[k].insert(rec[c_subject].to_string());
    }
    let mut data = AggregateData::default();
    for (k, p) in problems.iter().enumerate() {
        if counts[k].iter().all(|&c| c == 0) {
            continue;
        }
        if counts[k].contains(&0) {
            return Err(Error::validation(format!("problem `{}` has blocks without trials", p.id)));
        }
        let mut rates = [0.0; BLOCKS];
        for b in 0..BLOCKS {
            rates[b] = sums[k][b] as f64 / counts[k][b] as f64;
        }
        data.problems.push(p.clone());
        data.rates.push(rates);
        data.n_subjects.push(subjects[k].len() as u32);
    }
    Ok(data)
}

pub fn write_predictions_csv<W: Write>(w: W, preds: &[(String, BlockRates)]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["id", "block", "rate"])?;
    for (id, rates) in preds {
        for (b, r) in rates.iter().enumerate() {
            out.write_record([id.clone(), (b + 1).to_string(), r.to_string()])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_predictions_csv<R: Read>(r: R) -> Result<Vec<(String, BlockRates)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let mut out: Vec<(String, BlockRates)> = Vec::new();
    let mut index: HashMap<String, (usize, [bool; BLOCKS])> = HashMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() != 3 {
            return Err(Error::parse(line, "row", "expected id,block,rate"));
        }
        let block: usize = rec[1]
            .parse()
            .ok()
            .filter(|b| (1..=BLOCKS).contains(b))
            .ok_or_else(|| Error::parse(line, "block", "expected 1..5"))?;
        let rate: f64 = rec[2]
            .parse()
            .ok()
            .filter(|r| (0.0..=1.0).contains(r))
            .ok_or_else(|| Error::parse(line, "rate", format!("`{}` is not a rate in [0, 1]", &rec[2])))?;
        let entry = index.entry(rec[0].to_string()).or_insert_with(|| {
            out.push((rec[0].to_string(), [0.0; BLOCKS]));
            (out.len() - 1, [false; BLOCKS])
        });
        if entry.1[block - 1] {
            return Err(Error::parse(line, "block", "duplicate block"));
        }
        entry.1[block - 1] = true;
        out[entry.0].1[block - 1] = rate;
    }
    if let Some((id, _)) = index.iter().find(|(_, (_, s))| s.iter().any(|b| !b)) {
        return Err(Error::validation(format!("predictions for `{id}` lack some blocks")));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Manifests and plots
// ---------------------------------------------------------------------------

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_digest(path: &Path) -> Result<String> {
    Ok(sha256_hex(&fs::read(path)?))
}

/// Record of one command run: what was asked, with which seed, on which
/// inputs, producing which outputs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunManifest {
    pub command: String,
    pub config: String,
    pub seed: u64,
    pub inputs: Vec<(String, String)>,
    pub outputs: Vec<(String, String)>,
}

impl RunManifest {
    pub fn to_kv(&self) -> KvFile {
        let mut kv = KvFile::new();
        kv.set("format_version", 1);
        kv.set("toolkit_version", TOOLKIT_VERSION);
        kv.set("command", &self.command);
        kv.set("config", &self.config);
        kv.set("seed", self.seed);
        for (i, (path, digest)) in self.inputs.iter().enumerate() {
            kv.set(&format!("input.{i}.path"), path);
            kv.set(&format!("input.{i}.sha256"), digest);
        }
        for (i, (path, digest)) in self.outputs.iter().enumerate() {
            kv.set(&format!("output.{i}.path"), path);
            kv.set(&format!("output.{i}.sha256"), digest);
        }
        kv
    }

    pub fn parse(text: &str) -> Result<Self> {
        let kv = KvFile::parse(text)?;
        let list = |prefix: &str| -> Result<Vec<(String, String)>> {
            let mut out = Vec::new();
            while let Some(path) = kv.get(&format!("{prefix}.{}.path", out.len())) {
                let digest = kv.require(&format!("{prefix}.{}.sha256", out.len()))?;
                out.push((path.to_string(), digest.to_string()));
            }
            Ok(out)
        };
        Ok(RunManifest {
            command: kv.require("command")?.to_string(),
            config: kv.require("config")?.to_string(),
            seed: kv.parse_u64("seed")?,
            inputs: list("input")?,
            outputs: list("output")?,
        })
    }

    /// Check every recorded output against its file on disk.
    pub fn verify_outputs(&self) -> Result<()> {
        for (path, digest) in &self.outputs {
            if file_digest(Path::new(path))? != *digest {
                return Err(Error::validation(format!("`{path}` no longer matches its manifest digest")));
            }
        }
        Ok(())
    }
}

/// Horizontal-free vertical bar chart as a standalone SVG document.
pub fn bar_chart_svg(title: &str, bars: &[(String, f64)]) -> String {
    let (w, h, margin, label_h) = (640.0, 360.0, 40.0, 90.0);
    let max = bars.iter().map(|b| b.1).fold(0.0_f64, f64::max).max(f64::MIN_POSITIVE);
    let slot = (w - 2.0 * margin) / bars.len().max(1) as f64;
    let plot_h = h - margin - label_h;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, w / 2.0, xml_escape(title));
    for (i, (label, v)) in bars.iter().enumerate() {
        let bh = plot_h * v / max;
        let x = margin + slot * i as f64 + slot * 0.15;
        let y = margin + plot_h - bh;
        let _ = writeln!(s, r##"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{bh:.2}" fill="#4878a8"/>"##, slot * 0.7);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{v:.5}</text>"#, x + slot * 0.35, y - 4.0);
        let ly = margin + plot_h + 14.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{ly:.2}" text-anchor="end" transform="rotate(-35 {:.2} {ly:.2})">{}</text>"#,
            x + slot * 0.35,
            x + slot * 0.35,
            xml_escape(label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

// ---------------------------------------------------------------------------
// Command line
// ---------------------------------------------------------------------------

#[derive(Debug, Parser)]
#[command(name = "cpc", version, about = "Choice-prediction pipeline: generate, simulate, fit, featurize, train, predict, evaluate")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Master seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Flat `flag=value` file of defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Where to write the run manifest.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DataFormat {
    Aggregate,
    Raw,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScopeArg {
    All,
    First,
}

impl From<ScopeArg> for BlockScope {
    fn from(s: ScopeArg) -> Self {
        match s {
            ScopeArg::All => BlockScope::All,
            ScopeArg::First => BlockScope::First,
        }
    }
}

/// How observed data files are read.
#[derive(Debug, Args)]
pub struct FormatArgs {
    #[arg(long, value_enum, default_value_t = DataFormat::Aggregate)]
    pub format: DataFormat,
    /// Problem CSV describing the problems of raw-trial files.
    #[arg(long = "raw-problems")]
    pub raw_problems: Option<PathBuf>,
    /// `canonical=actual` column names for raw-trial files.
    #[arg(long)]
    pub mapping: Option<PathBuf>,
}

/// Foresight model selection.
#[derive(Debug, Args)]
pub struct ForesightArgs {
    /// Parameter file of the foresight model.
    #[arg(long = "foresight-params")]
    pub params: Option<PathBuf>,
    /// Foresight model with shipped parameters (ignored with --foresight-params).
    #[arg(long = "foresight-model", default_value = "beast")]
    pub model: String,
    /// Override the number of simulated agents of a BEAST foresight.
    #[arg(long = "n-agents")]
    pub n_agents: Option<usize>,
}

#[derive(Debug, Args)]
pub struct LearnerArgs {
    /// Trees per forest.
    #[arg(long, default_value_t = 500)]
    pub trees: usize,
    /// Forests averaged per prediction.
    #[arg(long = "forest-runs", default_value_t = 20)]
    pub forest_runs: usize,
    /// Boosting rounds.
    #[arg(long = "n-estimators", default_value_t = 978)]
    pub n_estimators: usize,
}

impl LearnerArgs {
    fn learners(&self) -> Learners {
        Learners {
            forest: ForestConfig { n_trees: self.trees, ..ForestConfig::default() },
            forest_runs: self.forest_runs,
            boost: BoostConfig { n_estimators: self.n_estimators, ..BoostConfig::default() },
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw random problems.
    Generate {
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate aggregate block rates with the BEAST simulator.
    Simulate {
        #[arg(long)]
        problems: PathBuf,
        /// BEAST parameter file; shipped defaults otherwise.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long = "n-agents")]
        n_agents: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Grid-search a model's parameters on observed data.
    Fit {
        #[arg(long)]
        model: String,
        /// Grid file with `name=v1,v2,...` lines.
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        format: FormatArgs,
        #[arg(long, value_enum, default_value_t = ScopeArg::All)]
        scope: ScopeArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a design matrix.
    Featurize {
        /// Observed data; its rates become the target column.
        #[arg(long, conflicts_with = "problems")]
        data: Option<PathBuf>,
        /// Problems without targets.
        #[arg(long)]
        problems: Option<PathBuf>,
        #[command(flatten)]
        format: FormatArgs,
        #[command(flatten)]
        foresight: ForesightArgs,
        #[arg(long, default_value = "full")]
        ablation: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a tree ensemble on a design matrix.
    Train {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value = "forest")]
        algorithm: String,
        #[command(flatten)]
        learners: LearnerArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict block rates with a trained ensemble.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score predictions, optionally against a baseline with a bootstrap interval.
    Evaluate {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        observed: PathBuf,
        #[command(flatten)]
        format: FormatArgs,
        /// Second predictions file; reports the interval of its MSE minus ours.
        #[arg(long)]
        baseline: Option<PathBuf>,
        #[arg(long = "n-boot", default_value_t = 2501)]
        n_boot: usize,
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        #[arg(long, value_enum, default_value_t = ScopeArg::All)]
        scope: ScopeArg,
        /// ENO curve anchors as `mse:eno,mse:eno,...`.
        #[arg(long = "eno-anchors")]
        eno_anchors: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Insights-versus-foresight ablation.
    Ablate {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[command(flatten)]
        format: FormatArgs,
        #[command(flatten)]
        foresight: ForesightArgs,
        /// Re-fit the foresight on the training data over this grid.
        #[arg(long = "fit-grid")]
        fit_grid: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "forest,boosted")]
        algorithms: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        seeds: Vec<u64>,
        #[command(flatten)]
        learners: LearnerArgs,
        #[arg(long = "eno-anchors")]
        eno_anchors: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Each model on its own and as a foresight, on unambiguous problems.
    Compare {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[command(flatten)]
        format: FormatArgs,
        /// Parameter files replacing a model's shipped parameters.
        #[arg(long = "model-params")]
        model_params: Vec<PathBuf>,
        /// `kind=path` grids for re-fitting models on the training data.
        #[arg(long = "fit-grid")]
        fit_grids: Vec<String>,
        #[arg(long = "n-agents")]
        n_agents: Option<usize>,
        #[arg(long, default_value = "forest")]
        algorithm: String,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        seeds: Vec<u64>,
        #[arg(long, value_enum, default_value_t = ScopeArg::All)]
        scope: ScopeArg,
        #[command(flatten)]
        learners: LearnerArgs,
        #[arg(long = "eno-anchors")]
        eno_anchors: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        plot: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Generate { .. } => "generate",
            Command::Simulate { .. } => "simulate",
            Command::Fit { .. } => "fit",
            Command::Featurize { .. } => "featurize",
            Command::Train { .. } => "train",
            Command::Predict { .. } => "predict",
            Command::Evaluate { .. } => "evaluate",
            Command::Ablate { .. } => "ablate",
            Command::Compare { .. } => "compare",
        }
    }

    fn primary_output(&self) -> &Path {
        match self {
            Command::Generate { out, .. }
            | Command::Simulate { out, .. }
            | Command::Fit { out, .. }
            | Command::Featurize { out, .. }
            | Command::Train { out, .. }
            | Command::Predict { out, .. }
            | Command::Evaluate { out, .. }
            | Command::Ablate { out, .. }
            | Command::Compare { out, .. } => out,
        }
    }
}

/// Exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Problem { source, .. } => exit_code(source),
        Error::RestartCap(_) => 3,
        _ => 2,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Contract(_) => "contract",
        Error::Validation(_) => "validation",
        Error::Unsupported { .. } => "unsupported",
        Error::Parse { .. } => "parse",
        Error::Schema { .. } => "schema",
        Error::EnoUndefined { .. } => "eno_undefined",
        Error::Problem { source, .. } => error_kind(source),
        Error::RestartCap(_) => "restart_cap",
        Error::Io(_) => "io",
        Error::Csv(_) => "csv",
    }
}

/// Append `--flag value` pairs from a config file for flags absent from
/// `args`.
fn apply_config(mut args: Vec<String>) -> Result<Vec<String>> {
    let Some(pos) = args.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(args);
    };
    let path = match args[pos].split_once('=') {
        Some((_, p)) => p.to_string(),
        None => args
            .get(pos + 1)
            .cloned()
            .ok_or_else(|| Error::validation("--config needs a path"))?,
    };
    let kv = KvFile::parse(&fs::read_to_string(&path)?)?;
    for (key, value) in kv.entries() {
        let flag = format!("--{key}");
        let given = args.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")));
        if !given {
            args.push(flag);
            args.push(value.clone());
        }
    }
    Ok(args)
}

/// Run the command line in `args` (program name first); returns the exit
/// status.
pub fn run_args(args: Vec<String>) -> i32 {
    let args = match apply_config(args) {
        Ok(a) => a,
        Err(e) => return report_error(&e),
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.global.threads.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error_kind=internal\nexit_code=3\nmessage=thread pool: {e}");
            return 3;
        }
    };
    match pool.install(|| execute(&cli)) {
        Ok(()) => 0,
        Err(e) => report_error(&e),
    }
}

fn report_error(e: &Error) -> i32 {
    let code = exit_code(e);
    eprintln!(
        "error_kind={}\nexit_code={code}\nmessage={}",
        error_kind(e),
        e.to_string().replace('\n', " ")
    );
    code
}

pub fn main_entry() -> i32 {
    run_args(std::env::args().collect())
}

struct Run {
    manifest: RunManifest,
}

impl Run {
    fn read(&mut self, path: &Path) -> Result<Vec<u8>> {
        let bytes = fs::read(path).map_err(|e| Error::validation(format!("cannot read `{}`: {e}", path.display())))?;
        self.manifest.inputs.push((path.display().to_string(), sha256_hex(&bytes)));
        Ok(bytes)
    }

    fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let mut f = File::create(path)?;
        f.write_all(bytes)?;
        self.manifest.outputs.push((path.display().to_string(), sha256_hex(bytes)));
        Ok(())
    }

    fn read_problems(&mut self, path: &Path) -> Result<Vec<ChoiceProblem>> {
        problems::read_problems_csv(self.read(path)?.as_slice())
    }

    fn read_data(&mut self, path: &Path, format: &FormatArgs) -> Result<AggregateData> {
        match format.format {
            DataFormat::Aggregate => read_aggregate_csv(self.read(path)?.as_slice()),
            DataFormat::Raw => {
                let pp = format
                    .raw_problems
                    .as_ref()
                    .ok_or_else(|| Error::validation("raw-trial input needs --raw-problems"))?;
                let problems = self.read_problems(pp)?;
                let mapping = match &format.mapping {
                    Some(m) => ColumnMapping::parse(&String::from_utf8_lossy(&self.read(m)?))?,
                    None => ColumnMapping::default(),
                };
                read_raw_trials(self.read(path)?.as_slice(), &problems, &mapping)
            }
        }
    }

    fn read_spec(&mut self, path: &Path) -> Result<ModelSpec> {
        parse_params(&String::from_utf8_lossy(&self.read(path)?))
    }

    fn foresight_spec(&mut self, args: &ForesightArgs) -> Result<ModelSpec> {
        let mut spec = match &args.params {
            Some(p) => self.read_spec(p)?,
            None => args.model.parse::<ModelKind>()?.default_spec(),
        };
        if let (Some(n), ModelSpec::Beast(_)) = (args.n_agents, &spec) {
            spec.set("n_agents", n as f64)?;
        }
        Ok(spec)
    }

    fn read_grid(&mut self, path: &Path) -> Result<FitGrid> {
        FitGrid::parse(&String::from_utf8_lossy(&self.read(path)?))
    }
}

fn parse_curve(anchors: &Option<String>) -> Result<EnoCurve> {
    let Some(text) = anchors else {
        return Ok(EnoCurve::competition());
    };
    let points = text
        .split(',')
        .map(|pair| {
            let (m, e) = pair
                .split_once(':')
                .ok_or_else(|| Error::validation(format!("ENO anchor `{pair}` is not mse:eno")))?;
            let num = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::validation(format!("`{s}` is not a number")));
            Ok((num(m)?, num(e)?))
        })
        .collect::<Result<Vec<_>>>()?;
    eval::fit_eno_curve(&points)
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn execute(cli: &Cli) -> Result<()> {
    let seed = cli.global.seed;
    let mut run = Run {
        manifest: RunManifest {
            command: cli.command.name().to_string(),
            config: format!("{:?}", cli.command),
            seed,
            ..RunManifest::default()
        },
    };
    match &cli.command {
        Command::Generate { n, out } => {
            let (problems, _) = problems::generate_problems(seed, *n, &GeneratorConfig::default())?;
            run.write(out, &csv_bytes(|b| problems::write_problems_csv(b, &problems))?)?;
        }
        Command::Simulate { problems, params, n_agents, out } => {
            let ps = run.read_problems(problems)?;
            let mut spec = match params {
                Some(p) => run.read_spec(p)?,
                None => ModelSpec::Beast(BeastParams::default()),
            };
            let ModelSpec::Beast(_) = spec else {
                return Err(Error::validation("simulate needs BEAST parameters"));
            };
            if let Some(n) = n_agents {
                spec.set("n_agents", *n as f64)?;
            }
            let ModelSpec::Beast(bp) = &spec else { unreachable!() };
            let n = bp.n_agents as u32;
            let rates = spec.predict_all(&ps, seed)?;
            let data = AggregateData { n_subjects: vec![n; ps.len()], problems: ps, rates };
            run.write(out, &csv_bytes(|b| write_aggregate_csv(b, &data))?)?;
        }
        Command::Fit { model, grid, data, format, scope, out } => {
            let kind: ModelKind = model.parse()?;
            let grid = run.read_grid(grid)?;
            let data = run.read_data(data, format)?;
            let outcome = fit_grid(kind, &grid, &data.labeled(), (*scope).into(), seed)?;
            let mut text = render_params(&outcome.spec);
            let _ = writeln!(text, "# training mse {}", outcome.mse);
            run.write(out, text.as_bytes())?;
        }
        Command::Featurize { data, problems, format, foresight, ablation, out } => {
            let ablation: Ablation = ablation.parse()?;
            let (ps, targets) = match (data, problems) {
                (Some(d), _) => {
                    let d = run.read_data(d, format)?;
                    (d.problems, Some(d.rates))
                }
                (None, Some(p)) => (run.read_problems(p)?, None),
                (None, None) => return Err(Error::validation("featurize needs --data or --problems")),
            };
            let f = if ablation.has_foresight() {
                let spec = run.foresight_spec(foresight)?;
                Some(features::foresight_column(&ps, &spec, seed)?)
            } else {
                None
            };
            let m = features::assemble(&ps, targets.as_deref(), f.as_deref(), ablation)?;
            run.write(out, &csv_bytes(|b| features::write_matrix_csv(b, &m))?)?;
        }
        Command::Train { matrix, algorithm, learners, out } => {
            let m = features::read_matrix_csv(run.read(matrix)?.as_slice())?;
            let l = learners.learners();
            let model = match algorithm.parse::<Algorithm>()? {
                Algorithm::Forest => learn::fit_forest_runs(&m, &ForestConfig { seed, ..l.forest }, l.forest_runs)?,
                Algorithm::Boosted => learn::fit_boosted(&m, &BoostConfig { seed, ..l.boost })?,
            };
            run.write(out, &csv_bytes(|b| learn::write_model(b, &model))?)?;
        }
        Command::Predict { model, matrix, out } => {
            let model = learn::read_model(BufReader::new(run.read(model)?.as_slice()))?;
            let m = features::read_matrix_csv(run.read(matrix)?.as_slice())?;
            let preds = learn::predict(&model, &m)?;
            let per_problem = m.per_problem(&preds);
            run.write(out, &csv_bytes(|b| write_predictions_csv(b, &per_problem))?)?;
        }
        Command::Evaluate { predictions, observed, format, baseline, n_boot, level, scope, eno_anchors, out, plot } => {
            let curve = parse_curve(eno_anchors)?;
            let preds = read_predictions_csv(run.read(predictions)?.as_slice())?;
            let data = run.read_data(observed, format)?;
            let obs: Vec<(String, BlockRates)> = data.problems.iter().map(|p| p.id.clone()).zip(data.rates.iter().copied()).collect();
            let report = eval::score_scoped(&preds, &obs, (*scope).into())?;
            let mut bars = vec![(file_label(predictions), report.mse)];
            run.write(out, &csv_bytes(|b| eval::write_score_csv(b, &report, &curve))?)?;
            if let Some(base) = baseline {
                let other = read_predictions_csv(run.read(base)?.as_slice())?;
                let other_report = eval::score_scoped(&other, &obs, (*scope).into())?;
                let (lo, hi) = eval::bootstrap_diff_ci(&report.errors(), &other_report.errors(), *n_boot, *level, seed)?;
                let rows = vec![
                    BootstrapSummary { model: file_label(predictions), mse: report.mse, ci_low: 0.0, ci_high: 0.0 },
                    BootstrapSummary { model: file_label(base), mse: other_report.mse, ci_low: lo, ci_high: hi },
                ];
                bars.push((file_label(base), other_report.mse));
                let path = sibling(out, "bootstrap.csv");
                run.write(&path, &csv_bytes(|b| eval::write_bootstrap_csv(b, &rows))?)?;
            }
            if let Some(p) = plot {
                run.write(p, bar_chart_svg("MSE", &bars).as_bytes())?;
            }
        }
        Command::Ablate {
            train,
            test,
            format,
            foresight,
            fit_grid,
            algorithms,
            seeds,
            learners,
            eno_anchors,
            out,
            plot,
        } => {
            let curve = parse_curve(eno_anchors)?;
            let train = run.read_data(train, format)?.labeled();
            let test = run.read_data(test, format)?.labeled();
            let spec = run.foresight_spec(foresight)?;
            let grid = fit_grid.as_ref().map(|g| run.read_grid(g)).transpose()?;
            let plan = ForesightPlan { spec, grid, scope: BlockScope::All, seed };
            let algos = algorithms.iter().map(|a| a.parse()).collect::<Result<Vec<Algorithm>>>()?;
            let table = eval::run_ablation(&train, &test, &plan, &algos, &learners.learners(), seeds, &curve)?;
            run.write(out, &csv_bytes(|b| eval::write_ablation_csv(b, &table))?)?;
            run.write(&sibling(out, "foresight.params"), render_params(&table.foresight).as_bytes())?;
            if let Some(p) = plot {
                let bars: Vec<(String, f64)> = table
                    .cells
                    .iter()
                    .map(|c| (format!("{} / {}", c.algorithm.name(), c.condition.name()), c.mse))
                    .collect();
                run.write(p, bar_chart_svg("Test MSE by feature set", &bars).as_bytes())?;
            }
        }
        Command::Compare {
            train,
            test,
            format,
            model_params,
            fit_grids,
            n_agents,
            algorithm,
            seeds,
            scope,
            learners,
            eno_anchors,
            out,
            plot,
        } => {
            let curve = parse_curve(eno_anchors)?;
            let train = run.read_data(train, format)?.labeled();
            let test = run.read_data(test, format)?.labeled();
            let mut specs: Vec<ModelSpec> = ModelKind::ALL.iter().map(|k| k.default_spec()).collect();
            for p in model_params {
                let spec = run.read_spec(p)?;
                let slot = ModelKind::ALL.iter().position(|k| *k == spec.kind()).expect("every kind listed");
                specs[slot] = spec;
            }
            if let Some(n) = n_agents {
                specs[0].set("n_agents", *n as f64)?;
            }
            let mut grids: HashMap<ModelKind, FitGrid> = HashMap::new();
            for entry in fit_grids {
                let (kind, path) = entry
                    .split_once('=')
                    .ok_or_else(|| Error::validation(format!("--fit-grid `{entry}` is not kind=path")))?;
                grids.insert(kind.parse()?, run.read_grid(Path::new(path))?);
            }
            let plans: Vec<ForesightPlan> = specs
                .into_iter()
                .map(|spec| ForesightPlan { grid: grids.get(&spec.kind()).cloned(), spec, scope: (*scope).into(), seed })
                .collect();
            let rows = eval::run_comparison(
                &train,
                &test,
                &plans,
                algorithm.parse()?,
                &learners.learners(),
                seeds,
                (*scope).into(),
                &curve,
            )?;
            run.write(out, &csv_bytes(|b| eval::write_comparison_csv(b, &rows))?)?;
            if let Some(p) = plot {
                let bars: Vec<(String, f64)> = rows
                    .iter()
                    .flat_map(|r| {
                        [
                            (format!("{} alone", r.kind.label()), r.raw_mse),
                            (format!("{} as foresight", r.kind.label()), r.foresight_mse),
                        ]
                    })
                    .collect();
                run.write(p, bar_chart_svg("Test MSE", &bars).as_bytes())?;
            }
        }
    }
    let manifest_path = cli
        .global
        .manifest
        .clone()
        .unwrap_or_else(|| sibling(cli.command.primary_output(), "manifest"));
    let text = run.manifest.to_kv().render(Some("cpc run manifest"));
    if let Some(dir) = manifest_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(manifest_path, text)?;
    Ok(())
}

fn file_label(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

/// `<path>.<suffix>`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::OptionSpec;

    fn sample() -> AggregateData {
        let (problems, _) = problems::generate_problems(2, 4, &GeneratorConfig::default()).unwrap();
        let rates = (0..4).map(|i| [0.1 * i as f64, 0.25, 0.5, 1.0 / 3.0, 0.0]).collect();
        AggregateData { problems, rates, n_subjects: vec![30; 4] }
    }

    #[test]
    fn aggregate_round_trip_is_byte_identical() {
        let data = sample();
        let mut buf = Vec::new();
        write_aggregate_csv(&mut buf, &data).unwrap();
        let back = read_aggregate_csv(buf.as_slice()).unwrap();
        assert_eq!(back, data);
        assert_eq!(back.n_records(), 20);
        let mut again = Vec::new();
        write_aggregate_csv(&mut again, &back).unwrap();
        assert_eq!(again, buf);
    }

    #[test]
    fn aggregate_errors_name_the_field_and_line() {
        let data = sample();
        let mut buf = Vec::new();
        write_aggregate_csv(&mut buf, &data).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
        let mut fields: Vec<String> = lines[3].split(',').map(str::to_string).collect();
        fields[3] = "1.5".into();
        lines[3] = fields.join(",");
        let err = read_aggregate_csv(lines.join("\n").as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, ref field, .. } if field == "pHA"), "{err}");

        let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
        let mut fields: Vec<String> = lines[1].split(',').map(str::to_string).collect();
        fields[14] = "1".into();
        lines[1] = fields.join(",");
        let err = read_aggregate_csv(lines.join("\n").as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { ref field, .. } if field == "Feedback"), "{err}");

        let truncated: Vec<&str> = text.lines().take(4).collect();
        assert!(read_aggregate_csv(truncated.join("\n").as_bytes()).is_err());
    }

    #[test]
    fn raw_trials_aggregate_by_block() {
        let p = ChoiceProblem::new("p1", OptionSpec::sure(3), OptionSpec::binary(0, 10, 0.5));
        let mut raw = String::from("subj,prob,t,B\n");
        for t in 1..=25 {
            raw.push_str(&format!("s1,p1,{t},1\n"));
        }
        let mapping = ColumnMapping::parse("subject_id=subj\nproblem_id=prob\ntrial=t\nchoice_B=B\n").unwrap();
        let data = read_raw_trials(raw.as_bytes(), &[p.clone()], &mapping).unwrap();
        assert_eq!(data.rates, vec![[1.0; BLOCKS]]);
        assert_eq!(data.n_subjects, vec![1]);

        let mut two = String::from("subject_id,problem_id,trial,choice_B\n");
        for t in 1..=25 {
            two.push_str(&format!("a,p1,{t},1\nb,p1,{t},{}\n", u8::from(t > 10)));
        }
        let data = read_raw_trials(two.as_bytes(), &[p], &ColumnMapping::default()).unwrap();
        assert_eq!(data.rates[0], [0.5, 0.5, 1.0, 1.0, 1.0]);
        assert_eq!(data.n_subjects, vec![2]);
    }

    #[test]
    fn predictions_round_trip() {
        let preds = vec![("x".to_string(), [0.1, 0.2, 0.3, 0.4, 0.5]), ("y".to_string(), [1.0; 5])];
        let mut buf = Vec::new();
        write_predictions_csv(&mut buf, &preds).unwrap();
        assert_eq!(read_predictions_csv(buf.as_slice()).unwrap(), preds);
    }

    #[test]
    fn manifest_round_trip() {
        let m = RunManifest {
            command: "generate".into(),
            config: "Generate { n: 3 }".into(),
            seed: 9,
            inputs: vec![("a.csv".into(), sha256_hex(b"a"))],
            outputs: vec![("b.csv".into(), sha256_hex(b"b")), ("c.csv".into(), sha256_hex(b""))],
        };
        assert_eq!(RunManifest::parse(&m.to_kv().render(None)).unwrap(), m);
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }

    #[test]
    fn usage_errors_exit_with_one() {
        assert_eq!(run_args(vec!["cpc".into(), "bogus".into()]), 1);
        assert_eq!(run_args(vec!["cpc".into(), "generate".into()]), 1);
    }

    #[test]
    fn svg_has_one_bar_per_value() {
        let svg = bar_chart_svg("t", &[("a".into(), 1.0), ("b<".into(), 0.5)]);
        assert_eq!(svg.matches("<rect").count(), 2);
        assert!(svg.contains("b&lt;"));
    }
}
