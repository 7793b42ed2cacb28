//! Design-matrix assembly: objective problem dimensions, naive statistics,
//! psychological insight features and a pluggable foresight column.
//!
//! Every problem yields five rows, one per block. Rows are ordered by problem
//! id, then block.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::str::FromStr;

use crate::beast::{self, BeastParams};
use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::problems::{dist_stats, ChoiceProblem, Coupling, LotShape, OptionSpec, OutcomeDistribution};
use crate::{BlockRates, BLOCKS};

/// Version tag of the column layout. Bumped whenever a feature definition
/// changes.
pub const FEATURE_VERSION: &str = "pf1";

pub const NAIVE_NAMES: [&str; 4] = ["dEV", "dSD", "dMin", "dMax"];

pub const PSYCH_NAMES: [&str; 12] = [
    "pBetter",
    "dominance",
    "dUnifEV",
    "dSignEV",
    "dPLoss",
    "dPWin",
    "pessimismGap",
    "subjDominance",
    "complex",
    "ambUnifGap",
    "ambPessGap",
    "dProbMode",
];

pub const FORESIGHT_NAME: &str = "foresight";

/// Objective columns before one-hot expansion: the 12 static dimensions,
/// block and feedback.
pub const OBJECTIVE_NAMES: [&str; 14] = [
    "LA", "HA", "pHA", "LotNumA", "LotShapeA", "LB", "HB", "pHB", "LotNumB", "LotShapeB", "Amb", "Corr", "Block",
    "Feedback",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ablation {
    Full,
    InsightsOnly,
    ForesightOnly,
    ObjectiveOnly,
}

impl Ablation {
    pub const ALL: [Ablation; 4] = [
        Ablation::Full,
        Ablation::InsightsOnly,
        Ablation::ForesightOnly,
        Ablation::ObjectiveOnly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Ablation::Full => "full",
            Ablation::InsightsOnly => "insights_only",
            Ablation::ForesightOnly => "foresight_only",
            Ablation::ObjectiveOnly => "objective_only",
        }
    }

    pub fn has_insights(self) -> bool {
        matches!(self, Ablation::Full | Ablation::InsightsOnly)
    }

    pub fn has_foresight(self) -> bool {
        matches!(self, Ablation::Full | Ablation::ForesightOnly)
    }

    /// Number of features before one-hot expansion.
    pub fn logical_width(self) -> usize {
        14 + if self.has_insights() { 16 } else { 0 } + usize::from(self.has_foresight())
    }
}

impl FromStr for Ablation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ablation::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::validation(format!("unknown ablation `{s}`")))
    }
}

/// Distributions used by the feature formulas: B is replaced by the
/// ambiguity prior when ambiguous.
fn feature_distributions(problem: &ChoiceProblem, w_amb: f64) -> Result<(OutcomeDistribution, OutcomeDistribution)> {
    beast::described_distributions(problem, w_amb)
}

fn default_w_amb() -> f64 {
    BeastParams::default().w_amb
}

/// B-minus-A differences in mean, standard deviation, minimum and maximum.
pub fn naive_features(problem: &ChoiceProblem) -> Result<[f64; 4]> {
    let (a, b) = feature_distributions(problem, default_w_amb())?;
    let (sa, sb) = (dist_stats(&a), dist_stats(&b));
    Ok([sb.mean - sa.mean, sb.sd - sa.sd, sb.min - sa.min, sb.max - sa.max])
}

fn sign_value(d: &OutcomeDistribution, r: f64) -> f64 {
    d.expect(|x| if x > 0.0 { r } else if x < 0.0 { -r } else { 0.0 })
}

/// The twelve insight features, in [`PSYCH_NAMES`] order.
pub fn psychological_features(problem: &ChoiceProblem) -> Result<[f64; 12]> {
    let w_amb = default_w_amb();
    let (a, b) = feature_distributions(problem, w_amb)?;
    let coupling = Coupling::new(a.clone(), b.clone(), problem.corr)?;
    let (mut b_better, mut a_better) = (0.0, 0.0);
    for (xa, xb, p) in coupling.joint() {
        if xb > xa {
            b_better += p;
        } else if xa > xb {
            a_better += p;
        }
    }
    let dominance = if b.dominates(&a) {
        1.0
    } else if a.dominates(&b) {
        -1.0
    } else {
        0.0
    };
    let r = a.payoffs().chain(b.payoffs()).fold(0.0_f64, |m, x| m.max(x.abs()));
    let lo = a.min().min(b.min());
    let range = a.max().max(b.max()) - lo;
    let pessimism_gap = if range > 0.0 { (b.min() - a.min()) / range } else { 0.0 };
    let (amb_unif, amb_pess) = if problem.amb {
        (b.uniform_mean() - a.mean(), b.min() - a.mean())
    } else {
        (0.0, 0.0)
    };
    Ok([
        b_better - a_better,
        dominance,
        b.uniform_mean() - a.uniform_mean(),
        sign_value(&b, r) - sign_value(&a, r),
        b.prob_where(|x| x < 0.0) - a.prob_where(|x| x < 0.0),
        b.prob_where(|x| x > 0.0) - a.prob_where(|x| x > 0.0),
        pessimism_gap,
        beast::subjective_dominance(problem, w_amb)?.signed(),
        if beast::is_complex(problem)? { 1.0 } else { 0.0 },
        amb_unif,
        amb_pess,
        b.modal().prob - a.modal().prob,
    ])
}

/// Per-block model predictions for every problem, in input order.
pub fn foresight_column(problems: &[ChoiceProblem], spec: &ModelSpec, seed: u64) -> Result<Vec<BlockRates>> {
    spec.predict_all(problems, seed)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSchema {
    /// `<FEATURE_VERSION>/<ablation>`.
    pub version: String,
    pub columns: Vec<String>,
}

impl FeatureSchema {
    pub fn for_ablation(ablation: Ablation) -> Self {
        let mut columns = Vec::new();
        for name in OBJECTIVE_NAMES {
            if name.starts_with("LotShape") {
                for shape in LotShape::ALL {
                    columns.push(format!("{name}={}", shape.literal()));
                }
            } else {
                columns.push(name.to_string());
            }
        }
        if ablation.has_insights() {
            columns.extend(NAIVE_NAMES.iter().chain(&PSYCH_NAMES).map(|s| s.to_string()));
        }
        if ablation.has_foresight() {
            columns.push(FORESIGHT_NAME.to_string());
        }
        FeatureSchema {
            version: format!("{FEATURE_VERSION}/{}", ablation.name()),
            columns,
        }
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub schema: FeatureSchema,
    pub ids: Vec<String>,
    /// Block number 1..=5 for each row.
    pub blocks: Vec<u8>,
    pub rows: Vec<Vec<f64>>,
    pub targets: Option<Vec<f64>>,
}

impl DesignMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.schema.width()
    }

    /// Stable key for a row, used to seed per-row randomness.
    pub fn row_key(&self, i: usize) -> String {
        format!("{}#{}", self.ids[i], self.blocks[i])
    }

    pub fn require_targets(&self) -> Result<&[f64]> {
        self.targets
            .as_deref()
            .ok_or_else(|| Error::contract("design matrix has no targets"))
    }

    /// Regroup a per-row vector into per-problem block rates, in row order.
    pub fn per_problem(&self, values: &[f64]) -> Vec<(String, BlockRates)> {
        let mut out: Vec<(String, BlockRates)> = Vec::new();
        for (i, v) in values.iter().enumerate() {
            if out.last().is_none_or(|(id, _)| *id != self.ids[i]) {
                out.push((self.ids[i].clone(), [0.0; BLOCKS]));
            }
            out.last_mut().unwrap().1[usize::from(self.blocks[i]) - 1] = *v;
        }
        out
    }
}

fn one_hot(shape: LotShape, out: &mut Vec<f64>) {
    for s in LotShape::ALL {
        out.push(if s == shape { 1.0 } else { 0.0 });
    }
}

fn option_columns(o: &OptionSpec, out: &mut Vec<f64>) {
    out.push(o.low as f64);
    out.push(o.high as f64);
    out.push(o.p_high);
    out.push(f64::from(o.lot_num));
    one_hot(o.lot_shape, out);
}

/// Build the design matrix. `targets` and `foresight` are aligned with
/// `problems`; foresight is required when the ablation keeps it.
pub fn assemble(
    problems: &[ChoiceProblem],
    targets: Option<&[BlockRates]>,
    foresight: Option<&[BlockRates]>,
    ablation: Ablation,
) -> Result<DesignMatrix> {
    let mut seen = HashSet::new();
    for p in problems {
        if !seen.insert(p.id.as_str()) {
            return Err(Error::validation(format!("duplicate problem id `{}`", p.id)));
        }
    }
    if let Some(t) = targets {
        if t.len() != problems.len() {
            return Err(Error::validation(format!(
                "{} target rows for {} problems",
                t.len(),
                problems.len()
            )));
        }
    }
    let foresight = match (ablation.has_foresight(), foresight) {
        (true, Some(f)) if f.len() == problems.len() => Some(f),
        (true, Some(f)) => {
            return Err(Error::validation(format!(
                "{} foresight rows for {} problems",
                f.len(),
                problems.len()
            )))
        }
        (true, None) => return Err(Error::contract(format!("ablation `{}` needs a foresight column", ablation.name()))),
        (false, _) => None,
    };

    let mut order: Vec<usize> = (0..problems.len()).collect();
    order.sort_by(|&i, &j| problems[i].id.cmp(&problems[j].id));

    let schema = FeatureSchema::for_ablation(ablation);
    let mut m = DesignMatrix {
        schema,
        ids: Vec::with_capacity(problems.len() * BLOCKS),
        blocks: Vec::with_capacity(problems.len() * BLOCKS),
        rows: Vec::with_capacity(problems.len() * BLOCKS),
        targets: targets.map(|_| Vec::with_capacity(problems.len() * BLOCKS)),
    };
    for i in order {
        let p = &problems[i];
        let insights = if ablation.has_insights() {
            let mut v = naive_features(p).map_err(|e| e.in_problem(&p.id))?.to_vec();
            v.extend(psychological_features(p).map_err(|e| e.in_problem(&p.id))?);
            v
        } else {
            Vec::new()
        };
        let mut stat = Vec::with_capacity(16);
        option_columns(&p.a, &mut stat);
        option_columns(&p.b, &mut stat);
        stat.push(if p.amb { 1.0 } else { 0.0 });
        stat.push(f64::from(p.corr.value()));
        for block in 0..BLOCKS {
            let mut row = stat.clone();
            row.push((block + 1) as f64);
            row.push(if block == 0 { 0.0 } else { 1.0 });
            row.extend_from_slice(&insights);
            if let Some(f) = foresight {
                row.push(f[i][block]);
            }
            debug_assert_eq!(row.len(), m.schema.width());
            m.ids.push(p.id.clone());
            m.blocks.push((block + 1) as u8);
            m.rows.push(row);
            if let (Some(out), Some(t)) = (m.targets.as_mut(), targets) {
                out.push(t[i][block]);
            }
        }
    }
    Ok(m)
}

pub const TARGET_COLUMN: &str = "target";

/// CSV layout: `schema_version,id,block,<features...>[,target]`.
pub fn write_matrix_csv<W: Write>(w: W, m: &DesignMatrix) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["schema_version".to_string(), "id".to_string(), "block".to_string()];
    header.extend(m.schema.columns.iter().cloned());
    if m.targets.is_some() {
        header.push(TARGET_COLUMN.to_string());
    }
    out.write_record(&header)?;
    for (i, row) in m.rows.iter().enumerate() {
        let mut rec = vec![m.schema.version.clone(), m.ids[i].clone(), m.blocks[i].to_string()];
        rec.extend(row.iter().map(|v| v.to_string()));
        if let Some(t) = &m.targets {
            rec.push(t[i].to_string());
        }
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_matrix_csv<R: Read>(r: R) -> Result<DesignMatrix> {
    let mut rdr = csv::Reader::from_reader(r);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.len() < 3 || header[0] != "schema_version" || header[1] != "id" || header[2] != "block" {
        return Err(Error::parse(1, "header", "expected schema_version,id,block,..."));
    }
    let has_target = header.last().map(String::as_str) == Some(TARGET_COLUMN);
    let end = header.len() - usize::from(has_target);
    let columns = header[3..end].to_vec();
    let mut m = DesignMatrix {
        schema: FeatureSchema { version: String::new(), columns },
        ids: Vec::new(),
        blocks: Vec::new(),
        rows: Vec::new(),
        targets: has_target.then(Vec::new),
    };
    for (n, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = n + 2;
        if rec.len() != header.len() {
            return Err(Error::parse(line, "row", format!("{} fields, header has {}", rec.len(), header.len())));
        }
        if m.schema.version.is_empty() {
            m.schema.version = rec[0].to_string();
        } else if m.schema.version != rec[0] {
            return Err(Error::parse(line, "schema_version", "differs from earlier rows"));
        }
        let num = |k: usize| -> Result<f64> {
            rec[k]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(line, header[k].clone(), format!("`{}` is not a finite number", &rec[k])))
        };
        let block: u8 = rec[2]
            .parse()
            .ok()
            .filter(|b| (1..=BLOCKS as u8).contains(b))
            .ok_or_else(|| Error::parse(line, "block", "expected 1..5"))?;
        m.ids.push(rec[1].to_string());
        m.blocks.push(block);
        m.rows.push((3..end).map(num).collect::<Result<_>>()?);
        if let Some(t) = m.targets.as_mut() {
            t.push(num(end)?);
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelKind;
    use crate::problems::{generate_problems, Correlation, GeneratorConfig};
    use proptest::prelude::*;

    fn close(a: &[f64], b: &[f64]) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-12, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn naive_examples() {
        let same = ChoiceProblem::new("s", OptionSpec::binary(0, 20, 0.5), OptionSpec::binary(0, 20, 0.5));
        close(&naive_features(&same).unwrap(), &[0.0; 4]);
        let p = ChoiceProblem::new("p", OptionSpec::sure(10), OptionSpec::binary(0, 20, 0.5));
        close(&naive_features(&p).unwrap(), &[0.0, 10.0, -10.0, 10.0]);
        let q = ChoiceProblem::new("q", OptionSpec::binary(-1, 9, 0.1), OptionSpec::sure(0));
        close(&naive_features(&q).unwrap(), &[0.0, -3.0, 1.0, -9.0]);
    }

    #[test]
    fn psychological_examples() {
        let same = ChoiceProblem::new("s", OptionSpec::binary(0, 20, 0.5), OptionSpec::binary(0, 20, 0.5))
            .with_corr(Correlation::Positive);
        close(&psychological_features(&same).unwrap(), &[0.0; 12]);

        let p = ChoiceProblem::new("p", OptionSpec::sure(10), OptionSpec::binary(0, 20, 0.5));
        let f = psychological_features(&p).unwrap();
        assert_eq!((f[0], f[1], f[4], f[11]), (0.0, 0.0, 0.0, -0.5));

        let q = ChoiceProblem::new("q", OptionSpec::binary(0, 4000, 0.8), OptionSpec::sure(3000));
        assert!((psychological_features(&q).unwrap()[0] + 0.6).abs() < 1e-12);
    }

    #[test]
    fn ambiguity_features_only_fire_when_ambiguous() {
        let p = ChoiceProblem::new("p", OptionSpec::sure(3), OptionSpec::binary(0, 10, 0.5));
        let f = psychological_features(&p).unwrap();
        assert_eq!((f[9], f[10]), (0.0, 0.0));
        let f = psychological_features(&p.clone().with_amb(true)).unwrap();
        assert_eq!((f[9], f[10]), (2.0, -3.0));
    }

    #[test]
    fn column_counts() {
        let widths: Vec<usize> = Ablation::ALL.iter().map(|a| FeatureSchema::for_ablation(*a).width()).collect();
        assert_eq!(widths, vec![37, 36, 21, 20]);
        let logical: Vec<usize> = Ablation::ALL.iter().map(|a| a.logical_width()).collect();
        assert_eq!(logical, vec![31, 30, 15, 14]);
    }

    #[test]
    fn sixty_problems_make_three_hundred_rows() {
        let (ps, _) = generate_problems(3, 60, &GeneratorConfig::default()).unwrap();
        let spec = ModelKind::Beast.default_spec();
        let mut spec = spec;
        spec.set("n_agents", 50.0).unwrap();
        let f = foresight_column(&ps, &spec, 1).unwrap();
        let m = assemble(&ps, None, Some(&f), Ablation::Full).unwrap();
        assert_eq!(m.n_rows(), 300);
        assert!(m.rows.iter().all(|r| r.len() == 37 && r.iter().all(|v| v.is_finite())));
        assert_eq!(assemble(&ps, None, Some(&f), Ablation::Full).unwrap(), m);
        for (i, row) in m.rows.iter().enumerate() {
            let feedback = row[m.schema.columns.iter().position(|c| c == "Feedback").unwrap()];
            assert_eq!(feedback == 0.0, m.blocks[i] == 1);
        }
        let mut buf = Vec::new();
        write_matrix_csv(&mut buf, &m).unwrap();
        assert_eq!(read_matrix_csv(buf.as_slice()).unwrap(), m);
    }

    #[test]
    fn static_foresight_repeats_per_problem() {
        let (ps, _) = generate_problems(5, 30, &GeneratorConfig::default()).unwrap();
        let risk: Vec<_> = ps.into_iter().filter(|p| !p.amb).collect();
        let f = foresight_column(&risk, &ModelKind::CptDeterministic.default_spec(), 0).unwrap();
        assert!(f.iter().all(|r| r.iter().all(|&x| x == r[0])));
    }

    #[test]
    fn assemble_rejects_bad_inputs() {
        let p = ChoiceProblem::new("x", OptionSpec::sure(1), OptionSpec::binary(0, 4, 0.5));
        assert!(assemble(&[p.clone(), p.clone()], None, None, Ablation::ObjectiveOnly).is_err());
        assert!(assemble(&[p.clone()], Some(&[]), None, Ablation::ObjectiveOnly).is_err());
        assert!(assemble(&[p], None, None, Ablation::Full).is_err());
    }

    fn arb_problem() -> impl Strategy<Value = ChoiceProblem> {
        any::<u64>().prop_map(|seed| {
            let (mut ps, _) = generate_problems(seed, 1, &GeneratorConfig::default()).unwrap();
            ps.pop().unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn swapping_options_negates_oriented_features(p in arb_problem()) {
            prop_assume!(!p.amb);
            let (n, f) = (naive_features(&p).unwrap(), psychological_features(&p).unwrap());
            let s = p.swapped();
            let (ns, fs) = (naive_features(&s).unwrap(), psychological_features(&s).unwrap());
            for k in 0..4 {
                prop_assert!((n[k] + ns[k]).abs() < 1e-9);
            }
            // pessimismGap negates too, the range being symmetric.
            for k in [0, 1, 2, 3, 4, 5, 6, 7, 11] {
                prop_assert!((f[k] + fs[k]).abs() < 1e-9, "feature {} {} {}", PSYCH_NAMES[k], f[k], fs[k]);
            }
            prop_assert_eq!(f[8], fs[8]);
        }

        #[test]
        fn dominance_is_coherent_with_pbetter(p in arb_problem()) {
            let f = psychological_features(&p).unwrap();
            if f[1] == 1.0 { prop_assert!(f[0] >= -1e-12); }
            if f[1] == -1.0 { prop_assert!(f[0] <= 1e-12); }
            prop_assert!(f.iter().all(|v| v.is_finite()));
        }
    }
}
