//! Fitted-parameter files: flat `key=value` text with a format version and a
//! model-kind header, one parameter per line.

use crate::beast::BeastParams;
use crate::error::{Error, Result};
use crate::kv::KvFile;

use super::{AmbiguityPolicy, CptParams, DbsContext, DbsParams, ModelKind, ModelSpec};

pub const PARAMS_FORMAT_VERSION: u64 = 1;

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn split(kv: &KvFile, key: &str) -> Result<Vec<f64>> {
    kv.require(key)?
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::validation(format!("key `{key}`: `{s}` is not a number")))
        })
        .collect()
}

pub fn params_to_kv(spec: &ModelSpec) -> KvFile {
    let mut kv = KvFile::new();
    kv.set("format_version", PARAMS_FORMAT_VERSION);
    kv.set("model", spec.kind().name());
    match spec {
        ModelSpec::Beast(p) => {
            kv.set("sigma", p.sigma);
            kv.set("kappa", p.kappa);
            kv.set("tool_unbiased", p.tool_probs[0]);
            kv.set("tool_uniform", p.tool_probs[1]);
            kv.set("tool_sign", p.tool_probs[2]);
            kv.set("tool_pessimism", p.tool_probs[3]);
            kv.set("w_amb", p.w_amb);
            kv.set("t_learn", p.t_learn);
            kv.set("t_learn_amb", p.t_learn_amb);
            kv.set("psi_trivial", p.psi_trivial);
            kv.set("psi_complex", p.psi_complex);
            kv.set("n_agents", p.n_agents);
        }
        ModelSpec::Cpt { params, policy } => {
            kv.set("policy", policy.name());
            kv.set("alpha", params.alpha);
            kv.set("gamma", params.gamma);
            kv.set("delta", params.delta);
            kv.set("lambda", params.lambda);
            if let Some(mu) = params.mu {
                kv.set("mu", mu);
            }
        }
        ModelSpec::PriorityHeuristic { policy } => kv.set("policy", policy.name()),
        ModelSpec::Dbs { params, n_sim, policy } => {
            kv.set("policy", policy.name());
            kv.set("outcome_threshold", params.outcome_threshold);
            kv.set("prob_threshold", params.prob_threshold);
            kv.set("choice_threshold", params.choice_threshold);
            kv.set("n_sim", n_sim);
            if params.context == DbsContext::synthetic() {
                kv.set("context", "synthetic");
            } else {
                kv.set("context", "inline");
                kv.set("context_amounts", join(&params.context.amounts));
                kv.set("context_probabilities", join(&params.context.probabilities));
            }
        }
    }
    kv
}

pub fn params_from_kv(kv: &KvFile) -> Result<ModelSpec> {
    let version = kv.parse_u64("format_version")?;
    if version != PARAMS_FORMAT_VERSION {
        return Err(Error::Schema {
            expected: format!("params v{PARAMS_FORMAT_VERSION}"),
            found: format!("params v{version}"),
        });
    }
    let kind: ModelKind = kv.require("model")?.parse()?;
    let policy = match kv.get("policy") {
        Some(p) => p.parse()?,
        None => AmbiguityPolicy::Strict,
    };
    let mut spec = match kind {
        ModelKind::Beast => ModelSpec::Beast(BeastParams::default()),
        ModelKind::CptDeterministic => ModelSpec::Cpt { params: CptParams::DETERMINISTIC, policy },
        ModelKind::CptStochastic => ModelSpec::Cpt { params: CptParams::STOCHASTIC, policy },
        ModelKind::PriorityHeuristic => ModelSpec::PriorityHeuristic { policy },
        ModelKind::Dbs => {
            let context = match kv.get("context").unwrap_or("synthetic") {
                "synthetic" => DbsContext::synthetic(),
                "inline" => DbsContext {
                    amounts: split(kv, "context_amounts")?,
                    probabilities: split(kv, "context_probabilities")?,
                }
                .checked()?,
                other => return Err(Error::validation(format!("unknown DbS context `{other}`"))),
            };
            ModelSpec::Dbs {
                params: DbsParams { context, ..DbsParams::fitted() },
                n_sim: 2000,
                policy,
            }
        }
    };
    for (key, _) in kv.entries() {
        if matches!(
            key.as_str(),
            "format_version" | "model" | "policy" | "context" | "context_amounts" | "context_probabilities"
        ) {
            continue;
        }
        spec.set(key, kv.parse_f64(key)?)?;
    }
    spec.validate()?;
    Ok(spec)
}

pub fn render_params(spec: &ModelSpec) -> String {
    params_to_kv(spec).render(Some(&format!("{} parameters", spec.kind().label())))
}

pub fn parse_params(text: &str) -> Result<ModelSpec> {
    params_from_kv(&KvFile::parse(text)?)
}
