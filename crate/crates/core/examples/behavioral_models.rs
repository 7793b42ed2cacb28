// The descriptive models on a few classic problems.

use choice_predict::models::{AmbiguityPolicy, ModelKind};
use choice_predict::problems::{ChoiceProblem, OptionSpec};

fn main() -> choice_predict::Result<()> {
    let problems = [
        // rare loss versus nothing
        ChoiceProblem::new("rare-loss", OptionSpec::sure(0), OptionSpec::binary(-20, 1, 0.95)),
        // risky gain with a slightly better mean
        ChoiceProblem::new("risky-gain", OptionSpec::sure(3), OptionSpec::binary(0, 4, 0.8)),
        // mixed gamble
        ChoiceProblem::new("mixed", OptionSpec::sure(0), OptionSpec::binary(-10, 10, 0.5)),
        // ambiguous B
        ChoiceProblem::new("ambiguous", OptionSpec::sure(10), OptionSpec::binary(0, 20, 0.5)).with_amb(true),
    ];
    println!("{:<12} {:<24} blocks 1..5", "problem", "model");
    for p in &problems {
        for kind in ModelKind::ALL {
            let mut spec = kind.default_spec();
            if kind == ModelKind::Beast {
                spec.set("n_agents", 2000.0)?;
            }
            let rates = match spec.predict(p, 7) {
                Ok(r) => r,
                // the classical models need stated probabilities
                Err(_) => spec.with_policy(AmbiguityPolicy::Permissive).predict(p, 7)?,
            };
            let r: Vec<String> = rates.iter().map(|v| format!("{v:.3}")).collect();
            println!("{:<12} {:<24} {}", p.id, kind.label(), r.join(" "));
        }
    }
    Ok(())
}
