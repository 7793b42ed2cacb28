// Each descriptive model scored on its own and as the foresight of a
// forest, on synthetic risky-choice data.

use choice_predict::beast::BeastParams;
use choice_predict::eval::{run_comparison, Algorithm, EnoCurve, ForesightPlan, Learners};
use choice_predict::models::{BlockScope, ModelKind, ModelSpec};
use choice_predict::problems::{generate_problems, GeneratorConfig};

fn main() -> choice_predict::Result<()> {
    let (problems, _) = generate_problems(2, 200, &GeneratorConfig::default())?;
    let people = ModelSpec::Beast(BeastParams { sigma: 3.0, kappa: 3, n_agents: 1000, ..BeastParams::default() });
    let rates = people.predict_all(&problems, 5)?;
    let mut train: Vec<_> = problems.into_iter().zip(rates).collect();
    let test = train.split_off(150);

    let plans: Vec<_> = ModelKind::ALL
        .iter()
        .map(|k| {
            let mut spec = k.default_spec();
            if *k == ModelKind::Beast {
                spec.set("n_agents", 1000.0).unwrap();
            }
            ForesightPlan::fixed(spec, 1)
        })
        .collect();
    let mut learners = Learners::default();
    learners.forest.n_trees = 200;
    learners.forest_runs = 1;
    let rows = run_comparison(&train, &test, &plans, Algorithm::Forest, &learners, &[1], BlockScope::All, &EnoCurve::competition())?;
    println!("{:<22} {:>10} {:>14}", "model", "on its own", "as foresight");
    for r in rows {
        println!("{:<22} {:>10.5} {:>14.5}", r.kind.label(), r.raw_mse, r.foresight_mse);
    }
    Ok(())
}
