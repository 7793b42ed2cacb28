// Insights versus foresight on synthetic data: a BEAST variant plays the
// role of people and default BEAST, re-fit on the training problems, is
// the foresight. Takes a minute or so in release mode.

use choice_predict::beast::BeastParams;
use choice_predict::eval::{run_ablation, Algorithm, EnoCurve, ForesightPlan, Learners};
use choice_predict::models::{BlockScope, FitGrid, ModelSpec};
use choice_predict::problems::{generate_problems, GeneratorConfig};

fn main() -> choice_predict::Result<()> {
    let (problems, _) = generate_problems(1, 270, &GeneratorConfig::default())?;
    let people = ModelSpec::Beast(BeastParams { sigma: 3.0, kappa: 3, w_amb: 0.45, n_agents: 1000, ..BeastParams::default() });
    let rates = people.predict_all(&problems, 99)?;
    let mut train: Vec<_> = problems.into_iter().zip(rates).collect();
    let test = train.split_off(210);

    let plan = ForesightPlan {
        spec: ModelSpec::Beast(BeastParams { n_agents: 1000, ..BeastParams::default() }),
        grid: Some(FitGrid::new().axis("sigma", &[1.0, 2.0, 4.0]).axis("kappa", &[1.0, 5.0])),
        scope: BlockScope::All,
        seed: 1,
    };
    let mut learners = Learners::default();
    learners.forest.n_trees = 300;
    learners.forest_runs = 1;
    let table = run_ablation(&train, &test, &plan, &Algorithm::ALL, &learners, &[1], &EnoCurve::competition())?;
    println!("foresight on its own: MSE {:.5}", table.foresight_mse);
    for c in &table.cells {
        println!("{:<8} {:<15} MSE {:.5}", c.algorithm.name(), c.condition.name(), c.mse);
    }
    Ok(())
}
