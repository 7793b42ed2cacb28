// Grid search of CPT parameters on rates it generated itself, and the
// parameter-file format.

use choice_predict::models::params::{parse_params, render_params};
use choice_predict::models::{fit_grid, BlockScope, CptParams, FitGrid, ModelKind, ModelSpec};
use choice_predict::problems::{generate_problems, GeneratorConfig};

fn main() -> choice_predict::Result<()> {
    let (problems, _) = generate_problems(5, 120, &GeneratorConfig::default())?;
    let problems: Vec<_> = problems.into_iter().filter(|p| !p.amb).collect();
    let truth = ModelSpec::Cpt {
        params: CptParams { alpha: 0.8, lambda: 1.5, ..CptParams::STOCHASTIC },
        policy: Default::default(),
    };
    let rates = truth.predict_all(&problems, 0)?;
    let train: Vec<_> = problems.into_iter().zip(rates).collect();

    let grid = FitGrid::parse("alpha=0.7,0.8,0.9\nlambda=1,1.5,2\ngamma=0.84\n")?;
    let outcome = fit_grid(ModelKind::CptStochastic, &grid, &train, BlockScope::All, 0)?;
    println!("searched {} points, best training MSE {:.2e}", grid.len(), outcome.mse);
    let text = render_params(&outcome.spec);
    print!("{text}");
    assert_eq!(parse_params(&text)?, outcome.spec);
    Ok(())
}
