// Random forest and gradient boosting on a synthetic regression task,
// with a model-file round trip.

use choice_predict::features::{DesignMatrix, FeatureSchema};
use choice_predict::learn::{fit_boosted_traced, fit_forest, predict, read_model, write_model, BoostConfig, ForestConfig};
use choice_predict::rng::SimRng;
use rand::{Rng, SeedableRng};

fn data(rng: &mut SimRng, n: usize) -> DesignMatrix {
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..4).map(|_| rng.random()).collect()).collect();
    let targets = rows.iter().map(|r| (0.5 * r[0] + 0.4 * r[1] * r[2] + rng.random_range(-0.05..0.05)).clamp(0.0, 1.0)).collect();
    DesignMatrix {
        schema: FeatureSchema { version: "demo".into(), columns: vec!["a".into(), "b".into(), "c".into(), "noise".into()] },
        ids: (0..n).map(|i| format!("r{i:04}")).collect(),
        blocks: vec![1; n],
        rows,
        targets: Some(targets),
    }
}

fn mse(p: &[f64], y: &[f64]) -> f64 {
    p.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / p.len() as f64
}

fn main() -> choice_predict::Result<()> {
    let mut rng = SimRng::seed_from_u64(1);
    let (train, test) = (data(&mut rng, 300), data(&mut rng, 300));
    let y = test.require_targets()?;

    let forest = fit_forest(&train, &ForestConfig { n_trees: 200, seed: 1, ..ForestConfig::default() })?;
    println!("forest  test MSE {:.5}", mse(&predict(&forest, &test)?, y));

    let (boosted, trace) = fit_boosted_traced(&train, &BoostConfig { seed: 1, ..BoostConfig::default() })?;
    println!("boosted test MSE {:.5}; training loss {:.5} -> {:.5}", mse(&predict(&boosted, &test)?, y), trace[0], trace[trace.len() - 1]);

    let mut file = Vec::new();
    write_model(&mut file, &forest)?;
    let back = read_model(file.as_slice())?;
    assert_eq!(back, forest);
    println!("forest file: {} bytes, {} trees", file.len(), back.trees.len());
    Ok(())
}
