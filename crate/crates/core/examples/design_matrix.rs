// Insight and foresight features assembled into design matrices.

use choice_predict::features::{assemble, foresight_column, psychological_features, write_matrix_csv, Ablation, PSYCH_NAMES};
use choice_predict::models::ModelSpec;
use choice_predict::problems::{generate_problems, GeneratorConfig};
use choice_predict::beast::BeastParams;

fn main() -> choice_predict::Result<()> {
    let (problems, _) = generate_problems(8, 6, &GeneratorConfig::default())?;
    for (name, v) in PSYCH_NAMES.iter().zip(psychological_features(&problems[0])?) {
        println!("{name:>14} {v:+.4}");
    }

    let beast = ModelSpec::Beast(BeastParams { n_agents: 500, ..BeastParams::default() });
    let foresight = foresight_column(&problems, &beast, 1)?;
    for ablation in Ablation::ALL {
        let f = ablation.has_foresight().then_some(foresight.as_slice());
        let m = assemble(&problems, None, f, ablation)?;
        println!("{:<15} {} rows x {} columns", ablation.name(), m.n_rows(), m.n_cols());
    }

    let m = assemble(&problems[..1], Some(&foresight[..1]), Some(&foresight[..1]), Ablation::Full)?;
    let mut out = Vec::new();
    write_matrix_csv(&mut out, &m)?;
    println!("\n{}", String::from_utf8_lossy(&out).lines().take(2).collect::<Vec<_>>().join("\n"));
    Ok(())
}
