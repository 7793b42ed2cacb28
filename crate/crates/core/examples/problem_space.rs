// Lottery expansion, correlated payoffs and the random problem generator.

use choice_predict::problems::{
    expand_lottery, generate_problems, option_distribution, sample_joint, ChoiceProblem, Correlation, GeneratorConfig,
    LotShape, OptionSpec,
};

fn main() -> choice_predict::Result<()> {
    for (n, shape) in [(1, LotShape::None), (5, LotShape::Symm), (4, LotShape::RSkew), (4, LotShape::LSkew)] {
        let d = expand_lottery(10.0, n, shape)?;
        let pairs: Vec<String> = d.support().iter().map(|o| format!("{}:{}", o.payoff, o.prob)).collect();
        println!("{shape:>6} x{n}: mean {:>5} {{{}}}", d.mean(), pairs.join(", "));
    }

    // 9 with probability .5, otherwise a symmetric 3-outcome lottery around 10
    let b = OptionSpec { low: 9, high: 10, p_high: 0.5, lot_num: 3, lot_shape: LotShape::Symm };
    let d = option_distribution(&b)?;
    println!("\noption B: {:?}, mean {}", d.support(), d.mean());

    let p = ChoiceProblem::new("demo", OptionSpec::binary(1, 3, 0.5), OptionSpec::binary(2, 4, 0.5))
        .with_corr(Correlation::Negative);
    for u in [0.1, 0.9] {
        let s = sample_joint(&p, u)?;
        println!("negatively coupled draw at u={u}: A={} B={}", s.payoff_a, s.payoff_b);
    }

    let (problems, log) = generate_problems(42, 1000, &GeneratorConfig::default())?;
    let amb = problems.iter().filter(|p| p.amb).count();
    println!(
        "\n1000 problems after {} attempts; {} ambiguous; rejections a-d {:?}",
        log.attempts, amb, log.rejections
    );
    println!("first: {:?}", problems[0]);
    Ok(())
}
