// MSE, equivalent number of observations and bootstrap intervals.

use choice_predict::eval::{bootstrap_diff_ci, fit_eno_curve, score, EnoCurve};

fn main() -> choice_predict::Result<()> {
    let observed: Vec<(String, [f64; 5])> = (0..40).map(|i| (format!("p{i:02}"), [(i as f64 / 40.0); 5])).collect();
    let good: Vec<_> = observed.iter().map(|(id, r)| (id.clone(), r.map(|v| (v + 0.07).min(1.0)))).collect();
    let poor: Vec<_> = observed.iter().map(|(id, r)| (id.clone(), r.map(|v| (1.0 - v) * 0.5 + 0.25))).collect();

    let curve = EnoCurve::competition();
    let (a, b) = (score(&good, &observed)?, score(&poor, &observed)?);
    for (name, r) in [("good", &a), ("poor", &b)] {
        let eno = r.eno(&curve).map_or("undefined".to_string(), |e| format!("{e:.1}"));
        println!("{name}: MSE {:.5}, ENO {eno}", r.mse);
    }
    let (lo, hi) = bootstrap_diff_ci(&a.errors(), &b.errors(), 2501, 0.95, 3)?;
    println!("95% interval of MSE(poor) - MSE(good): [{lo:.4}, {hi:.4}]");

    let custom = fit_eno_curve(&[(0.0100, 15.24), (0.0198, 7.24), (0.0434, 3.20)])?;
    println!("curve fit on three points: A={:.5}, B={:.4}", custom.a, custom.b);
    Ok(())
}
