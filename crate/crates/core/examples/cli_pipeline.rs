// The `cpc` pipeline driven in-process: generate, simulate, featurize,
// train, predict and evaluate, each step leaving a manifest.

use choice_predict::cli::{run_args, RunManifest};

fn cpc(args: &[&str]) {
    let argv = std::iter::once("cpc").chain(args.iter().copied()).map(String::from).collect();
    let code = run_args(argv);
    assert_eq!(code, 0, "cpc {}", args.join(" "));
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).display().to_string();

    cpc(&["generate", "--n", "40", "--seed", "1", "--out", &p("train_problems.csv")]);
    cpc(&["simulate", "--problems", &p("train_problems.csv"), "--n-agents", "300", "--out", &p("train.csv")]);
    cpc(&["featurize", "--data", &p("train.csv"), "--n-agents", "300", "--out", &p("train_matrix.csv")]);
    cpc(&["train", "--matrix", &p("train_matrix.csv"), "--trees", "100", "--forest-runs", "1", "--out", &p("forest.model")]);

    cpc(&["generate", "--n", "20", "--seed", "2", "--out", &p("test_problems.csv")]);
    cpc(&["simulate", "--problems", &p("test_problems.csv"), "--n-agents", "300", "--out", &p("test.csv")]);
    cpc(&["featurize", "--data", &p("test.csv"), "--n-agents", "300", "--out", &p("test_matrix.csv")]);
    cpc(&["predict", "--model", &p("forest.model"), "--matrix", &p("test_matrix.csv"), "--out", &p("pred.csv")]);
    cpc(&["evaluate", "--predictions", &p("pred.csv"), "--observed", &p("test.csv"), "--out", &p("score.csv")]);

    for line in std::fs::read_to_string(p("score.csv")).unwrap().lines().filter(|l| l.starts_with("ALL") || l.starts_with("ENO")) {
        println!("{line}");
    }
    let manifest = RunManifest::parse(&std::fs::read_to_string(p("score.csv.manifest")).unwrap()).unwrap();
    println!("evaluate read {} inputs; outputs verified: {}", manifest.inputs.len(), manifest.verify_outputs().is_ok());
}
