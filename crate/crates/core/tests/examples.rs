//! The quick examples, run as tests so they keep working. The ablation and
//! comparison examples take minutes and are only compiled.

trait Finished {
    fn finished(self);
}

impl Finished for () {
    fn finished(self) {}
}

impl<E: std::fmt::Debug> Finished for Result<(), E> {
    fn finished(self) {
        self.unwrap();
    }
}

macro_rules! example {
    ($name:ident, $file:literal) => {
        mod $name {
            #![allow(dead_code)]
            use super::Finished;
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));

            #[test]
            fn runs() {
                main().finished();
            }
        }
    };
}

example!(problem_space, "problem_space.rs");
example!(behavioral_models, "behavioral_models.rs");
example!(fit_parameters, "fit_parameters.rs");
example!(design_matrix, "design_matrix.rs");
example!(tree_ensembles, "tree_ensembles.rs");
example!(scoring, "scoring.rs");
example!(cli_pipeline, "cli_pipeline.rs");
