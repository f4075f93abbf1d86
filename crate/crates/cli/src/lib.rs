//! Harness pieces behind the `mtri` binary: image ingestion, the synthetic
//! labeled corpus, and the threshold-sweep experiment driver.

pub mod corpus;
pub mod experiment;
pub mod io;

pub use corpus::{synth_corpus, synth_corpus_with, AxisMode, CorpusEntry};
pub use experiment::{
    metrics_to_csv, run_experiment, ExperimentConfig, ExperimentMode, ExperimentResult, MetricsRow,
};
pub use io::{cloud_to_csv, load_image, parse_cloud_csv, ImageFormat, ImageSource, YAxis};

/// Process exit code for a failure: 2 for input/validation problems, 3 for
/// numerical failures.
pub fn exit_code_for(error: &anyhow::Error) -> i32 {
    match error.downcast_ref::<moment_triangle::Error>() {
        Some(core_error) if core_error.is_numerical() => 3,
        _ => 2,
    }
}
