//! Instance generation and reproducible experiment runs.

mod generate;
mod run;

pub use generate::{generate, GeneratorSpec};
pub use run::{
    admissible_eps, evaluate, load_config, run_experiment, Aggregate, ExperimentConfig, InstanceRecord, Quantiles, RunRecord, Task,
    Verdict, INSTANCE_SCHEMA, RUN_SCHEMA,
};
