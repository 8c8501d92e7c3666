//! Monte Carlo experiment runner: configs, parallel replicates, summaries
//! and CSV/JSON output.

mod config;
mod run;
mod summary;

pub use config::{Algorithm, ExperimentConfig, InstanceSpec, OutputPaths, Sweep};
pub use run::{
    derive_seed, replicate_seeds, run_experiment, run_on, threads_from_env, RunRecord, RunTable,
    CSV_HEADER, THREADS_ENV,
};
pub use summary::{
    clopper_pearson_upper, emit, nearest_rank, summarize, Report, Summary, SummaryRow,
};
