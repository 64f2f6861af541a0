//! Experiment harness for the UMLS solvers: seeded figure presets emitting
//! CSV datasets and key-value manifests, plus the thread-capped parallel
//! map the sweeps run on.

pub mod experiments;
pub mod parallel;

pub use experiments::{
    run_experiment, run_fig1, run_fig2, run_fig3, run_fig4, run_fig5, standard_setup, CsvTable,
    ExperimentConfig, ExperimentResult, Figure, Manifest, StandardSetup, DEFAULT_FIG5_ETA,
    DEFAULT_SEED,
};
pub use parallel::parallel_map;
