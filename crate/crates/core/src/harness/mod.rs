//! Experiment driver: configuration, seeded ensembles, reports and the CLI.

pub mod cli;
pub mod config;
pub mod experiments;
pub mod report;

pub use config::ExperimentConfig;
pub use experiments::{
    boundedness_experiment, decompose, localized_test_function, norm_report, norm_scan, random_test_function,
    region_sweep, Band,
    BoundednessReport, DecomposeReport, Envelope,
};
