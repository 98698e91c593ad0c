//! Reproducible experiments over sample points, with JSON/CSV reports.

mod config;
mod report;
mod run;

pub use config::{
    Expectation, ExperimentConfig, ExperimentKind, FeffermanSpec, OutputFormat, OutputSpec, RadiiSpec, Sampling,
    SeedSpec, Spacing,
};
pub use report::{emit, render, Check, Comparison, DiagnosticsReport, FitSummary, Row, Summary, Verdict};
pub use run::{run, thread_pool, CROSS_CHECK_TOL, EXPONENT_TOL, MONOTONE_SLACK};
