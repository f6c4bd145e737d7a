//! Experiment orchestration: configs, ladders, fits and reports.

pub mod config;
pub mod experiments;
pub mod fit;
pub mod report;

use std::path::Path;

pub use config::{ExperimentConfig, ExperimentKind};
pub use experiments::{
    assemble_cartoon_constant, build_network, deformation_error_curve, feature_stability_curve,
    run_experiment, source_signal,
};
pub use fit::{fit_decay_exponent, ExponentFit};
pub use report::{Check, Report, Row, CSV_HEADER};

use crate::error::{Error, Result};
use crate::exec::Execution;

/// Process exit code for a failed run: 2 for anything wrong with the
/// configuration or its inputs, 1 for violated hypotheses or assertions.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Inadmissible { .. }
        | Error::Hypothesis(_)
        | Error::DegenerateFit(_)
        | Error::IdenticalSignals => 1,
        _ => 2,
    }
}

/// Runs `cfg` and writes `results.csv` and `plot.svg` into `out`.
pub fn run_to_dir(cfg: &ExperimentConfig, out: &Path, exec: Execution) -> Result<Report> {
    let report = run_experiment(cfg, exec)?;
    report.write(out)?;
    Ok(report)
}
