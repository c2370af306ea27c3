//! Scenario-driven suite runner and report writers.

mod bundled;
mod report;
mod scenario;
mod suite;

pub use bundled::{bundled_scenario, BUNDLED};
pub use report::{emit_report, render_report, ReportFormat};
pub use scenario::{
    load_scenario, parse_scenario, ConventionChoice, IdentitySelection, NamedState, PointSampling,
    Scenario,
};
pub use suite::{
    run_suite, Environment, SuiteCheck, SuiteReport, SuiteVerdict, RUNNABLE_IDENTITIES,
};

use crate::error::LabError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid scenario at `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("{context}: {source}")]
    Module {
        context: String,
        #[source]
        source: LabError,
    },
}

impl HarnessError {
    pub(crate) fn validation(field: impl Into<String>, message: impl std::fmt::Display) -> Self {
        HarnessError::Validation {
            field: field.into(),
            message: message.to_string(),
        }
    }

    pub(crate) fn module(context: impl Into<String>, source: LabError) -> Self {
        HarnessError::Module {
            context: context.into(),
            source,
        }
    }
}
