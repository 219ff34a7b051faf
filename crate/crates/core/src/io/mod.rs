//! Scenario documents, line-delimited record export and checkpoint files.

mod checkpoint;
mod export;
mod scenario;

use std::path::Path;

use thiserror::Error;

pub use checkpoint::{decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint, CHECKPOINT_VERSION};
pub use export::{export_records, record_lines, record_values, round_significant, ExportWriter, EXPORT_SIGNIFICANT_DIGITS};
pub use scenario::{
    load_scenario, parse_scenario, Area, CellSpec, ChannelSpec, HarqSpec, LoopSpec, Placement, Scenario, SchedulerSpec,
    TrafficSpec, UePlan,
};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("scenario syntax: {0}")]
    Syntax(String),
    #[error("unknown keys: {}", .0.join(", "))]
    UnknownKeys(Vec<String>),
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("corrupt checkpoint at byte {offset}: {message}")]
    CorruptCheckpoint { offset: usize, message: String },
    #[error("checkpoint version mismatch: file has {found}, this build reads {expected}")]
    VersionMismatch { found: String, expected: String },
}

impl IoError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        IoError::Io { path: path.display().to_string(), source }
    }

    pub(crate) fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        IoError::Invalid { path: path.into(), message: message.into() }
    }

    /// True for failures of the file system rather than of the content.
    pub fn is_io(&self) -> bool {
        matches!(self, IoError::Io { .. })
    }
}
