//! Dataset ingestion (LIBSVM, CSV, optionally gzipped), normalization, label
//! binarization, equal partitioning across nodes, and synthetic problem generators.

mod formats;
mod prepare;
mod synth;

use std::path::PathBuf;

use thiserror::Error;

pub use formats::{load, parse_csv, parse_libsvm, write_libsvm, Format};
pub use prepare::{prepare, LabelRule, Partition, PrepareOptions};
pub use synth::{synthesize_logistic, synthesize_quadratic, LogisticSynth, SynthKind};

use crate::objective::ObjectiveError;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: feature index {index} exceeds declared dimension {p}")]
    IndexOutOfRange { line: usize, index: usize, p: usize },
    #[error("no samples")]
    Empty,
    #[error("{kept} usable samples cannot be split over {n} nodes")]
    TooFewSamples { kept: usize, n: usize },
    #[error("cannot infer format of `{0}`")]
    UnknownFormat(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Parsed samples before any normalization or label mapping.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset<T> {
    /// Dense feature vectors, all of length `p`.
    pub samples: Vec<Vec<T>>,
    /// Labels as read.
    pub labels: Vec<T>,
    pub p: usize,
    pub source: Option<PathBuf>,
    pub format: Format,
}

impl<T> RawDataset<T> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}
