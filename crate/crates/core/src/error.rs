use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: row {row}, column {column}: cannot parse {value:?} as a number")]
    Parse {
        path: PathBuf,
        row: usize,
        column: usize,
        value: String,
    },

    #[error("{path}: row {row} has {found} columns, expected {expected}")]
    RaggedRow {
        path: PathBuf,
        row: usize,
        found: usize,
        expected: usize,
    },

    #[error("dataset has a single class; at least two are required")]
    SingleClass,

    #[error("empty dataset")]
    Empty,

    #[error("class {class} has {count} samples, need at least {needed}")]
    ClassTooSmall { class: String, count: usize, needed: usize },

    #[error("invalid split: {0}")]
    InvalidSplit(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("k = {k} exceeds the {available} available reference samples")]
    NeighborhoodTooLarge { k: usize, available: usize },

    #[error("feature mask selects no meta-features")]
    EmptyMask,

    #[error("bootstrap failed to cover all {classes} classes after {attempts} attempts")]
    DegenerateBootstrap { classes: usize, attempts: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("incompatible model version {found} (this build reads version {expected})")]
    ModelVersion { found: u32, expected: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
