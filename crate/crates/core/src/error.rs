// SPDX-License-Identifier: MIT OR Apache-2.0

use alloc::boxed::Box;
use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid family parameters: {0}")]
    InvalidFamily(String),

    #[error("invalid data shape: {0}")]
    Shape(String),

    #[error("cell (row {row}, column {col}) value {value} outside the {family} domain")]
    Domain {
        row: usize,
        col: usize,
        value: f64,
        family: &'static str,
    },

    #[error("column {col} has no observed cells")]
    EmptyColumn { col: usize },

    #[error("interval {start}:{end} is not within 1:{m}")]
    InvalidInterval { start: usize, end: usize, m: usize },

    #[error("interval {start}:{end} has no observed cells")]
    EmptyInterval { start: usize, end: usize },

    #[error("invalid change-point set: {0}")]
    InvalidChangePoints(String),

    #[error("change-point sets refer to different dimensions ({0} vs {1})")]
    DimensionMismatch(usize, usize),

    #[error("invalid penalty: {0}")]
    InvalidPenalty(String),

    #[error("the roh penalty needs a marker map")]
    MissingMarkerMap,

    #[error("no feasible segmentation: every candidate has infinite penalty")]
    NoFeasibleSegmentation,

    #[error("brute force is capped at m <= {cap}, got m = {m}")]
    TooLarge { m: usize, cap: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("bootstrap replicate {index} failed: {source}")]
    Replicate {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}
