use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("patch exceeds domain")]
    PatchExceedsDomain,

    #[error("mask cannot cover patch")]
    MaskCannotCoverPatch,

    #[error("k too large for mask/patch geometry")]
    StrideUnderflow,

    #[error("invalid mask set: {0}")]
    MaskSet(String),

    #[error("mask set does not k-cover patch (min multiplicity {min_multiplicity} < k = {k})")]
    InsufficientCoverage { min_multiplicity: u32, k: u32 },

    #[error("image error: {0}")]
    Image(String),

    #[error("classifier error at index {index}: {source}")]
    AtIndex {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("classifier error: {0}")]
    Classifier(String),

    #[error("external classifier protocol error: {message}\n--- transcript ---\n{transcript}")]
    Protocol { message: String, transcript: String },

    #[error("free vote count {free} exceeds brute-force limit {limit}")]
    BruteForceLimit { free: u32, limit: u32 },

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
