use thiserror::Error;

use crate::model::{Axis, SubstrateId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("unknown substrate {0}")]
    UnknownSubstrate(SubstrateId),
    #[error("attribute `{0}` is already partitioned")]
    AlreadyPartitioned(String),
    #[error("attribute `{attribute}` is not on the {axis} axis")]
    NotOnAxis { attribute: String, axis: Axis },
    #[error("selection is empty")]
    EmptySelection,
    #[error("selection key does not resolve: {0}")]
    DanglingKey(String),
    #[error("invalid pile: {0}")]
    InvalidPile(String),
    #[error("invalid bin edges: {0}")]
    InvalidBins(String),
    #[error("invalid sort order: {0}")]
    InvalidSortOrder(String),
    #[error("invalid attribute spec: {0}")]
    InvalidSpec(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dataset has no edges")]
    NoEdges,
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("nothing to undo")]
    NothingToUndo,
    #[error("nothing to redo")]
    NothingToRedo,
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::UnknownAttribute(_) => "unknown_attribute",
            Error::UnknownSubstrate(_) => "unknown_substrate",
            Error::AlreadyPartitioned(_) => "already_partitioned",
            Error::NotOnAxis { .. } => "not_on_axis",
            Error::EmptySelection => "empty_selection",
            Error::DanglingKey(_) => "dangling_key",
            Error::InvalidPile(_) => "invalid_pile",
            Error::InvalidBins(_) => "invalid_bins",
            Error::InvalidSortOrder(_) => "invalid_sort_order",
            Error::InvalidSpec(_) => "invalid_spec",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::NoEdges => "no_edges",
            Error::InvalidDataset(_) => "invalid_dataset",
            Error::NothingToUndo => "nothing_to_undo",
            Error::NothingToRedo => "nothing_to_redo",
            Error::Ingest(e) => e.code(),
            Error::Io(_) => "io",
            Error::Json(_) => "invalid_json",
        }
    }

    /// True when the request was well-formed but the current state forbids it.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::AlreadyPartitioned(_)
                | Error::NotOnAxis { .. }
                | Error::NothingToUndo
                | Error::NothingToRedo
                | Error::NoEdges
        )
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{file}: parse error at line {line}, field {field}: {message}")]
    Parse {
        file: String,
        line: u64,
        field: usize,
        message: String,
    },
    #[error("{file}: missing column `{column}`")]
    MissingColumn { file: String, column: String },
    #[error("edge table references unknown node key `{key}` at line {line}")]
    UnknownKey { key: String, line: u64 },
    #[error("duplicate node key `{key}` at line {line}")]
    DuplicateKey { key: String, line: u64 },
    #[error("edge weight `{value}` at line {line} is not a non-negative number")]
    BadWeight { value: String, line: u64 },
    #[error("a key column is required when an edge table is given")]
    KeyColumnRequired,
    #[error("{file}: {source}")]
    Io {
        file: String,
        #[source]
        source: std::io::Error,
    },
}

impl IngestError {
    pub fn code(&self) -> &'static str {
        match self {
            IngestError::Parse { .. } => "csv_parse",
            IngestError::MissingColumn { .. } => "missing_column",
            IngestError::UnknownKey { .. } => "unknown_key",
            IngestError::DuplicateKey { .. } => "duplicate_key",
            IngestError::BadWeight { .. } => "bad_weight",
            IngestError::KeyColumnRequired => "key_column_required",
            IngestError::Io { .. } => "io",
        }
    }
}
