use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("column `{column}` has {actual} values, expected {expected}")]
    LengthMismatch {
        column: String,
        expected: usize,
        actual: usize,
    },
    #[error("duplicate index entry {0}")]
    DuplicateIndex(i64),
    #[error("mandatory attribute `{attr}` is absent or missing at row {row:?}")]
    MissingMandatory { attr: String, row: Option<usize> },
    #[error("type violation in `{attr}`: {detail}")]
    TypeViolation { attr: String, detail: String },
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("row {row} out of range for a frame of {row_count} rows")]
    RowOutOfRange { row: usize, row_count: usize },
    #[error("attribute name collision on `{0}`")]
    NameCollision(String),
    #[error("concatenation suffix must not be empty")]
    EmptySuffix,
    #[error("event {event} belongs to more than one case")]
    SharedEvent { event: usize },
    #[error("invalid event log: {0}")]
    InvalidLog(String),
    #[error("malformed CSV: {0}")]
    MalformedCsv(String),
    #[error("activity `{0}` contains the merge separator")]
    SeparatorCollision(String),
    #[error("not an EDF1 file (bad magic)")]
    BadMagic,
    #[error("unsupported EDF version {0}")]
    UnsupportedVersion(u16),
    #[error("corrupt EDF directory: {0}")]
    CorruptDirectory(String),
    #[error("corrupt EDF column block `{column}`: {detail}")]
    CorruptBlock { column: String, detail: String },
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("{}: {source}", path.display())]
    File { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        if err.is_io_error() {
            match err.into_kind() {
                csv::ErrorKind::Io(io) => Error::Io(io),
                _ => unreachable!(),
            }
        } else {
            Error::MalformedCsv(err.to_string())
        }
    }
}
