use std::path::PathBuf;

/// Errors produced by volume I/O, the filters and the estimators.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("file size mismatch: expected {expected} bytes, found {actual}")]
    SizeMismatch { expected: u64, actual: u64 },

    #[error("unknown sample type `{0}` (expected u8, i16 or f32)")]
    UnknownSampleType(String),

    #[error("unknown endianness `{0}` (expected little or big)")]
    UnknownEndianness(String),

    #[error("malformed sidecar {path}: {message}")]
    Sidecar { path: PathBuf, message: String },

    #[error("not a single-file NIfTI-1 volume (bad magic)")]
    BadMagic,

    #[error("unsupported NIfTI datatype code {0} (supported: 2, 4, 16)")]
    UnsupportedDatatype(i16),

    #[error("expected a 3D volume, header declares {0} dimensions")]
    Dimensionality(i16),

    #[error("invalid NIfTI header: {0}")]
    InvalidHeader(String),

    #[error("invalid volume: {0}")]
    InvalidVolume(String),

    #[error("region origin {origin:?} extent {extent:?} exceeds dims {dims:?}")]
    OutOfRange {
        origin: [usize; 3],
        extent: [usize; 3],
        dims: [usize; 3],
    },

    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimsMismatch { left: [usize; 3], right: [usize; 3] },

    #[error("empty input")]
    EmptyInput,

    #[error("argument {0} is outside the representable range")]
    Overflow(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
