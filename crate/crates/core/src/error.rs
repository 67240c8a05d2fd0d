use std::fmt;
use std::path::PathBuf;

/// Position inside an input file at which parsing failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Offset {
    Byte(u64),
    Line(usize),
}

impl fmt::Display for Offset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Offset::Byte(b) => write!(f, "byte {b}"),
            Offset::Line(l) => write!(f, "line {l}"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A documented precondition of an operation was not met.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("degenerate template: all samples are zero, alpha is undefined")]
    DegenerateTemplate,

    #[error("degenerate sequence: zero norm cannot be normalized")]
    DegenerateSequence,

    #[error(
        "template too long: length {template_len} must be shorter than data length {data_len}"
    )]
    TemplateTooLong {
        template_len: usize,
        data_len: usize,
    },

    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },

    #[error("parse error in {} at {offset}: {message}", path.display())]
    Parse {
        path: PathBuf,
        offset: Offset,
        message: String,
    },

    #[error("unsupported format in {}: {message}", path.display())]
    UnsupportedFormat { path: PathBuf, message: String },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the filesystem rather than of the inputs' content.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
