use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),

    #[error("malformed image data: {0}")]
    Malformed(String),

    #[error("image is {width}x{height}, need at least {min_width}x{min_height}")]
    ImageTooSmall {
        width: usize,
        height: usize,
        min_width: usize,
        min_height: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("rectangle ({x0},{y0})-({x1},{y1}) is outside a {width}x{height} image")]
    OutOfBounds {
        x0: usize,
        y0: usize,
        x1: usize,
        y1: usize,
        width: usize,
        height: usize,
    },

    #[error("descriptor mismatch: {0}")]
    DescriptorMismatch(String),

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("{path}: {source}")]
    Pipeline {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
