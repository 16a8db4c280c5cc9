use std::fmt;
use std::path::{Path, PathBuf};

/// Process exit codes besides 0 for success. Clap exits with 2 on usage
/// errors by itself.
pub mod exit {
    pub const OTHER: i32 = 1;
    pub const PARSE: i32 = 3;
    pub const DIMENSION: i32 = 4;
    pub const DISTRIBUTION: i32 = 5;
    pub const CONFIG: i32 = 6;
    pub const FILE: i32 = 7;
}

#[derive(Debug)]
pub enum CliError {
    /// Malformed input; `row` and `column` are 1-based.
    Parse {
        path: PathBuf,
        row: usize,
        column: Option<usize>,
        message: String,
    },
    File {
        path: PathBuf,
        source: std::io::Error,
    },
    Config(String),
    Dimension(String),
    Library(depcov::Error),
    Other(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn parse(path: &Path, row: usize, column: Option<usize>, message: impl Into<String>) -> Self {
        CliError::Parse {
            path: path.to_path_buf(),
            row,
            column,
            message: message.into(),
        }
    }

    pub fn file(path: &Path, source: std::io::Error) -> Self {
        CliError::File {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use depcov::Error as E;
        match self {
            CliError::Parse { .. } => exit::PARSE,
            CliError::File { .. } => exit::FILE,
            CliError::Config(_) => exit::CONFIG,
            CliError::Dimension(_) => exit::DIMENSION,
            CliError::Other(_) => exit::OTHER,
            CliError::Library(e) => match e {
                E::DimensionMismatch { .. }
                | E::SizeMismatch { .. }
                | E::DimensionNotOne { .. }
                | E::GridMismatch { .. }
                | E::LengthMismatch { .. } => exit::DIMENSION,
                E::InvalidDistribution(_) | E::SupportTooLarge { .. } => exit::DISTRIBUTION,
                E::EmptyInput => exit::PARSE,
                E::NotSquare { .. }
                | E::NotSymmetric { .. }
                | E::NotPositiveDefinite { .. }
                | E::BadConfig(_)
                | E::EmptyBasis
                | E::BadReplicateCount => exit::CONFIG,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse {
                path,
                row,
                column: Some(c),
                message,
            } => write!(
                f,
                "parse error in {} at row {row}, column {c}: {message}",
                path.display()
            ),
            CliError::Parse { path, row, message, .. } => {
                write!(f, "parse error in {} at row {row}: {message}", path.display())
            }
            CliError::File { path, source } => write!(f, "cannot access {}: {source}", path.display()),
            CliError::Config(m) => write!(f, "invalid configuration: {m}"),
            CliError::Dimension(m) => write!(f, "dimension mismatch: {m}"),
            CliError::Library(e) => write!(f, "{e}"),
            CliError::Other(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<depcov::Error> for CliError {
    fn from(e: depcov::Error) -> Self {
        CliError::Library(e)
    }
}
