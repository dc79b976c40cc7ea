use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or parameters rejected by the library.
    Usage(String),
    Library(modtent::Error),
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    /// The test battery ran and at least one test failed.
    SuiteFailed,
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Library(_) => 1,
            CliError::Io { .. } => 2,
            CliError::SuiteFailed => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Library(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::SuiteFailed => write!(f, "bit stream failed the test battery"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<modtent::Error> for CliError {
    fn from(e: modtent::Error) -> Self {
        CliError::Library(e)
    }
}
