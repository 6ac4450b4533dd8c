use std::fmt;
use std::path::PathBuf;

use crate::config::ConfigError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration:\n{}", ErrorList(.0))]
    Config(Vec<ConfigError>),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

struct ErrorList<'a>(&'a [ConfigError]);

impl fmt::Display for ErrorList<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "  {e}")?;
        }
        Ok(())
    }
}

impl CliError {
    /// Process exit status: 2 for configuration errors, 3 for numerical
    /// failures and failed checks, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Verification(_) => 3,
            CliError::Io { .. } => 1,
        }
    }

    /// A parameter rejected by the library while building initial data.
    pub fn setup(err: ism_core::Error) -> Self {
        CliError::Config(vec![ConfigError::global(err.to_string())])
    }

    pub fn numerical(err: ism_core::Error) -> Self {
        CliError::Numerical(err.to_string())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}
