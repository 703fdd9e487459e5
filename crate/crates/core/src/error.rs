//! Error taxonomy shared by every module, mapped onto the CLI exit codes.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameters, domain violations, malformed run configs. Exit 2.
    #[error("config error: {0}")]
    Config(String),
    /// Quadrature non-convergence, factorization breakdown, non-finite
    /// intermediates. Exit 3.
    #[error("numerical error: {0}")]
    Numerical(String),
    /// Memory-budget overruns and I/O failures. Exit 4.
    #[error("resource error: {0}")]
    Resource(String),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }

    /// Process exit code for the CLI: 2 config, 3 numerical, 4 resource.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Numerical(_) => 3,
            Error::Resource(_) => 4,
        }
    }

    /// Short machine-readable kind tag used in diagnostic JSON lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Numerical(_) => "numerical",
            Error::Resource(_) => "resource",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Resource(format!("io: {e}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_match_taxonomy() {
        assert_eq!(Error::config("x").exit_code(), 2);
        assert_eq!(Error::numerical("x").exit_code(), 3);
        assert_eq!(Error::resource("x").exit_code(), 4);
    }
}
