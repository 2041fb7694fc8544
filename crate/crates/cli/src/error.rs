//! CLI error classes and their exit-code contract.

use pnme_core::Error as CoreError;

#[derive(Debug)]
pub enum CliError {
    /// Malformed config file (missing file, bad JSON, unknown keys). Exit 2.
    Parse(String),
    /// Semantically invalid parameters. Exit 3.
    Validation(String),
    /// Numerical failure while running. Exit 4.
    Numerical(String),
    /// Output I/O failure. Exit 4.
    Io(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    /// Core errors raised while constructing inputs are validation problems.
    pub fn validation(e: CoreError) -> Self {
        CliError::Validation(e.to_string())
    }

    /// Core errors raised mid-computation are numerical problems.
    pub fn numerical(e: CoreError) -> Self {
        CliError::Numerical(e.to_string())
    }

    pub fn class(&self) -> &'static str {
        match self {
            CliError::Parse(_) => "ConfigParseError",
            CliError::Validation(_) => "ValidationError",
            CliError::Numerical(_) => "NumericalError",
            CliError::Io(_) => "IoError",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Numerical(_) | CliError::Io(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Parse(m)
            | CliError::Validation(m)
            | CliError::Numerical(m)
            | CliError::Io(m) => m,
        }
    }
}
