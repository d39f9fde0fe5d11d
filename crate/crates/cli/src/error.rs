use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for parse/validation problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<tspower_core::Error> for CliError {
    fn from(e: tspower_core::Error) -> Self {
        use tspower_core::Error as E;
        match e {
            E::SingularNetwork { .. } | E::Inconsistent(_) => CliError::Numerical(e.to_string()),
            E::Incommensurate { .. }
            | E::InvalidSpectrum(_)
            | E::InvalidNetlist(_)
            | E::InvalidArgument(_) => CliError::Validation(e.to_string()),
        }
    }
}
