use ipl_core::IplError;

/// Failures mapped onto the process exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input file, flag or configuration (exit 2).
    #[error("{0}")]
    Input(String),
    /// Solver or evaluation failure (exit 3).
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    /// Any failure during evaluation counts as numerical.
    pub fn evaluation(e: IplError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<IplError> for CliError {
    fn from(e: IplError) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
