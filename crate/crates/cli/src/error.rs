use thiserror::Error;

/// Failure of a subcommand, mapped onto the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{path}: {message}")]
    Data { path: String, message: String },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    /// 2 for anything the caller can fix, 3 when the computation itself broke down.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 3,
            _ => 2,
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { context: context.into(), source }
    }
}

impl From<rjdrift_core::Error> for CliError {
    fn from(e: rjdrift_core::Error) -> Self {
        use rjdrift_core::Error as E;
        match e {
            E::InvalidArgument(_) | E::OutOfRange { .. } => CliError::Validation(e.to_string()),
            E::SimulationDiverged { .. } | E::NonFiniteDrift { .. } | E::NotPositiveDefinite { .. } => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}
