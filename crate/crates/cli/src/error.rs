use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] hcran::Error),

    #[error("invalid experiment: {0}")]
    Invalid(String),

    #[error("unknown metric `{0}`")]
    UnknownMetric(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("could not encode output: {0}")]
    Encode(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    /// Process exit status: 2 for invalid input, 3 for an infeasible power
    /// allocation instance, 4 for numerical failures and 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        use hcran::Error as E;
        match self {
            CliError::Invalid(_) | CliError::UnknownMetric(_) => 2,
            CliError::Core(e) => match e {
                E::InvalidConfig(_) | E::Parse(_) | E::Domain(_) | E::InfiniteSinr { .. } => 2,
                E::Infeasible(_) | E::InfeasibleInner { .. } => 3,
                E::EmptyNullSpace
                | E::DegenerateChannel(_)
                | E::QuadratureFailure { .. }
                | E::Numerical(_)
                | E::NoConvergence { .. } => 4,
            },
            CliError::Io { .. } | CliError::Encode(_) => 1,
        }
    }
}
