use std::fmt;
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    /// Bad input: exit code 2.
    Validation(String),
    /// The requested method does not apply in this regime: exit code 3.
    Regime(String),
    /// A numerical check failed or an I/O error occurred: exit code 1.
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Validation(_) => ExitCode::from(2),
            CliError::Regime(_) => ExitCode::from(3),
            CliError::Failure(_) => ExitCode::from(1),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Regime(m) => write!(f, "{m}"),
            CliError::Failure(m) => write!(f, "{m}"),
        }
    }
}

impl From<qks_core::Error> for CliError {
    fn from(e: qks_core::Error) -> Self {
        use qks_core::Error as E;
        match e {
            E::Regime(_) => CliError::Regime(e.to_string()),
            E::InvalidSpin(_) | E::InvalidArgument(_) | E::DimensionMismatch { .. } | E::SizeCapExceeded { .. } => {
                CliError::Validation(e.to_string())
            }
            _ => CliError::Failure(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failure(format!("I/O error: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Failure(format!("CSV error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Failure(format!("JSON error: {e}"))
    }
}
