use std::fmt;
use std::process::ExitCode;

/// Failure classes of the `simulate` binary, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad command line or config (exit 1).
    Usage(String),
    /// Oracle mismatch or a violated runtime invariant (exit 2).
    Verification(String),
    /// Size, memory or filesystem limits (exit 3).
    Resource(String),
}

impl CliError {
    pub fn usage(field: &str, reason: impl fmt::Display) -> Self {
        CliError::Usage(format!("`{field}`: {reason}"))
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Usage(_) => 1,
            CliError::Verification(_) => 2,
            CliError::Resource(_) => 3,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
            CliError::Resource(m) => write!(f, "resource error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<xxbath::Error> for CliError {
    fn from(e: xxbath::Error) -> Self {
        use xxbath::Error as E;
        match e {
            E::IntegrationFailure { .. } => CliError::Verification(e.to_string()),
            E::Resource { .. } | E::OracleSize { .. } => CliError::Resource(e.to_string()),
            E::InvalidParameter { .. }
            | E::InvalidArgument(_)
            | E::DegenerateGroundState { .. }
            | E::MissingTable(_)
            | E::Precondition(_) => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Resource(format!("i/o: {e}"))
    }
}
