use std::fmt;

/// Failures that map onto the documented exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Unreadable or schema-violating configuration (exit 2).
    Config(String),
    /// The numerical core refused or failed (exit 3).
    Numerical(horokit::Error),
    /// A supported space with an unsupported operation (exit 4).
    OutOfScope(String),
    /// A verification suite ran but some checks failed (exit 1).
    Verification { suite: String, failed: usize, total: usize },
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Verification { .. } => 1,
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::OutOfScope(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(msg) => write!(f, "config error: {msg}"),
            Failure::Numerical(e) => write!(f, "numerical error: {e}"),
            Failure::OutOfScope(msg) => write!(f, "{msg}"),
            Failure::Verification { suite, failed, total } => write!(f, "suite {suite}: {failed} of {total} checks failed"),
        }
    }
}

impl std::error::Error for Failure {}

/// Errors raised while building objects from the config are the config's fault.
pub fn config(e: horokit::Error) -> Failure {
    Failure::Config(e.to_string())
}

pub fn numerical(e: horokit::Error) -> Failure {
    Failure::Numerical(e)
}

/// Exit code for any error leaving `main`; I/O and other surprises give 1.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    err.downcast_ref::<Failure>().map_or(1, Failure::exit_code)
}
