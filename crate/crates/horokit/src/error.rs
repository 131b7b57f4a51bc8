use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid input: {0}")]
    Input(String),
    #[error("chart coordinates {0:?} lie outside the chart box")]
    Domain(Vec<f64>),
    #[error("chart is singular at {0:?}")]
    SingularChart(Vec<f64>),
    #[error("singular kernel: t = 0 with eps = 0 (use the pv-delta mode)")]
    SingularKernel,
    #[error("degenerate section: {0}")]
    DegenerateSection(String),
    #[error("non-finite integrand value at {0:?}")]
    NonFinite(Vec<f64>),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
