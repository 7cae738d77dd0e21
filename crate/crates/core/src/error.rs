use thiserror::Error;

/// Errors produced by the library.
///
/// The split mirrors how callers react: `InvalidParameter`/`Domain`/... are
/// rejected inputs, `BlowUp`/`Convergence`/`Factorization` are numerical
/// failures of an otherwise valid problem, `Io` is plumbing.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate regression: {0}")]
    DegenerateRegression(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("convergence failure: {0}")]
    Convergence(String),

    /// The Riccati-Volterra iteration exceeded the blow-up cap. The equation
    /// genuinely explodes in finite time outside the global-existence regime,
    /// so the last stable node is reported for diagnosis.
    #[error("riccati solution blew up at node {node} (t = {t_last}); |f| exceeded {cap:e}")]
    BlowUp { node: usize, t_last: f64, cap: f64 },

    #[error("matrix factorization failed: {0}")]
    Factorization(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the CLI: 2 validation, 3 numerical, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_)
            | Error::Domain(_)
            | Error::LengthMismatch(_)
            | Error::InsufficientData(_)
            | Error::DegenerateRegression(_)
            | Error::Unsupported(_) => 2,
            Error::Convergence(_) | Error::BlowUp { .. } | Error::Factorization(_) => 3,
            Error::Io(_) => 4,
        }
    }
}
