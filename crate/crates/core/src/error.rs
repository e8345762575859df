use alloc::string::String;

/// Failure modes shared by every numerical routine in the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument violated an operation's precondition.
    #[error("domain error: {0}")]
    Domain(String),
    /// A numerical routine could not reach the requested accuracy.
    #[error("numeric error: {message} (residual {residual:e})")]
    Numeric { message: String, residual: f64 },
    /// The spectral gap closed (level crossing) at parameter `u`.
    #[error("degenerate gap {gap:e} at u = {u}")]
    DegenerateGap { u: f64, gap: f64 },
    /// The profile has too much structure for the piecewise-linear construction.
    #[error("profile has {found} inflection points (limit {limit})")]
    Complexity { found: usize, limit: usize },
    /// An iterative search ran past its budget.
    #[error("no convergence: {0}")]
    NonConvergence(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn numeric(msg: impl Into<String>, residual: f64) -> Error {
    Error::Numeric {
        message: msg.into(),
        residual,
    }
}
