use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The integrator exhausted its step budget.
    #[error("integration budget exceeded: {max_steps} steps taken before t = {t}")]
    StepBudget { max_steps: usize, t: f64 },

    /// The right-hand side produced a non-finite value.
    #[error("non-finite derivative at t = {t}")]
    NonFinite { t: f64 },

    /// Step size collapsed below what floating point can resolve.
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    /// A Poincaré return did not happen within the search horizon.
    #[error("no return to the section within t = {horizon} (iteration {iteration})")]
    NoReturn { iteration: usize, horizon: f64 },

    /// A file could not be read or written.
    #[error("i/o error: {0}")]
    Io(String),

    /// A data file does not have the expected layout.
    #[error("malformed input: {0}")]
    Format(String),

    /// The shooting solver found no start that converged.
    #[error("no boundary-value solution found; best residual {best_residual:e}")]
    NoSolution { best_residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
