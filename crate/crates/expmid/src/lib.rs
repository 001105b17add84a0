//! Exponential-midpoint (one-term Magnus) time stepping for non-autonomous
//! linear evolution equations u'(t) = A(t) u(t) on finite-dimensional state
//! spaces, together with an analysis harness for measuring convergence
//! orders, consistency, stability, and perturbation identities.
//!
//! The crate is organized in four layers:
//!
//! * [`linalg`] — dense complex matrices/vectors, matrix exponentials, norms;
//! * [`operators`] — the operator-family abstraction `A(t) = A0 + V(t)`,
//!   built-in problem families, and Hölder-regularity estimation;
//! * [`integrators`] — the midpoint and fourth-order Magnus steppers,
//!   time-ordered propagation, and a self-certifying reference propagator;
//! * [`analysis`] — error curves, observed-order fits, a-priori bound checks,
//!   stability probes, and the variation-of-constants residual.
//!
//! All values are immutable after construction and all operations are pure,
//! so families and results can be shared freely across worker threads.

pub mod analysis;
pub mod integrators;
pub mod linalg;
pub mod operators;

/// Complex scalar used throughout: double-precision components.
pub type C64 = num_complex::Complex64;

/// Errors fall in two classes: `Usage` is a violated precondition (caller
/// bug, bad configuration), `Numerical` is a failure of an algorithm on
/// admissible input (overflow, non-convergence).
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("usage: {0}")]
    Usage(String),
    #[error("numerical failure in {stage}: {detail}")]
    Numerical { stage: &'static str, detail: String },
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn numerical(stage: &'static str, detail: impl Into<String>) -> Self {
        Error::Numerical {
            stage,
            detail: detail.into(),
        }
    }

    /// True for the `Numerical` class; used by callers that map error
    /// classes to process exit codes.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
