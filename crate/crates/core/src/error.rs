use thiserror::Error;

/// Errors raised by the numerical modules. Messages are prefixed with the
/// module that produced them so the CLI can report them verbatim.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{module}: invalid input: {message}")]
    Validation {
        module: &'static str,
        message: String,
    },

    #[error("{module}: domain error: {message}")]
    Domain {
        module: &'static str,
        message: String,
    },

    #[error("contours: curve passes within {distance:e} of branch point {branch_point} (exclusion radius {radius:e})")]
    Singularity {
        branch_point: String,
        distance: f64,
        radius: f64,
    },

    #[error("contours: argument step {step:.3} rad at x = {x} not resolved after {refinements} refinements")]
    Resolution { x: f64, step: f64, refinements: u32 },

    #[error("riemann: unsupported request: {0}")]
    Capability(String),

    #[error("susy: wave function has a nodal zero at grid index {index} (|psi| = {modulus:e} <= {tolerance:e})")]
    NodalZero {
        index: usize,
        modulus: f64,
        tolerance: f64,
    },

    #[error("operators: cannot compose: {0}")]
    Composition(String),

    #[error("spectral: contour derivative vanishes at x = {x} (|r'| = {modulus:e})")]
    ContourSingularity { x: f64, modulus: f64 },

    #[error("spectral: potential pole hit at x = {x} (distance {distance:e} to pole {pole})")]
    PotentialPole { x: f64, pole: String, distance: f64 },

    #[error("spectral: integration failed at x = {x}: {message}")]
    Integration { x: f64, message: String },

    #[error("spectral: ambiguous decay branch at x = {x} (|q| = {modulus:e} < {tolerance:e})")]
    BranchSelection { x: f64, modulus: f64, tolerance: f64 },

    #[error("spectral: ill-conditioned weight: {0}")]
    Conditioning(String),

    #[error("spectral: eigen solver failed: {0}")]
    EigenSolver(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn validation(module: &'static str, message: impl Into<String>) -> Self {
        Error::Validation {
            module,
            message: message.into(),
        }
    }

    pub(crate) fn domain(module: &'static str, message: impl Into<String>) -> Self {
        Error::Domain {
            module,
            message: message.into(),
        }
    }
}
