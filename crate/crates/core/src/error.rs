use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A precondition on the inputs was violated.
    InvalidInput(&'static str),
    /// A nodal sequence does not match the grid it is used with.
    GridMismatch { expected: usize, found: usize },
    /// A nodal value exceeded the overflow guard.
    Overflow { node: usize, value: f64 },
    /// An iteration hit its cap before meeting the tolerance.
    NotConverged { what: &'static str, iterations: usize, residual: f64 },
    /// The tail of a truncated integral is larger than the requested tolerance.
    InsufficientExtent { tail: f64, tolerance: f64 },
    /// Parameters fall outside the region where an operation is defined.
    OutsideRegion(&'static str),
    /// The shooting integrator could not continue.
    StepUnderflow { radius: f64 },
    /// Operation not supported for these parameters.
    Unsupported(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(m) => write!(f, "invalid input: {m}"),
            Error::GridMismatch { expected, found } => {
                write!(f, "grid mismatch: expected {expected} nodal values, found {found}")
            }
            Error::Overflow { node, value } => {
                write!(f, "overflow guard: |u| = {value:e} at node {node}")
            }
            Error::NotConverged { what, iterations, residual } => {
                write!(f, "{what} did not converge after {iterations} iterations (residual {residual:e})")
            }
            Error::InsufficientExtent { tail, tolerance } => {
                write!(f, "quadrature extent too small: tail {tail:e} exceeds tolerance {tolerance:e}")
            }
            Error::OutsideRegion(m) => write!(f, "parameters outside region: {m}"),
            Error::StepUnderflow { radius } => {
                write!(f, "step size underflow (blow-up) near r = {radius:e}")
            }
            Error::Unsupported(m) => write!(f, "unsupported: {m}"),
        }
    }
}

impl core::error::Error for Error {}
