use alloc::string::String;
use core::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// A direction vector was too far from unit length to renormalize.
    InvalidDirection { norm: f64 },
    /// A constructor or operation parameter is out of range.
    InvalidParameter(String),
    /// The tangential Hessian of the support function is not positive
    /// definite at `direction`.
    NotPositivelyCurved { direction: [f64; 3], min_eigenvalue: f64 },
    /// Body validation failed; `node` is the worst grid node.
    BodyValidation {
        node: usize,
        direction: [f64; 3],
        reason: String,
    },
    /// The chart Jacobian is rank deficient at sample node `node`.
    DegenerateChart { node: usize, min_singular_value: f64 },
    /// The parameter derivative of the Birkhoff normal has a normal component
    /// larger than tolerated, pointing at a chart or body derivative bug.
    FrameConsistency { node: usize, relative_residual: f64 },
    /// The stability mass matrix is numerically singular.
    BasisDegeneracy { basis_size: usize, condition: f64 },
    /// The requested operation needs analytic derivatives this body does not
    /// provide.
    Unsupported(String),
    /// A finite-difference stencil left the space of immersions.
    StencilImmersion { step: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidDirection { norm } => {
                write!(f, "direction has norm {norm}, expected a unit vector")
            }
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::NotPositivelyCurved {
                direction,
                min_eigenvalue,
            } => write!(
                f,
                "support Hessian not positive definite at {direction:?} (min eigenvalue {min_eigenvalue:e})"
            ),
            Error::BodyValidation {
                node,
                direction,
                reason,
            } => write!(f, "body validation failed at node {node} {direction:?}: {reason}"),
            Error::DegenerateChart {
                node,
                min_singular_value,
            } => write!(
                f,
                "chart is not an immersion at node {node} (min singular value {min_singular_value:e})"
            ),
            Error::FrameConsistency {
                node,
                relative_residual,
            } => write!(
                f,
                "normal residual of d(eta) is {relative_residual:e} at node {node}"
            ),
            Error::BasisDegeneracy {
                basis_size,
                condition,
            } => write!(
                f,
                "mass matrix singular for basis size {basis_size} (condition {condition:e}); try a smaller basis"
            ),
            Error::Unsupported(msg) => write!(f, "unsupported: {msg}"),
            Error::StencilImmersion { step } => {
                write!(f, "variation is not an immersion at step {step:e}")
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
