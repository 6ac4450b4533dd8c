use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("degenerate velocity: zero-length vector cannot define a tangent plane")]
    DegenerateVelocity,

    #[error("isolated agent under q-normalization: agent {agent} has no neighbor in the kernel support")]
    IsolatedAgent { agent: usize },

    #[error("communication weight n[{index}] = {value} must be positive")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("blow-up at t = {time}: agent {agent} has a non-finite state")]
    BlowUp { time: f64, agent: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergence(String),

    #[error("time step {dt} violates the CFL bound; admissible dt <= {admissible}")]
    Cfl { dt: f64, admissible: f64 },

    #[error("degenerate curve at sample {index}: |x'| = {norm} is below the floor")]
    DegenerateCurve { index: usize, norm: f64 },

    #[error("the support of the radial profile reaches r = 0 on this grid")]
    GridTouchesOrigin,

    #[error("empty analysis window")]
    EmptyWindow,
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
