use crate::numeric::ode::OdeError;
use crate::numeric::quad::QuadError;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("point at infinity (Z0 = 0)")]
    PointAtInfinity,
    #[error("point outside the space form domain (form value {form_value:e})")]
    OutsideDomain { form_value: f64 },
    #[error("degenerate induced metric (condition number {condition:e})")]
    Degenerate { condition: f64 },
    #[error("family {0} has no implicit equation")]
    NoImplicitEquation(String),
    #[error("invalid family parameters: {0}")]
    InvalidFamily(String),
    #[error("unknown family id: {0}")]
    UnknownFamily(String),
    #[error("theta = {0} outside (-pi/2, pi/2)")]
    ThetaOutOfRange(f64),
    #[error("distance {distance:e} to a pole of the elliptic function is below the threshold")]
    PoleProximity { distance: f64 },
    #[error("branch locus reached at (x, y, theta) = ({x}, {y}, {theta}); f - g = {gap:e}")]
    BranchPoint { x: f64, y: f64, theta: f64, gap: f64 },
    #[error("branch tracking lost near w = {re} + {im}i")]
    BranchDiscontinuity { re: f64, im: f64 },
    #[error("matrix is not of the quaternionic block form: {0}")]
    NotBlockForm(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

pub type Result<T> = std::result::Result<T, Error>;
