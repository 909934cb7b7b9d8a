use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("angle grid needs an even sample count >= 8, got {0}")]
    BadGrid(usize),
    #[error("grid samples: expected {expected} values, got {got}")]
    SampleCount { expected: usize, got: usize },
    #[error("perimeter {0:e} is too small to normalize (degenerate point body)")]
    DegeneratePerimeter(f64),
    #[error("curvature measure has nonzero first moments ({cos:e}, {sin:e}); no closed curve exists")]
    NotClosed { cos: f64, sin: f64 },
    #[error("negative curvature mass: {0}")]
    NegativeMass(String),
    #[error("polygon data invalid: {0}")]
    BadPolygon(String),
    #[error("triangle angles violate {0}")]
    BadTriangle(&'static str),
    #[error("not convex: h'' + h = {value:e} at theta = {angle} (tolerance {tol:e})")]
    NotConvex { angle: f64, value: f64, tol: f64 },
    #[error("invalid coefficients: {0}")]
    InvalidCoeffs(String),
    #[error("quadratic form is not positive semidefinite (diagonal entry {0:e})")]
    NonPsd(f64),
    #[error("no feasible vertex found after {0} attempts")]
    Infeasible(usize),
    #[error("random draw rejected {0} times")]
    RejectedDraws(usize),
}

pub type Result<T> = std::result::Result<T, GeomError>;
