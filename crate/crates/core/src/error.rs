use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("integration failed at x = {x}: {reason}")]
    Integration { x: f64, reason: String },
    #[error("boundary forms are linearly dependent")]
    InvalidForms,
    #[error("A12 = {0} is not zero; conditions cannot be normalized")]
    NotNormalizable(f64),
    #[error("boundary conditions are outside the regular, not strongly regular class: {0}")]
    Unsupported(String),
    #[error("function too small on contour (|f| = {value:e} at {at})")]
    BoundaryTooClose { at: num_complex::Complex64, value: f64 },
    #[error("singular Wronskian |W| = {0:e}")]
    SingularWronskian(f64),
    #[error("|Delta'| = {0:e} is too small; the zero is numerically multiple")]
    NearMultiple(f64),
    #[error("certification failed: {0}")]
    Certification(String),
    #[error("unsupported potential: {0}")]
    UnsupportedPotential(String),
}

pub type Result<T> = core::result::Result<T, Error>;
