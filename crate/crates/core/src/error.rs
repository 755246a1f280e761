use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coincident points")]
    CoincidentPoints,

    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),

    #[error("rotation matrix is not orthonormal (max |V^T V - I| = {0:e})")]
    NotOrthonormal(f64),

    #[error("phase profile entry {index} has modulus {modulus}, expected 1")]
    NotUnitModulus { index: usize, modulus: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("noise variance must be positive")]
    ZeroNoise,

    #[error("azimuth undefined: UE directly beneath the RIS")]
    AzimuthUndefined,

    #[error("unidentifiable geometry: location FIM is singular")]
    Unidentifiable,

    #[error("grazing elevation, range unresolvable")]
    GrazingElevation,

    #[error("closed-form rate out of regime for UE {ue}: denominator {denominator:e}")]
    OutOfRegime { ue: usize, denominator: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("unknown experiment id `{0}`")]
    UnknownExperiment(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
