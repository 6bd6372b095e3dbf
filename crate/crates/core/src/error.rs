use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("tau = {0} is not in the upper half-plane")]
    NotInUpperHalfPlane(Complex64),

    #[error("series grading mismatch: pi_power {left} vs {right}")]
    GradingMismatch { left: i32, right: i32 },

    #[error("logarithm of the zero series")]
    LogOfZero,

    #[error("series has no invertible constant term")]
    NotInvertible,

    #[error("invalid Eisenstein weight {0} (expected 2, 4 or 6)")]
    InvalidWeight(u32),

    #[error("invalid theta index {0} (expected 2, 3 or 4)")]
    InvalidThetaIndex(u32),

    #[error("theta function vanishes at the evaluation point")]
    ThetaVanishes,

    #[error("state lies on the singular locus t{0} = t{1}")]
    SingularLocus(usize, usize),

    #[error(
        "step size underflow at path parameter {s:.6e} (h = {h:.3e}); solution blow-up suspected"
    )]
    StepSizeUnderflow { s: f64, h: f64 },

    #[error("non-finite state at path parameter {s:.6e}")]
    NonFiniteState { s: f64 },

    #[error("maximum number of integration steps ({0}) exceeded")]
    TooManySteps(usize),

    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),

    #[error("metric coefficient c{0} must be positive")]
    NonPositiveCoefficient(usize),

    #[error("Omega ratio Omega_j Omega_k / Omega_i is not positive for i = {0}")]
    NonPositiveRatio(usize),

    #[error("coupled Omega-A state has no A component")]
    MissingA,

    #[error("real parameter t = {0} must be positive")]
    NonPositiveTime(f64),

    #[error("pole of the flat family at t = -q0 = {0}")]
    FlatFamilyPole(f64),

    #[error("cosmological constant must be nonzero")]
    ZeroLambda,

    #[error("singular metric eta")]
    SingularEta,

    #[error("malformed series data: {0}")]
    Parse(String),
}
