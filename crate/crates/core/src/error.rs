use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("temporal mode count M must be positive (got {0})")]
    NonPositiveM(i64),
    #[error("iteration count N must be positive (got {0})")]
    NonPositiveIterations(i64),
    #[error("{name} must be a non-negative photon number (got {value})")]
    NegativePhotonNumber { name: &'static str, value: f64 },
    #[error("{0} must be finite")]
    NonFinite(&'static str),
    #[error("f = {0} degrees of freedom is not supported (at most 16)")]
    UnsupportedF(u32),
    #[error("reflectance kappa must lie in [0, 1] (got {0})")]
    ReflectanceOutOfRange(f64),
    #[error("OPA gain must exceed 1 (got G - 1 = {0})")]
    InvalidGain(f64),
    #[error("feed-forward cycle count K must be at least 1")]
    InvalidCycleCount,
    #[error("trial count must be at least 1")]
    InvalidTrialCount,

    #[error("operator dimension {dim} exceeds the cap of {cap}")]
    DimensionOverflow { dim: usize, cap: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("internal dimension d = {0} is not a power of two")]
    InvalidInternalDimension(usize),
    #[error("matrix is not Hermitian (max |A - A^H| = {0:e})")]
    NotHermitian(f64),
    #[error("operator is not positive semidefinite (eigenvalue {0:e})")]
    NotPositiveSemidefinite(f64),
    #[error("fractional power exponent must lie in (0, 1] (got {0})")]
    InvalidExponent(f64),
    #[error("Hermitian eigendecomposition did not converge")]
    ConvergenceFailure,
    #[error("trace of product has imaginary part {0:e}")]
    NonRealTrace(f64),

    #[error("single-photon truncation needs M*N_B < 1 (got {0})")]
    InvalidRegime(f64),
    #[error("closed-form Q(s) is undefined at N_B = 0; use the matrix evaluation instead")]
    ZeroNoiseDegenerate,
    #[error("objective is not finite at s = {0}")]
    NonFiniteObjective(f64),
    #[error("noise-normalized exponent needs N_B > 0")]
    DivisionByZeroNoise,
    #[error("signal-to-noise ratio undefined: sigma0 + sigma1 = 0")]
    DegenerateVariance,
    #[error("photocount mean must be non-negative (got {0})")]
    NegativeMean(f64),
    #[error("photocount needs at least one mode")]
    InvalidModeCount,
    #[error("receiver report carries no photocount statistics")]
    NotPhotocounting,
}

pub type Result<T> = std::result::Result<T, Error>;
