use qillum_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(CoreError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }
}

impl From<CoreError> for CliError {
    /// Parameter validation failures are configuration errors; everything
    /// raised while evaluating valid parameters is numeric.
    fn from(e: CoreError) -> Self {
        use CoreError::*;
        match e {
            NonPositiveM(_)
            | NonPositiveIterations(_)
            | NegativePhotonNumber { .. }
            | NonFinite(_)
            | UnsupportedF(_)
            | ReflectanceOutOfRange(_)
            | InvalidGain(_)
            | InvalidCycleCount
            | InvalidTrialCount
            | InvalidInternalDimension(_)
            | InvalidRegime(_)
            | ZeroNoiseDegenerate
            | DimensionOverflow { .. }
            | InvalidModeCount => CliError::Config(e.to_string()),
            _ => CliError::Numeric(e),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(source) => CliError::io("writing CSV", source),
            other => CliError::io("writing CSV", std::io::Error::other(format!("{other:?}"))),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
