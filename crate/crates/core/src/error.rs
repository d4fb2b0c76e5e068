use thiserror::Error;

/// Errors produced by fleet handling, compilation, model fitting and
/// simulation. Variants are grouped so a caller (the CLI) can map them
/// onto coarse exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error on machine `{machine}`, field `{field}`: {message}")]
    Validation {
        machine: String,
        field: String,
        message: String,
    },

    #[error("invalid {what}: {message}")]
    Invalid { what: String, message: String },

    #[error("timestamp {t} is outside the calibrated horizon of machine `{machine}`")]
    OutOfRange { machine: String, t: u64 },

    #[error("machines do not share a single calibration period")]
    MixedPeriods,

    #[error("circuit `{circuit}` needs {needed} qubits but machine `{machine}` has {available}")]
    Capacity {
        circuit: String,
        machine: String,
        needed: usize,
        available: usize,
    },

    #[error("no machine in the fleet can hold the job's representative circuit")]
    NoFeasibleMachine,

    #[error("unknown benchmark `{0}`")]
    UnknownBenchmark(String),

    #[error("feature dimension mismatch: model has {expected}, input has {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("zero variance in {0}; correlation undefined")]
    ZeroVariance(String),

    #[error("need at least {needed} samples to fit {params} parameters, got {got}")]
    InsufficientSamples {
        needed: usize,
        params: usize,
        got: usize,
    },

    #[error("missing artifact: {0}")]
    MissingArtifact(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn invalid(what: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invalid {
            what: what.into(),
            message: message.into(),
        }
    }

    pub fn validation(
        machine: impl Into<String>,
        field: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Error::Validation {
            machine: machine.into(),
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
