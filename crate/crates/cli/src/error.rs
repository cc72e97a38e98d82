use multirabi::dyson::DysonError;
use multirabi::exact::ExactError;
use multirabi::model::ModelError;
use multirabi::propagate::PropagateError;
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{message}")]
    Precondition { message: String, details: Value },
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Precondition { .. } => 3,
            CliError::Numeric(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Precondition { .. } => "precondition",
            CliError::Numeric(_) => "numeric",
            CliError::Io(_) => "io",
        }
    }

    /// Machine-readable record written to stderr.
    pub fn record(&self) -> Value {
        let mut v = json!({ "error": self.kind(), "code": self.exit_code(), "message": self.to_string() });
        if let CliError::Precondition { details, .. } = self {
            v["details"] = details.clone();
        }
        v
    }

    pub fn precondition(message: impl Into<String>) -> Self {
        CliError::Precondition { message: message.into(), details: Value::Null }
    }
}

/// Errors while building the model from a config are configuration errors.
impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// A model error raised by a solver means its preconditions failed.
pub fn solver_model_error(e: ModelError) -> CliError {
    let details = match &e {
        ModelError::NotResonant { level, offset } => json!({ "level": level, "offset": offset }),
        _ => Value::Null,
    };
    CliError::Precondition { message: e.to_string(), details }
}

impl From<ExactError> for CliError {
    fn from(e: ExactError) -> Self {
        match e {
            ExactError::Inconsistent { ref violations } => {
                let list: Vec<Value> =
                    violations.iter().map(|((i, j), eps)| json!({ "i": i, "j": j, "epsilon": eps })).collect();
                CliError::Precondition { message: e.to_string(), details: json!({ "violations": list }) }
            }
            ExactError::Model(m) => solver_model_error(m),
        }
    }
}

impl From<DysonError> for CliError {
    fn from(e: DysonError) -> Self {
        match e {
            DysonError::Model(m) => solver_model_error(m),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<PropagateError<f64>> for CliError {
    fn from(e: PropagateError<f64>) -> Self {
        match e {
            PropagateError::InvalidConfig(_) | PropagateError::InvalidGrid => CliError::Config(e.to_string()),
            PropagateError::DimensionMismatch { .. } | PropagateError::GridMismatch => {
                CliError::precondition(e.to_string())
            }
            PropagateError::Divergence { .. } | PropagateError::NumericFailure { .. } | PropagateError::RangeError { .. } => {
                CliError::Numeric(e.to_string())
            }
        }
    }
}
