use affine_core::classify::ClassifyError;
use affine_core::counters::CounterError;
use affine_core::io::IoError;
use affine_core::model::ValidationReport;
use affine_core::simulate::SimulateError;
use affine_core::transforms::TransformError;
use serde_json::{json, Value};

/// Failure of a command; rendered as JSON on stderr.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or argument values (exit 1).
    Usage(String),
    /// The model file could not be loaded or the model is invalid (exit 2).
    Model { kind: &'static str, message: String, details: Value },
    /// A computation on a valid model failed (exit 1).
    Failure { kind: &'static str, message: String },
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self::Usage(message.into())
    }

    pub fn invalid_model(report: &ValidationReport) -> Self {
        let message = report.issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; ");
        Self::Model {
            kind: "invalid_model",
            message,
            details: json!({ "report": report }),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Model { .. } => 2,
            Self::Usage(_) | Self::Failure { .. } => 1,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Self::Usage(message) => json!({ "error": "usage", "message": message }),
            Self::Failure { kind, message } => json!({ "error": kind, "message": message }),
            Self::Model { kind, message, details } => {
                let mut out = json!({ "error": kind, "message": message });
                if let (Value::Object(out), Value::Object(extra)) = (&mut out, details) {
                    out.extend(extra.clone());
                }
                out
            }
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        let message = e.to_string();
        let (kind, details) = match &e {
            IoError::Read { path, .. } => ("read_error", json!({ "path": path })),
            IoError::Parse { line, column, .. } => ("parse_error", json!({ "line": line, "column": column })),
            IoError::Schema { pointer, .. } => ("schema_error", json!({ "pointer": pointer })),
            IoError::Model(_) | IoError::Hybrid(_) => ("invalid_model", json!({})),
        };
        Self::Model { kind, message, details }
    }
}

impl From<CounterError> for CliError {
    fn from(e: CounterError) -> Self {
        Self::Failure { kind: "counter_error", message: e.to_string() }
    }
}

impl From<ClassifyError> for CliError {
    fn from(e: ClassifyError) -> Self {
        let kind = match e {
            ClassifyError::UnclassifiableModel { .. } => "unclassifiable_model",
            ClassifyError::Unsupported(_) | ClassifyError::WrongDimension { .. } => "unsupported_dimension",
            _ => "classification_error",
        };
        Self::Failure { kind, message: e.to_string() }
    }
}

impl From<TransformError> for CliError {
    fn from(e: TransformError) -> Self {
        let kind = match e {
            TransformError::ToleranceNotMet(_) => "tolerance_not_met",
            TransformError::InvalidArgument(_) => return Self::Usage(e.to_string()),
            _ => "transform_error",
        };
        Self::Failure { kind, message: e.to_string() }
    }
}

impl From<SimulateError> for CliError {
    fn from(e: SimulateError) -> Self {
        match e {
            SimulateError::InvalidStart(_) | SimulateError::InvalidArgument(_) => Self::Usage(e.to_string()),
            SimulateError::Transform(t) => t.into(),
            SimulateError::InvalidModel(_) => Self::Failure { kind: "simulation_error", message: e.to_string() },
        }
    }
}
