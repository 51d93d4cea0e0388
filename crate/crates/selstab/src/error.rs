use selstab_core::Error as CoreError;
use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Core(#[from] CoreError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Usage(String),
    #[error("corrupt cache: {0}")]
    Cache(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Check(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => match e {
                CoreError::InvalidModulus(_) | CoreError::NotPrime(_) | CoreError::InvalidInput(_) => "invalid-input",
                CoreError::Precondition(_) => "precondition",
                CoreError::Resource { .. } | CoreError::Incomplete { .. } => "resource",
                CoreError::Degenerate(_) => "degenerate",
                CoreError::Parse(_) => "parse",
            },
            CliError::Io(_) => "io",
            CliError::Json(_) | CliError::Csv(_) => "format",
            CliError::Usage(_) => "usage",
            CliError::Cache(_) => "cache",
            CliError::Input(_) => "invalid-input",
            CliError::Check(_) => "check-failed",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "usage" => 2,
            "resource" => 3,
            "check-failed" => 4,
            _ => 1,
        }
    }

    /// Output closed early by the reader (`selstab ... | head`).
    pub fn is_broken_pipe(&self) -> bool {
        let io = match self {
            CliError::Io(e) => Some(e.kind()),
            CliError::Json(e) => e.io_error_kind(),
            CliError::Csv(e) => match e.kind() {
                csv::ErrorKind::Io(e) => Some(e.kind()),
                _ => None,
            },
            _ => None,
        };
        io == Some(std::io::ErrorKind::BrokenPipe)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut body = json!({ "kind": self.kind(), "message": self.to_string() });
        if let CliError::Core(CoreError::Incomplete { lower_bound, .. }) = self {
            body["partial_lower_bound"] = json!(lower_bound.to_string());
        }
        if let CliError::Core(CoreError::Resource { requested, cap, .. }) = self {
            body["requested"] = json!(requested.to_string());
            body["cap"] = json!(cap.to_string());
        }
        json!({ "error": body })
    }
}

pub fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}
