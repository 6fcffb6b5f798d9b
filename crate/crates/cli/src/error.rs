use serde::Serialize;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: expected 'key = value'")]
    Malformed { line: usize },
    #[error("missing required key '{key}'")]
    MissingKey { key: String },
    #[error("unknown key '{key}' for command {command}")]
    UnknownKey { key: String, command: String },
    #[error("key '{key}' given twice")]
    Duplicate { key: String },
    #[error("key '{key}' expects {expected}, got {found:?}")]
    TypeMismatch { key: String, expected: String, found: String },
    #[error("key '{key}': {reason}")]
    Invalid { key: String, reason: String },
}

impl ConfigError {
    fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Malformed { .. } => None,
            ConfigError::MissingKey { key }
            | ConfigError::UnknownKey { key, .. }
            | ConfigError::Duplicate { key }
            | ConfigError::TypeMismatch { key, .. }
            | ConfigError::Invalid { key, .. } => Some(key),
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            ConfigError::Malformed { .. } => "malformed-line",
            ConfigError::MissingKey { .. } => "missing-key",
            ConfigError::UnknownKey { .. } => "unknown-key",
            ConfigError::Duplicate { .. } => "duplicate-key",
            ConfigError::TypeMismatch { .. } => "type-mismatch",
            ConfigError::Invalid { .. } => "invalid-value",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Compute(#[from] nlpl::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("plot: {0}")]
    Plot(String),
}

impl CliError {
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// Process exit status: 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }

    pub fn record(&self) -> ErrorRecord {
        let (kind, key) = match self {
            CliError::Config(c) => (c.kind(), c.key().map(str::to_string)),
            CliError::Compute(_) => ("computation", None),
            CliError::Io { .. } => ("io", None),
            CliError::Plot(_) => ("plot", None),
        };
        ErrorRecord {
            status: "error",
            kind,
            key,
            message: self.to_string(),
            exit_code: self.exit_code(),
        }
    }
}

/// JSON error report written to stderr and, when possible, `error.json`.
#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub status: &'static str,
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub key: Option<String>,
    pub message: String,
    pub exit_code: i32,
}

impl ErrorRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("error record serializes")
    }
}
