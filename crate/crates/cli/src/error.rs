use std::fmt;
use std::path::Path;

use rebound_core::formats::FormatError;
use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    /// Bad flags or config values. Exit 2.
    Config,
    /// Files that cannot be read or written. Exit 3.
    Io,
    /// Inputs that parse but violate an invariant. Exit 4.
    Validation,
}

#[derive(Debug, Clone, Serialize)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
}

impl CliError {
    pub fn new(kind: ErrorKind, message: impl fmt::Display) -> Self {
        CliError { kind, message: message.to_string(), details: None }
    }

    pub fn config(message: impl fmt::Display) -> Self {
        Self::new(ErrorKind::Config, message)
    }

    pub fn validation(message: impl fmt::Display) -> Self {
        Self::new(ErrorKind::Validation, message)
    }

    pub fn io(path: &Path, err: impl fmt::Display) -> Self {
        Self::new(ErrorKind::Io, format!("{}: {err}", path.display()))
    }

    /// Validation failure naming the ids that caused it.
    pub fn offending_ids(message: impl fmt::Display, ids: &[String]) -> Self {
        let mut e = Self::validation(format!("{message}: {}", ids.join(", ")));
        e.details = Some(serde_json::json!({ "ids": ids }));
        e
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Config => 2,
            ErrorKind::Io => 3,
            ErrorKind::Validation => 4,
        }
    }

    /// The single-line record printed on stderr.
    pub fn to_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("error record serializes");
        v["exit_code"] = self.exit_code().into();
        serde_json::to_string(&serde_json::json!({ "error": v })).expect("json value serializes")
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        let kind = if e.is_validation() { ErrorKind::Validation } else { ErrorKind::Io };
        CliError::new(kind, e)
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    /// Prefixes the message with the file it concerns, unless already there.
    pub fn with_context(mut self, path: &Path) -> Self {
        let shown = path.display().to_string();
        if !self.message.contains(&shown) {
            self.message = format!("{shown}: {}", self.message);
        }
        self
    }
}
