use std::path::PathBuf;

use nca_core::NcaError;
use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error(transparent)]
    Core(#[from] NcaError),

    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 config error, 3 numerical divergence, 4 I/O error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Io { .. } => 4,
            CliError::Core(e) => match e {
                NcaError::Divergence { .. } | NcaError::Numerics { .. } => 3,
                NcaError::Io { .. } => 4,
                _ => 2,
            },
        }
    }

    /// One-line JSON record for stderr.
    pub fn to_record(&self) -> serde_json::Value {
        let mut rec = json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        let obj = rec.as_object_mut().unwrap();
        match self {
            CliError::Config { field, reason } => {
                obj.insert("field".into(), json!(field));
                obj.insert("reason".into(), json!(reason));
            }
            CliError::Io { path, .. } => {
                obj.insert("path".into(), json!(path.display().to_string()));
            }
            CliError::Core(NcaError::Parse {
                source_name,
                line,
                reason,
            }) => {
                obj.insert("path".into(), json!(source_name));
                obj.insert("line".into(), json!(line));
                obj.insert("reason".into(), json!(reason));
            }
            CliError::Core(NcaError::Divergence { step }) | CliError::Core(NcaError::Numerics { step, .. }) => {
                obj.insert("step".into(), json!(step));
            }
            CliError::Core(NcaError::Io { path, .. }) => {
                obj.insert("path".into(), json!(path.display().to_string()));
            }
            CliError::Core(_) => {}
        }
        rec
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config { .. } => "config",
            CliError::Io { .. } => "io",
            CliError::Core(e) => match e {
                NcaError::Parse { .. } => "parse",
                NcaError::Divergence { .. } => "divergence",
                NcaError::Numerics { .. } => "numerics",
                NcaError::Io { .. } => "io",
                NcaError::Grid { .. } | NcaError::GridLayout(_) => "grid",
                NcaError::Dimension(_) => "dimension",
                NcaError::Model(_) => "model",
                NcaError::Domain(_) => "domain",
                NcaError::State(_) => "state",
            },
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
