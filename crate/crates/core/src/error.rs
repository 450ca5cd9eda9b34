//! Crate-wide error and result types.

use std::fmt;
use std::path::PathBuf;

use crate::model::EntityKind;

pub type Result<T> = std::result::Result<T, Error>;

/// A field-level problem found while reading a traffic profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub field: String,
    pub problem: String,
}

impl FieldError {
    pub fn new(field: impl Into<String>, problem: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            problem: problem.into(),
        }
    }
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.problem)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("self-path: {0} cannot signal to itself")]
    SelfPath(EntityKind),

    #[error("unplaced entity: {0} has no segment assignment")]
    UnplacedEntity(EntityKind),

    #[error("invalid traffic profile: {}", join_fields(.0))]
    InvalidProfile(Vec<FieldError>),

    /// A triggered rewrite rule adds a per-subscriber rate but no profile
    /// was supplied.
    #[error("profile required: a triggered rule adds a per-subscriber rate")]
    ProfileRequired,

    #[error("unknown interface: {0}")]
    UnknownInterface(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid scenario: {}", .0.join("; "))]
    InvalidScenario(Vec<String>),

    #[error("engine mismatch: {0}")]
    EngineMismatch(String),

    #[error("event-driven run requires {0}")]
    MissingSimParam(&'static str),

    #[error("reports are not comparable: {0}")]
    ReportMismatch(String),

    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Malformed { path: PathBuf, message: String },

    #[error("{}: {}", path.display(), problems.join("; "))]
    InvalidFile {
        path: PathBuf,
        problems: Vec<String>,
    },
}

impl Error {
    /// Flatten an error into one message per problem, for line-oriented
    /// reporting.
    pub fn lines(&self) -> Vec<String> {
        match self {
            Error::InvalidProfile(errs) => errs.iter().map(|e| e.to_string()).collect(),
            Error::InvalidScenario(msgs) => msgs.clone(),
            Error::InvalidFile { path, problems } => problems
                .iter()
                .map(|p| format!("{}: {p}", path.display()))
                .collect(),
            other => vec![other.to_string()],
        }
    }
}

fn join_fields(errs: &[FieldError]) -> String {
    errs.iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
