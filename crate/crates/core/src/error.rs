use crate::geo_model::{ObjectId, ObjectType};
use crate::osm_ingest::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the engine can report. Each variant maps onto a stable
/// machine-readable code (see [`Error::code`]) used by the service and CLI.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("invalid coordinate: {0}")]
    InvalidCoordinate(String),
    #[error("{}", match .line { Some(l) => format!("parse error at line {l}: {message}"), None => format!("parse error: {message}") })]
    ParseError { line: Option<usize>, message: String },
    #[error("way {way} references missing nodes {missing:?}")]
    DanglingReference { way: ObjectId, missing: Vec<ObjectId> },
    #[error("duplicate {kind} {id}")]
    DuplicateObject { kind: ObjectType, id: ObjectId },
    #[error("store rejected: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    BuildRejected(Vec<Violation>),
    #[error("unknown area {0:?}")]
    AreaNotFound(String),
    #[error("area {name:?} is ambiguous, candidate ways {candidates:?}")]
    AmbiguousArea { name: String, candidates: Vec<ObjectId> },
    #[error("store contains no objects")]
    NoObjects,
    #[error("invalid limit: {0}")]
    InvalidLimit(String),
    #[error("invalid bounding box: {0}")]
    InvalidBoundingBox(String),
    #[error("{kind} {id} not found")]
    ObjectNotFound { kind: ObjectType, id: u64 },
    #[error("no object matches address {0:?}")]
    NoMatch(String),
    #[error("object id {0} does not fit in int64")]
    IdOverflow(u64),
    #[error("malformed payload: {0}")]
    MalformedPayload(String),
    #[error("reverse geocode description must not be empty")]
    EmptyDescription,
    #[error("unknown function {0:?}")]
    UnknownFunction(String),
    #[error("bad request field {field:?}: {message}")]
    BadRequest { field: String, message: String },
    #[error("snapshot: {0}")]
    Snapshot(String),
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidCoordinate(_) => "InvalidCoordinate",
            Error::ParseError { .. } => "ParseError",
            Error::DanglingReference { .. } => "DanglingReference",
            Error::DuplicateObject { .. } => "DuplicateObject",
            Error::BuildRejected(_) => "BuildRejected",
            Error::AreaNotFound(_) => "AreaNotFound",
            Error::AmbiguousArea { .. } => "AmbiguousArea",
            Error::NoObjects => "NoObjects",
            Error::InvalidLimit(_) => "InvalidLimit",
            Error::InvalidBoundingBox(_) => "InvalidBoundingBox",
            Error::ObjectNotFound { .. } => "ObjectNotFound",
            Error::NoMatch(_) => "NoMatch",
            Error::IdOverflow(_) => "IdOverflow",
            Error::MalformedPayload(_) => "MalformedPayload",
            Error::EmptyDescription => "EmptyDescription",
            Error::UnknownFunction(_) => "UnknownFunction",
            Error::BadRequest { .. } => "BadRequest",
            Error::Snapshot(_) => "Snapshot",
            Error::Io(_) => "Io",
        }
    }

    pub(crate) fn parse(line: Option<usize>, message: impl Into<String>) -> Self {
        Error::ParseError { line, message: message.into() }
    }

    pub(crate) fn bad_request(field: &str, message: impl Into<String>) -> Self {
        Error::BadRequest { field: field.to_owned(), message: message.into() }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
