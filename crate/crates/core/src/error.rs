use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while parsing or validating a question program.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown function `{name}` at byte {pos}")]
    UnknownFunction { name: String, pos: usize },
    #[error("`{name}` at byte {pos} takes {expected} argument(s), found {found}")]
    Arity {
        name: String,
        pos: usize,
        expected: String,
        found: usize,
    },
    #[error("unknown {kind} label `{label}`")]
    UnknownLabel { kind: &'static str, label: String },
    #[error("invalid argument `{slot}` of `{name}`: {msg}")]
    InvalidArgument {
        name: &'static str,
        slot: &'static str,
        msg: String,
    },
}

/// Raised by the executor when a program has no well-defined answer on a
/// given scene graph.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecError {
    #[error("open query `{0}` matched nothing in its window")]
    EmptyQuery(String),
    #[error("open query `{0}` matched more than one label")]
    AmbiguousQuery(String),
    #[error("anchor action `{0}` does not occur in the video")]
    InvalidAnchor(String),
    #[error("choice `{0}` has {1} true options, expected exactly one")]
    AmbiguousChoice(String, usize),
    #[error("no scene graph for video `{0}`")]
    MissingSceneGraph(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("vocabulary: {0}")]
    Vocabulary(String),
    #[error("template table: {0}")]
    Template(String),
    #[error("missing template for `{0}`")]
    MissingTemplate(String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("conflicting answers for node `{node}`: {existing} vs {proposed}")]
pub struct Contradiction {
    pub node: String,
    pub existing: String,
    pub proposed: String,
}

/// Pipeline-level error; each variant maps to a distinct CLI exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Schema {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("id mismatch: {0}")]
    IdMismatch(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Program(#[from] ProgramError),
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error(transparent)]
    Contradiction(#[from] Contradiction),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
