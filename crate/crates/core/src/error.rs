use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Why a single archive line could not be turned into a tweet.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("malformed record: {0}")]
    Syntax(String),
    #[error("missing field `{0}`")]
    MissingField(&'static str),
    #[error("invalid field `{0}`")]
    InvalidField(&'static str),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("malformed config {path}: {message}")]
    Syntax { path: PathBuf, message: String },
    #[error("missing config key `{0}`")]
    MissingKey(&'static str),
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: &'static str, message: String },
}

#[derive(Debug, Error)]
pub enum CollectError {
    #[error("invalid collection job: {0}")]
    InvalidJob(String),
    #[error("archive write failed: {0}")]
    Archive(#[source] io::Error),
    #[error("source refused the request: {0}")]
    Rejected(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Error)]
pub enum ExportError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("xml: {0}")]
    Xml(String),
    #[error("line {line}: {message}")]
    Format { line: u64, message: String },
}
