// SPDX-License-Identifier: MIT
use num_bigint::BigUint;
use thiserror::Error;

/// Errors surfaced by every fallible operation in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("parse error at offset {offset}: {msg}")]
    Parse { offset: BigUint, msg: String },
    #[error("readability violation: {0}")]
    Readability(String),
    #[error("format error on line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn parse_err<T>(offset: impl Into<BigUint>, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { offset: offset.into(), msg: msg.into() })
}
