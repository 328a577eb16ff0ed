//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("no start codon (ATG) found")]
    NoOrf,

    #[error("no in-frame stop codon before end of sequence")]
    NoStop,

    #[error("invalid base '{0}' in DNA sequence")]
    InvalidBase(char),

    #[error("invalid library: {0}")]
    InvalidLibrary(String),

    #[error("inconsistent counts: {0}")]
    InconsistentCounts(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("encoding error: {0}")]
    Encoding(String),

    #[error("degenerate training data: {0}")]
    DegenerateData(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
