//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the cipher pipeline and the verification harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {field}: {message}")]
    Config {
        line: usize,
        field: String,
        message: String,
    },

    #[error("probability table is not a distribution: {0}")]
    InvalidPmf(String),

    #[error("invalid family: {0}")]
    InvalidFamily(String),

    #[error("dimension mismatch: expected {expected} bits, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("word is not a legal plaintext (zero probability under every family member)")]
    IllegalPlaintext,

    #[error("no codeword is a prefix of the input (corrupt data or wrong key)")]
    DecodeError,

    #[error("Kraft sum exceeds 1 ({0}); code table is corrupt")]
    KraftViolation(String),

    #[error("random bit tape exhausted after {0} bits")]
    TapeExhausted(usize),

    #[error("parameter out of range: {0}")]
    InvalidParameter(String),

    #[error("resource guard exceeded: {0}")]
    GuardExceeded(String),

    #[error("key length mismatch: expected {expected} bits, got {got}")]
    KeyLengthMismatch { expected: usize, got: usize },

    #[error("ciphertext container is malformed: {0}")]
    MalformedContainer(String),

    #[error("container header does not match the supplied parameters: {0}")]
    HeaderMismatch(String),

    #[error("family fingerprint mismatch: ciphertext was produced under a different family config")]
    FingerprintMismatch,

    #[error("unsupported container version {0}")]
    UnsupportedVersion(u8),

    #[error("malformed key file: {0}")]
    MalformedKeyFile(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
