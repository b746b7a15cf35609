use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A field polynomial was rejected during table construction.
    #[error("field construction failed: {0}")]
    Field(String),

    /// Code, shaping, or simulation parameters are inconsistent.
    #[error("invalid parameters: {0}")]
    Parameter(String),

    /// An input had the wrong length.
    #[error("{what}: expected length {expected}, got {got}")]
    Length {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    /// An input value was outside its alphabet.
    #[error("invalid input: {0}")]
    Input(String),

    /// A sequence handed to the dematcher does not have the codec's composition.
    #[error("amplitude sequence does not match the codec composition")]
    Composition,

    /// A numerical target could not be reached in the searched range.
    #[error("unreachable target: {0}")]
    Unreachable(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Length {
            what,
            expected,
            got,
        })
    }
}
