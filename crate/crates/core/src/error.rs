use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("malformed structure: {0}")]
    Malformed(String),
    #[error("auxiliary relation is not transitive: {0} < {1} < {2} but not {0} < {2}")]
    NotTransitive(String, String, String),
    #[error("rejected input: {0}")]
    Rejected(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("undecidable by the ultrafilter oracle: {0}")]
    Undecidable(String),
    #[error("family mismatch: {0}")]
    FamilyMismatch(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
