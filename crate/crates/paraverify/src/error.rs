use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("dimension {dim} exceeds the cap of {cap} (set PARAVERIFY_DIM_CAP to raise it)")]
    DimCap { dim: usize, cap: usize },
    #[error("non-finite entries in {0}")]
    NonFinite(&'static str),
    #[error("unknown mode label `{0}`")]
    UnknownLabel(String),
    #[error("mode registry has no ancilla")]
    NoAncilla,
    #[error("{0}")]
    Config(String),
    #[error("structural failure: {0}")]
    Structural(String),
    #[error(transparent)]
    Parse(#[from] crate::reldsl::ParseError),
    #[error("evaluation failed: {0}")]
    Eval(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

pub type Result<T> = std::result::Result<T, Error>;
