use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("truncation mismatch: {0} vs {1}")]
    TruncationMismatch(String, String),
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("duplicate basis label {0}")]
    DuplicateLabel(String),
    #[error("grading is not an involution anticommuting with D: {0}")]
    InvalidGrading(String),
    #[error("series has zero constant term; cannot invert")]
    ZeroConstantTerm,
    #[error("empty fit window [{t_min}, {t_max}]; increase the truncation size")]
    WindowEmpty { t_min: f64, t_max: f64 },
    #[error("ill-conditioned fit (condition {cond:.3e}); shrink the degree or widen the window")]
    IllConditioned { cond: f64 },
    #[error("too few samples: {got} < {need}")]
    TooFewSamples { got: usize, need: usize },
    #[error("residue index {m} outside 1..={p}")]
    ResidueOutOfRange { m: u32, p: u32 },
    #[error("unknown spectrum descriptor `{0}`")]
    UnknownDescriptor(String),
    #[error("parity/arity mismatch: {0}")]
    Arity(String),
    #[error("invalid half-integer argument: {0}")]
    HalfInteger(String),
    #[error("product truncation not registered for these factors")]
    UnregisteredProduct,
    #[error("missing constant: {0}")]
    MissingConstant(String),
    #[error("unsupported for this model: {0}")]
    Unsupported(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{0}")]
    Upstream(String),
}
