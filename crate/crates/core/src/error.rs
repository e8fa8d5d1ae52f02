use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid job spec: {0}")]
    InvalidSpec(String),

    #[error("value {value} does not fit in {bits} bits")]
    Overflow { value: u64, bits: usize },

    #[error("malformed data: {0}")]
    Malformed(String),

    #[error("unsupported extension degree {0} (supported: 1..=16)")]
    UnsupportedDegree(u32),

    #[error("field GF(2^{degree}) has too few nonzero elements for {needed} distinct points")]
    FieldTooSmall { degree: u32, needed: usize },

    #[error("unknown node {node} (K = {nodes})")]
    UnknownNode { node: usize, nodes: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("incomplete shuffle at node {node}: {} value(s) unrecoverable, first {:?}", missing.len(), missing.first())]
    IncompleteShuffle {
        node: usize,
        missing: Vec<(usize, usize)>,
    },

    #[error("unsupported combination: {0}")]
    Unsupported(String),
}
