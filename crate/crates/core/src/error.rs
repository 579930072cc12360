use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid field `{field}`: {reason}")]
    InvalidField { field: String, reason: String },

    #[error("metric axiom violated at ({i}, {j}): {reason}")]
    MetricAxiom { i: usize, j: usize, reason: String },

    #[error("map is not surjective: point {missing} has no preimage")]
    NotSurjective { missing: usize },

    #[error("map entry {index} points to {target}, outside 0..{len}")]
    MapOutOfRange { index: usize, target: usize, len: usize },

    #[error("point index {index} out of range for a space of {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("operands live on different hosts ({left} vs {right} points)")]
    HostMismatch { left: usize, right: usize },

    #[error("{what} would produce {count} items, above the cap of {cap}")]
    CapExceeded { what: String, count: u128, cap: u128 },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("unknown catalog system `{0}`")]
    UnknownCatalog(String),

    #[error("parameter {param} out of the supported range for `{name}` ({range})")]
    ParamOutOfRange { name: String, param: u64, range: String },

    #[error("words have unequal lengths ({left} vs {right})")]
    UnequalLengths { left: usize, right: usize },

    #[error("invalid cylinder word: {0}")]
    InvalidWord(String),

    #[error("conditioning set has zero mass")]
    ZeroMass,

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("map is not equivariant at point {point}")]
    NotEquivariant { point: usize },

    #[error("operation requires a t.d.s. (surjective map)")]
    NotTds,

    #[error("window {window} is too small: {reason}")]
    Window { window: u64, reason: String },

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("function family is not defined on every point: {0}")]
    BadFamily(String),

    #[error("unknown check id `{0}`")]
    UnknownCheck(String),
}

impl Error {
    /// True for errors raised by a resource cap rather than by bad input.
    pub fn is_cap(&self) -> bool {
        matches!(self, Error::CapExceeded { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
