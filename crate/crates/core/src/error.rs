use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degree cap mismatch: {left} vs {right}")]
    CapMismatch { left: u32, right: u32 },

    #[error("degree {degree} exceeds the degree cap {cap}")]
    DegreeCap { degree: u32, cap: u32 },

    #[error("dimension {dim} exceeds the dimension cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("index {index} out of range 1..={dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("grid index {index} out of range 0..={n}")]
    GridIndexOutOfRange { index: usize, n: usize },

    #[error("inverse requires a centered functional, found mean {mean:e}")]
    NotCentered { mean: f64 },

    #[error("sample length {found} does not match dimension {expected}")]
    SampleLength { expected: usize, found: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("field is not predictable: coordinate {coordinate} depends on eta_{depends_on}")]
    NotPredictable { coordinate: usize, depends_on: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed chaos text at line {line}: {message}")]
    ChaosText { line: usize, message: String },

    #[error("syntax error at {line}:{column}: {message}; expected one of: {}", expected.join(", "))]
    Syntax { line: usize, column: usize, message: String, expected: Vec<String> },

    #[error("error at {line}:{column}: {message}")]
    Semantic { line: usize, column: usize, message: String },

    #[error("degenerate construction: {0}")]
    Degenerate(String),

    #[error("input failed statistical battery: {0}")]
    BatteryFailure(String),
}
