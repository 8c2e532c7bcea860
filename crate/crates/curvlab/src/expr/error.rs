use thiserror::Error;

/// Parse-time failures. `pos` is a byte offset into the source string.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown symbol `{name}` at byte {pos}")]
    UnknownSymbol { pos: usize, name: String },
    #[error("non-integer exponent at byte {pos}")]
    NonIntegerExponent { pos: usize },
    #[error("exponent at byte {pos} does not fit in 32 bits")]
    ExponentOverflow { pos: usize },
    #[error("invalid coordinate list: {0}")]
    InvalidCoordinates(String),
}

/// Numeric evaluation failures.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("zero raised to a negative power")]
    ZeroToNegativePower,
    #[error("point has {got} coordinates, expression uses coordinate index {index}")]
    DimensionMismatch { index: usize, got: usize },
}

/// Failures of the rational-function normal form. These never escape
/// `simplify`, which falls back to the unnormalized tree; they do surface
/// from operations that require a normal form.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormError {
    #[error("denominator is identically zero")]
    ZeroDenominator,
    #[error("monomial exponent overflow")]
    ExponentOverflow,
}
