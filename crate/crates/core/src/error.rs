use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A documented precondition of the operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// The request is well posed but outside what this crate ships.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A series or table was asked for more terms than it holds.
    #[error("precision exhausted: {0}")]
    Precision(String),
}

macro_rules! ensure {
    ($cond:expr, $kind:ident, $($arg:tt)*) => {
        if !$cond {
            return Err($crate::error::Error::$kind(format!($($arg)*)));
        }
    };
}
pub(crate) use ensure;
