use thiserror::Error;

/// Broad failure classes, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    Infeasible,
    Resource,
    BoundViolation,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("symbol {symbol} is outside the alphabet 0..{alphabet_size}")]
    SymbolOutOfRange { symbol: u32, alphabet_size: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("enumeration of {requested} candidate words exceeds the cap of {cap}")]
    EnumerationCap { requested: u128, cap: u128 },

    #[error("no padding of length <= {j_max} joins {left} and {right}")]
    NotConnectable {
        left: String,
        right: String,
        j_max: usize,
    },

    #[error("specification constant is not set on this shift")]
    MissingSpecificationConstant,

    #[error("precision exhausted: {0}")]
    Precision(String),

    #[error("infeasible target: {0}")]
    Infeasible(String),

    #[error("transition graph is not irreducible")]
    NotIrreducible,

    #[error("dimension {dimension} exceeds the cap of {cap}")]
    DimensionCap { dimension: usize, cap: usize },

    #[error("{what} budget of {limit} exceeded")]
    Budget { what: &'static str, limit: u64 },

    #[error("bound violated in {context}: measured {measured} > bound {bound}")]
    BoundViolation {
        context: String,
        measured: f64,
        bound: f64,
    },

    #[error("stream ended after {available} symbols, before position {requested}")]
    Truncated { available: u64, requested: u64 },
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::SymbolOutOfRange { .. }
            | Error::InvalidInput(_)
            | Error::MissingSpecificationConstant
            | Error::Truncated { .. } => ErrorClass::Input,
            Error::Infeasible(_) | Error::NotConnectable { .. } | Error::NotIrreducible => {
                ErrorClass::Infeasible
            }
            Error::EnumerationCap { .. }
            | Error::DimensionCap { .. }
            | Error::Budget { .. }
            | Error::Precision(_) => ErrorClass::Resource,
            Error::BoundViolation { .. } => ErrorClass::BoundViolation,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
