use thiserror::Error;

use crate::capacity::HiRegimeWitness;

/// Errors raised by the library.
///
/// Variants split into two families: input problems (malformed documents,
/// shape errors, bad labels) and domain refusals (out-of-class channels,
/// inadmissible distributions). The CLI maps the first family to exit
/// status 2 and the second to exit status 1, see [`Error::is_usage`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("NegativeEntry: entry {index} is {value}")]
    NegativeEntry { index: usize, value: f64 },

    #[error("SumNotOne: probabilities sum to {sum}")]
    SumNotOne { sum: f64 },

    #[error("ShapeMismatch: expected {expected} entries, found {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("DuplicateLabel: variable `{0}` appears more than once")]
    DuplicateLabel(String),

    #[error("UnknownLabel: no variable named `{0}`")]
    UnknownLabel(String),

    #[error("OverlappingGroups: variable `{0}` appears in more than one group")]
    OverlappingGroups(String),

    #[error("DanglingConditioner: `{0}` is conditioned on before it is introduced")]
    DanglingConditioner(String),

    #[error("RepeatedTarget: `{0}` is the target of more than one factor")]
    RepeatedTarget(String),

    #[error("ZeroCardinality: variable `{0}` has an empty alphabet")]
    ZeroCardinality(String),

    #[error("NegativeInformation: information measure evaluated to {0}")]
    NegativeInformation(f64),

    #[error("RowSumError: p(.|x1={x1}, x2={x2}, x3={x3}) sums to {sum}")]
    RowSum {
        x1: usize,
        x2: usize,
        x3: usize,
        sum: f64,
    },

    #[error("ParseError: {0}")]
    Parse(String),

    #[error("IndexOutOfRange: index {index} for alphabet of size {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("UnknownVariable: `{0}` is not a variable of the system")]
    UnknownVariable(String),

    #[error("LeftoverVariables: system still contains {0:?}")]
    LeftoverVariables(Vec<String>),

    #[error("EmptyList: at least one region is required")]
    EmptyList,

    #[error("EmptyRegion: operation needs a nonempty region")]
    EmptyRegion,

    #[error("ZeroDirection: direction vector is zero")]
    ZeroDirection,

    #[error("CardinalityMismatch: {0}")]
    CardinalityMismatch(String),

    #[error("InvalidFactor: {0}")]
    InvalidFactor(String),

    #[error("MissingVariable: joint lacks `{0}`")]
    MissingVariable(String),

    #[error("InadmissibleConstants: C = {c} exceeds P + B = {bound}")]
    InadmissibleConstants { c: f64, bound: f64 },

    #[error("NotZChannel: p(y1,y2|x1,x2,x3) does not factor as p(y1|x1,x3) p(y2|x1,x2,x3)")]
    NotZChannel,

    #[error("NotDegraded: (X1,X2) - (Y2,X3) - Y1 is not a Markov chain")]
    NotDegraded,

    #[error("NotSemiDeterministic: p(y2|x1,x2,x3) takes values other than 0 and 1")]
    NotSemiDeterministic,

    #[error("HiRegimeFalsified: {0}")]
    HiRegimeFalsified(Box<HiRegimeWitness>),

    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by malformed input rather than a domain refusal.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Parse(_)
                | Error::Io(_)
                | Error::ShapeMismatch { .. }
                | Error::RowSum { .. }
                | Error::NegativeEntry { .. }
                | Error::SumNotOne { .. }
                | Error::DuplicateLabel(_)
                | Error::UnknownLabel(_)
                | Error::UnknownVariable(_)
                | Error::ZeroCardinality(_)
                | Error::InvalidConfig(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
