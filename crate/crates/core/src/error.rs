use thiserror::Error;

/// Errors raised by the library. Every variant has a stable short name
/// (see [`Error::name`]) which the CLI prints on domain failures.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("operands belong to different coefficient rings")]
    IncompatibleRing,
    #[error("invalid ring: {0}")]
    InvalidRing(String),
    #[error("{0} is not a unit")]
    NotAUnit(String),
    #[error("ring has no uniformizer")]
    NoUniformizer,
    #[error("composition undefined: inner series has a nonzero constant term")]
    CompositionUndefined,
    #[error("not invertible: {0}")]
    NotInvertible(String),
    #[error("height undefined: series vanishes to truncation {0}")]
    HeightUndefined(usize),
    #[error("rank undetermined: no unit coefficient up to truncation {0}")]
    RankUndetermined(usize),
    #[error("parity mismatch: {0}")]
    ParityMismatch(String),
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unsupported case: {0}")]
    UnsupportedCase(String),
    #[error("wildly ramified case: residue characteristic {p} divides canonical degree {k}")]
    WildCase { p: u64, k: usize },
    #[error("needs higher precision: {0}")]
    NeedsHigherPrecision(String),
    #[error("u1 = {0} is a zero divisor")]
    ZeroDivisor(String),
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),
    #[error("coefficient ring is not a field: {0}")]
    NotAField(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub fn parse(pos: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            pos,
            msg: msg.into(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Error::IncompatibleRing => "incompatible-ring",
            Error::InvalidRing(_) => "invalid-ring",
            Error::NotAUnit(_) => "not-a-unit",
            Error::NoUniformizer => "no-uniformizer",
            Error::CompositionUndefined => "composition-undefined",
            Error::NotInvertible(_) => "not-invertible",
            Error::HeightUndefined(_) => "height-undefined",
            Error::RankUndetermined(_) => "rank-undetermined",
            Error::ParityMismatch(_) => "parity-mismatch",
            Error::Parse { .. } => "parse-error",
            Error::UnsupportedCase(_) => "unsupported-case",
            Error::WildCase { .. } => "unsupported-wild-case",
            Error::NeedsHigherPrecision(_) => "needs-higher-precision",
            Error::ZeroDivisor(_) => "zero-divisor",
            Error::BasisMismatch(_) => "basis-mismatch",
            Error::NotAField(_) => "not-a-field",
            Error::Invariant(_) => "internal-invariant",
        }
    }

    pub fn is_parse(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::InvalidRing(_))
    }

    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Invariant(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
